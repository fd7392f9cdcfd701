"""Built-in example immersions with analytic jets and ground-truth metadata."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .ambient import AmbientSpace, to_real
from .errors import InvalidInputError, NotFoundError
from .submanifold import BASE, Immersion


def complex_inner(space, a, b):
    """Re(sum sigma_i a_i conj(b_i)) over the first axis of complex arrays."""
    sig = np.ones(a.shape[0])
    if space.c == -4:
        sig[0] = -1.0
    shape = (-1,) + (1,) * (a.ndim - 1)
    return np.real(np.sum(sig.reshape(shape) * a * np.conj(b), axis=0))


def normalized_jet(space, w, w1, w2):
    """Jets of z = w / sqrt(|<w, w>|) from the jets of w (complex arrays).

    w: (N,), w1: (N, k), w2: (k, k, N).  Returns complex (z, z1, z2).
    """
    sign = 1.0 if space.c >= 0 else -1.0
    sig = np.ones(w.shape[0])
    if space.c == -4:
        sig[0] = -1.0
    sw = sig * np.conj(w)
    q = sign * float(np.real(np.sum(sw * w)))
    qi = 2 * sign * np.real(sw @ w1)
    qij = 2 * sign * (np.real((sig[:, None] * w1).T @ np.conj(w1)) + np.real(w2 @ sw))
    r1, r3, r5 = q ** -0.5, q ** -1.5, q ** -2.5
    z = w * r1
    z1 = w1 * r1 - 0.5 * np.outer(w, qi) * r3
    w1t = w1.T  # (k, N)
    z2 = (w2 * r1 - 0.5 * r3 * (w1t[:, None, :] * qi[None, :, None] + w1t[None, :, :] * qi[:, None, None])
          + (0.75 * r5 * np.outer(qi, qi) - 0.5 * r3 * qij)[:, :, None] * w[None, None, :])
    return z, z1, z2


def _make(space, k, wjet, name, normalize=True):
    """Immersion from a complex jet function u -> (w, w1, w2)."""

    def jet_fn(u):
        w, w1, w2 = wjet(u)
        w = np.asarray(w, complex)
        w1 = np.asarray(w1, complex).reshape(w.shape[0], k)
        w2 = np.asarray(w2, complex).reshape(k, k, w.shape[0])
        if normalize and space.curved:
            w, w1, w2 = normalized_jet(space, w, w1, w2)
        return to_real(w), to_real(w1.T).T, to_real(w2)

    def func(u):
        return jet_fn(u)[0]

    return Immersion(space, k, func, jet_fn, name=name, level=BASE)


@dataclass(frozen=True)
class GroundTruth:
    cr_label: str
    flat_normal: Optional[bool] = None
    flat_normal_pullback: Optional[bool] = None
    chain: Optional[dict] = None
    expected_algebra_dim: Optional[int] = None  # closed curves: including the loop once around the period
    totally_geodesic: Optional[bool] = None
    period: Optional[float] = None  # closed curves: parameter period of the representative


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    immersion: Immersion
    ground_truth: GroundTruth
    default_point: tuple
    sample_box: tuple  # ((lo_1, hi_1), ...)
    extras: dict = field(default_factory=dict)

    def sample_points(self, count, rng):
        lo = np.array([b[0] for b in self.sample_box])
        hi = np.array([b[1] for b in self.sample_box])
        return [lo + (hi - lo) * rng.random(len(lo)) for _ in range(count)]


def real_chain_tangent(dim_N, c=4):
    """Tangent space of RP^{dim_N} (or RH^{dim_N} for c = -4) at a real representative."""
    sig = -1.0 if c < 0 else 1.0

    def tangent_N(z):
        D = z.shape[0]
        B = np.zeros((D, dim_N + 1))
        for j in range(dim_N + 1):
            B[2 * j, j] = 1.0
        gz = z.copy()
        gz[:2] *= sig
        B -= sig * np.outer(z, gz @ B)  # real z: remove the position component
        return B

    return tangent_N


# ---------------------------------------------------------------------------
# jets of the unnormalized representatives


def _plane(u):
    return np.array([u[0], u[1]], complex), np.eye(2, dtype=complex), np.zeros((2, 2, 2))


def _complex_line_c2(u):
    w = np.array([u[0] + 1j * u[1], 0])
    w1 = np.array([[1, 1j], [0, 0]])
    return w, w1, np.zeros((2, 2, 2))


def _complex_line_cp3(u):
    w = np.array([1, u[0] + 1j * u[1], 0, 0])
    w1 = np.zeros((4, 2), complex)
    w1[1] = [1, 1j]
    return w, w1, np.zeros((2, 2, 4))


def _complex_line_cp2(u):
    w = np.array([1, u[0] + 1j * u[1], 0])
    w1 = np.zeros((3, 2), complex)
    w1[1] = [1, 1j]
    return w, w1, np.zeros((2, 2, 3))


def _conic(u):
    zeta = u[0] + 1j * u[1]
    w = np.array([1, zeta, zeta ** 2])
    w1 = np.array([[0, 0], [1, 1j], [2 * zeta, 2j * zeta]])
    w2 = np.zeros((2, 2, 3), complex)
    w2[0, 0, 2], w2[0, 1, 2], w2[1, 0, 2], w2[1, 1, 2] = 2, 2j, 2j, -2
    return w, w1, w2


_V = np.array([0, (1 + 1j) / 2, (1 - 1j) / 2])
_E0 = np.array([1, 0, 0], complex)


def _geodesic(u):
    t = u[0]
    w = np.cos(t) * _E0 + np.sin(t) * _V
    w1 = (-np.sin(t) * _E0 + np.cos(t) * _V)[:, None]
    w2 = -w[None, None, :]
    return w, w1, w2


def _latitude(r):
    def jet(u):
        t = u[0]
        w = np.array([np.cos(r), np.sin(r) * np.cos(t), np.sin(r) * np.sin(t)], complex)
        w1 = np.array([0, -np.sin(r) * np.sin(t), np.sin(r) * np.cos(t)], complex)[:, None]
        w2 = np.array([0, -np.sin(r) * np.cos(t), -np.sin(r) * np.sin(t)], complex)[None, None, :]
        return w, w1, w2

    return jet


def _real_great_circle(u):
    t = u[0]
    w = np.array([np.cos(t), np.sin(t), 0], complex)
    w1 = np.array([-np.sin(t), np.cos(t), 0], complex)[:, None]
    return w, w1, -w[None, None, :]


def _klein_circle(r):
    def jet(u):
        t = u[0]
        w = np.array([1.0, r * np.cos(t), r * np.sin(t)], complex)
        w1 = np.array([0, -r * np.sin(t), r * np.cos(t)], complex)[:, None]
        w2 = np.array([0, -r * np.cos(t), -r * np.sin(t)], complex)[None, None, :]
        return w, w1, w2

    return jet


def _clifford(u):
    a, b = np.exp(1j * u[0]), np.exp(1j * u[1])
    w = np.array([a, b, 1])
    w1 = np.array([[1j * a, 0], [0, 1j * b], [0, 0]])
    w2 = np.zeros((2, 2, 3), complex)
    w2[0, 0, 0] = -a
    w2[1, 1, 1] = -b
    return w, w1, w2


def _affine_real(extra=0):
    def jet(u):
        w = np.concatenate([[1.0], u, np.zeros(extra)]).astype(complex)
        w1 = np.zeros((w.shape[0], 2), complex)
        w1[1, 0] = w1[2, 1] = 1
        return w, w1, np.zeros((2, 2, w.shape[0]))

    return jet


def _geodesic_sphere(rho):
    cr, sr = np.cos(rho), np.sin(rho)

    def jet(u):
        a, b, c = u
        A, S = np.cos(a), np.sin(a)
        eb, ec = np.exp(1j * b), np.exp(1j * c)
        w = np.array([cr, sr * A * eb, sr * S * ec])
        w1 = np.zeros((3, 3), complex)
        w1[:, 0] = [0, -sr * S * eb, sr * A * ec]
        w1[:, 1] = [0, 1j * sr * A * eb, 0]
        w1[:, 2] = [0, 0, 1j * sr * S * ec]
        w2 = np.zeros((3, 3, 3), complex)
        w2[0, 0] = [0, -sr * A * eb, -sr * S * ec]
        w2[0, 1] = w2[1, 0] = [0, -1j * sr * S * eb, 0]
        w2[0, 2] = w2[2, 0] = [0, 0, 1j * sr * A * ec]
        w2[1, 1] = [0, -sr * A * eb, 0]
        w2[2, 2] = [0, 0, -sr * S * ec]
        return w, w1, w2

    return jet


def _totally_real_cp3(u):
    x, y = u
    w = np.array([1, x, y, x * y], complex)
    w1 = np.array([[0, 0], [1, 0], [0, 1], [y, x]], complex)
    w2 = np.zeros((2, 2, 4), complex)
    w2[0, 1, 3] = w2[1, 0, 3] = 1
    return w, w1, w2


def _round_sphere_rp3(rho):
    cr, sr = np.cos(rho), np.sin(rho)

    def jet(u):
        a, b = u
        ca, sa, cb, sb = np.cos(a), np.sin(a), np.cos(b), np.sin(b)
        x = np.array([ca, sa * cb, sa * sb])
        xa = np.array([-sa, ca * cb, ca * sb])
        xb = np.array([0, -sa * sb, sa * cb])
        xab = np.array([0, -ca * sb, ca * cb])
        xbb = np.array([0, -sa * cb, -sa * sb])
        w = np.concatenate([[cr], sr * x]).astype(complex)
        w1 = np.zeros((4, 2), complex)
        w1[1:, 0], w1[1:, 1] = sr * xa, sr * xb
        w2 = np.zeros((2, 2, 4), complex)
        w2[0, 0, 1:] = -sr * x
        w2[0, 1, 1:] = w2[1, 0, 1:] = sr * xab
        w2[1, 1, 1:] = sr * xbb
        return w, w1, w2

    return jet


# ---------------------------------------------------------------------------

LATITUDE_RADIUS = 0.6
CHAIN_CIRCLE_RADIUS = 0.3
GEODESIC_SPHERE_RADIUS = 0.8
RP3_SPHERE_RADIUS = 0.7
KLEIN_CIRCLE_RADIUS = 0.4

C0_2 = AmbientSpace(0, 2)
CP2 = AmbientSpace(4, 2)
CP3 = AmbientSpace(4, 3)
CH2 = AmbientSpace(-4, 2)

TWO_PI = 2 * np.pi


def _build():
    e = []

    def add(name, description, space, k, jet, gt, point, box, **extras):
        e.append(CatalogEntry(name, description, _make(space, k, jet, name), gt, tuple(point), tuple(box), extras))

    add("plane-c2", "real plane R^2 in C^2", C0_2, 2, _plane,
        GroundTruth("Lagrangian", flat_normal=True, expected_algebra_dim=0, totally_geodesic=True),
        (0.2, -0.1), ((-1, 1), (-1, 1)))
    add("complex-line-c2", "complex line C x {0} in C^2", C0_2, 2, _complex_line_c2,
        GroundTruth("Complex", flat_normal=True, expected_algebra_dim=0, totally_geodesic=True),
        (0.3, 0.1), ((-1, 1), (-1, 1)))
    add("complex-line-cp3", "totally geodesic CP^1 = [1 : w : 0 : 0] in CP^3", CP3, 2, _complex_line_cp3,
        GroundTruth("Complex", flat_normal=False, expected_algebra_dim=1, totally_geodesic=True),
        (0.3, 0.1), ((-1, 1), (-1, 1)))
    add("complex-line-cp2", "totally geodesic CP^1 = [1 : w : 0] in CP^2", CP2, 2, _complex_line_cp2,
        GroundTruth("Complex", flat_normal=False, expected_algebra_dim=1, totally_geodesic=True),
        (0.3, 0.1), ((-1, 1), (-1, 1)))
    add("complex-disk-ch2", "totally geodesic CH^1 = [1 : w : 0] (|w| < 1) in CH^2", CH2, 2, _complex_line_cp2,
        GroundTruth("Complex", flat_normal=False, expected_algebra_dim=1, totally_geodesic=True),
        (0.3, 0.1), ((-0.5, 0.5), (-0.5, 0.5)))
    add("conic-cp2", "conic [1 : w : w^2] in CP^2", CP2, 2, _conic,
        GroundTruth("Complex", flat_normal=False, expected_algebra_dim=1, totally_geodesic=False),
        (0.3, 0.2), ((-0.8, 0.8), (-0.8, 0.8)))
    add("geodesic-cp2", "geodesic cos(t) e0 + sin(t) v of CP^2 (holomorphic circle, kappa = 0)", CP2, 1,
        _geodesic,
        GroundTruth("TotallyReal", flat_normal=True, flat_normal_pullback=True, expected_algebra_dim=0,
                    totally_geodesic=True, period=TWO_PI),
        (0.4,), ((0, TWO_PI),))
    add("latitude-circle-cp2", f"latitude circle of polar radius {LATITUDE_RADIUS} in RP^2 inside CP^2", CP2, 1,
        _latitude(LATITUDE_RADIUS),
        GroundTruth("TotallyReal", flat_normal=True, flat_normal_pullback=False, expected_algebra_dim=1,
                    totally_geodesic=False, period=TWO_PI,
                    chain={"N": "RP^2", "dim_N": 2, "tangent_N": real_chain_tangent(2), "W_rank": 2}),
        (0.4,), ((0, TWO_PI),), radius=LATITUDE_RADIUS)
    add("clifford-torus-cp2", "Clifford torus [e^{i u1} : e^{i u2} : 1]/sqrt(3) in CP^2", CP2, 2, _clifford,
        GroundTruth("Lagrangian", flat_normal=True, expected_algebra_dim=0, totally_geodesic=False),
        (0.3, 1.1), ((0, TWO_PI), (0, TWO_PI)))
    add("rp2-cp2", "real projective plane [1 : x : y] in CP^2", CP2, 2, _affine_real(),
        GroundTruth("Lagrangian", flat_normal=False, expected_algebra_dim=1, totally_geodesic=True),
        (0.2, -0.3), ((-0.8, 0.8), (-0.8, 0.8)))
    add("rp1-in-rp2-cp2", "geodesic RP^1 inside RP^2 inside CP^2", CP2, 1, _real_great_circle,
        GroundTruth("TotallyReal", flat_normal=True, flat_normal_pullback=True, expected_algebra_dim=0,
                    totally_geodesic=True, period=TWO_PI,
                    chain={"N": "RP^2", "dim_N": 2, "tangent_N": real_chain_tangent(2), "W_rank": 1}),
        (0.4,), ((0, TWO_PI),))
    add("rp1-in-rp2-cp2-circle", f"non-geodesic circle of polar radius {CHAIN_CIRCLE_RADIUS} inside RP^2 in CP^2",
        CP2, 1, _latitude(CHAIN_CIRCLE_RADIUS),
        GroundTruth("TotallyReal", flat_normal=True, flat_normal_pullback=False, expected_algebra_dim=1,
                    totally_geodesic=False, period=TWO_PI,
                    chain={"N": "RP^2", "dim_N": 2, "tangent_N": real_chain_tangent(2), "W_rank": 2}),
        (0.4,), ((0, TWO_PI),), radius=CHAIN_CIRCLE_RADIUS)
    add("geodesic-sphere-cp2", f"geodesic sphere of radius {GEODESIC_SPHERE_RADIUS} about [1:0:0] in CP^2", CP2, 3,
        _geodesic_sphere(GEODESIC_SPHERE_RADIUS),
        GroundTruth("Coisotropic", flat_normal=True, expected_algebra_dim=0, totally_geodesic=False),
        (0.7, 0.3, -0.4), ((0.4, 1.2), (-np.pi, np.pi), (-np.pi, np.pi)), radius=GEODESIC_SPHERE_RADIUS)
    add("rh2-ch2", "real hyperbolic plane [1 : x : y] (Klein model) in CH^2", CH2, 2, _affine_real(),
        GroundTruth("Lagrangian", flat_normal=False, expected_algebra_dim=1, totally_geodesic=True),
        (0.2, -0.3), ((-0.5, 0.5), (-0.5, 0.5)))
    add("circle-in-rh2-ch2", f"circle of Klein radius {KLEIN_CIRCLE_RADIUS} inside RH^2 in CH^2 (not coisotropic)",
        CH2, 1, _klein_circle(KLEIN_CIRCLE_RADIUS),
        GroundTruth("TotallyReal", flat_normal=True, expected_algebra_dim=1, totally_geodesic=False,
                    period=TWO_PI,
                    chain={"N": "RH^2", "dim_N": 2, "tangent_N": real_chain_tangent(2, -4), "W_rank": 2}),
        (0.4,), ((0, TWO_PI),), radius=KLEIN_CIRCLE_RADIUS)
    add("totally-real-surface-cp3", "totally real, non-coisotropic surface [1 : x : y : xy] in CP^3", CP3, 2,
        _totally_real_cp3,
        GroundTruth("TotallyReal", totally_geodesic=False,
                    chain={"N": "RP^3", "dim_N": 3, "tangent_N": real_chain_tangent(3), "W_rank": None}),
        (0.3, -0.2), ((-0.8, 0.8), (-0.8, 0.8)))
    add("rp2-in-rp3-cp3", "totally geodesic RP^2 inside RP^3 inside CP^3", CP3, 2, _affine_real(1),
        GroundTruth("TotallyReal", flat_normal=False, expected_algebra_dim=1, totally_geodesic=True,
                    chain={"N": "RP^3", "dim_N": 3, "tangent_N": real_chain_tangent(3), "W_rank": 2}),
        (0.2, -0.3), ((-0.8, 0.8), (-0.8, 0.8)))
    add("sphere-in-rp3-cp3", f"round sphere of radius {RP3_SPHERE_RADIUS} inside RP^3 inside CP^3", CP3, 2,
        _round_sphere_rp3(RP3_SPHERE_RADIUS),
        GroundTruth("TotallyReal", flat_normal=False, expected_algebra_dim=3, totally_geodesic=False,
                    chain={"N": "RP^3", "dim_N": 3, "tangent_N": real_chain_tangent(3), "W_rank": 3}),
        (1.0, 0.4), ((0.5, 2.6), (-np.pi, np.pi)), radius=RP3_SPHERE_RADIUS)
    return {x.name: x for x in e}


_CATALOG = _build()


def names():
    return sorted(_CATALOG)


def entries():
    return [_CATALOG[n] for n in names()]


def get(name):
    try:
        return _CATALOG[name]
    except KeyError:
        raise NotFoundError(f"unknown catalog entry {name!r}; known: {', '.join(names())}") from None


def random_curve(space, rng, degree=2, name="random-curve"):
    """Curve [a_0 + a_1 t + ... + a_d t^d] with random complex coefficients.

    Generic coefficients give a regular, full curve that is not a holomorphic
    circle.  Parameters near t = 0 are the intended sample range.
    """
    if space.c < 0:
        raise InvalidInputError("random curves are drawn in C^n or CP^n only")
    N = space.complex_dim
    coeffs = rng.standard_normal((degree + 1, N)) + 1j * rng.standard_normal((degree + 1, N))

    def jet(u):
        t = u[0]
        powers = np.array([t ** j for j in range(degree + 1)])
        d1 = np.array([j * t ** (j - 1) if j else 0.0 for j in range(degree + 1)])
        d2 = np.array([j * (j - 1) * t ** (j - 2) if j > 1 else 0.0 for j in range(degree + 1)])
        return powers @ coeffs, (d1 @ coeffs)[:, None], (d2 @ coeffs)[None, None, :]

    return _make(space, 1, jet, name)
