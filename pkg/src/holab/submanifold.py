"""Immersions, adapted frames, fundamental forms and the structure equations.

Everything is computed in the flat real coordinates of C^n (c = 0) or of
C^{n+1} (c = +-4).  A submanifold M of CP^n / CH^n is handled through a
representative z(u) in the Hopf total space; tangent vectors of M are stored as
their horizontal lifts at z(u), and derivatives along u pick up the gauge term
``b(X) J`` that converts d/du into the derivative along the horizontal lift.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import ambient
from .ambient import AmbientSpace, apply_J_columns
from .errors import DegenerateImmersionError, InvalidInputError, InvalidRepresentativeError
from .linalg import gram, procrustes_align, projector_complement

ANALYTIC = "analytic"
FINITE_DIFFERENCE = "fd"

BASE = "base"
TOTAL = "total"

MAX_CONDITION = 1e8
REPRESENTATIVE_TOL = 1e-8


@dataclass(frozen=True)
class Jet:
    point: np.ndarray  # (D,)
    d1: np.ndarray  # (D, k)
    d2: np.ndarray  # (k, k, D)


@dataclass(frozen=True, eq=False)
class Immersion:
    """A parametric map u in R^k -> ambient representative.

    ``level`` says what the image is a submanifold of: ``"base"`` means the
    complex space form itself (C^n, or CP^n / CH^n through a unit
    representative), ``"total"`` means the Hopf total space S^{2n+1} or
    H^{n+1}_1 (pull-backs live there).
    """

    space: AmbientSpace
    k: int
    func: Callable[[np.ndarray], np.ndarray]
    jet_fn: Optional[Callable[[np.ndarray], tuple]] = None
    jet_mode: str = ANALYTIC
    h: Optional[float] = None
    level: str = BASE
    name: str = ""

    def __post_init__(self):
        if self.jet_mode not in (ANALYTIC, FINITE_DIFFERENCE):
            raise InvalidInputError(f"unknown jet mode {self.jet_mode!r}")
        if self.jet_mode == ANALYTIC and self.jet_fn is None:
            raise InvalidInputError("analytic jet mode needs a jet function")
        if self.level not in (BASE, TOTAL):
            raise InvalidInputError(f"unknown level {self.level!r}")
        if self.level == TOTAL and not self.space.curved:
            raise InvalidInputError("flat ambient has no Hopf total space")

    def __call__(self, u):
        return np.asarray(self.func(self._param(u)), dtype=float)

    def _param(self, u):
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.shape[0] != self.k:
            raise InvalidInputError(f"parameter has {u.shape[0]} components, expected {self.k}")
        return u

    def step(self, u):
        if self.h is not None:
            return float(self.h)
        return 1e-4 * (1.0 + float(np.linalg.norm(u)))

    def with_finite_differences(self, h=None):
        return replace(self, jet_mode=FINITE_DIFFERENCE, h=h)

    def jets(self, u):
        u = self._param(u)
        if self.jet_mode == ANALYTIC:
            p, d1, d2 = self.jet_fn(u)
            return Jet(np.asarray(p, float), np.asarray(d1, float).reshape(-1, self.k),
                       np.asarray(d2, float).reshape(self.k, self.k, -1))
        return finite_difference_jet(self.func, u, self.step(u))


def finite_difference_jet(f, u, h):
    """Central differences; mixed second derivatives use the 9-point stencil."""
    k = u.shape[0]
    p = np.asarray(f(u), dtype=float)
    D = p.shape[0]
    d1 = np.empty((D, k))
    d2 = np.empty((k, k, D))
    E = np.eye(k) * h
    plus = [np.asarray(f(u + E[i]), float) for i in range(k)]
    minus = [np.asarray(f(u - E[i]), float) for i in range(k)]
    for i in range(k):
        d1[:, i] = (plus[i] - minus[i]) / (2 * h)
        d2[i, i] = (plus[i] - 2 * p + minus[i]) / h ** 2
        for j in range(i + 1, k):
            pp = np.asarray(f(u + E[i] + E[j]), float)
            pm = np.asarray(f(u + E[i] - E[j]), float)
            mp = np.asarray(f(u - E[i] + E[j]), float)
            mm = np.asarray(f(u - E[i] - E[j]), float)
            d2[i, j] = d2[j, i] = (pp - pm - mp + mm) / (4 * h ** 2)
    return Jet(p, d1, d2)


@dataclass(frozen=True, eq=False)
class LocalGeometry:
    """Raw first/second order data at a parameter point, gauge already applied."""

    u: np.ndarray
    jet: Jet
    coord_tangent: np.ndarray  # (D, k) tangent vectors X_p (horizontal lifts for base level)
    hess: np.ndarray  # (k, k, D) second derivatives along the X_p
    excluded: np.ndarray  # (D, e) directions normal to the space form (position, fiber)
    gauge: np.ndarray  # (k,) b_p with X_p = d_p z + b_p J z
    g: np.ndarray


def local_geometry(M, u):
    space = M.space
    u = M._param(u)
    jet = M.jets(u)
    g = space.metric
    z, d1, d2 = jet.point, jet.d1, jet.d2
    k = M.k
    b = np.zeros(k)
    if space.curved:
        norm2 = float(np.sum(z * g * z))
        target = 1.0 if space.c > 0 else -1.0
        if abs(norm2 - target) > REPRESENTATIVE_TOL:
            raise InvalidRepresentativeError(
                f"representative at u={u.tolist()} has <z,z> = {norm2:.3e}, expected {target:+.0f}"
            )
    if space.curved and M.level == BASE:
        Jz = ambient.apply_J(space, z)
        b = -(d1.T @ (g * Jz)) / float(np.sum(Jz * g * Jz))
        X = d1 + np.outer(Jz, b)
        JdT = apply_J_columns(d1).T  # row i = J z_i
        H = (d2 + b[None, :, None] * JdT[:, None, :] + b[:, None, None] * JdT[None, :, :]
             - np.outer(b, b)[:, :, None] * z[None, None, :])
        E = np.column_stack([z, Jz])
    elif space.curved:
        X, H, E = d1, d2, z[:, None]
    else:
        X, H, E = d1, d2, np.zeros((z.shape[0], 0))
    s = np.linalg.svd(X, compute_uv=False)
    if s[-1] <= 0 or s[0] / s[-1] > MAX_CONDITION:
        raise DegenerateImmersionError(f"rank-deficient Jacobian at u={u.tolist()}", u=u)
    return LocalGeometry(u, jet, X, H, E, b, g)


@dataclass(frozen=True, eq=False)
class FrameData:
    u: np.ndarray
    point: np.ndarray
    tangent: np.ndarray  # (D, k) pseudo-orthonormal
    tangent_signs: np.ndarray  # (k,) +-1
    normal: np.ndarray  # (D, m) orthonormal, spacelike
    J_frame: np.ndarray  # (k+m, k+m) matrix of J (projected) on tangent + normal
    coeffs: np.ndarray  # (k, k) with tangent = coord_tangent @ coeffs
    geometry: LocalGeometry = field(repr=False)

    @property
    def k(self):
        return self.tangent.shape[1]

    @property
    def m(self):
        return self.normal.shape[1]

    @property
    def g(self):
        return self.geometry.g

    @property
    def basis(self):
        return np.hstack([self.tangent, self.normal])

    def gram_residual(self):
        B = self.basis
        target = np.diag(np.concatenate([self.tangent_signs, np.ones(self.m)]))
        return float(np.max(np.abs(gram(B, g=self.g) - target)))

    def normal_coords(self, v):
        v = np.asarray(v, float).reshape(self.normal.shape[0], -1)
        return gram(self.normal, v, self.g)

    def tangent_coords(self, v):
        v = np.asarray(v, float).reshape(self.tangent.shape[0], -1)
        return self.tangent_signs[:, None] * gram(self.tangent, v, self.g)


def _metric_gram_schmidt(X, g):
    D, k = X.shape
    E = np.zeros((D, k))
    C = np.zeros((k, k))
    signs = np.zeros(k)
    scale = np.max(np.linalg.norm(X, axis=0))
    for i in range(k):
        v = X[:, i].copy()
        c = np.zeros(k)
        c[i] = 1.0
        for _ in range(2):  # re-orthogonalize once for stability
            for j in range(i):
                proj = signs[j] * float(np.sum(v * g * E[:, j]))
                v -= proj * E[:, j]
                c -= proj * C[:, j]
        n2 = float(np.sum(v * g * v))
        if abs(n2) < (1e-8 * scale) ** 2:
            raise DegenerateImmersionError("tangent vectors are (numerically) null or dependent")
        signs[i] = 1.0 if n2 > 0 else -1.0
        nrm = np.sqrt(abs(n2))
        E[:, i] = v / nrm
        C[:, i] = c / nrm
    return E, C, signs


def _normal_basis(geom, m):
    g = geom.g
    S = np.hstack([geom.coord_tangent, geom.excluded])
    P = projector_complement(S, g)
    U, s, _ = np.linalg.svd(P)
    B = U[:, :m]
    if m and s[m - 1] < 1e-6:
        raise DegenerateImmersionError("normal space could not be resolved", u=geom.u)
    L = np.linalg.cholesky(gram(B, g=g))
    N = np.linalg.solve(L, B.T).T
    idx = np.argmax(np.abs(N), axis=0)
    N = N * np.sign(N[idx, np.arange(N.shape[1])])
    return N


def frame_at(M, u):
    geom = local_geometry(M, u)
    g = geom.g
    D = geom.jet.point.shape[0]
    E, C, signs = _metric_gram_schmidt(geom.coord_tangent, g)
    m = D - M.k - geom.excluded.shape[1]
    N = _normal_basis(geom, m)
    B = np.hstack([E, N])
    s_all = np.concatenate([signs, np.ones(m)])
    Jframe = s_all[:, None] * gram(B, apply_J_columns(B), g)
    return FrameData(geom.u, geom.jet.point, E, signs, N, Jframe, C, geom)


def aligned_frame(M, u, reference):
    """Frame at u whose normal basis is Procrustes-aligned to ``reference`` (D, m)."""
    fr = frame_at(M, u)
    N = procrustes_align(fr.normal, reference, fr.g)
    return replace(fr, normal=N)


@dataclass(frozen=True, eq=False)
class FundamentalData:
    alpha: np.ndarray  # (k, k, m): alpha(e_i, e_j) = sum_a alpha[i, j, a] xi_a
    shape: np.ndarray  # (m, k, k): matrix of A_{xi_a} acting on tangent coordinates
    gamma_perp: np.ndarray  # (k, m, m): gamma_perp[i, b, a] = <nabla_perp_{e_i} xi_a, xi_b>
    frame: FrameData = field(repr=False)

    def shape_operator(self, v):
        """Shape operator for an arbitrary normal vector v (ambient coordinates)."""
        c = gram(self.frame.normal, np.asarray(v, float)[:, None], self.frame.g)[:, 0]
        return np.tensordot(c, self.shape, axes=1)

    def alpha_vector(self, x, y):
        """alpha(X, Y) as an ambient vector, X and Y given in tangent-frame coordinates."""
        comps = np.einsum("i,j,ija->a", x, y, self.alpha)
        return self.frame.normal @ comps


def second_fundamental_form(frame):
    geom = frame.geometry
    Hn = np.einsum("pqd,d,da->pqa", geom.hess, geom.g, frame.normal)
    C = frame.coeffs
    alpha = np.einsum("pi,qj,pqa->ija", C, C, Hn)
    shape = frame.tangent_signs[None, :, None] * np.moveaxis(alpha, 2, 0)
    return alpha, shape


def _frame_derivative(M, u, reference, h, order=4):
    """d/du_p of the aligned normal frame (D, m) for each p, plus the gauge-corrected part."""
    u = np.asarray(u, float)
    k = M.k
    out = []
    for p in range(k):
        e = np.zeros(k)
        e[p] = h
        if order == 4:
            f2 = aligned_frame(M, u + 2 * e, reference).normal
            f1 = aligned_frame(M, u + e, reference).normal
            b1 = aligned_frame(M, u - e, reference).normal
            b2 = aligned_frame(M, u - 2 * e, reference).normal
            out.append((-f2 + 8 * f1 - 8 * b1 + b2) / (12 * h))
        else:
            f1 = aligned_frame(M, u + e, reference).normal
            b1 = aligned_frame(M, u - e, reference).normal
            out.append((f1 - b1) / (2 * h))
    return out


def connection_step(M, u):
    return 1e-3 * (1.0 + float(np.linalg.norm(u)))


def normal_connection_forms(M, u, reference=None, h=None, order=4):
    """omega[p][b, a] = <nabla_perp_{d_p} xi_a, xi_b> for the frame field aligned to ``reference``."""
    fr = frame_at(M, u)
    if reference is None:
        reference = fr.normal
    N = procrustes_align(fr.normal, reference, fr.g)
    h = connection_step(M, u) if h is None else h
    dN = _frame_derivative(M, u, reference, h, order)
    g = fr.g
    JN = apply_J_columns(N)
    b = fr.geometry.gauge
    return np.array([gram(N, dN[p] + b[p] * JN, g) for p in range(M.k)])


def fundamental_data(M, u, h=None):
    frame = frame_at(M, u)
    alpha, shape = second_fundamental_form(frame)
    omega = normal_connection_forms(M, u, reference=frame.normal, h=h)
    gamma_perp = np.einsum("pi,pba->iba", frame.coeffs, omega)
    return FundamentalData(alpha, shape, gamma_perp, frame)


def ambient_curvature(M):
    """R(X, Y)Z of the space M sits in (algebraic formula)."""
    space = M.space
    if not space.curved:
        return lambda X, Y, Z: np.zeros_like(np.asarray(Z, float))
    if M.level == TOTAL:
        return lambda X, Y, Z: ambient.space_form_curvature(space, X, Y, Z)
    return lambda X, Y, Z: ambient.curvature_tensor(space, X, Y, Z)


def _ambient_normal_block(M, frame):
    """Rbar[i, j][b, a] = <Rbar(e_i, e_j) xi_a, xi_b>."""
    Rbar = ambient_curvature(M)
    E, N, g = frame.tangent, frame.normal, frame.g
    k, m = E.shape[1], N.shape[1]
    out = np.zeros((k, k, m, m))
    for i in range(k):
        for j in range(i + 1, k):
            for a in range(m):
                v = Rbar(E[:, i], E[:, j], N[:, a])
                out[i, j, :, a] = gram(N, v[:, None], g)[:, 0]
            out[j, i] = -out[i, j]
    return out


def commutator_term(fd):
    """C[i, j][b, a] = <[A_a, A_b] e_i, e_j>."""
    A = fd.shape
    s = fd.frame.tangent_signs
    comm = np.einsum("aij,bjl->abil", A, A) - np.einsum("bij,ajl->abil", A, A)
    # <M e_i, e_j> = s_j M[j, i]
    return np.einsum("abji,j->ijba", comm, s)


def normal_curvature(M, u, fd=None):
    """R_perp(e_i, e_j) as skew (m, m) matrices, from the Ricci equation (no differentiation)."""
    if fd is None:
        frame = frame_at(M, u)
        alpha, shape = second_fundamental_form(frame)
        fd = FundamentalData(alpha, shape, np.zeros((frame.k, frame.m, frame.m)), frame)
    return _ambient_normal_block(M, fd.frame) + commutator_term(fd)


def normal_curvature_coords(M, u, fd=None):
    """R_perp(d_p, d_q) for the coordinate vector fields."""
    R = normal_curvature(M, u, fd)
    if fd is None:
        fd_frame = frame_at(M, u)
    else:
        fd_frame = fd.frame
    Cinv = np.linalg.inv(fd_frame.coeffs)  # d_p = sum_i e_i Cinv[i, p]
    return np.einsum("ip,jq,ijba->pqba", Cinv, Cinv, R)


def shape_only_data(M, u):
    frame = frame_at(M, u)
    alpha, shape = second_fundamental_form(frame)
    return FundamentalData(alpha, shape, np.zeros((frame.k, frame.m, frame.m)), frame)


# ---------------------------------------------------------------------------
# Gauss / Codazzi / Ricci


def _field_data(M, u, reference):
    fr = aligned_frame(M, u, reference)
    alpha, _ = second_fundamental_form(fr)
    return fr, alpha


def _central(fn, u, p, h):
    e = np.zeros_like(u)
    e[p] = h
    return fn(u + e), fn(u - e)


def gauss_codazzi_ricci_residual(M, u, h=None, ricci_h=None, ricci_order=4):
    """Max-norm residuals of the Gauss, Codazzi and Ricci equations at u.

    Gauss: the intrinsic curvature is computed from the Gauss equation and
    checked for antisymmetry, pair symmetry and the first Bianchi identity.
    Codazzi: direct left-minus-right with second-order central differences of
    step ``h`` (so residuals scale like h^2).  Ricci: R_perp from the
    curvature of the normal connection forms (differences of order
    ``ricci_order``, 4 or 2, with step ``ricci_h``) against the ambient term and
    the shape-operator commutator.
    """
    u = M._param(u)
    h = 1e-3 * (1.0 + float(np.linalg.norm(u))) if h is None else h
    frame = frame_at(M, u)
    g, k, m = frame.g, frame.k, frame.m
    alpha, shape = second_fundamental_form(frame)
    fd0 = FundamentalData(alpha, shape, np.zeros((k, m, m)), frame)
    Rbar = ambient_curvature(M)
    E, N, s = frame.tangent, frame.normal, frame.tangent_signs
    C = frame.coeffs

    # Gauss
    Rt = np.zeros((k, k, k, k))
    for i in range(k):
        for j in range(k):
            for l in range(k):
                v = Rbar(E[:, i], E[:, j], E[:, l])
                Rt[i, j, l] = gram(E, v[:, None], g)[:, 0]
    Rint = Rt - np.einsum("ika,jla->ijkl", alpha, alpha) + np.einsum("ila,jka->ijkl", alpha, alpha)
    gauss = max(
        np.max(np.abs(Rint + np.swapaxes(Rint, 0, 1))),
        np.max(np.abs(Rint - np.transpose(Rint, (2, 3, 0, 1)))),
        np.max(np.abs(Rint + np.transpose(Rint, (1, 2, 0, 3)) + np.transpose(Rint, (2, 0, 1, 3)))),
    ) if k > 1 else 0.0

    # Codazzi: fields in aligned frames, derivatives along coordinate directions
    dalpha = np.zeros((k, k, k, m))  # [p, j, l, a]
    gam_t = np.zeros((k, k, k))  # [p, j, l]: <D_p e_j, e_l> s_l
    gam_n = np.zeros((k, m, m))  # [p, b, a]
    JE, JN = apply_J_columns(E), apply_J_columns(N)
    b = frame.geometry.gauge
    for p in range(k):
        (fp, ap), (fm, am) = _central(lambda v: _field_data(M, v, N), u, p, h)
        dalpha[p] = (ap - am) / (2 * h)
        dE = (fp.tangent - fm.tangent) / (2 * h) + b[p] * JE
        dN = (fp.normal - fm.normal) / (2 * h) + b[p] * JN
        gam_t[p] = s[None, :] * gram(dE, E, g)
        gam_n[p] = gram(N, dN, g)
    # convert coordinate derivatives to frame directions e_i = sum_p C[p, i] d_p
    da = np.einsum("pi,pjla->ijla", C, dalpha)
    Gt = np.einsum("pi,pjl->ijl", C, gam_t)  # Gt[i, j, l] = Gamma^l_{ij}
    Gn = np.einsum("pi,pba->iba", C, gam_n)  # Gn[i, b, a] = <nabla_i xi_a, xi_b>
    cov = (da + np.einsum("iab,jlb->ijla", Gn, alpha)
           - np.einsum("ijn,nla->ijla", Gt, alpha) - np.einsum("iln,jna->ijla", Gt, alpha))
    lhs = np.zeros((k, k, k, m))
    for i in range(k):
        for j in range(k):
            for l in range(k):
                v = Rbar(E[:, i], E[:, j], E[:, l])
                lhs[i, j, l] = gram(N, v[:, None], g)[:, 0]
    codazzi = float(np.max(np.abs(lhs - (cov - np.swapaxes(cov, 0, 1)))))

    # Ricci with R_perp from the curvature of the connection forms
    if m == 0 or k < 2:
        ricci = 0.0
    else:
        H = 1e-2 * (1.0 + float(np.linalg.norm(u))) if ricci_h is None else ricci_h
        inner_h = 1e-3 * (1.0 + float(np.linalg.norm(u)))
        omega0 = normal_connection_forms(M, u, reference=N, h=inner_h)
        domega = np.zeros((k, k, m, m))  # [p, q] = d_p omega_q
        for p in range(k):
            e = np.zeros(k)
            e[p] = H
            if ricci_order == 2:
                vals = [normal_connection_forms(M, u + t * e, reference=N, h=inner_h) for t in (1, -1)]
                domega[p] = (vals[0] - vals[1]) / (2 * H)
            else:
                vals = [normal_connection_forms(M, u + t * e, reference=N, h=inner_h) for t in (2, 1, -1, -2)]
                domega[p] = (-vals[0] + 8 * vals[1] - 8 * vals[2] + vals[3]) / (12 * H)
        Rc = np.zeros((k, k, m, m))
        for p in range(k):
            for q in range(k):
                Rc[p, q] = domega[p, q] - domega[q, p] + omega0[p] @ omega0[q] - omega0[q] @ omega0[p]
        R_conn = np.einsum("pi,qj,pqba->ijba", C, C, Rc)
        ricci = float(np.max(np.abs(_ambient_normal_block(M, frame) - R_conn + commutator_term(fd0))))
    return {"gauss": float(gauss), "codazzi": codazzi, "ricci": ricci}
