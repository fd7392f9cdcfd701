"""Parallel transport along parameter curves and holonomy-algebra estimates.

Transport is integrated in the parameter domain.  For CP^n / CH^n the stored
vectors live at the representative z(u); the derivative along the horizontal
lift of the curve is d/dt + b(u') J with b the gauge one-form of z, so the
parallel-transport equation reads

    P_nu (V' + b J V) = 0,   V in nu

and is solved by keeping V orthogonal to S = [d_p z, z, J z] (the directions
that are not normal to M).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .ambient import apply_J_columns
from .errors import DegenerateImmersionError, InvalidInputError, NonconvergentLogError
from .linalg import (gram, nullspace, orthogonal_log, orthonormalize, principal_angles, skew_part,
                     skew_to_vec, span_basis)
from .submanifold import BASE, MAX_CONDITION, frame_at, normal_curvature, normal_curvature_coords, shape_only_data

NORMAL_INPUT_TOL = 1e-8
DEFAULT_STEPS = 32


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class Segment:
    """Smooth piece s in [0, 1] -> u(s) with velocity du/ds."""

    point: Callable[[float], np.ndarray]
    velocity: Callable[[float], np.ndarray]

    def reversed(self):
        p, v = self.point, self.velocity
        return Segment(lambda s: p(1.0 - s), lambda s: -v(1.0 - s))


@dataclass(frozen=True)
class ParamCurve:
    """Piecewise-smooth parameter curve; ``steps`` RK4 steps per segment."""

    segments: Tuple[Segment, ...]
    steps: int = DEFAULT_STEPS

    def __post_init__(self):
        if not self.segments:
            raise InvalidInputError("a curve needs at least one segment")
        if int(self.steps) < 1:
            raise InvalidInputError("steps must be a positive integer")

    @property
    def start(self):
        return np.asarray(self.segments[0].point(0.0), float)

    @property
    def end(self):
        return np.asarray(self.segments[-1].point(1.0), float)

    def is_closed(self, tol=1e-12):
        return bool(np.max(np.abs(self.start - self.end)) <= tol)

    def then(self, other):
        """Concatenation: first self, then other."""
        if np.max(np.abs(self.end - other.start)) > 1e-12:
            raise InvalidInputError("curves do not join")
        return ParamCurve(self.segments + other.segments, max(self.steps, other.steps))

    def reversed(self):
        return ParamCurve(tuple(s.reversed() for s in reversed(self.segments)), self.steps)

    def with_steps(self, steps):
        return ParamCurve(self.segments, steps)

    def __call__(self, t):
        """Point at global parameter t in [0, 1] (segments share it evenly)."""
        n = len(self.segments)
        i = min(int(t * n), n - 1)
        return np.asarray(self.segments[i].point(t * n - i), float)


def line(a, b, steps=DEFAULT_STEPS):
    a, b = np.asarray(a, float), np.asarray(b, float)
    d = b - a
    return ParamCurve((Segment(lambda s: a + s * d, lambda s: d),), steps)


def constant(u, steps=1):
    u = np.asarray(u, float)
    return ParamCurve((Segment(lambda s: u, lambda s: np.zeros_like(u)),), steps)


def from_function(point, velocity, steps=DEFAULT_STEPS):
    return ParamCurve((Segment(point, velocity),), steps)


def polygon(vertices, steps=DEFAULT_STEPS):
    verts = [np.asarray(v, float) for v in vertices]
    segs = []
    for a, b in zip(verts[:-1], verts[1:]):
        segs += line(a, b).segments
    return ParamCurve(tuple(segs), steps)


def plaquette(u0, i, j, side, steps=DEFAULT_STEPS):
    """Closed square with a corner at u0: first along +e_i, then +e_j, back along -e_i, -e_j."""
    u0 = np.asarray(u0, float)
    ei = np.zeros_like(u0)
    ej = np.zeros_like(u0)
    ei[i] = side
    ej[j] = side
    return polygon([u0, u0 + ei, u0 + ei + ej, u0 + ej, u0], steps)


def circle(center, i, j, radius, steps=DEFAULT_STEPS, phase=0.0):
    """Circle in the (u_i, u_j) plane starting and ending at center + radius e_i(phase)."""
    c = np.asarray(center, float)
    ei = np.zeros_like(c)
    ej = np.zeros_like(c)
    ei[i] = 1.0
    ej[j] = 1.0
    w = 2 * np.pi

    def point(s):
        a = phase + w * s
        return c + radius * (np.cos(a) * ei + np.sin(a) * ej)

    def velocity(s):
        a = phase + w * s
        return radius * w * (-np.sin(a) * ei + np.cos(a) * ej)

    return ParamCurve((Segment(point, velocity),), steps)


def spoke_loop(u0, target, loop, steps=DEFAULT_STEPS):
    """Go from u0 to target, run ``loop`` (based at target), come back."""
    out = line(u0, target, steps)
    return out.then(loop).then(line(target, u0, steps))


# ---------------------------------------------------------------------------
# transport equations


def _excluded_and_rate(M, z, dz):
    space = M.space
    if not space.curved:
        return np.zeros((z.shape[0], 0)), np.zeros((z.shape[0], 0))
    if M.level == BASE:
        Jz, Jdz = apply_J_columns(z[:, None])[:, 0], apply_J_columns(dz[:, None])[:, 0]
        return np.column_stack([z, Jz]), np.column_stack([dz, Jdz])
    return z[:, None], dz[:, None]


def _gauge(M, z, d1, g):
    if not (M.space.curved and M.level == BASE):
        return np.zeros(d1.shape[1])
    Jz = apply_J_columns(z[:, None])[:, 0]
    return -(d1.T @ (g * Jz)) / float(np.sum(Jz * g * Jz))


def gauge_form(M, u):
    """b with d/du_p + b_p J the derivative along the horizontal lift (zero off the base level)."""
    jet = M.jets(u)
    return _gauge(M, jet.point, jet.d1, M.space.metric)


class _Field:
    """Evaluates the frame data the transport equations need at a curve point."""

    def __init__(self, M):
        self.M = M
        self.g = M.space.metric

    def _jets(self, u):
        jet = self.M.jets(u)
        sv = np.linalg.svd(jet.d1, compute_uv=False)
        if sv[-1] <= 0 or sv[0] / sv[-1] > MAX_CONDITION:
            raise DegenerateImmersionError(f"rank-deficient Jacobian at u={np.asarray(u).tolist()}", u=u)
        return jet

    def normal_data(self, u, du):
        jet = self._jets(u)
        z, d1, d2 = jet.point, jet.d1, jet.d2
        dz = d1 @ du
        E, dE = _excluded_and_rate(self.M, z, dz)
        S = np.hstack([d1, E])
        dS = np.hstack([np.einsum("pqd,p->dq", d2, du), dE])
        b = float(_gauge(self.M, z, d1, self.g) @ du)
        return S, dS, b

    def tangent_data(self, u, du):
        jet = self._jets(u)
        z, d1, d2 = jet.point, jet.d1, jet.d2
        g = self.g
        dd = np.einsum("pqd,p->dq", d2, du)
        if not (self.M.space.curved and self.M.level == BASE):
            return d1, dd, 0.0
        bvec = _gauge(self.M, z, d1, g)
        Jz = apply_J_columns(z[:, None])[:, 0]
        Jd1 = apply_J_columns(d1)
        zz = float(np.sum(Jz * g * Jz))
        B = d1 + np.outer(Jz, bvec)
        # d_p b_q = -(<z_qp, Jz> + <z_q, J z_p>) / <Jz, Jz>
        db = -(np.einsum("pqd,d,d->pq", d2, g, Jz) + gram(d1, Jd1, g).T) / zz
        # B'_q = sum_p u'_p (z_qp + d_p b_q Jz + b_q J z_p)
        dB = dd + np.outer(Jz, du @ db) + np.outer(Jd1 @ du, bvec)
        return B, dB, float(bvec @ du)


def _normal_rhs(g, S, dS, b, V):
    K = gram(S, g=g)
    out = -S @ np.linalg.solve(K, dS.T @ (g[:, None] * V))
    if b != 0.0:
        JV = apply_J_columns(V)
        out -= b * (JV - S @ np.linalg.solve(K, S.T @ (g[:, None] * JV)))
    return out


def _tangent_rhs(g, B, dB, b, V):
    K = gram(B, g=g)
    c = np.linalg.solve(K, B.T @ (g[:, None] * V))
    W = dB @ c
    out = W - B @ np.linalg.solve(K, B.T @ (g[:, None] * W))
    if b != 0.0:
        JV = apply_J_columns(V)
        out -= b * (B @ np.linalg.solve(K, B.T @ (g[:, None] * JV)))
    return out


def _project_normal(g, S, V):
    K = gram(S, g=g)
    return V - S @ np.linalg.solve(K, S.T @ (g[:, None] * V))


def _project_tangent(g, B, V):
    K = gram(B, g=g)
    return B @ np.linalg.solve(K, B.T @ (g[:, None] * V))


def _renormalize(g, V, norms):
    cur = np.sqrt(np.abs(np.sum(V * g[:, None] * V, axis=0)))
    scale = np.where(cur > 0, norms / np.where(cur > 0, cur, 1.0), 0.0)
    return V * scale


def _integrate(M, curve, V0, kind):
    fld = _Field(M)
    g = fld.g
    data = fld.normal_data if kind == "normal" else fld.tangent_data
    rhs = _normal_rhs if kind == "normal" else _tangent_rhs
    proj = _project_normal if kind == "normal" else _project_tangent
    V = np.array(V0, float)
    norms = np.sqrt(np.abs(np.sum(V * g[:, None] * V, axis=0)))
    nseg = len(curve.segments)
    for si, seg in enumerate(curve.segments):
        n = curve.steps
        h = 1.0 / n

        def ev(s):
            u = np.asarray(seg.point(s), float)
            du = np.asarray(seg.velocity(s), float)
            try:
                return data(u, du)
            except (DegenerateImmersionError, np.linalg.LinAlgError) as exc:
                t = (si + s) / nseg
                raise DegenerateImmersionError(f"frame degenerates along the curve at t={t:.6g}: {exc}",
                                               u=u, t=t) from None

        cur = ev(0.0)
        for step in range(n):
            s0 = step * h
            mid = ev(s0 + 0.5 * h)
            nxt = ev(s0 + h)
            k1 = rhs(g, *cur, V)
            k2 = rhs(g, *mid, V + 0.5 * h * k1)
            k3 = rhs(g, *mid, V + 0.5 * h * k2)
            k4 = rhs(g, *nxt, V + h * k3)
            V = V + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            V = _renormalize(g, proj(g, nxt[0], V), norms)
            cur = nxt
    return V


def _check_normal(M, u, V):
    fr = frame_at(M, u)
    P = fr.normal @ gram(fr.normal, V, fr.g)
    res = float(np.max(np.abs(V - P))) if V.size else 0.0
    scale = max(1.0, float(np.max(np.abs(V)))) if V.size else 1.0
    if res > NORMAL_INPUT_TOL * scale:
        raise InvalidInputError(f"vector is not normal at the curve start (residual {res:.2e})")
    return fr


def parallel_transport(M, curve, xi0):
    """Normal parallel transport of xi0 (ambient vector, or (D, r) array) along ``curve``."""
    xi0 = np.asarray(xi0, float)
    V0 = xi0[:, None] if xi0.ndim == 1 else xi0
    _check_normal(M, curve.start, V0)
    V = _integrate(M, curve, V0, "normal")
    return V[:, 0] if xi0.ndim == 1 else V


def tangent_transport(M, curve, v0):
    """Levi-Civita transport of tangent vectors (stored as horizontal lifts) along ``curve``."""
    v0 = np.asarray(v0, float)
    V0 = v0[:, None] if v0.ndim == 1 else v0
    V = _integrate(M, curve, V0, "tangent")
    return V[:, 0] if v0.ndim == 1 else V


def _require_closed(M, loop):
    # closed in the parameter domain, or (for periodic parametrizations) in the ambient
    if loop.is_closed(1e-10):
        return
    if np.max(np.abs(M(loop.start) - M(loop.end))) > 1e-10:
        raise InvalidInputError("loop_transport needs a closed curve")


def loop_transport(M, loop, frame=None):
    """Matrix G[b, a] = <tau(xi_a), xi_b> of the transport around a closed loop."""
    _require_closed(M, loop)
    fr = frame_at(M, loop.start) if frame is None else frame
    V = _integrate(M, loop, fr.normal, "normal")
    return gram(fr.normal, V, fr.g)


def tangent_loop_transport(M, loop, frame=None):
    _require_closed(M, loop)
    fr = frame_at(M, loop.start) if frame is None else frame
    V = _integrate(M, loop, fr.tangent, "tangent")
    return fr.tangent_signs[:, None] * gram(fr.tangent, V, fr.g)


def orthogonality_defect(G):
    return float(np.max(np.abs(G.T @ G - np.eye(G.shape[0])))) if G.size else 0.0


# ---------------------------------------------------------------------------
# holonomy algebra


@dataclass(frozen=True)
class HolonomyConfig:
    radii: Tuple[float, ...] = (0.1, 0.05, 0.025)
    plaquettes: int = 4
    rank_tol: float = 1e-6
    abs_tol: float = 1e-7
    steps: int = DEFAULT_STEPS
    seed: int = 0
    extra_loops: Tuple[ParamCurve, ...] = ()
    threads: int = 1
    max_halvings: int = 3


@dataclass(frozen=True)
class InvariantBlock:
    basis: np.ndarray  # (m, d) orthonormal columns in normal-frame coordinates
    trivial: bool

    @property
    def dim(self):
        return self.basis.shape[1]


@dataclass(frozen=True, eq=False)
class HolonomyEstimate:
    base: np.ndarray
    normal_frame: np.ndarray
    generators: list
    algebra: list
    singular_values: np.ndarray
    invariant_blocks: list
    flat: bool
    residuals: dict
    trend: dict = field(default_factory=dict)

    @property
    def dim(self):
        return len(self.algebra)


def _transport_matrix(M, curve, fr):
    V = _integrate(M, curve, fr.normal, "normal")
    return gram(fr.normal, V, fr.g), V


def _plaquette_log(M, u0, target, i, j, side, steps, fr, max_halvings):
    """-log(transport)/area for a plaquette at ``target`` reached by a spoke from u0.

    Going once around the square (+e_i first, then +e_j) of side r gives
    I - r^2 R_perp(d_i, d_j) + O(r^3), so the returned matrix estimates R_perp.
    """
    for _ in range(max_halvings + 1):
        loop = plaquette(target, i, j, side, steps)
        if np.any(target != u0):
            loop = spoke_loop(u0, target, loop, steps)
        G, _ = _transport_matrix(M, loop, fr)
        try:
            return G, -orthogonal_log(G) / side ** 2
        except NonconvergentLogError:
            side *= 0.5
    raise NonconvergentLogError(f"plaquette transport at u={np.asarray(target).tolist()} stays far from the identity")


def _curvature_in(M, u, V):
    """R_perp(d_p, d_q) at u, written in the (transported) orthonormal basis V of nu_u."""
    fr = frame_at(M, u)
    R = normal_curvature_coords(M, u)
    Q = gram(fr.normal, V, fr.g)  # columns: V in the local frame
    k = M.k
    return [Q.T @ R[p, q] @ Q for p in range(k) for q in range(p + 1, k)]


def _spoke_curvatures(M, u0, target, steps, fr):
    V = _integrate(M, line(u0, target, steps), fr.normal, "normal")
    return _curvature_in(M, target, V)


def _run(tasks, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(lambda f: f(), tasks))
    return [f() for f in tasks]


def _commutant_element(mats, m, rng):
    """A random symmetric matrix commuting with all ``mats`` (seeded)."""
    iu = np.triu_indices(m)
    basis = []
    for a, b in zip(*iu):
        E = np.zeros((m, m))
        E[a, b] = E[b, a] = 1.0
        basis.append(E)
    if mats:
        rows = np.array([np.concatenate([(A @ E - E @ A).ravel() for A in mats]) for E in basis]).T
        coeffs = nullspace(rows, 1e-8)
    else:
        coeffs = np.eye(len(basis))
    x = coeffs @ rng.standard_normal(coeffs.shape[1])
    return sum(c * E for c, E in zip(x, basis))


def _group_eigen(X, tol):
    lam, U = np.linalg.eigh(X)
    groups = []
    start = 0
    for i in range(1, len(lam) + 1):
        if i == len(lam) or lam[i] - lam[i - 1] > tol:
            groups.append(U[:, start:i])
            start = i
    return groups


def invariant_blocks(algebra, m, seed=0):
    """Orthogonal decomposition of R^m into subspaces invariant under ``algebra``."""
    if m == 0:
        return []
    rng = np.random.default_rng(seed)
    C = sum((A.T @ A for A in algebra), np.zeros((m, m)))
    ker = nullspace(C, 1e-8) if algebra else np.eye(m)
    blocks = []
    if ker.shape[1]:
        blocks.append(InvariantBlock(ker, True))
    if ker.shape[1] == m:
        return blocks
    rng_basis = nullspace(ker.T, 1e-12) if ker.shape[1] else np.eye(m)
    # restrict the algebra to the complement of the trivial block
    mats = [rng_basis.T @ A @ rng_basis for A in algebra]
    r = rng_basis.shape[1]
    X = _commutant_element(mats, r, rng)
    groups = _group_eigen(X, 1e-6 * max(1.0, float(np.max(np.abs(X)))))
    if any(gr.shape[1] > 1 for gr in groups):
        X2 = _commutant_element(mats, r, rng)
        refined = []
        for gr in groups:
            if gr.shape[1] == 1:
                refined.append(gr)
                continue
            Y = gr.T @ X2 @ gr
            refined += [gr @ h for h in _group_eigen(Y, 1e-6 * max(1.0, float(np.max(np.abs(Y)))))]
        groups = refined
    for gr in groups:
        blocks.append(InvariantBlock(rng_basis @ gr, False))
    return blocks


def _closure_residual(algebra):
    if len(algebra) < 2:
        return 0.0
    B = np.array([skew_to_vec(A) for A in algebra])  # orthonormal rows
    worst = 0.0
    for i in range(len(algebra)):
        for j in range(i + 1, len(algebra)):
            c = skew_to_vec(algebra[i] @ algebra[j] - algebra[j] @ algebra[i])
            worst = max(worst, float(np.linalg.norm(c - B.T @ (B @ c))))
    return worst


def holonomy_algebra(M, u0, cfg=None):
    cfg = HolonomyConfig() if cfg is None else cfg
    u0 = M._param(u0)
    fr = frame_at(M, u0)
    m, k = fr.m, M.k
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]

    collected = []
    generators = []
    trend = {}
    if m >= 2:
        R0 = normal_curvature_coords(M, u0)
        collected += [R0[i, j] for i, j in pairs]

        tasks = []
        for r in cfg.radii:
            for (i, j) in pairs:
                tasks.append(("corner", r, i, j, None))
                for l in range(cfg.plaquettes):
                    phi = 2 * np.pi * l / cfg.plaquettes + np.pi / 4
                    target = u0.copy()
                    target[i] += r * np.cos(phi)
                    target[j] += r * np.sin(phi)
                    tasks.append(("spoke", r, i, j, target))

        def work(task):
            kind, r, i, j, target = task
            if kind == "corner":
                G, L = _plaquette_log(M, u0, u0, i, j, r, cfg.steps, fr, cfg.max_halvings)
                return kind, r, (i, j), G, [L]
            curv = _spoke_curvatures(M, u0, target, cfg.steps, fr)
            G, L = _plaquette_log(M, u0, target, i, j, 0.5 * r, cfg.steps, fr, cfg.max_halvings)
            return kind, r, (i, j), G, curv + [L]

        results = _run([lambda t=t: work(t) for t in tasks], cfg.threads)
        for kind, r, (i, j), G, mats in results:
            generators.append(G)
            collected += mats
            if kind == "corner":
                err = float(np.linalg.norm(mats[0] - R0[i, j]))
                trend.setdefault(r, 0.0)
                trend[r] = max(trend[r], err)

    for loop in cfg.extra_loops:
        G = loop_transport(M, loop.with_steps(max(loop.steps, cfg.steps)), fr)
        generators.append(G)
        if m >= 2:
            # whole loops can rotate by more than a plaquette; any angle below ~2.5 rad is fine
            collected.append(orthogonal_log(G, max_defect=1.9))

    algebra, sv = span_basis([skew_part(A) for A in collected], cfg.rank_tol, cfg.abs_tol)
    blocks = invariant_blocks(algebra, m, cfg.seed)
    residuals = {
        "orthogonality": max([orthogonality_defect(G) for G in generators], default=0.0),
        "closure": _closure_residual(algebra),
        "skew": max([float(np.max(np.abs(A + A.T))) for A in algebra], default=0.0),
    }
    return HolonomyEstimate(u0, fr.normal, generators, algebra, sv, blocks, len(algebra) == 0,
                            residuals, trend)


# ---------------------------------------------------------------------------
# the algebraic curvature tensor on the pull-back


@dataclass(frozen=True, eq=False)
class ScriptR:
    tensor: np.ndarray  # T[a, b, c, d] = <R(xi_a, xi_b) xi_c, xi_d>
    shape: np.ndarray  # endomorphisms A_a in the pull-back tangent frame
    signs: np.ndarray
    normal_curvature: np.ndarray  # R^_perp(e_i, e_j)[b, a] from the Ricci equation

    def properties(self):
        T = self.tensor
        res = {
            "i": float(np.max(np.abs(T + T.transpose(1, 0, 2, 3)))),
            "ii": float(np.max(np.abs(T + T.transpose(0, 1, 3, 2)))),
            "iii": float(np.max(np.abs(T - T.transpose(2, 3, 0, 1)))),
            "iv": float(np.max(np.abs(T + T.transpose(1, 2, 0, 3) + T.transpose(2, 0, 1, 3)))),
        }
        res["v"] = self.image_angle()
        return res

    def operator(self, a, b):
        """Matrix of R(xi_a, xi_b) on nu: column c holds the image of xi_c."""
        return self.tensor[a, b].T

    def image_angle(self):
        """Largest principal angle between Im(R) and Im(R^_perp) inside so(nu)."""
        m = self.tensor.shape[0]
        if m < 2:
            return 0.0
        A = np.array([skew_to_vec(self.operator(a, b)) for a in range(m) for b in range(a + 1, m)]).T
        k = self.normal_curvature.shape[0]
        B = np.array([skew_to_vec(self.normal_curvature[i, j]) for i in range(k) for j in range(i + 1, k)]).T
        QA = orthonormalize(A, tol=1e-9)
        QB = orthonormalize(B, tol=1e-9)
        if QA.shape[1] != QB.shape[1]:
            return float(np.pi / 2)
        if QA.shape[1] == 0:
            return 0.0
        return float(np.max(principal_angles(QA, QB)))

    def sectional(self, x, y):
        """<R(x, y) y, x> for normal coordinate vectors x, y."""
        return float(np.einsum("abcd,a,b,c,d->", self.tensor, x, y, y, x))

    def commutator(self, x, y):
        Ax = np.tensordot(x, self.shape, axes=1)
        Ay = np.tensordot(y, self.shape, axes=1)
        return Ax @ Ay - Ay @ Ax

    def commutator_norm(self, x, y):
        """sqrt(sum_i s_i <[A_x, A_y] e_i, [A_x, A_y] e_i>) (nonnegative on coisotropic pull-backs)."""
        C = self.commutator(x, y)
        val = np.einsum("ji,j,ji,i->", C, self.signs, C, self.signs)
        return float(np.sqrt(abs(val)))


def script_R_tensor(Mhat, p):
    """<R(xi_1, xi_2) xi_3, xi_4> = -1/2 tr([A_1, A_2] o [A_3, A_4]) on the pull-back normal frame."""
    fd = shape_only_data(Mhat, p)
    A = fd.shape  # (m, k, k) endomorphism matrices
    comm = np.einsum("aij,bjk->abik", A, A) - np.einsum("bij,ajk->abik", A, A)
    T = -0.5 * np.einsum("abij,cdji->abcd", comm, comm)
    R = normal_curvature(Mhat, p, fd)
    return ScriptR(T, A, fd.frame.tangent_signs, R)
