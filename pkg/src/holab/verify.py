"""Numerical checks of the structural results on CR-submanifolds.

Every check takes an immersion plus sample points (or loops) and returns a
:class:`CheckReport`; ``passed`` is exactly ``max_residual < tolerance``.
Checks whose hypothesis fails at a sample raise :class:`PreconditionError`.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .ambient import apply_J_columns
from .catalog import CatalogEntry, GroundTruth
from .crtype import LAGRANGIAN, classify, default_tol
from .errors import HolabError, InvalidInputError, PreconditionError
from .holonomy import (HolonomyConfig, ParamCurve, Segment, circle, from_function, gauge_form, holonomy_algebra, line,
                       loop_transport, parallel_transport, plaquette, script_R_tensor, tangent_transport)
from .hopf import check_lift_identities as lift_identity_residuals
from .hopf import horizontal_project, lift_point, pullback, vertical_normal_derivative
from .linalg import gram, nullspace, orthonormalize, principal_angles, procrustes_align, skew_to_vec, span_basis
from .submanifold import (ANALYTIC, frame_at, gauss_codazzi_ricci_residual, local_geometry, normal_curvature,
                          shape_only_data)

FD_TOL = 1e-3
# a predicate counts as "zero" below this
PREDICATE_TOL = 1e-6


@dataclass
class CheckReport:
    check_name: str
    points_sampled: int
    max_residual: float
    tolerance: float
    passed: bool
    details: list = field(default_factory=list)
    info: dict = field(default_factory=dict)
    status: str = ""

    def __post_init__(self):
        self.max_residual = float(self.max_residual)
        self.passed = bool(self.max_residual < self.tolerance)
        if not self.status:
            self.status = "pass" if self.passed else "fail"

    def as_dict(self):
        return {
            "check": self.check_name,
            "points_sampled": self.points_sampled,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "status": self.status,
            "info": self.info,
            "details": self.details,
        }


def _report(name, rows, tol, key="residual", info=None, status=""):
    worst = max((r[key] for r in rows), default=0.0)
    return CheckReport(name, len(rows), worst, tol, worst < tol, rows, info or {}, status)


def _tol(M, analytic, tol=None):
    if tol is not None:
        return float(tol)
    return analytic if M.jet_mode == ANALYTIC else FD_TOL


def _pt(u):
    return [float(x) for x in np.asarray(u, float).reshape(-1)]


def _require_curved(M, what):
    if not M.space.curved:
        raise PreconditionError(f"{what} needs CP^n or CH^n (c != 0)", point=None, residual=None)


def _outside(fr, V):
    """Norm of the part of each column of V not tangent to M (max over columns)."""
    c = fr.tangent_coords(V)
    rest = V - fr.tangent @ c
    return float(np.max(np.sqrt(np.abs(np.sum(rest * fr.g[:, None] * rest, axis=0))))) if V.size else 0.0


def _require_coisotropic(M, u):
    cls = classify(M, u)
    if not cls.coisotropic:
        fr = frame_at(M, u)
        res = _outside(fr, apply_J_columns(fr.normal))
        raise PreconditionError(f"not coisotropic at u={_pt(u)} (J(nu M) leaves TM by {res:.3e})",
                                point=_pt(u), residual=res)
    return cls


# ---------------------------------------------------------------------------
# loops


def sample_loops(M, u0, count, rng, max_side=0.3, steps=32):
    """Plaquettes and circles based at u0 in random coordinate planes.

    For curves (k = 1) the only null-homotopic loops are backtracking ones.
    """
    u0 = np.asarray(u0, float)
    k = M.k
    loops = []
    for idx in range(count):
        side = rng.uniform(0.2, 1.0) * max_side * (1 if rng.random() < 0.5 else -1)
        if k == 1:
            d = np.array([side])
            loops.append(line(u0, u0 + d, steps).then(line(u0 + d, u0, steps)))
            continue
        i, j = sorted(rng.choice(k, size=2, replace=False))
        if idx % 2 == 0:
            loops.append(plaquette(u0, i, j, side, steps))
        else:
            r = 0.5 * abs(side)
            phi = rng.uniform(0, 2 * np.pi)
            center = u0.copy()
            center[i] -= r * np.cos(phi)
            center[j] -= r * np.sin(phi)
            C = circle(center, i, j, r, steps, phase=phi)
            loops.append(C if side > 0 else C.reversed())
    return loops


def period_loop(u0, period, steps=64):
    """Once around a closed curve with the given parameter period."""
    u0 = np.asarray(u0, float)
    return from_function(lambda s: u0 + s * period, lambda s: np.array([period]), steps)


def _gauge(M, u):
    return gauge_form(M, u)


def horizontal_lift(M, loop, phi0=0.0):
    """Lift of a parameter curve to (phi, u) with phi' = b(u) u', i.e. horizontal in the pull-back.

    Returns the lifted curve and the final fiber angle.
    """
    segs = []
    phi = float(phi0)
    for seg in loop.segments:
        def rate(s, y, seg=seg):
            return [float(_gauge(M, seg.point(s)) @ seg.velocity(s))]

        sol = solve_ivp(rate, (0.0, 1.0), [phi], method="DOP853", rtol=1e-12, atol=1e-13, dense_output=True)

        def point(s, sol=sol, seg=seg):
            return np.concatenate([[sol.sol(s)[0]], np.asarray(seg.point(s), float)])

        def velocity(s, seg=seg):
            v = np.asarray(seg.velocity(s), float)
            return np.concatenate([[float(_gauge(M, seg.point(s)) @ v)], v])

        segs.append(Segment(point, velocity))
        phi = float(sol.y[0, -1])
    return ParamCurve(tuple(segs), loop.steps), phi


def _wrap(angle):
    return float((angle + np.pi) % (2 * np.pi) - np.pi)


# ---------------------------------------------------------------------------
# coisotropic submanifolds


def check_coisotropic_lemma(M, samples, tol=None, require=True):
    """A_xi J zeta = A_zeta J xi downstairs, plus its two pull-back forms.

    With ``require=False`` the identities are evaluated even where M is not
    coisotropic (J xi is then replaced by its tangential part).
    """
    _require_curved(M, "the coisotropic lemma")
    tol = _tol(M, default_tol(M), tol)
    Mh = pullback(M.space, M)
    rows = []
    for u in samples:
        if require:
            _require_coisotropic(M, u)
        fd = shape_only_data(M, u)
        fr = fd.frame
        Jt = fr.tangent_coords(apply_J_columns(fr.normal))  # (k, m): J xi_a in tangent coordinates
        m = fr.m
        item3, term = 0.0, 0.0
        for a in range(m):
            for b in range(m):
                lhs = fd.shape[a] @ Jt[:, b]
                rhs = fd.shape[b] @ Jt[:, a]
                item3 = max(item3, float(np.linalg.norm(lhs - rhs)))
                term = max(term, float(np.linalg.norm(lhs)))
        p = lift_point(u)
        fdh = shape_only_data(Mh, p)
        R = normal_curvature(Mh, p, fdh)
        item1 = float(np.max(np.abs(R[0]))) if R.size else 0.0
        A = fdh.shape
        item2 = 0.0
        for a in range(A.shape[0]):
            for b in range(a + 1, A.shape[0]):
                C = A[a] @ A[b] - A[b] @ A[a]
                item2 = max(item2, float(np.linalg.norm(C[:, 0])))
        rows.append({"point": _pt(u), "item1": item1, "item2": item2, "item3": item3,
                     "max_term": term, "residual": max(item1, item2, item3)})
    return _report("coisotropic-lemma", rows, tol)


def check_vertical_parallelism(M, samples, tol=None):
    """Coisotropic exactly when fiber-wise lifted normals are parallel along the fibers."""
    _require_curved(M, "vertical parallelism")
    tol = _tol(M, default_tol(M), tol)
    rows = []
    for u in samples:
        cois = classify(M, u).coisotropic
        d = vertical_normal_derivative(M.space, M, u)
        agree = cois == (d < tol)
        rows.append({"point": _pt(u), "coisotropic": cois, "vertical_derivative": d, "agree": agree,
                     "residual": (d if cois else 0.0) + (0.0 if agree else 1.0)})
    return _report("vertical-parallelism", rows, tol)


def check_holonomy_identification(M, loops, tol=1e-5, require=True):
    """Downstairs loop transport against the pull-back transport around the lift closed by a fiber arc."""
    _require_curved(M, "holonomy identification")
    Mh = pullback(M.space, M)
    rows = []
    for loop in loops:
        u0 = loop.start
        if require:
            _require_coisotropic(M, u0)
        fr = frame_at(M, u0)
        G = loop_transport(M, loop, fr)
        lifted, phi = horizontal_lift(M, loop)
        closing = line(np.concatenate([[phi], u0]), lift_point(u0), loop.steps)
        frh = frame_at(Mh, lift_point(u0))
        Gh = loop_transport(Mh, lifted.then(closing), frh)
        Q = gram(fr.normal, frh.normal, fr.g)
        diff = float(np.max(np.abs(G - Q @ Gh @ Q.T))) if G.size else 0.0
        rows.append({"point": _pt(u0), "fiber_angle": phi, "transport_defect": float(np.max(np.abs(G - np.eye(len(G)))))
                     if G.size else 0.0, "residual": diff})
    return _report("holonomy-identification", rows, tol)


def check_script_r_tensor(M, samples, tol=None, pairs=50, seed=0, require=True):
    """Algebraic curvature tensor on the pull-back normal space: symmetries, image, sign of sectional values."""
    _require_curved(M, "the pull-back curvature tensor")
    tol = _tol(M, 1e-9, tol)
    Mh = pullback(M.space, M)
    rng = np.random.default_rng(seed)
    rows = []
    for u in samples:
        if require:
            _require_coisotropic(M, u)
        S = script_R_tensor(Mh, lift_point(u))
        props = S.properties()
        m = S.tensor.shape[0]
        worst_sec, mismatch = 0.0, 0
        for x, y in _normal_pairs(S, m, pairs, rng):
            sec = S.sectional(x, y)
            worst_sec = max(worst_sec, sec)
            zero_sec = abs(sec) < 1e-9
            commuting = S.commutator_norm(x, y) < 1e-4
            mismatch += int(zero_sec != commuting)
        sym = max(props["i"], props["ii"], props["iii"], props["iv"])
        rows.append({"point": _pt(u), "symmetries": sym, "image_angle": props["v"], "max_sectional": worst_sec,
                     "zero_sectional_mismatches": mismatch,
                     "residual": max(sym, max(worst_sec, 0.0), 1e-4 * props["v"], float(mismatch))})
    return _report("script-r-tensor", rows, tol)


def _normal_pairs(S, m, count, rng):
    """Random unit pairs, half of them drawn inside a commuting family when one exists."""
    out = []
    comm = None
    if m >= 2:
        # directions x with A_x commuting with A_0 (nonempty: contains xi_0)
        rows = np.array([skew_to_vec(S.commutator(np.eye(m)[0], e)) for e in np.eye(m)]).T
        comm = nullspace(rows, 1e-10) if rows.size else np.eye(m)
    for idx in range(count):
        x, y = rng.standard_normal((2, m))
        if comm is not None and idx % 2 == 1 and comm.shape[1] >= 1:
            x = np.eye(m)[0]
            y = comm @ rng.standard_normal(comm.shape[1])
        out.append((x / np.linalg.norm(x), y / np.linalg.norm(y)))
    return out


# ---------------------------------------------------------------------------
# Lagrangian submanifolds


def check_lagrangian_intertwiner(M, loops, tol=1e-5, require=True):
    """Normal transport of J v equals J times the Levi-Civita transport of v.

    ``require=False`` only asks for J(TM) to be normal (totally real M).
    """
    rows = []
    for loop in loops:
        u0 = loop.start
        cls = classify(M, u0)
        if require and cls.label != LAGRANGIAN:
            raise PreconditionError(f"not Lagrangian at u={_pt(u0)} (label {cls.label})", point=_pt(u0),
                                    residual=cls.coisotropy_defect)
        fr = frame_at(M, u0)
        T = tangent_transport(M, loop, fr.tangent)
        N = parallel_transport(M, loop, apply_J_columns(fr.tangent))
        Gt = fr.tangent_signs[:, None] * gram(fr.tangent, T, fr.g)
        Gn = gram(fr.normal, N, fr.g)
        rows.append({"point": _pt(u0), "tangent_rotation": float(np.max(np.abs(Gt - np.eye(fr.k)))),
                     "normal_rotation": float(np.max(np.abs(gram(apply_J_columns(fr.tangent), N, fr.g)
                                                            - np.eye(fr.k)))) if Gn.size else 0.0,
                     "residual": float(np.max(np.abs(N - apply_J_columns(T))))})
    return _report("lagrangian-intertwiner", rows, tol)


# ---------------------------------------------------------------------------
# curves


def _unit_tangent(M, u):
    geom = local_geometry(M, u)
    X = geom.coord_tangent[:, 0]
    n = np.sqrt(float(np.sum(X * geom.g * X)))
    return geom.jet.point, X / n, n, float(geom.gauge[0])


def curve_acceleration(M, u, h=1e-4):
    """nabla_T T of a curve in CP^n from first derivatives only (central differences of T)."""
    u = np.asarray(u, float)
    z, T, speed, b = _unit_tangent(M, u)
    Tp = _unit_tangent(M, u + h)[1]
    Tm = _unit_tangent(M, u - h)[1]
    dT = (Tp - Tm) / (2 * h)
    return horizontal_project(M.space, z, dT + b * apply_J_columns(T[:, None])[:, 0]) / speed


def check_curve_pullback(M, samples, tol=None, flat_tol=PREDICATE_TOL):
    """Pull-back shape operators of a curve and the holomorphic-circle criterion."""
    if M.k != 1 or M.space.c <= 0 or M.space.n < 2:
        raise PreconditionError("the curve check needs a curve (k = 1) in CP^n with n > 1", point=None, residual=None)
    tol = _tol(M, 1e-7, tol)
    Mh = pullback(M.space, M)
    rows = []
    for u in samples:
        fd = shape_only_data(M, u)
        fr = fd.frame
        T = fr.tangent[:, 0]
        JT = apply_J_columns(T[:, None])[:, 0]
        comp = nullspace(fr.normal_coords(JT).T, 1e-12)
        Xi = fr.normal @ comp  # normals orthogonal to JT
        p = lift_point(u)
        fdh = shape_only_data(Mh, p)
        frh = fdh.frame
        # orient the horizontal pull-back tangent like T
        s = np.sign(float(np.sum(frh.tangent[:, 1] * fr.g * T)))
        flip = np.diag([1.0, s])
        b = float(fd.shape_operator(JT)[0, 0])
        AJ = flip @ fdh.shape_operator(JT) @ flip
        res = float(np.max(np.abs(AJ - np.array([[0.0, 1.0], [1.0, b]]))))
        avals = []
        for c in range(Xi.shape[1]):
            a = float(fd.shape_operator(Xi[:, c])[0, 0])
            avals.append(a)
            Ax = flip @ fdh.shape_operator(Xi[:, c]) @ flip
            res = max(res, float(np.max(np.abs(Ax - np.array([[0.0, 0.0], [0.0, a]])))))
            C = Ax @ AJ - AJ @ Ax
            res = max(res, float(np.max(np.abs(C - np.array([[0.0, -a], [a, 0.0]])))))
        R = normal_curvature(Mh, p, fdh)
        acc = curve_acceleration(M, u)
        kappa = float(np.sum(acc * fr.g * JT))
        perp = float(np.linalg.norm(acc - kappa * JT))
        flat = float(np.max(np.abs(R))) if R.size else 0.0
        amax = max((abs(a) for a in avals), default=0.0)
        preds = (flat < flat_tol, amax < flat_tol, perp < flat_tol)
        agree = len(set(preds)) == 1
        rows.append({"point": _pt(u), "matrix_residual": res, "pullback_curvature": flat,
                     "max_shape_entry": amax, "kappa": kappa, "acceleration_off_JT": perp,
                     "flat": preds[0], "shape_zero": preds[1], "holomorphic_circle": preds[2],
                     "agree": agree, "residual": res + (0.0 if agree else 1.0)})
    info = {key: all(r[key] for r in rows) for key in ("flat", "shape_zero", "holomorphic_circle")}
    return _report("curve-pullback", rows, tol, info=info)


# ---------------------------------------------------------------------------
# totally real submanifolds


def _require_totally_real(M, u):
    cls = classify(M, u)
    if cls.dim_D != 0:
        raise PreconditionError(f"not totally real at u={_pt(u)} (label {cls.label})", point=_pt(u),
                                residual=float(np.min(cls.angles)) if cls.angles.size else None)
    return cls


def check_holonomy_injection(M, loops, tol=1e-5, require=True):
    """Totally real M: horizontal lifts of null-homotopic loops close and carry the same transport."""
    _require_curved(M, "holonomy injection")
    Mh = pullback(M.space, M)
    rows = []
    for loop in loops:
        u0 = loop.start
        if require:
            _require_totally_real(M, u0)
        fr = frame_at(M, u0)
        G = loop_transport(M, loop, fr)
        lifted, phi = horizontal_lift(M, loop)
        closing = abs(_wrap(phi))
        frh = frame_at(Mh, lift_point(u0))
        closed = lifted.then(line(np.concatenate([[phi], u0]), lift_point(u0), 1))
        Gh = loop_transport(Mh, closed, frh)
        Q = gram(fr.normal, frh.normal, fr.g)
        diff = float(np.max(np.abs(G - Q @ Gh @ Q.T))) if G.size else 0.0
        rows.append({"point": _pt(u0), "lift_closing": closing, "residual": max(diff, closing)})
    return _report("holonomy-injection", rows, tol)


def _normal_part(fr, V):
    return fr.normal @ gram(fr.normal, V, fr.g)


def _orth_frame(fr, V):
    return orthonormalize(_normal_part(fr, V), fr.g, tol=1e-10)


def _parallel_defect(M, u, bundle, h=1e-3):
    """Largest part of nabla_perp of a smooth frame of ``bundle`` leaving the bundle (4th-order differences)."""
    u = np.asarray(u, float)
    fr = frame_at(M, u)
    W = _orth_frame(fr, bundle(u, fr))
    if W.shape[1] == 0:
        return 0.0
    g = fr.g
    b = fr.geometry.gauge
    worst = 0.0
    for p in range(M.k):
        e = np.zeros(M.k)
        e[p] = h
        vals = []
        for t in (2, 1, -1, -2):
            frt = frame_at(M, u + t * e)
            vals.append(procrustes_align(_orth_frame(frt, bundle(u + t * e, frt)), W, g))
        dW = (-vals[0] + 8 * vals[1] - 8 * vals[2] + vals[3]) / (12 * h) + b[p] * apply_J_columns(W)
        cov = _normal_part(fr, dW)
        out = cov - W @ gram(W, cov, g)
        worst = max(worst, float(np.max(np.abs(out))))
    return worst


def bundle_JTM(u, fr):
    return apply_J_columns(fr.tangent)


def bundle_from_chain(tangent_N, with_J=False):
    """nu_N M = TN cap nu M (optionally plus its J-image) from a tangent-space function of N."""

    def bundle(u, fr):
        B = _orth_frame(fr, tangent_N(fr.point))
        return np.hstack([B, apply_J_columns(B)]) if with_J else B

    return bundle


def _check_subbundle(fr, V, u):
    if V.shape[1] == 0:
        return
    rest = V - _normal_part(fr, V)
    if np.max(np.abs(rest)) > 1e-6 * max(1.0, float(np.max(np.abs(V)))):
        raise InvalidInputError(f"candidate bundle is not normal at u={_pt(u)}")


def check_reduction_conditions(M, bundle, samples, tol=None):
    """Parallelism of W0, then J-invariance of TM + W0 (condition 1) or N^1 in W0 and W0 orthogonal to J(TM + W0) (condition 2)."""
    tol = _tol(M, default_tol(M), tol)
    rows = []
    for u in samples:
        _require_totally_real(M, u)
        fd = shape_only_data(M, u)
        fr = fd.frame
        raw = bundle(u, fr)
        _check_subbundle(fr, raw, u)
        W = _orth_frame(fr, raw)
        g = fr.g
        par = _parallel_defect(M, u, bundle)
        V = np.hstack([fr.tangent, W])
        JV = apply_J_columns(V)
        c1 = float(np.max(principal_angles(JV, V, g)))
        k = fr.k
        alpha_vecs = np.array([fd.alpha_vector(np.eye(k)[i], np.eye(k)[j]) for i in range(k)
                               for j in range(i, k)]).T
        n1 = float(np.max(np.abs(alpha_vecs - W @ gram(W, alpha_vecs, g)))) if W.size else float(np.max(np.abs(alpha_vecs)))
        orth = float(np.max(np.abs(gram(W, JV, g)))) if W.size else 0.0
        c2 = max(n1, orth)
        rows.append({"point": _pt(u), "rank": W.shape[1], "parallel_defect": par, "condition_1": c1,
                     "first_normal_outside": n1, "orthogonality": orth, "condition_2": c2,
                     "residual": max(par, min(c1, c2))})
    holds = []
    if rows and all(r["parallel_defect"] < tol for r in rows):
        if all(r["condition_1"] < tol for r in rows):
            holds.append("1")
        if all(r["condition_2"] < tol for r in rows):
            holds.append("2")
    info = {"parallel": all(r["parallel_defect"] < tol for r in rows), "conditions": holds}
    return _report("reduction-conditions", rows, tol, info=info)


def _derivative_family(M, level, h):
    """Smooth spanning families F_0 = J(TM), F_{j+1} = F_j + nabla_perp F_j (nested central differences)."""

    def F(u, j):
        fr = frame_at(M, u)
        if j == 0:
            return apply_J_columns(fr.tangent)
        base = F(u, j - 1)
        cols = [base]
        b = fr.geometry.gauge
        for p in range(M.k):
            e = np.zeros(M.k)
            e[p] = h
            d = (F(u + e, j - 1) - F(u - e, j - 1)) / (2 * h) + b[p] * apply_J_columns(base)
            cols.append(_normal_part(fr, d))
        return np.hstack(cols)

    return F


def build_W(M, u, h=2e-3, rank_tol=1e-4, max_iter=10):
    """Smallest parallel subbundle containing J(TM) at u, by iterated covariant derivatives.

    Returns (orthonormal basis, stabilized flag, iterations, principal-angle change at the last step).
    """
    u = np.asarray(u, float)
    fr = frame_at(M, u)
    F = _derivative_family(M, max_iter, h)

    def span(V):
        Vn = gram(fr.normal, V, fr.g)  # normal coordinates (Riemannian)
        U, s, _ = np.linalg.svd(Vn, full_matrices=False)
        r = int(np.sum(s > rank_tol * max(1.0, s[0] if s.size else 1.0)))
        return fr.normal @ U[:, :r]

    W = span(F(u, 0))
    for it in range(1, max_iter + 1):
        W_next = span(F(u, it))
        if W_next.shape[1] == W.shape[1]:
            change = float(np.max(principal_angles(W, W_next, fr.g))) if W.shape[1] else 0.0
            return W, True, it, change
        W = W_next
    return W, False, max_iter, float("nan")


def check_totally_real_splitting(M, chain, samples, tol=None, cfg=None, extra_loops=(), h=2e-3):
    """Parallel splitting nu M = nu_N M + nu N|M, the bundle W, its curvature and holonomy."""
    if not chain or "tangent_N" not in chain:
        raise InvalidInputError("chain data (tangent space of the totally real, totally geodesic N) missing")
    _require_curved(M, "the totally real splitting")
    tol = _tol(M, default_tol(M), tol)
    cfg = cfg or HolonomyConfig()
    nuN = bundle_from_chain(chain["tangent_N"])

    for u in samples:
        fr = frame_at(M, u)
        TN = orthonormalize(chain["tangent_N"](fr.point), fr.g)
        off = float(np.max(np.abs(fr.tangent - TN @ gram(TN, fr.tangent, fr.g))))
        if "dim_N" in chain and TN.shape[1] != chain["dim_N"]:
            off = max(off, 1.0)  # the point itself is not in N
        if off > 1e-6:
            raise InvalidInputError(f"M is not contained in the chain space N at u={_pt(u)} (off by {off:.3e})")

    def complement(u, fr):
        B = _orth_frame(fr, nuN(u, fr))
        return fr.normal - B @ gram(B, fr.normal, fr.g)

    rows = []
    c4 = M.space.c / 4.0
    for idx, u in enumerate(samples):
        u = np.asarray(u, float)
        _require_totally_real(M, u)
        fd = shape_only_data(M, u)
        fr = fd.frame
        g = fr.g
        # (a) both summands parallel
        par = max(_parallel_defect(M, u, nuN), _parallel_defect(M, u, complement))
        # (b) W
        W, stabilized, iters, change = build_W(M, u, h=h)
        w = W.shape[1]
        # (c) curvature on nu N|M
        C = _orth_frame(fr, complement(u, fr))
        R = normal_curvature(M, u, fd)
        JE = apply_J_columns(fr.tangent)
        curv = 0.0
        for i in range(fr.k):
            for j in range(i + 1, fr.k):
                for a in range(C.shape[1]):
                    xi = C[:, a]
                    lhs = fr.normal @ (R[i, j] @ gram(fr.normal, xi[:, None], g)[:, 0])
                    rhs = c4 * (float(np.sum(JE[:, j] * g * xi)) * JE[:, i] - float(np.sum(JE[:, i] * g * xi)) * JE[:, j])
                    curv = max(curv, float(np.max(np.abs(lhs - rhs))))
        # (d) holonomy algebra restricted to W (first sample only; it is the costly step)
        alg_dim = None
        trivial_off_W = None
        if idx == 0:
            est = holonomy_algebra(M, u, HolonomyConfig(**{**cfg.__dict__, "extra_loops": tuple(extra_loops)}))
            Qw = gram(est.normal_frame, W, g)
            Qc = nullspace(Qw.T, 1e-10)
            restricted = [Qw.T @ A @ Qw for A in est.algebra]
            basis, _ = span_basis(restricted, cfg.rank_tol, cfg.abs_tol)
            alg_dim = len(basis)
            trivial_off_W = max([float(np.max(np.abs(A @ Qc))) for A in est.algebra if Qc.size], default=0.0)
        so_dim = w * (w - 1) // 2
        # (e) W = J(TM) iff totally geodesic
        alpha_norm = float(np.max(np.abs(fd.alpha))) if fd.alpha.size else 0.0
        equiv = (w == fr.k) == (alpha_norm < tol)
        residual = max(par, curv)
        residual += 0.0 if stabilized else 1.0
        residual += 0.0 if equiv else 1.0
        if alg_dim is not None:
            residual += 0.0 if alg_dim == so_dim else 1.0
            residual = max(residual, trivial_off_W)
        rows.append({"point": _pt(u), "parallel_defect": par, "W_rank": w, "W_stabilized": stabilized,
                     "W_iterations": iters, "W_angle_change": change, "curvature_residual": curv,
                     "algebra_dim_on_W": alg_dim, "so_W_dim": so_dim, "alpha_norm": alpha_norm,
                     "item3_agree": equiv, "residual": residual})
    info = {"W_rank": rows[0]["W_rank"] if rows else None,
            "algebra_dim_on_W": rows[0]["algebra_dim_on_W"] if rows else None,
            "stabilized": all(r["W_stabilized"] for r in rows)}
    return _report("totally-real-splitting", rows, tol, info=info,
                   status="" if info["stabilized"] else "not-stabilized")


# ---------------------------------------------------------------------------
# complex submanifolds


def relative_nullity(fd, rel_tol=1e-8):
    """Common kernel of the shape operators, in tangent-frame coordinates."""
    A = fd.shape
    k = fd.frame.k
    if A.shape[0] == 0:
        return np.eye(k)
    stacked = A.reshape(-1, k)
    _, s, Vt = np.linalg.svd(stacked)
    rank = int(np.sum(s > rel_tol * max(1.0, s[0] if s.size else 1.0)))
    return Vt[rank:].T


def check_complex_nullity(M, samples, tol=None, require=True, directions="nullity"):
    """R_perp(X, JX) = -(c/2) J on the normal space for unit X in the relative nullity.

    ``directions="all"`` evaluates the identity on a full tangent frame instead
    (it then fails wherever some shape operator is nonzero).
    """
    tol = _tol(M, 1e-6, tol)
    c = M.space.c
    rows = []
    for u in samples:
        cls = classify(M, u)
        if require and cls.label != "Complex":
            raise PreconditionError(f"not a complex submanifold at u={_pt(u)} (label {cls.label})",
                                    point=_pt(u), residual=None)
        fd = shape_only_data(M, u)
        fr = fd.frame
        Nul = relative_nullity(fd) if directions == "nullity" else np.eye(fr.k)
        R = normal_curvature(M, u, fd)
        JN = fr.normal_coords(apply_J_columns(fr.normal))
        worst = 0.0
        for col in range(Nul.shape[1]):
            x = Nul[:, col]
            y = fr.tangent_coords(apply_J_columns((fr.tangent @ x)[:, None]))[:, 0]
            Rx = np.einsum("i,j,ijba->ba", x, y, R)
            worst = max(worst, float(np.max(np.abs(Rx + 0.5 * c * JN)))) if Rx.size else worst
        rows.append({"point": _pt(u), "nullity": int(Nul.shape[1]), "residual": worst})
    vacuous = all(r["nullity"] == 0 for r in rows)
    return _report("complex-nullity", rows, tol, info={"vacuous": vacuous}, status="vacuous" if vacuous else "")


# ---------------------------------------------------------------------------
# lift identities and structure equations


def check_lift_identities(M, samples, tol=None):
    _require_curved(M, "the lift identities")
    tol = _tol(M, default_tol(M), tol)
    rows = []
    for u in samples:
        res = lift_identity_residuals(M.space, M, u)
        rows.append({"point": _pt(u), **res, "residual": max(res.values())})
    return _report("lift-identities", rows, tol)


def check_structure_equations(M, samples, tol=1e-4):
    """Gauss, Codazzi and Ricci residuals (difference-quotient based, hence the looser default)."""
    rows = []
    for u in samples:
        res = gauss_codazzi_ricci_residual(M, u)
        rows.append({"point": _pt(u), **res, "residual": max(res.values())})
    return _report("structure-equations", rows, tol)


# ---------------------------------------------------------------------------
# suite runner


@dataclass(frozen=True)
class VerifyOptions:
    seed: int = 0
    samples: int = 4
    loops: int = 8
    tol: Optional[float] = None
    steps: int = 32
    radii: Optional[tuple] = None
    threads: int = 1
    bundle: str = "auto"


def _samples(entry, opts):
    rng = np.random.default_rng(opts.seed)
    pts = [np.asarray(entry.default_point, float)]
    return pts + entry.sample_points(opts.samples - 1, rng) if opts.samples > 1 else pts


def _loops(entry, opts):
    rng = np.random.default_rng(opts.seed + 1)
    return sample_loops(entry.immersion, entry.default_point, opts.loops, rng, steps=opts.steps)


def _bundle(entry, name):
    chain = entry.ground_truth.chain or {}
    if name == "auto":
        name = "chain-normal" if "tangent_N" in chain else "JTM"
    if name == "JTM":
        return bundle_JTM
    if name in ("chain-normal", "chain-normal+J"):
        if "tangent_N" not in chain:
            raise InvalidInputError(f"bundle {name!r} needs chain data, which {entry.name} does not have")
        return bundle_from_chain(chain["tangent_N"], with_J=name.endswith("+J"))
    raise InvalidInputError(f"unknown bundle {name!r}; use auto, JTM, chain-normal or chain-normal+J")


def _holonomy_cfg(opts):
    kw = {"steps": opts.steps, "seed": opts.seed, "threads": opts.threads}
    if opts.radii:
        kw["radii"] = tuple(opts.radii)
    return HolonomyConfig(**kw)


def _splitting(entry, opts):
    M = entry.immersion
    gt = entry.ground_truth
    extra = ()
    if M.k == 1 and gt.period:
        extra = (period_loop(entry.default_point, gt.period, max(64, opts.steps)),)
    return check_totally_real_splitting(M, gt.chain, _samples(entry, opts)[:2], opts.tol, _holonomy_cfg(opts),
                                        extra)


CHECKS = {
    "coisotropic-lemma": lambda e, o: check_coisotropic_lemma(e.immersion, _samples(e, o), o.tol),
    "complex-nullity": lambda e, o: check_complex_nullity(e.immersion, _samples(e, o), o.tol),
    "curve-pullback": lambda e, o: check_curve_pullback(e.immersion, _samples(e, o), o.tol),
    "holonomy-identification": lambda e, o: check_holonomy_identification(
        e.immersion, _loops(e, o), o.tol if o.tol is not None else 1e-5),
    "holonomy-injection": lambda e, o: check_holonomy_injection(
        e.immersion, _loops(e, o), o.tol if o.tol is not None else 1e-5),
    "lagrangian-intertwiner": lambda e, o: check_lagrangian_intertwiner(
        e.immersion, _loops(e, o), o.tol if o.tol is not None else 1e-5),
    "lift-identities": lambda e, o: check_lift_identities(e.immersion, _samples(e, o), o.tol),
    "reduction-conditions": lambda e, o: check_reduction_conditions(
        e.immersion, _bundle(e, o.bundle), _samples(e, o), o.tol),
    "script-r-tensor": lambda e, o: check_script_r_tensor(e.immersion, _samples(e, o), o.tol, seed=o.seed),
    "structure-equations": lambda e, o: check_structure_equations(
        e.immersion, _samples(e, o), o.tol if o.tol is not None else 1e-4),
    "totally-real-splitting": _splitting,
    "vertical-parallelism": lambda e, o: check_vertical_parallelism(e.immersion, _samples(e, o), o.tol),
}


def check_names():
    return sorted(CHECKS)


def run_check(name, entry, opts=None):
    if name not in CHECKS:
        raise InvalidInputError(f"unknown check {name!r}; known: {', '.join(check_names())}")
    return CHECKS[name](entry, opts or VerifyOptions())


def run_suite(entry, opts=None, names=None):
    """Run several checks on one entry.

    Returns (reports, skipped) ordered by check name; a check whose hypothesis
    does not hold for the entry is listed in ``skipped`` with the reason.
    """
    opts = opts or VerifyOptions()
    names = sorted(names or CHECKS)

    def one(name):
        try:
            return name, run_check(name, entry, opts), None
        except (PreconditionError, InvalidInputError) as exc:
            return name, None, str(exc)
        except HolabError as exc:
            return name, None, f"error: {exc}"

    if opts.threads > 1:
        with ThreadPoolExecutor(max_workers=opts.threads) as ex:
            results = list(ex.map(one, names))
    else:
        results = [one(n) for n in names]
    reports = [r for _, r, _ in results if r is not None]
    skipped = [{"check": n, "reason": why} for n, r, why in results if r is None]
    return reports, skipped


def as_entry(M, point, name="spec", box=None):
    """Wrap a bare immersion so it can go through the suite runner."""
    point = tuple(float(x) for x in np.asarray(point, float).reshape(-1))
    box = box or tuple((x - 0.1, x + 0.1) for x in point)
    return CatalogEntry(name, "user immersion", M, GroundTruth(""), point, box)
