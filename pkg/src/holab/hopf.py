"""Hopf fibrations S^{2n+1} -> CP^n and H^{n+1}_1 -> CH^n.

The lift identities are checked against an independent computation in an
affine chart of the base, w = (z without z_k) / z_k, where the Fubini-Study
type metric, its Christoffel symbols and the horizontal lift of chart vectors
are written out explicitly.
"""

from dataclasses import dataclass

import numpy as np

from .ambient import apply_J, apply_J_columns, inner, to_complex, to_real
from .errors import InvalidInputError, InvalidRepresentativeError, UnsupportedModelError
from .linalg import gram, procrustes_align
from .submanifold import BASE, TOTAL, Immersion, frame_at, local_geometry

PULLBACK_NORM_TOL = 1e-10


def _require_curved(space):
    if not space.curved:
        raise UnsupportedModelError("the flat model has no Hopf fibration")


def _target(space):
    return 1.0 if space.c > 0 else -1.0


def horizontal_project(space, z, v):
    """Remove the position and fiber components of v at z (metric-aware)."""
    _require_curved(space)
    z = np.asarray(z, float)
    v = np.asarray(v, float)
    Jz = apply_J(space, z)
    zz = inner(space, z, z)
    out = v - (inner(space, v, z) / zz)[..., None] * z
    return out - (inner(space, out, Jz) / zz)[..., None] * Jz


def hopf_vector(space, z):
    _require_curved(space)
    return apply_J(space, np.asarray(z, float))


def _rotate(theta, v):
    """e^{i theta} v on interleaved arrays (last axis)."""
    return to_real(np.exp(1j * theta) * to_complex(v))


def pullback(space, M):
    """Pull-back immersion (theta, u) -> e^{i theta} z(u) into the Hopf total space.

    The fiber parameter comes first, so the first coordinate vector is the Hopf
    vector J eta.
    """
    _require_curved(space)
    if M.space != space:
        raise InvalidInputError("immersion lives in a different ambient space")
    if M.level != BASE:
        raise InvalidInputError("only base-level immersions can be pulled back")
    k = M.k
    g = space.metric
    target = _target(space)

    def check(z, u):
        nz = float(np.sum(z * g * z))
        if abs(nz - target) > PULLBACK_NORM_TOL:
            raise InvalidRepresentativeError(
                f"representative at u={np.asarray(u).tolist()} has norm {nz:.3e}, expected {target:+.0f}")

    def func(x):
        z = M(x[1:])
        check(z, x[1:])
        return _rotate(x[0], z)

    def jet_fn(x):
        theta, u = x[0], x[1:]
        jet = M.jets(u)
        check(jet.point, u)
        p = _rotate(theta, jet.point)
        d1 = np.empty((p.shape[0], k + 1))
        d1[:, 0] = apply_J(space, p)
        d1[:, 1:] = _rotate(theta, jet.d1.T).T
        d2 = np.empty((k + 1, k + 1, p.shape[0]))
        d2[0, 0] = -p
        rd1 = d1[:, 1:]
        d2[0, 1:] = d2[1:, 0] = apply_J_columns(rd1).T
        d2[1:, 1:] = _rotate(theta, jet.d2)
        return p, d1, d2

    name = f"pullback({M.name})" if M.name else "pullback"
    return Immersion(space, k + 1, func, jet_fn, level=TOTAL, name=name)


def lift_point(u):
    """Parameter of the pull-back over u at fiber angle 0."""
    return np.concatenate([[0.0], np.asarray(u, float).reshape(-1)])


# ---------------------------------------------------------------------------
# affine chart of the base


@dataclass(frozen=True)
class Chart:
    """Affine chart w = z_rest / z_pivot of CP^n or CH^n."""

    space: object
    pivot: int

    @property
    def eps(self):
        return self.space.c / 4.0

    def coords(self, z):
        zc = to_complex(z)
        return np.delete(zc, self.pivot) / zc[self.pivot]

    def differential(self, z, v):
        """d pi_z (v) as a chart vector (complex n-vector)."""
        zc, vc = to_complex(z), to_complex(v)
        zk, vk = zc[self.pivot], vc[self.pivot]
        return (np.delete(vc, self.pivot) * zk - np.delete(zc, self.pivot) * vk) / zk ** 2

    def metric(self, w, V, W):
        q = 1.0 + self.eps * np.vdot(w, w).real
        h = q * np.vdot(W, V) - self.eps * np.vdot(w, V) * np.conj(np.vdot(w, W))
        return float(np.real(h) / q ** 2)

    def christoffel(self, w, V, W):
        """Gamma(V, W) for the Kahler metric in holomorphic coordinates."""
        q = 1.0 + self.eps * np.vdot(w, w).real
        return -self.eps * (V * np.vdot(w, W) + W * np.vdot(w, V)) / q

    def section(self, w):
        q = 1.0 + self.eps * np.vdot(w, w).real
        return np.insert(w, self.pivot, 1.0) / np.sqrt(q)

    def lift(self, z, V):
        """Horizontal lift at z of the chart vector V at pi(z)."""
        w = self.coords(z)
        q = 1.0 + self.eps * np.vdot(w, w).real
        dq = 2.0 * self.eps * np.real(np.vdot(w, V))
        ds = np.insert(V, self.pivot, 0.0) / np.sqrt(q) - 0.5 * np.insert(w, self.pivot, 1.0) * dq * q ** -1.5
        s = to_real(self.section(w))
        hs = horizontal_project(self.space, s, to_real(ds))
        zk = to_complex(z)[self.pivot]
        return _rotate(np.angle(zk), hs)


def chart_for(space, z):
    _require_curved(space)
    if space.c < 0:
        return Chart(space, 0)
    return Chart(space, int(np.argmax(np.abs(to_complex(z)))))


def chart_jets(chart, jet):
    """Jets of w(u) = chart(z(u)) by the quotient rule (complex arrays)."""
    k = jet.d1.shape[1]
    zc = to_complex(jet.point)
    z1 = to_complex(jet.d1.T).T  # (N, k)
    z2 = to_complex(jet.d2)  # (k, k, N)
    piv = chart.pivot
    zk, zk1, zk2 = zc[piv], z1[piv], z2[:, :, piv]
    r, r1, r2 = np.delete(zc, piv), np.delete(z1, piv, axis=0), np.delete(z2, piv, axis=2)
    w = r / zk
    w1 = np.empty((r.shape[0], k), complex)
    w2 = np.empty((k, k, r.shape[0]), complex)
    for p in range(k):
        w1[:, p] = (r1[:, p] * zk - r * zk1[p]) / zk ** 2
        for q in range(k):
            w2[p, q] = (r2[p, q] / zk - (r1[:, p] * zk1[q] + r1[:, q] * zk1[p]) / zk ** 2
                        - r * zk2[p, q] / zk ** 2 + 2 * r * zk1[p] * zk1[q] / zk ** 3)
    return w, w1, w2


def _chart_tangent_projector(chart, w, W1):
    """Metric-orthogonal projection onto span_R of the chart tangent vectors."""
    k = W1.shape[1]
    G = np.array([[chart.metric(w, W1[:, i], W1[:, j]) for j in range(k)] for i in range(k)])
    Ginv = np.linalg.inv(G)

    def tangential(V):
        c = Ginv @ np.array([chart.metric(w, V, W1[:, j]) for j in range(k)])
        return W1 @ c

    return tangential


# ---------------------------------------------------------------------------
# lift identities


def check_lift_identities(space, M, u, chart_source=None, conn_h=None):
    """Residuals of the horizontal-lift identities at u.

    Upstairs quantities use the jets of ``M`` (and of its pull-back); the
    downstairs side is computed in an affine chart from ``chart_source``
    (default ``M``).  Feeding a finite-difference version of an analytic
    immersion as ``M`` and the analytic one as ``chart_source`` makes every
    residual a pure measure of the jet discretization error.

    Keys: ``dpi`` (projection of lifts), ``eq1``, ``eq2``, ``eq8``,
    ``eq9_shape``, ``eq9_connection``, ``eq10``.
    """
    _require_curved(space)
    src = M if chart_source is None else chart_source
    u = M._param(u)
    g = space.metric
    k = M.k

    geom = local_geometry(M, u)
    z = geom.jet.point
    Jz = apply_J(space, z)
    zz = float(np.sum(z * g * z))
    b = geom.gauge
    Xh = geom.coord_tangent  # horizontal lifts of d_p

    chart = chart_for(space, z)
    w, W1, W2 = chart_jets(chart, src.jets(u))
    lift = lambda V: chart.lift(z, V)
    tangential = _chart_tangent_projector(chart, w, W1)

    res = {}
    res["dpi"] = max(float(np.max(np.abs(chart.differential(z, Xh[:, p]) - W1[:, p]))) for p in range(k))

    # Eq (1): nabla'_{X^} Y^ = (nabla_X Y)^ + g(X, JY) J eta
    d1, d2 = geom.jet.d1, geom.jet.d2
    Jd1 = apply_J_columns(d1)
    db = -(np.einsum("pqd,d,d->pq", d2, g, Jz) + gram(d1, Jd1, g).T) / zz  # db[p, q] = d_p b_q
    r1 = 0.0
    for p in range(k):
        for q in range(k):
            D = d2[p, q] + db[p, q] * Jz + b[q] * Jd1[:, p] + b[p] * apply_J(space, Xh[:, q])
            lhs = D - (np.sum(D * g * z) / zz) * z
            cov = W2[p, q] + chart.christoffel(w, W1[:, p], W1[:, q])
            rhs = lift(cov) + chart.metric(w, W1[:, p], 1j * W1[:, q]) / zz * Jz  # <J eta, J eta> = zz
            r1 = max(r1, float(np.max(np.abs(lhs - rhs))))
    res["eq1"] = r1

    # Eq (2): nabla'_{J eta} X^ = nabla'_{X^} J eta = (JX)^
    r2 = 0.0
    for p in range(k):
        rhs = lift(1j * W1[:, p])
        along_fiber = apply_J(space, Xh[:, p])  # d/dt e^{it} X^ at t = 0
        along_lift = apply_J(space, Xh[:, p])  # flat derivative of J(position) along X^
        for v in (along_fiber, along_lift):
            v = v - (np.sum(v * g * z) / zz) * z
            r2 = max(r2, float(np.max(np.abs(v - rhs))))
    res["eq2"] = r2

    # upstairs second fundamental form of the pull-back, in lifted directions
    Mh = pullback(space, M)
    x0 = lift_point(u)
    fh = frame_at(Mh, x0)
    gh = local_geometry(Mh, x0)
    Nh = fh.normal
    m = Nh.shape[1]
    Hn = np.einsum("ijd,d,da->ija", gh.hess, g, Nh)  # <alpha^(d_i, d_j), xi_a>
    Cl = np.zeros((k + 1, k + 1))  # column 0: J eta, column p + 1: lift of d_p
    Cl[0, 0] = 1.0
    Cl[1:, 1:] = np.eye(k)
    Cl[0, 1:] = b
    alpha_h = np.einsum("ip,jq,ija->pqa", Cl, Cl, Hn)

    # downstairs normal frame as chart vectors
    Nc = [chart.differential(z, Nh[:, a]) for a in range(m)]

    def chart_alpha(p, q):
        cov = W2[p, q] + chart.christoffel(w, W1[:, p], W1[:, q])
        return cov - tangential(cov)

    # Eq (8): alpha^(X^, Y^) = alpha(X, Y)^
    r8 = 0.0
    for p in range(k):
        for q in range(k):
            up = Nh @ alpha_h[p + 1, q + 1]
            r8 = max(r8, float(np.max(np.abs(up - lift(chart_alpha(p, q))))))
    res["eq8"] = r8

    # Eq (9), first identity: A^_xi X^ = (A_xi X)^ - <X, J xi> J eta
    T = gh.coord_tangent
    GTinv = np.linalg.inv(gram(T, g=g))
    G1 = np.array([[chart.metric(w, W1[:, i], W1[:, j]) for j in range(k)] for i in range(k)])
    G1inv = np.linalg.inv(G1)
    r9 = 0.0
    for a in range(m):
        for p in range(k):
            up = T @ (GTinv @ (Cl[:, p + 1] @ Hn[:, :, a]))
            vals = np.array([chart.metric(w, chart_alpha(p, q), Nc[a]) for q in range(k)])
            A_X = W1 @ (G1inv @ vals)
            down = lift(A_X) - chart.metric(w, W1[:, p], 1j * Nc[a]) / zz * Jz
            r9 = max(r9, float(np.max(np.abs(up - down))))
    res["eq9_shape"] = r9

    # Eq (9), second identity, on the normal frame field aligned at u
    h = 1e-3 * (1.0 + float(np.linalg.norm(u))) if conn_h is None else conn_h

    def upstairs_normals(v):
        return procrustes_align(frame_at(Mh, lift_point(v)).normal, Nh, g)

    def chart_normals(v):
        # the same field seen downstairs: d pi of the upstairs normals, with the
        # tangential part (w.r.t. the chart-source tangent space) removed
        zv = src(v)
        Nv = procrustes_align(frame_at(Mh, lift_point(v)).normal, Nh, g)
        wv, W1v, _ = chart_jets(chart, src.jets(v))
        tang_v = _chart_tangent_projector(chart, wv, W1v)
        cols = []
        for a in range(m):
            V = chart.differential(zv, Nv[:, a])
            cols.append(V - tang_v(V))
        return np.array(cols).T

    r9c = 0.0
    JN = apply_J_columns(Nh)
    for p in range(k):
        e = np.zeros(k)
        e[p] = h
        dN = (-upstairs_normals(u + 2 * e) + 8 * upstairs_normals(u + e) - 8 * upstairs_normals(u - e)
              + upstairs_normals(u - 2 * e)) / (12 * h)
        up = gram(Nh, dN + b[p] * JN, g)
        dC = (-chart_normals(u + 2 * e) + 8 * chart_normals(u + e) - 8 * chart_normals(u - e)
              + chart_normals(u - 2 * e)) / (12 * h)
        down = np.zeros((m, m))
        for a in range(m):
            cov = dC[:, a] + chart.christoffel(w, W1[:, p], Nc[a])
            perp = cov - tangential(cov)
            for c in range(m):
                down[c, a] = chart.metric(w, perp, Nc[c])
        r9c = max(r9c, float(np.max(np.abs(up - down))))
    res["eq9_connection"] = r9c

    # Eq (10): A^_xi J eta = -(J xi^)^T and nabla^perp_{J eta} xi^ = (J xi^)^perp
    r10 = 0.0
    for a in range(m):
        up = T @ (GTinv @ Hn[0, :, a])
        JV = 1j * (Nc[a] - tangential(Nc[a]))
        tang = lift(tangential(JV))  # (J xi^)^T is the lift of the tangent part downstairs
        r10 = max(r10, float(np.max(np.abs(up + tang))))
        # derivative of e^{it} xi along the fiber, by a symmetric difference of the rotation
        ht = 1e-3
        dxi = (_rotate(ht, Nh[:, a]) - _rotate(-ht, Nh[:, a])) / (2 * np.sin(ht))
        perp_up = Nh @ gram(Nh, dxi[:, None], g)[:, 0]
        perp_rhs = lift(JV - tangential(JV))
        r10 = max(r10, float(np.max(np.abs(perp_up - perp_rhs))))
    res["eq10"] = r10
    return res


def vertical_normal_derivative(space, M, u):
    """max_a |nabla^perp_{J eta} xi^_a| on the pull-back at (0, u).

    The fiber-wise lifted normal field is t -> e^{it} xi; its flat derivative is
    J xi, and the normal connection keeps its component in the pull-back's
    normal space.
    """
    Mh = pullback(space, M)
    fr = frame_at(Mh, lift_point(u))
    N = fr.normal
    JN = apply_J_columns(N)
    proj = gram(N, JN, fr.g)
    return float(np.max(np.linalg.norm(proj, axis=0))) if N.shape[1] else 0.0


def horizontal_lift_residuals(space, M, u):
    """Max |<X^, J eta>| and |d pi(X^) - X| over the coordinate lifts at u."""
    geom = local_geometry(M, u)
    z = geom.jet.point
    Jz = apply_J(space, z)
    X = geom.coord_tangent
    vert = float(np.max(np.abs(gram(X, Jz[:, None], space.metric))))
    chart = chart_for(space, z)
    _, W1, _ = chart_jets(chart, geom.jet)
    proj = max(float(np.max(np.abs(chart.differential(z, X[:, p]) - W1[:, p]))) for p in range(M.k))
    return {"vertical": vert, "dpi": proj}
