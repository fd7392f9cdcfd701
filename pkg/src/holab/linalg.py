"""Small dense linear-algebra helpers with an optional diagonal metric."""

import numpy as np
import scipy.linalg

from .errors import NonconvergentLogError


def gram(A, B=None, g=None):
    B = A if B is None else B
    if g is None:
        return A.T @ B
    return A.T @ (g[:, None] * B)


def orthonormalize(B, g=None, tol=1e-12):
    """Orthonormal basis of span(B) for a metric positive on that span.

    Rank-deficient input is tolerated: directions whose (squared, for a metric)
    singular value falls below ``tol`` relative to the largest are dropped.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.shape[1] == 0:
        return B.copy()
    if g is not None:
        # eigen-decomposition of the metric Gram matrix, so that nearly dependent
        # columns never mix in directions outside the (positive) span
        lam, V = np.linalg.eigh(gram(B, g=g))
        if lam[-1] <= 0.0:
            return np.zeros((B.shape[0], 0))
        keep = lam > tol * max(lam[-1], 1.0)
        return B @ (V[:, keep] / np.sqrt(lam[keep]))
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((B.shape[0], 0))
    return U[:, s > tol * max(s[0], 1.0)]


def procrustes_align(frame, reference, g=None):
    """Rotate the columns of ``frame`` (same span dim) to best match ``reference``."""
    M = gram(frame, reference, g)
    U, _, Vt = np.linalg.svd(M)
    return frame @ (U @ Vt)


def projector_complement(S, g):
    """G-orthogonal projector onto the complement of span(S)."""
    D = S.shape[0]
    if S.shape[1] == 0:
        return np.eye(D)
    K = gram(S, g=g)
    return np.eye(D) - S @ np.linalg.solve(K, S.T * g[None, :])


def principal_angles(A, B, g=None):
    """Principal angles (radians, ascending) between span(A) and span(B).

    The metric must be positive definite on span(A) + span(B).  Both bases are
    first written in an orthonormal basis of the joint span, then the usual
    sine/cosine split resolves small angles to machine precision.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if g is not None:
        W = orthonormalize(np.hstack([A, B]), g)
        A = gram(W, A, g)
        B = gram(W, B, g)
    QA = orthonormalize(A)
    QB = orthonormalize(B)
    k = min(QA.shape[1], QB.shape[1])
    if k == 0:
        return np.zeros(0)
    if QA.shape[1] > QB.shape[1]:
        QA, QB = QB, QA
    cos = np.clip(np.linalg.svd(QA.T @ QB, compute_uv=False)[:k], 0.0, 1.0)
    sin = np.linalg.svd(QA - QB @ (QB.T @ QA), compute_uv=False)
    sin = np.clip(np.sort(sin)[:k], 0.0, 1.0)
    ang_c = np.arccos(np.sort(cos)[::-1])
    ang_s = np.arcsin(sin)
    return np.where(ang_c < np.pi / 4, ang_s, ang_c)


def skew_to_vec(A):
    """Vectorize a skew matrix so that the Euclidean norm equals the Frobenius norm."""
    iu = np.triu_indices(A.shape[-1], 1)
    return np.sqrt(2.0) * A[..., iu[0], iu[1]]


def vec_to_skew(v, m):
    A = np.zeros((m, m))
    iu = np.triu_indices(m, 1)
    A[iu] = np.asarray(v) / np.sqrt(2.0)
    return A - A.T


def skew_part(A):
    return 0.5 * (A - A.T)


def orthogonal_log(G, max_defect=1.0):
    """Principal logarithm of a near-identity orthogonal matrix, as a skew matrix."""
    if np.linalg.norm(G - np.eye(G.shape[0]), 2) >= max_defect:
        raise NonconvergentLogError("matrix too far from the identity for a principal logarithm")
    L = scipy.linalg.logm(G)
    return skew_part(np.real(L))


def span_basis(mats, rel_tol, abs_tol=0.0):
    """Frobenius-orthonormal basis of the span of skew matrices.

    Singular values below ``rel_tol`` times the largest, or below ``abs_tol``,
    are discarded.
    """
    mats = [np.asarray(A) for A in mats]
    if not mats:
        return [], np.zeros(0)
    m = mats[0].shape[0]
    if m < 2:
        return [], np.zeros(0)
    V = np.array([skew_to_vec(A) for A in mats])
    _, s, Vt = np.linalg.svd(V, full_matrices=False)
    if s.size == 0 or s[0] <= max(abs_tol, 1e-14):
        return [], s
    keep = (s > rel_tol * s[0]) & (s > abs_tol)
    return [vec_to_skew(v, m) for v in Vt[keep]], s


def nullspace(M, rel_tol=1e-10):
    M = np.atleast_2d(M)
    _, s, Vt = np.linalg.svd(M)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > rel_tol * scale))
    return Vt[rank:].T
