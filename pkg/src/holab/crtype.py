"""Pointwise CR type from principal angles between J(TM), TM and the normal space."""

from dataclasses import dataclass

import numpy as np

from .ambient import apply_J_columns
from .errors import InvalidToleranceError
from .linalg import gram, principal_angles
from .submanifold import ANALYTIC, frame_at

COMPLEX = "Complex"
TOTALLY_REAL = "TotallyReal"
COISOTROPIC = "Coisotropic"
LAGRANGIAN = "Lagrangian"
GENERIC_CR = "GenericCR"
NOT_CR = "NotCR"

DEFAULT_TOL_ANALYTIC = 1e-6
DEFAULT_TOL_FD = 1e-3


@dataclass(frozen=True)
class CRClassification:
    label: str
    dim_D: int
    dim_Dperp: int
    angles: np.ndarray  # principal angles between J(TM) and TM, ascending
    tol: float
    coisotropic: bool
    coisotropy_defect: float  # largest angle between J(nu M) and TM
    anti_invariance_defect: float  # largest angle between J(D^perp) and nu M

    def as_dict(self):
        return {
            "label": self.label,
            "dim_D": self.dim_D,
            "dim_Dperp": self.dim_Dperp,
            "angles": [float(a) for a in self.angles],
            "tol": self.tol,
            "coisotropic": self.coisotropic,
            "coisotropy_defect": self.coisotropy_defect,
            "anti_invariance_defect": self.anti_invariance_defect,
        }


def default_tol(M):
    return DEFAULT_TOL_ANALYTIC if M.jet_mode == ANALYTIC else DEFAULT_TOL_FD


def _max_angle_to(A, B, g):
    """Largest angle between a vector of span(A) and the subspace span(B)."""
    if A.shape[1] == 0:
        return 0.0
    if B.shape[1] == 0 or A.shape[1] > B.shape[1]:
        return float(np.pi / 2)
    return float(np.max(principal_angles(A, B, g)))


def _d_count(angles, tol):
    count = int(np.sum(angles < tol))
    if count % 2 == 0:
        return count
    # D is J-invariant, so small angles come in pairs; look at the neighbour
    if count < angles.size and angles[count] < 10 * tol:
        return count + 1
    if count > 0 and angles[count - 1] > 0.1 * tol:
        return count - 1
    return None


def classify(M, u, tol=None):
    tol = default_tol(M) if tol is None else float(tol)
    if not (0.0 < tol < np.pi / 4):
        raise InvalidToleranceError(f"angle tolerance must lie in (0, pi/4), got {tol}")
    fr = frame_at(M, u)
    g, T, N = fr.g, fr.tangent, fr.normal
    k, n = fr.k, M.space.n
    JT = apply_J_columns(T)
    angles = np.sort(principal_angles(JT, T, g))

    # defects that do not depend on the D count
    JN = apply_J_columns(N)
    cois_defect = _max_angle_to(JN, T, g)
    coisotropic = cois_defect < tol

    dim_D = _d_count(angles, tol)
    if dim_D is None:
        return CRClassification(NOT_CR, -1, -1, angles, tol, coisotropic, cois_defect, float("nan"))

    # D = T-side principal directions with small angle; D^perp its complement in T
    Tg = gram(T, JT, g)  # cross Gram in orthonormal coordinates of T (tangent block is Riemannian here)
    U, s, _ = np.linalg.svd(Tg * fr.tangent_signs[:, None])
    Dperp = T @ U[:, dim_D:]
    anti = _max_angle_to(apply_J_columns(Dperp), N, g) if Dperp.shape[1] else 0.0
    if anti >= tol:
        return CRClassification(NOT_CR, dim_D, k - dim_D, angles, tol, coisotropic, cois_defect, anti)

    if dim_D == k:
        label = COMPLEX
    elif dim_D == 0:
        label = LAGRANGIAN if (k == n and coisotropic) else TOTALLY_REAL
    else:
        label = COISOTROPIC if coisotropic else GENERIC_CR
    return CRClassification(label, dim_D, k - dim_D, angles, tol, coisotropic, cois_defect, anti)
