"""Standard complex space forms: flat C^n, CP^n (c = 4) and CH^n (c = -4).

Complex vectors are stored as interleaved real pairs ``(Re z0, Im z0, Re z1,
Im z1, ...)``.  For the curved models the vectors live in C^{n+1} (the total
space of the Hopf fibration); for c = -4 the first complex coordinate carries
the negative sign of the signature-2 scalar product.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidInputError, UnsupportedModelError


class Model(str, Enum):
    FLAT = "Flat"
    PROJECTIVE = "Projective"
    HYPERBOLIC = "Hyperbolic"


_MODELS = {0: Model.FLAT, 4: Model.PROJECTIVE, -4: Model.HYPERBOLIC}


@dataclass(frozen=True)
class AmbientSpace:
    c: int
    n: int

    def __post_init__(self):
        if self.c not in _MODELS:
            raise UnsupportedModelError(f"c must be one of 0, 4, -4 (got {self.c})")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidInputError(f"complex dimension must be a positive integer (got {self.n})")

    @property
    def model(self):
        return _MODELS[self.c]

    @property
    def curved(self):
        return self.c != 0

    @property
    def complex_dim(self):
        """Number of complex coordinates of a stored vector."""
        return self.n + 1 if self.curved else self.n

    @property
    def dim(self):
        """Length of the real coordinate array of a stored vector."""
        return 2 * self.complex_dim

    @property
    def metric(self):
        g = np.ones(self.dim)
        if self.c == -4:
            g[:2] = -1.0
        return g

    def require_curved(self):
        if not self.curved:
            raise UnsupportedModelError("operation needs a Hopf fibration (c = 4 or c = -4)")


def to_real(z):
    """Complex array (..., m) -> interleaved real array (..., 2m)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def to_complex(v):
    v = np.asarray(v, dtype=float)
    return v[..., 0::2] + 1j * v[..., 1::2]


def _check(space, *vs):
    for v in vs:
        if np.shape(v)[-1] != space.dim:
            raise InvalidInputError(
                f"vector of length {np.shape(v)[-1]} does not match ambient dimension {space.dim}"
            )


def inner(space, v, w):
    """Real scalar product of the model; broadcasts over leading axes."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    _check(space, v, w)
    return np.sum(v * space.metric * w, axis=-1)


def apply_J(space, v):
    """Multiplication by i, acting on the last axis: (a, b) -> (-b, a) per pair."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[..., 0::2] = -v[..., 1::2]
    out[..., 1::2] = v[..., 0::2]
    return out


def apply_J_columns(v):
    """J applied to every column of a (D, r) array."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[0::2] = -v[1::2]
    out[1::2] = v[0::2]
    return out


def wedge(space, X, Y, Z):
    """(X ^ Y) Z = <Y, Z> X - <X, Z> Y."""
    return inner(space, Y, Z)[..., None] * X - inner(space, X, Z)[..., None] * Y


def curvature_tensor(space, X, Y, Z):
    """Curvature R(X, Y)Z of the complex space form, evaluated algebraically.

    For the curved models X, Y, Z must be horizontal vectors at a common point of
    the total space (they represent tangent vectors of the base via the Hopf map).
    """
    X, Y, Z = (np.asarray(a, dtype=float) for a in (X, Y, Z))
    _check(space, X, Y, Z)
    if space.c == 0:
        return np.zeros(np.broadcast_shapes(X.shape, Y.shape, Z.shape))
    JX, JY, JZ = apply_J(space, X), apply_J(space, Y), apply_J(space, Z)
    out = wedge(space, X, Y, Z) + wedge(space, JX, JY, Z) - 2.0 * inner(space, JX, Y)[..., None] * JZ
    return 0.25 * space.c * out


def space_form_curvature(space, X, Y, Z):
    """Curvature of the Hopf total space (S^{2n+1} or H^{n+1}_1), K = c/4."""
    return 0.25 * space.c * wedge(space, X, Y, Z)
