"""Numerical toolkit for the normal holonomy of CR submanifolds of complex space forms."""

from .ambient import AmbientSpace, Model
from .errors import (
    DegenerateImmersionError,
    HolabError,
    InvalidInputError,
    InvalidRepresentativeError,
    InvalidToleranceError,
    NonconvergentLogError,
    NotFoundError,
    PreconditionError,
    UnsupportedModelError,
)
from .submanifold import Immersion

__version__ = "0.1.0"
