"""Exception hierarchy shared by all holab modules."""


class HolabError(Exception):
    pass


class InvalidInputError(HolabError, ValueError):
    pass


class InvalidToleranceError(InvalidInputError):
    pass


class UnsupportedModelError(HolabError):
    pass


class InvalidRepresentativeError(InvalidInputError):
    pass


class DegenerateImmersionError(HolabError):
    """Raised when the Jacobian of an immersion is (numerically) rank deficient."""

    def __init__(self, message, u=None, t=None):
        super().__init__(message)
        self.u = u
        self.t = t


class PreconditionError(HolabError):
    """A verification check was fed an input that does not satisfy its hypotheses."""

    def __init__(self, message, point=None, residual=None):
        super().__init__(message)
        self.point = point
        self.residual = residual


class NonconvergentLogError(HolabError):
    pass


class NotFoundError(HolabError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""
