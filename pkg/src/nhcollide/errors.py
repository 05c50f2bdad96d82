"""Exception hierarchy shared by all modules."""


class NhcollideError(Exception):
    """Base class for all package errors."""


class RankDeficient(NhcollideError):
    """A constraint matrix does not have full row rank at the working tolerance."""


class SingularGram(NhcollideError):
    """The Gram matrix B G^-1 B^T is numerically singular."""


class NestingViolated(NhcollideError):
    """ker B is not contained in ker A at the requested tolerance."""


class MuOutOfRange(NhcollideError):
    """Restitution coefficient outside [0, 1]."""


class InadmissiblePreVelocity(NhcollideError):
    """Pre-impact velocity violates the active constraint A v = 0."""


class SingularKKT(NhcollideError):
    """The constrained-dynamics saddle system is numerically singular."""


class BisectionStall(NhcollideError):
    """Event-time bisection could not shrink the bracket."""


class GrazingImpact(NhcollideError):
    """Contact reached with |dh/dt| below the grazing tolerance; the
    reflection law is not well posed there."""


class SchemaError(NhcollideError):
    """Scene or config document failed validation.

    Carries the offending field path and a reason.
    """

    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")
