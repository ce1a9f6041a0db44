"""Exception hierarchy shared by every module."""


class ProxcertError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(ProxcertError, ValueError):
    pass


class SingularMatrixError(ProxcertError, ValueError):
    pass


class RankError(ProxcertError, ValueError):
    """A rank precondition failed (e.g. ``rank(A) < m``)."""


class PreconditionError(ProxcertError, ValueError):
    pass


class ResourceLimitError(ProxcertError):
    """An enumeration or search cap was exceeded.

    Caps are never silently truncated; the caller must raise the cap or pick
    a cheaper routine.
    """


class InfeasibleConeError(ProxcertError):
    """Target vector is not in the cone spanned by the supplied rays."""


class CertificationError(ProxcertError):
    """A constructed object failed one of its runtime checks.

    Always indicates an implementation bug, never a property of the input.
    """


class InstanceParseError(ProxcertError, ValueError):
    pass


class ValidationError(ProxcertError, ValueError):
    """An instance violates a structural invariant; the message names it."""
