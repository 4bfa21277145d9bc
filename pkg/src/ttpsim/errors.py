"""Exception hierarchy shared across the package."""


class TtpsimError(Exception):
    """Base class for all package errors."""


class OutOfDomain(TtpsimError):
    """Position or time outside a provider's validity region."""


class NegativePressure(TtpsimError):
    """Kinetic pressure evaluated below zero."""


class NonUniformSpacing(TtpsimError):
    """Grid axes are not uniformly spaced."""


class NotFound(TtpsimError):
    """Requested name is absent from the provider registry."""


class DegenerateGradient(TtpsimError):
    """Pressure gradient magnitude at or below the degeneracy threshold."""


class EmptyEnsemble(TtpsimError):
    """Statistics requested over zero surviving particles."""


class InitialTangencyViolation(TtpsimError):
    """Initial direction not orthogonal to the isobaric normal."""


class NoOracle(TtpsimError):
    """No closed-form reference trajectory for the given provider/state."""


class ParseError(TtpsimError):
    """Malformed config or grid file."""


class ValidationError(TtpsimError):
    """Structurally valid input with an invalid value."""
