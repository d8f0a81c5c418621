"""Exception hierarchy shared by all twinbias modules."""


class TwinBiasError(Exception):
    """Base class for errors raised by twinbias."""


class RangeError(TwinBiasError, ValueError):
    """An argument lies outside the supported numeric range."""


class ArithmeticOverflowError(TwinBiasError, ArithmeticError):
    """A computation would leave the checked 64-bit domain."""


class PrecisionError(TwinBiasError, ArithmeticError):
    """A requested accuracy cannot be reached under the configured caps."""


class ValidityError(TwinBiasError, ValueError):
    """A polynomial family vanishes identically modulo some prime."""


class StateError(TwinBiasError):
    """A checkpoint does not match the run it is asked to resume."""


class ResourceError(TwinBiasError):
    """A request exceeds a configured enumeration cap."""
