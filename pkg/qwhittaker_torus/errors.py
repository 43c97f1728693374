"""Exception hierarchy shared by all qwhittaker_torus modules."""


class TorusError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(TorusError):
    """Rows have the wrong shape (count, length or position range)."""


class InvalidConfigurationError(TorusError):
    """An operation that needs an interlaced configuration got one that is not."""


class SectorError(TorusError, ValueError):
    """Sector parameters violate the admissible bounds."""


class ParameterError(TorusError, ValueError):
    """Gibbs parameters or numeric inputs are out of range."""


class ParticleReferenceError(TorusError, KeyError):
    """A particle label does not exist in the configuration."""


class PathError(TorusError):
    """A face path contains a step between non-adjacent faces."""


class EnumerationLimitError(TorusError):
    """The candidate bound of an enumeration exceeds the configured cap."""


class SectorViolationError(TorusError):
    """A family chain closed a vertical loop (possible only in the degenerate m2 = 0 case)."""


class ContractViolationError(TorusError):
    """A move was applied although its rate is zero."""


class GeneratorConsistencyError(TorusError):
    """A move left the enumerated state set or two roots produced the same successor."""


class FrozenStateError(TorusError):
    """The total jump rate vanished during a simulation."""


class MissingPredecessorError(TorusError):
    """No valid predecessor exists for the requested reverse move."""
