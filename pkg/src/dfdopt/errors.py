"""Exception hierarchy shared by all dfdopt modules."""


class DfdError(Exception):
    """Base class for every error raised by this package."""


class ParseError(DfdError):
    """A data or scenario file is malformed."""


class InvariantError(DfdError):
    """A record or parameter set violates one of its documented invariants."""


class DuplicateName(ParseError):
    """Two records share a name that must be unique."""


class DuplicateId(ParseError):
    """Two records share an id that must be unique."""


class NotFound(DfdError):
    """A lookup key does not exist in the loaded database."""


class UnknownMaterial(DfdError):
    """A configuration references a material absent from the database."""


class BrokenHierarchy(DfdError):
    """The component tree is incomplete, cyclic, or points at missing ids."""


class DomainError(DfdError):
    """A numeric argument is outside the function's domain."""


class MissingData(DfdError):
    """A quantity cannot be computed because its inputs were not provided."""


class MissingMaterialData(DfdError):
    """A material lacks the impact properties (hardness, sound speed) the
    ballistic-limit path requires; values are never guessed."""


class OutOfBounds(DfdError):
    """A geometric object does not fit inside the region it must occupy."""


class EmptyInput(DfdError):
    """An aggregate was requested over an empty collection."""


class ConfigError(DfdError):
    """A simulation was set up with inconsistent inputs."""


class DecodeError(DfdError):
    """A genome value falls outside the domain of its gene specification."""


class InitializationError(DfdError):
    """No feasible individual was found within the sampling attempt budget."""


class NegativeFlux(DfdError):
    """A debris flux table contains a negative flux entry."""


class RepairFailed(DfdError):
    """Position repair exhausted the grid; the individual must be discarded."""
