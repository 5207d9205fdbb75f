"""Exception types shared across the package."""


class ServerpackError(Exception):
    """Base class for every error raised by this package."""


class CapacityViolation(ServerpackError):
    """Placed demands exceed a server's capacity (corrupt state)."""


class InvalidMove(ServerpackError):
    """A plan step references a task or server inconsistently with the state."""


class IntermediateCapacityViolation(ServerpackError):
    """Applying a plan step would push a server past the active threshold."""


class NoFit(ServerpackError):
    """No server can accept the task under the active threshold."""


class Infeasible(ServerpackError):
    """No admissible rearrangement achieves the requested goal."""


class StateMismatch(ServerpackError):
    """An after-state is not the replay of the given plan over the before-state."""


class InstanceTooLarge(ServerpackError):
    """Instance exceeds the exhaustive-search enumeration bound."""


class InfeasibleItem(ServerpackError):
    """A single demand can never fit any server under the threshold."""


class InfeasibleTotal(ServerpackError):
    """A load total is not representable at the configured granularity."""


class ParseError(ServerpackError):
    """Scenario file is not well-formed."""


class SchemaError(ServerpackError):
    """Scenario file is well-formed but violates the documented schema."""
