"""Exception hierarchy shared by the solvers, the runner and the CLI.

Every error raised on purpose by rodflow derives from :class:`RodflowError` so the
CLI can map it to an exit code without catching unrelated exceptions.
"""
from typing import Optional


class RodflowError(Exception):
    """Base class for all rodflow errors."""

    exit_code: int = 1


class ConfigError(RodflowError, ValueError):
    """Invalid run configuration.

    Attributes:
        key: Dotted name of the offending key (``section.key``), if known.
    """

    exit_code = 2

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class GaugeError(RodflowError, ValueError):
    """A vorticity field with nonzero mean was handed to the stream-function inversion."""


class InsufficientDataError(RodflowError, ValueError):
    """Not enough stored history, angular modes or grid values for an audit."""


class PositivityError(RodflowError, ValueError):
    """Reconstructed orientation density is negative beyond tolerance."""


class SnapshotFormatError(RodflowError, ValueError):
    """Snapshot file does not follow the DOISPEC1 layout."""


class StabilityError(RodflowError, RuntimeError):
    """Time step exceeds the computed explicit stability bound."""

    exit_code = 3


class BlowupError(RodflowError, RuntimeError):
    """NaN or Inf appeared in the state.

    Attributes:
        step: Index of the step that produced the non-finite values.
    """

    exit_code = 3

    def __init__(self, step: int, field: str):
        self.step = step
        self.field = field
        super().__init__(f"non-finite values in {field} at step {step}")


class StructuralViolationError(RodflowError, RuntimeError):
    """A monitored structural invariant (det A > 0, realizability) failed under the abort policy."""

    exit_code = 3


class IdentityClosureError(RodflowError, RuntimeError):
    """A cancellation identity did not close within tolerance."""

    exit_code = 4
