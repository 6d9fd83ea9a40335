from __future__ import annotations

from typing import TYPE_CHECKING, List, Optional

from dftsafety.models.utilities import _classname

if TYPE_CHECKING:
    from dftsafety.models.dft import Diagnostic
    from dftsafety.models.results import BoundInterval


class DftError(Exception):
    """This package's base Exception class."""

    message: str
    """Message describing what caused this error."""
    element: Optional[str]
    """
    The element, state, block, channel or bus the problem concerns, if any.
    """

    def __init__(self, message: str, element: Optional[str] = None):
        """
        Constructs a `DftError` concerning the specified element.
        """
        self.message = message
        self.element = element
        super().__init__(self.message)

    def __str__(self) -> str:
        if self.element is None:
            return self.message
        return "{} ({})".format(self.message, self.element)

    def __repr__(self) -> str:
        return "{}({}, {})".format(_classname(self), repr(self.message), repr(self.element))


class ValidationError(DftError):
    """
    A DFT violates one or more well-formedness rules.

    Raised by operations that require a valid DFT; `validate` itself returns
    the diagnostics instead of raising.
    """

    diagnostics: List[Diagnostic]
    """Every rule violation found."""

    def __init__(self, diagnostics: List[Diagnostic]):
        self.diagnostics = diagnostics
        summary = "; ".join(str(d) for d in diagnostics[:5])
        if len(diagnostics) > 5:
            summary += "; ..."
        super().__init__("DFT is not well-formed: {}".format(summary))

    def __repr__(self) -> str:
        return "{}({})".format(_classname(self), repr(self.diagnostics))


class DftSyntaxError(DftError):
    """A DFT text document could not be parsed."""

    line: int
    """1-based line of the offending token."""
    column: int
    """1-based column of the offending token."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(message, "line {}, column {}".format(line, column))

    def __repr__(self) -> str:
        return "{}({}, {}, {})".format(
            _classname(self), repr(self.message), repr(self.line), repr(self.column)
        )


class UnknownElementError(DftError):
    """A referenced element does not exist or has the wrong type."""

    def __init__(self, element: str, message: str = "Unknown element"):
        super().__init__(message, element)


class SeqViolationError(DftError):
    """A basic event would fail before a left sibling in a SEQ gate."""

    def __init__(self, element: str, message: str = "Failure order violates a SEQ gate"):
        super().__init__(message, element)


class MissingParameterError(DftError):
    """A rate expression refers to a parameter without value."""

    def __init__(self, parameter: str):
        super().__init__("No value for rate parameter", parameter)


class StateSpaceLimitExceeded(DftError):
    """
    State-space exploration exceeded the configured cap; use the
    approximation instead.
    """

    limit: int
    """The cap that was exceeded."""

    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(
            "State space exceeds {} states; use approximate analysis instead".format(limit)
        )

    def __repr__(self) -> str:
        return "{}({})".format(_classname(self), repr(self.limit))


class UndefinedExpectedTimeError(DftError):
    """
    An expected time is undefined because the target is reached with
    probability below one, e.g. due to fail-safe states.
    """

    witness: int
    """A state from which the target cannot be reached."""

    def __init__(self, witness: int, description: Optional[str] = None):
        self.witness = witness
        element = "state {}".format(witness)
        if description:
            element = "{}: {}".format(element, description)
        super().__init__("Target is not reached with probability one", element)

    def __repr__(self) -> str:
        return "{}({})".format(_classname(self), repr(self.witness))


class NoDegradedStatesError(DftError):
    """A degradation measure needs at least one degraded state."""

    def __init__(self, measure: str):
        super().__init__("No degraded states reachable", measure)


class CapReachedWithoutPrecisionError(DftError):
    """
    The approximation reached its state cap before the requested precision.

    The best interval computed so far is available in `interval`.
    """

    interval: BoundInterval
    """Best bounds obtained before the cap."""

    def __init__(self, interval: BoundInterval):
        self.interval = interval
        super().__init__(
            "State cap reached before requested precision: [{!r}, {!r}]".format(
                interval.lower, interval.upper
            )
        )

    def __repr__(self) -> str:
        return "{}({})".format(_classname(self), repr(self.interval))


class ConvergenceError(DftError):
    """An iterative linear solve diverged or hit its iteration cap."""

    iterations: int
    """Number of iterations performed."""

    def __init__(self, iterations: int, message: str = "Iterative solver did not converge"):
        self.iterations = iterations
        super().__init__(message, "{} iterations".format(iterations))


class ScenarioError(DftError):
    """A scenario document or scenario structure is inconsistent."""


class MissingBlockFTError(ScenarioError):
    """A block of the diagram has no block fault tree."""

    def __init__(self, block: str):
        super().__init__("Block has no block fault tree", block)


class ChannelMismatchError(ScenarioError):
    """A channel is missing from a block fault tree's input or output map."""

    def __init__(self, channel: str, message: str = "Channel not mapped by block fault tree"):
        super().__init__(message, channel)


class UnknownBlockReferenceError(ScenarioError):
    """A task, channel or assignment refers to an unknown block."""

    def __init__(self, block: str):
        super().__init__("Unknown block", block)


class SpareModuleOverlapError(ScenarioError):
    """Paths of a standby task share elements, so they are not independent modules."""

    def __init__(self, task: str, element: str):
        super().__init__("Standby paths of task {!r} share elements".format(task), element)


class NoConnectingBusError(ScenarioError):
    """A channel crosses platforms that no bus connects."""

    def __init__(self, channel: str):
        super().__init__("No bus connects the platforms of channel", channel)


class AmbiguousBusError(ScenarioError):
    """Several buses connect a channel's platforms; an explicit choice is needed."""

    buses: List[str]
    """The candidate buses."""

    def __init__(self, channel: str, buses: List[str]):
        self.buses = buses
        super().__init__(
            "Several buses ({}) connect the platforms of channel; assign one explicitly".format(
                ", ".join(buses)
            ),
            channel,
        )


class MissingHardwareFTError(ScenarioError):
    """An assigned platform or fallible bus has no hardware fault tree."""

    def __init__(self, platform: str):
        super().__init__("No hardware fault tree for platform or bus", platform)


class InconsistentAssignmentError(ScenarioError):
    """The hardware assignment is partial or maps a channel onto a bus that does not connect it."""

    def __init__(self, element: str, message: str = "Inconsistent hardware assignment"):
        super().__init__(message, element)
