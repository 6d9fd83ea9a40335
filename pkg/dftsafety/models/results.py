from __future__ import annotations

import math
from typing import Dict, List, Optional

from dftsafety.models.utilities import _classname


class MeasureParams(object):
    """Time parameters of the measures, in hours."""

    time: float
    """Horizon t of bounded measures; defaults to the lifetime."""
    lifetime: float
    """Lifetime over which AFH averages."""
    drivecycle: float
    """Duration a degraded system may still be used (FLOD, SILFO)."""

    def __init__(
        self,
        time: Optional[float] = None,
        lifetime: float = 10_000.0,
        drivecycle: float = 1.0,
    ):
        self.lifetime = float(lifetime)
        self.time = float(time) if time is not None else self.lifetime
        self.drivecycle = float(drivecycle)
        if min(self.time, self.lifetime, self.drivecycle) < 0:
            raise ValueError("Measure times must be nonnegative")

    def __repr__(self) -> str:
        return "{}(time={}, lifetime={}, drivecycle={})".format(
            _classname(self), repr(self.time), repr(self.lifetime), repr(self.drivecycle)
        )


class MeasureResult(object):
    """The value of one measure, possibly for one entry state or one valuation."""

    name: str
    """Measure name, e.g. `reliability`."""
    value: float
    """The measure value."""
    complement: Optional[float]
    """1 - value for probability measures; None otherwise."""
    time: Optional[float]
    """The horizon the measure was evaluated at, if time-bounded."""
    witness: Optional[int]
    """For MDR: the minimising degraded state."""
    witness_description: Optional[str]
    """Marking of the witness state."""
    breakdown: Optional[Dict[int, float]]
    """Per-state contributions, e.g. per degraded state for MDR, FLOD and MTDF."""
    components: Dict[str, float]
    """Named sub-results, e.g. FWD and FLOD of a SILFO value."""
    state: Optional[int]
    """Entry state the measure was evaluated from (evidence queries)."""
    valuation: Optional[Dict[str, float]]
    """Parameter valuation of a sensitivity sweep row."""
    states: Optional[int]
    """Number of CTMC states the value was computed on."""

    def __init__(
        self,
        name: str,
        value: float,
        complement: Optional[float] = None,
        time: Optional[float] = None,
        witness: Optional[int] = None,
        witness_description: Optional[str] = None,
        breakdown: Optional[Dict[int, float]] = None,
        components: Optional[Dict[str, float]] = None,
        state: Optional[int] = None,
        valuation: Optional[Dict[str, float]] = None,
        states: Optional[int] = None,
    ):
        self.name = name
        self.value = value
        self.complement = complement
        self.time = time
        self.witness = witness
        self.witness_description = witness_description
        self.breakdown = breakdown
        self.components = components or {}
        self.state = state
        self.valuation = valuation
        self.states = states

    @property
    def label(self) -> str:
        """Row label: the name, qualified by entry state or valuation."""
        label = self.name
        if self.state is not None:
            label += "@{}".format(self.state)
        if self.valuation:
            label += "[{}]".format(
                ",".join("{}={!r}".format(k, v) for k, v in sorted(self.valuation.items()))
            )
        return label

    def __eq__(self, other) -> bool:
        if isinstance(other, MeasureResult):
            return (self.name, self.value, self.complement, self.time, self.witness) == (
                other.name,
                other.value,
                other.complement,
                other.time,
                other.witness,
            )
        return False

    def __repr__(self) -> str:
        return "{}({}, {}, complement={}, time={}, witness={})".format(
            _classname(self),
            repr(self.name),
            repr(self.value),
            repr(self.complement),
            repr(self.time),
            repr(self.witness),
        )


class BoundInterval(object):
    """
    A certified enclosure `[lower, upper]` of a measure obtained from a
    partial state space.
    """

    name: str
    """The approximated measure."""
    lower: float
    upper: float
    time: Optional[float]
    """Horizon of time-bounded measures."""
    states_explored: int
    """Number of expanded states when the bounds were computed."""
    iterations: int
    """Refinement iterations performed so far."""
    elapsed: float
    """Wall-clock seconds since the approximation started."""
    trace: List[BoundInterval]
    """One interval per refinement iteration, in order."""

    def __init__(
        self,
        name: str,
        lower: float,
        upper: float,
        states_explored: int = 0,
        iterations: int = 0,
        time: Optional[float] = None,
        elapsed: float = 0.0,
        trace: Optional[List[BoundInterval]] = None,
    ):
        self.name = name
        self.lower = lower
        self.upper = upper
        self.time = time
        self.states_explored = states_explored
        self.iterations = iterations
        self.elapsed = elapsed
        self.trace = trace if trace is not None else []

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def relative_width(self) -> float:
        if self.lower > 0:
            return self.width / self.lower
        return 0.0 if self.width == 0 else math.inf

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def __repr__(self) -> str:
        return "{}({}, {}, {}, states_explored={}, iterations={})".format(
            _classname(self),
            repr(self.name),
            repr(self.lower),
            repr(self.upper),
            repr(self.states_explored),
            repr(self.iterations),
        )
