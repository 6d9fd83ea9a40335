"""
Sound lower and upper bounds on unreliability and MTTF from a partially
explored state space, refined until a relative precision is met.
"""

from __future__ import annotations

import heapq
import logging
import math
import time
from typing import Dict, Hashable, List, Mapping, Optional, Tuple

import numpy as np
from scipy import sparse

from dftsafety.engine import bounded_reach_backward, expected_time
from dftsafety.errors import CapReachedWithoutPrecisionError, DftError
from dftsafety.models.ctmc import Ctmc
from dftsafety.models.dft import FAILED_LABEL, Dft, LabelSpec
from dftsafety.models.marking import Marking
from dftsafety.models.results import BoundInterval
from dftsafety.models.settings import DEFAULT_SETTINGS, SolverSettings
from dftsafety.statespace import StateExplorer, Successor

logger = logging.getLogger(__name__)

FRONTIER_LABEL = "frontier"
"""Label of the unexplored (terminal) states of a partial chain."""


class PartialSpace(object):
    """
    A partially explored state space.

    States are expanded in order of decreasing priority, the probability of
    the embedded-chain path along which they were discovered (the maximum if
    rediscovered), ties broken by state index. Unexpanded states form the
    frontier; the initial state is expanded by the first `refine`.
    """

    explorer: StateExplorer
    markings: List[Optional[Marking]]
    """Marking of each discovered state; None for the failed sink."""
    priority: List[float]
    expanded: List[bool]
    transitions: Dict[int, List[Tuple[int, float]]]
    """Outgoing `(target, rate)` pairs of expanded states."""
    failed_state: Optional[int]

    def __init__(self, explorer: StateExplorer):
        self.explorer = explorer
        self.markings = []
        self.priority = []
        self.expanded = []
        self.transitions = {}
        self.failed_state = None
        self._index: Dict[Hashable, int] = {}
        self._heap: List[Tuple[float, int]] = []
        self._discover(explorer.initial_marking(), 1.0)

    @property
    def num_states(self) -> int:
        return len(self.markings)

    @property
    def num_explored(self) -> int:
        return sum(self.expanded)

    @property
    def frontier(self) -> List[int]:
        return [
            s for s, m in enumerate(self.markings) if m is not None and not self.expanded[s]
        ]

    def _discover(self, successor: Successor, priority: float) -> int:
        if isinstance(successor, str) or successor.top_failed:
            if self.failed_state is None:
                self.failed_state = self._append(None, 0.0, expanded=True)
            return self.failed_state
        key = successor.signature
        state = self._index.get(key)
        if state is None:
            state = self._append(successor, priority, expanded=False)
            self._index[key] = state
            heapq.heappush(self._heap, (-priority, state))
        elif not self.expanded[state] and priority > self.priority[state]:
            self.priority[state] = priority
            heapq.heappush(self._heap, (-priority, state))
        return state

    def _append(self, marking: Optional[Marking], priority: float, expanded: bool) -> int:
        self.markings.append(marking)
        self.priority.append(priority)
        self.expanded.append(expanded)
        return len(self.markings) - 1

    def refine(self, budget: int) -> PartialSpace:
        """
        Expands up to `budget` frontier states, highest priority first.
        Modifies and returns this space.
        """
        explored = 0
        while explored < budget and self._heap:
            negative, state = heapq.heappop(self._heap)
            if self.expanded[state] or -negative != self.priority[state]:
                continue
            self._expand(state)
            explored += 1
        return self

    def _expand(self, state: int):
        successors = self.explorer.successors(self.markings[state])
        total = sum(rate for rate, _ in successors)
        self.expanded[state] = True
        outgoing = []
        for rate, successor in successors:
            target = self._discover(successor, self.priority[state] * rate / total)
            outgoing.append((target, rate))
        self.transitions[state] = outgoing

    def to_ctmc(self) -> Ctmc:
        """
        The explored chain with frontier states absorbing and labelled
        `frontier`; state 0 is initial.
        """
        n = self.num_states
        rows, cols, data = [], [], []
        for source, outgoing in self.transitions.items():
            for target, rate in outgoing:
                rows.append(source)
                cols.append(target)
                data.append(rate)
        rates = sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
        frontier = np.zeros(n, dtype=bool)
        frontier[self.frontier] = True
        failed = np.zeros(n, dtype=bool)
        if self.failed_state is not None:
            failed[self.failed_state] = True
        labels = {FAILED_LABEL: failed, FRONTIER_LABEL: frontier}
        return Ctmc(
            rates, 0, labels, list(self.markings), [0], dict(self._index), self.failed_state
        )

    def slowest_rates(self, marking: Marking) -> Dict[str, float]:
        """
        Lowest rate each operational permanent basic event can have from
        `marking` on: nominal if already active, dormant otherwise. Events
        that may never fail are left out.
        """
        rates = {}
        for event in self.explorer.semantics.basic_events:
            rate = self.explorer.rates.get(event.id, 0.0)
            if event.transient or event.id in marking.failed:
                continue
            if event.id not in marking.active:
                rate *= event.dormancy
            if rate > 0:
                rates[event.id] = rate
        return rates

    def chain_time(self, marking: Marking) -> float:
        """
        Duration of the sequential chain appended to a frontier state for the
        MTTF upper bound. Remaining permanent basic events fail one by one,
        each at its slowest possible rate, until the top-level event has
        failed whatever the interleaving; a fatal transient fault from an
        active event ends the chain otherwise. Infinite if neither suffices.
        """
        explorer = self.explorer
        semantics = explorer.semantics
        top = explorer.dft.top
        slowest = self.slowest_rates(marking)
        failed = semantics.eventual_failures(marking)
        total = 0.0
        while top not in failed:
            ready = [e for e in slowest if e not in failed and not semantics.is_blocked(failed, e)]
            if not ready:
                break
            total += 1.0 / slowest[ready[0]]
            failed = semantics.eventual_failures(marking, failed | {ready[0]})
        if top in failed:
            return total
        fatal = 0.0
        for event in semantics.basic_events:
            rate = explorer.rates.get(event.id, 0.0)
            if not event.transient or rate <= 0 or event.id not in marking.active:
                continue
            if semantics.is_blocked(failed, event.id):
                continue
            if top in semantics.eventual_failures(marking, failed | {event.id}):
                fatal += rate
        if fatal > 0:
            return total + 1.0 / fatal
        return math.inf


def refine(space: PartialSpace, budget: int) -> PartialSpace:
    """Expands up to `budget` highest-priority frontier states of `space`."""
    return space.refine(budget)


def _approximate(
    name: str,
    bounds,
    dft: Dft,
    labels: Optional[LabelSpec],
    valuation: Optional[Mapping[str, float]],
    rel_err: float,
    t: Optional[float],
    settings: SolverSettings,
    initial_budget: int,
) -> BoundInterval:
    if rel_err <= 0:
        raise DftError("Relative error must be positive", str(rel_err))
    space = PartialSpace(StateExplorer(dft, valuation, labels, settings))
    started = time.perf_counter()
    budget = max(initial_budget, 1)
    trace: List[BoundInterval] = []
    lower, upper = 0.0, math.inf
    iteration = 0
    while True:
        iteration += 1
        space.refine(budget)
        new_lower, new_upper = bounds(space)
        lower = max(lower, new_lower)
        upper = max(min(upper, new_upper), lower)
        interval = BoundInterval(
            name,
            lower,
            upper,
            space.num_explored,
            iteration,
            t,
            time.perf_counter() - started,
        )
        trace.append(interval)
        logger.debug(
            "Iteration %d: %d states explored, [%r, %r]",
            iteration,
            space.num_explored,
            lower,
            upper,
        )
        if not space.frontier or upper - lower <= rel_err * lower:
            interval.trace = trace
            logger.info(
                "%s in [%r, %r] after %d iterations, %d states explored",
                name,
                lower,
                upper,
                iteration,
                space.num_explored,
            )
            return interval
        if space.num_states >= settings.state_cap:
            interval.trace = trace
            logger.warning("State cap %d reached before requested precision", settings.state_cap)
            raise CapReachedWithoutPrecisionError(interval)
        budget *= 2


def approx_unreliability(
    dft: Dft,
    labels: Optional[LabelSpec],
    valuation: Optional[Mapping[str, float]],
    t: float,
    rel_err: float,
    settings: Optional[SolverSettings] = None,
    initial_budget: int = 1,
) -> BoundInterval:
    """
    Bounds the probability of failure within `t` hours: frontier states
    count as failed for the upper bound and as operational and absorbing for
    the lower bound. Stops once `upper - lower <= rel_err * lower` or the
    whole space is explored; raises `CapReachedWithoutPrecisionError` with
    the best interval when `settings.state_cap` is hit first.
    """
    settings = settings or DEFAULT_SETTINGS

    def bounds(space: PartialSpace) -> Tuple[float, float]:
        ctmc = space.to_ctmc()
        failed = ctmc.label(FAILED_LABEL)
        frontier = ctmc.label(FRONTIER_LABEL)
        lower = bounded_reach_backward(ctmc, None, failed, t, settings)[0]
        if not frontier.any():
            return float(lower), float(lower)
        upper = bounded_reach_backward(ctmc, None, failed | frontier, t, settings)[0]
        return float(lower), float(upper)

    return _approximate(
        "unreliability", bounds, dft, labels, valuation, rel_err, t, settings, initial_budget
    )


def approx_mttf(
    dft: Dft,
    labels: Optional[LabelSpec],
    valuation: Optional[Mapping[str, float]],
    rel_err: float,
    settings: Optional[SolverSettings] = None,
    initial_budget: int = 1,
) -> BoundInterval:
    """
    Bounds the mean time to failure: frontier states fail immediately for
    the lower bound; for the upper bound each frontier state continues with
    the sequential chain of `PartialSpace.chain_time`.
    """
    settings = settings or DEFAULT_SETTINGS

    def bounds(space: PartialSpace) -> Tuple[float, float]:
        ctmc = space.to_ctmc()
        target = ctmc.label(FAILED_LABEL) | ctmc.label(FRONTIER_LABEL)
        lower = float(expected_time(ctmc, target, settings=settings)[0])
        frontier = space.frontier
        if not frontier:
            return lower, lower
        terminal = np.zeros(ctmc.num_states)
        for state in frontier:
            terminal[state] = space.chain_time(space.markings[state])
        if np.isinf(terminal).any():
            return lower, math.inf
        upper = float(expected_time(ctmc, target, settings=settings, terminal=terminal)[0])
        return lower, upper

    return _approximate(
        "mttf", bounds, dft, labels, valuation, rel_err, None, settings, initial_budget
    )
