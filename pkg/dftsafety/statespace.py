"""
Translation of a DFT into a labelled CTMC by exhaustive exploration of
failure interleavings.
"""

from __future__ import annotations

import logging
from collections import deque
from typing import Deque, Dict, Hashable, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np
from scipy import sparse

from dftsafety.errors import SeqViolationError, StateSpaceLimitExceeded, UnknownElementError
from dftsafety.models.ctmc import Ctmc
from dftsafety.models.dft import FAILED_LABEL, Dft, LabelSpec
from dftsafety.models.marking import Marking
from dftsafety.models.settings import DEFAULT_SETTINGS, SolverSettings
from dftsafety.semantics import DftSemantics

logger = logging.getLogger(__name__)

FAIL = "failed"
"""Successor placeholder for the merged failed sink."""

Successor = Union[Marking, str]


class StateExplorer(object):
    """
    Successor generation for one DFT under one parameter valuation.

    Permanent failures become transitions to the canonical successor marking;
    a transient fault becomes a transition to the failed sink only if its
    cascaded failure fails the top-level event, otherwise it vanishes.
    """

    dft: Dft
    semantics: DftSemantics
    valuation: Dict[str, float]
    """The full valuation: declared defaults updated with overrides."""
    rates: Dict[str, float]
    """Nominal rate of every non-dummy basic event under `valuation`."""
    labels: LabelSpec
    settings: SolverSettings

    def __init__(
        self,
        dft: Dft,
        valuation: Optional[Mapping[str, float]] = None,
        labels: Optional[LabelSpec] = None,
        settings: Optional[SolverSettings] = None,
    ):
        self.dft = dft
        self.semantics = DftSemantics(dft)
        self.valuation = dft.valuation(valuation)
        self.rates = self.semantics.evaluate_rates(self.valuation)
        self.labels = labels if labels is not None else dft.labels
        for element_id in sorted(self.labels.elements()):
            if element_id not in dft:
                raise UnknownElementError(element_id, "Label refers to unknown element")
        self.settings = settings or DEFAULT_SETTINGS
        self._transient = [
            event.id for event in self.semantics.basic_events if event.transient and not event.dummy
        ]

    def initial_marking(self) -> Marking:
        return self.semantics.initial_marking()

    def permanent_transitions(self, marking: Marking) -> List[Tuple[float, Marking]]:
        if marking.top_failed:
            return []
        transitions = []
        enabled = self.semantics.enabled_failures(marking, rates=self.rates)
        for event_id, rate in enabled.items():
            if event_id in self._transient:
                continue
            transitions.append((rate, self.semantics.fail(marking, event_id)))
        return transitions

    def transient_transitions(self, marking: Marking) -> List[Tuple[float, str]]:
        if marking.top_failed:
            return []
        transitions = []
        for event_id in self._transient:
            if event_id in marking.failed or event_id not in marking.active:
                continue
            if self.semantics.is_blocked(marking.failed, event_id):
                continue
            rate = self.rates[event_id]
            if rate > 0 and self.semantics.fail(marking, event_id).top_failed:
                transitions.append((rate, FAIL))
        return transitions

    def successors(self, marking: Marking) -> List[Tuple[float, Successor]]:
        """All outgoing transitions of `marking`; top-failed successors collapse to `FAIL`."""
        transitions: List[Tuple[float, Successor]] = []
        for rate, successor in self.permanent_transitions(marking):
            transitions.append((rate, FAIL if successor.top_failed else successor))
        transitions.extend(self.transient_transitions(marking))
        return transitions

    def entry_markings(self, evidence: Iterable[str]) -> List[Marking]:
        """
        Markings reachable by failing the evidence in every SEQ-legal order,
        deduplicated by signature in discovery order. Raises
        `SeqViolationError` if no order is legal.
        """
        evidence = list(dict.fromkeys(evidence))
        for event_id in evidence:
            if not self.semantics.is_basic_event(event_id):
                raise UnknownElementError(event_id, "Evidence must name basic events")
        initial = self.initial_marking()
        if not evidence:
            return [initial]
        entries: Dict[Hashable, Marking] = {}
        seen = set()
        stack = [(initial, frozenset(evidence))]
        while stack:
            marking, remaining = stack.pop()
            remaining = frozenset(e for e in remaining if e not in marking.failed)
            key = (marking.signature, remaining)
            if key in seen:
                continue
            seen.add(key)
            if not remaining:
                entries.setdefault(marking.signature, marking)
                continue
            for event_id in reversed(evidence):
                if event_id in remaining and not self.semantics.is_blocked(
                    marking.failed, event_id
                ):
                    stack.append((self.semantics.fail(marking, event_id), remaining - {event_id}))
        if not entries:
            raise SeqViolationError(
                ", ".join(evidence), "No failure order of the evidence respects the SEQ gates"
            )
        logger.debug("Evidence %s yields %d entry markings", evidence, len(entries))
        return list(entries.values())

    def build(self, evidence: Iterable[str] = ()) -> Ctmc:
        """Explores the state space breadth-first from the entry markings."""
        builder = _CtmcBuilder(self.settings.state_cap)
        entry_states = []
        for marking in self.entry_markings(evidence):
            state = builder.lookup(marking)
            if state not in entry_states:
                entry_states.append(state)
        while builder.queue:
            state = builder.queue.popleft()
            for rate, successor in self.successors(builder.markings[state]):
                builder.add_transition(state, builder.lookup(successor), rate)
        ctmc = builder.finish(entry_states, self.labels)
        operational_absorbing = int(np.count_nonzero(ctmc.absorbing & ~ctmc.label(FAILED_LABEL)))
        if operational_absorbing:
            logger.warning(
                "%d operational absorbing (fail-safe) states; expected times may be undefined",
                operational_absorbing,
            )
        logger.info(
            "Built CTMC with %d states and %d transitions", ctmc.num_states, ctmc.num_transitions
        )
        return ctmc


class _CtmcBuilder(object):
    """Index bookkeeping for breadth-first exploration."""

    def __init__(self, cap: int):
        self.cap = cap
        self.markings: List[Optional[Marking]] = []
        self.index: Dict[Hashable, int] = {}
        self.failed_state: Optional[int] = None
        self.queue: Deque[int] = deque()
        self.rows: List[int] = []
        self.cols: List[int] = []
        self.data: List[float] = []

    def lookup(self, successor: Successor) -> int:
        if isinstance(successor, str) or successor.top_failed:
            if self.failed_state is None:
                self.failed_state = self._new(None)
            return self.failed_state
        key = successor.signature
        state = self.index.get(key)
        if state is None:
            state = self._new(successor)
            self.index[key] = state
            self.queue.append(state)
        return state

    def _new(self, marking: Optional[Marking]) -> int:
        if len(self.markings) >= self.cap:
            raise StateSpaceLimitExceeded(self.cap)
        self.markings.append(marking)
        return len(self.markings) - 1

    def add_transition(self, source: int, target: int, rate: float):
        self.rows.append(source)
        self.cols.append(target)
        self.data.append(rate)

    def finish(self, entry_states: List[int], labels: LabelSpec) -> Ctmc:
        n = len(self.markings)
        rates = sparse.coo_matrix((self.data, (self.rows, self.cols)), shape=(n, n)).tocsr()
        masks = {}
        failed = np.zeros(n, dtype=bool)
        if self.failed_state is not None:
            failed[self.failed_state] = True
        masks[FAILED_LABEL] = failed
        for name, predicate in labels.predicates.items():
            mask = np.zeros(n, dtype=bool)
            for state, marking in enumerate(self.markings):
                if marking is not None:
                    mask[state] = predicate.evaluate(marking.failed)
            masks[name] = mask
        return Ctmc(
            rates,
            entry_states[0],
            masks,
            self.markings,
            entry_states,
            self.index,
            self.failed_state,
        )


def build_ctmc(
    dft: Dft,
    labels: Optional[LabelSpec] = None,
    valuation: Optional[Mapping[str, float]] = None,
    evidence: Iterable[str] = (),
    settings: Optional[SolverSettings] = None,
) -> Ctmc:
    """
    Builds the CTMC of `dft`. With evidence, exploration starts from every
    marking reachable by failing the evidence in a SEQ-legal order; these are
    the chain's `entry_states`.
    """
    return StateExplorer(dft, valuation, labels, settings).build(evidence)


def transient_transitions(
    dft: Dft, marking: Marking, valuation: Optional[Mapping[str, float]] = None
) -> List[Tuple[float, str]]:
    """Fatal transient faults of an operational marking as `(rate, FAIL)` pairs."""
    return StateExplorer(dft, valuation).transient_transitions(marking)


def canonical_signature(marking: Marking) -> Hashable:
    """The merge key of a marking: failed, fail-safe, spare-usage and active sets."""
    return marking.signature


def locate_entry_states(ctmc: Ctmc, entries: List[Marking]) -> Optional[List[int]]:
    """
    Maps entry markings onto the states of an existing chain, or returns
    None if some marking does not occur in it.
    """
    states = []
    for marking in entries:
        if marking.top_failed:
            state = ctmc.failed_state
        else:
            state = ctmc.index.get(marking.signature)
        if state is None:
            return None
        if state not in states:
            states.append(state)
    return states
