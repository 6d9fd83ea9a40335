"""
Well-formedness rules and the reference marking semantics of DFTs.
"""

from __future__ import annotations

import logging
from collections import defaultdict, deque
from typing import Dict, Iterable, List, Mapping, Optional, Set

import networkx as nx

from dftsafety.errors import DftError, SeqViolationError, UnknownElementError, ValidationError
from dftsafety.models.dft import BasicEvent, Dependency, Dft, Diagnostic, Gate
from dftsafety.models.enums import DependencyKind, GateKind
from dftsafety.models.marking import Marking

logger = logging.getLogger(__name__)


def structure_graph(dft: Dft) -> nx.DiGraph:
    """The gate-to-child graph over gates and basic events."""
    graph = nx.DiGraph()
    for element in dft.elements.values():
        if not isinstance(element, Dependency):
            graph.add_node(element.id)
    for gate in dft.gates:
        for child in gate.children:
            if child in graph:
                graph.add_edge(gate.id, child)
    return graph


def module_closure(graph: nx.DiGraph, root: str) -> Set[str]:
    """`root` plus everything reachable from it via gate-to-child edges."""
    if root not in graph:
        return {root}
    return nx.descendants(graph, root) | {root}


def validate(dft: Dft) -> List[Diagnostic]:
    """
    Checks every structural rule of a DFT and returns one `Diagnostic` per
    violation; an empty list means the tree is well-formed.
    """
    diagnostics: List[Diagnostic] = []
    elements = dft.elements

    for duplicate in dft.duplicates:
        diagnostics.append(Diagnostic(duplicate, "duplicate element id"))

    if dft.top is None:
        diagnostics.append(Diagnostic(None, "top-level event missing"))
    elif dft.top not in elements:
        diagnostics.append(Diagnostic(dft.top, "top-level event does not exist"))
    elif isinstance(elements[dft.top], Dependency):
        diagnostics.append(Diagnostic(dft.top, "top-level event must be a gate or basic event"))

    for name, value in dft.parameters.items():
        if value is not None and value < 0:
            diagnostics.append(Diagnostic(name, "parameter value must be nonnegative"))

    for event in dft.basic_events:
        diagnostics.extend(_check_basic_event(event, dft.parameters))

    spare_parents: Dict[str, List[str]] = defaultdict(list)
    for gate in dft.gates:
        diagnostics.extend(_check_gate(gate, elements))
        if gate.kind == GateKind.Spare:
            for child in gate.children:
                spare_parents[child].append(gate.id)
    for child, parents in spare_parents.items():
        if len(set(parents)) > 1:
            diagnostics.append(Diagnostic(child, "element is a child of several SPAREs"))

    for dependency in dft.dependencies:
        diagnostics.extend(_check_dependency(dependency, elements))

    graph = structure_graph(dft)
    if not nx.is_directed_acyclic_graph(graph):
        cycle = nx.find_cycle(graph)
        diagnostics.append(
            Diagnostic(cycle[0][0], "cycle detected: {}".format(" -> ".join(u for u, _ in cycle)))
        )
    else:
        for gate in dft.gates:
            if gate.kind != GateKind.Spare:
                continue
            claimed: Set[str] = set()
            for child in gate.children:
                closure = module_closure(graph, child)
                if closure & claimed:
                    diagnostics.append(
                        Diagnostic(gate.id, "SPARE children must be independent modules")
                    )
                    break
                claimed |= closure

    for name, predicate in dft.labels.predicates.items():
        for element_id in sorted(predicate.elements()):
            if element_id not in elements:
                diagnostics.append(
                    Diagnostic(name, "label refers to unknown element {}".format(element_id))
                )
    return diagnostics


def _check_basic_event(event: BasicEvent, declared: Mapping[str, float]) -> List[Diagnostic]:
    diagnostics = []
    if not 0.0 <= event.dormancy <= 1.0:
        diagnostics.append(Diagnostic(event.id, "dormancy outside [0, 1]"))
    if event.dummy and not event.rate.is_zero():
        diagnostics.append(Diagnostic(event.id, "dummy event with non-zero rate"))
    if event.transient and event.dummy:
        diagnostics.append(Diagnostic(event.id, "transient event cannot be dummy"))
    undeclared = event.rate.parameters() - set(declared)
    for name in sorted(undeclared):
        diagnostics.append(Diagnostic(event.id, "undeclared parameter {}".format(name)))
    if not undeclared and all(declared[p] is not None for p in event.rate.parameters()):
        try:
            if event.rate.evaluate(declared) < 0:
                diagnostics.append(Diagnostic(event.id, "negative failure rate"))
        except DftError as e:
            diagnostics.append(Diagnostic(event.id, e.message))
    return diagnostics


def _check_gate(gate: Gate, elements: Mapping) -> List[Diagnostic]:
    diagnostics = []
    if not gate.children:
        diagnostics.append(Diagnostic(gate.id, "gate without children"))
    if len(set(gate.children)) != len(gate.children):
        diagnostics.append(Diagnostic(gate.id, "child listed twice"))
    for child in gate.children:
        if child not in elements:
            diagnostics.append(Diagnostic(gate.id, "unknown child {}".format(child)))
        elif isinstance(elements[child], Dependency):
            diagnostics.append(Diagnostic(gate.id, "dependency {} used as child".format(child)))
        elif gate.kind == GateKind.Seq and not isinstance(elements[child], BasicEvent):
            diagnostics.append(Diagnostic(gate.id, "SEQ children must be basic events"))
    if gate.kind == GateKind.Vot:
        if gate.threshold is None or gate.threshold < 1:
            diagnostics.append(Diagnostic(gate.id, "VOT threshold must be at least 1"))
        elif gate.threshold > len(gate.children):
            diagnostics.append(Diagnostic(gate.id, "VOT threshold exceeds child count"))
    return diagnostics


def _check_dependency(dependency: Dependency, elements: Mapping) -> List[Diagnostic]:
    diagnostics = []
    trigger = elements.get(dependency.trigger)
    if trigger is None:
        diagnostics.append(
            Diagnostic(dependency.id, "unknown trigger {}".format(dependency.trigger))
        )
    elif isinstance(trigger, Dependency):
        diagnostics.append(Diagnostic(dependency.id, "trigger must be a gate or basic event"))
    if not dependency.targets:
        diagnostics.append(Diagnostic(dependency.id, "dependency without targets"))
    for target in dependency.targets:
        element = elements.get(target)
        if element is None:
            diagnostics.append(Diagnostic(dependency.id, "unknown target {}".format(target)))
        elif dependency.kind == DependencyKind.Fdep and not isinstance(element, BasicEvent):
            diagnostics.append(Diagnostic(dependency.id, "FDEP target must be a basic event"))
        elif isinstance(element, Dependency):
            diagnostics.append(Diagnostic(dependency.id, "ADEP target must be a gate or event"))
    return diagnostics


class _Working(object):
    """Mutable copy of a marking while failures are applied."""

    __slots__ = ("failed_bes", "failed", "fail_safe", "spare_using", "active")

    def __init__(self, marking: Optional[Marking] = None):
        if marking is None:
            self.failed_bes: List[str] = []
            self.failed: Set[str] = set()
            self.fail_safe: Set[str] = set()
            self.spare_using: Dict[str, int] = {}
            self.active: Set[str] = set()
        else:
            self.failed_bes = list(marking.failed_bes)
            self.failed = set(marking.failed)
            self.fail_safe = set(marking.fail_safe)
            self.spare_using = dict(marking.spare_using)
            self.active = set(marking.active)

    def freeze(self, top: str) -> Marking:
        return Marking(
            tuple(self.failed_bes),
            frozenset(self.failed),
            frozenset(self.fail_safe),
            self.spare_using,
            frozenset(self.active),
            top in self.failed,
        )


class DftSemantics(object):
    """
    Compiled marking semantics of one validated DFT.

    Failing a basic event runs a fixpoint over the gate failure conditions,
    then the FDEP cascade (FDEPs in declaration order, each target in order,
    one dependent event at a time), updating PAND fail-safety, SPARE usage
    and activation after every single failure.
    """

    dft: Dft
    """The tree these semantics were compiled from."""

    def __init__(self, dft: Dft):
        diagnostics = validate(dft)
        if diagnostics:
            raise ValidationError(diagnostics)
        self.dft = dft
        self.top = dft.top
        self._gates: Dict[str, Gate] = {g.id: g for g in dft.gates}
        self._events: Dict[str, BasicEvent] = {b.id: b for b in dft.basic_events}
        self._pands = [g for g in dft.gates if g.kind == GateKind.Pand]
        self._parents: Dict[str, List[str]] = defaultdict(list)
        for gate in dft.gates:
            for child in gate.children:
                self._parents[child].append(gate.id)
        self._seq_left: Dict[str, Set[str]] = defaultdict(set)
        for gate in dft.gates:
            if gate.kind == GateKind.Seq:
                for index, child in enumerate(gate.children):
                    self._seq_left[child].update(gate.children[:index])
        self._fdeps = [d for d in dft.dependencies if d.kind == DependencyKind.Fdep]
        self._adeps: Dict[str, List[str]] = defaultdict(list)
        for dependency in dft.dependencies:
            if dependency.kind == DependencyKind.Adep:
                self._adeps[dependency.trigger].extend(dependency.targets)

        self.graph = structure_graph(dft)
        dormant: Set[str] = set()
        for gate in dft.gates:
            if gate.kind == GateKind.Spare:
                for child in gate.children:
                    dormant |= module_closure(self.graph, child)
        for targets in self._adeps.values():
            for target in targets:
                dormant |= module_closure(self.graph, target)
        self._seeds = [e for e in self.graph.nodes if e not in dormant]
        self._initial = self._build_initial()

    @property
    def basic_events(self) -> List[BasicEvent]:
        return list(self._events.values())

    def is_basic_event(self, element_id: str) -> bool:
        return element_id in self._events

    def closure(self, element_id: str) -> Set[str]:
        return module_closure(self.graph, element_id)

    def initial_marking(self) -> Marking:
        return self._initial

    def _build_initial(self) -> Marking:
        working = _Working()
        for gate in self._gates.values():
            if gate.kind == GateKind.Spare:
                working.spare_using[gate.id] = 0
        for seed in self._seeds:
            self._activate(working, seed)
        return working.freeze(self.top)

    def is_blocked(self, failed: Iterable[str], event_id: str) -> bool:
        """True iff a SEQ gate still waits for a left sibling of `event_id`."""
        left = self._seq_left.get(event_id)
        if not left:
            return False
        failed = failed if isinstance(failed, (set, frozenset)) else set(failed)
        return not left <= failed

    def run(self, sequence: Iterable[str], start: Optional[Marking] = None) -> Marking:
        """
        Fails the given basic events in order, starting from `start` (the
        initial marking by default). Events already failed by an FDEP are
        skipped.
        """
        working = _Working(start or self._initial)
        seen: Set[str] = set()
        for event_id in sequence:
            if event_id not in self._events:
                raise UnknownElementError(event_id, "Not a basic event of this DFT")
            if event_id in seen:
                raise DftError("Basic event occurs twice in failure sequence", event_id)
            seen.add(event_id)
            if event_id in working.failed:
                logger.debug("Skipping %s: already failed through a dependency", event_id)
                continue
            if self.is_blocked(working.failed, event_id):
                raise SeqViolationError(event_id)
            self._fail_event(working, event_id)
        return working.freeze(self.top)

    def fail(self, marking: Marking, event_id: str) -> Marking:
        """The successor marking after `event_id` fails; no legality checks."""
        working = _Working(marking)
        self._fail_event(working, event_id)
        return working.freeze(self.top)

    def eventual_failures(self, marking: Marking, events: Iterable[str] = ()) -> Set[str]:
        """
        Elements failed in every marking reachable from `marking` once all of
        `events` have failed, in whatever order. A SPARE counts only when all
        its children failed; a PAND not yet failed in `marking` never does.
        """
        failed = set(marking.failed)
        failed.update(events)
        changed = True
        while changed:
            changed = False
            for dependency in self._fdeps:
                if dependency.trigger not in failed:
                    continue
                for target in dependency.targets:
                    if target not in failed and not self.is_blocked(failed, target):
                        failed.add(target)
                        changed = True
            for gate in self._gates.values():
                if gate.id not in failed and self._certainly_fails(gate, failed):
                    failed.add(gate.id)
                    changed = True
        return failed

    @staticmethod
    def _certainly_fails(gate: Gate, failed: Set[str]) -> bool:
        if gate.kind == GateKind.Or:
            return any(c in failed for c in gate.children)
        if gate.kind == GateKind.Vot:
            return sum(1 for c in gate.children if c in failed) >= gate.threshold
        if gate.kind == GateKind.Pand:
            return False
        return all(c in failed for c in gate.children)

    def evaluate_rates(self, valuation: Mapping[str, float]) -> Dict[str, float]:
        """Nominal (active) rate of every non-dummy basic event."""
        rates = {}
        for event in self._events.values():
            if event.dummy:
                continue
            rate = event.rate.evaluate(valuation)
            if rate < 0:
                raise DftError("Failure rate evaluates to a negative value", event.id)
            rates[event.id] = rate
        return rates

    def enabled_failures(
        self,
        marking: Marking,
        valuation: Optional[Mapping[str, float]] = None,
        rates: Optional[Mapping[str, float]] = None,
    ) -> Dict[str, float]:
        """
        Effective rate of every basic event that can fail next: operational,
        not dummy, not blocked by a SEQ, and with positive effective rate.
        Inactive events fail at `rate * dormancy`.
        """
        if rates is None:
            rates = self.evaluate_rates(self.dft.valuation(valuation))
        enabled = {}
        for event_id, rate in rates.items():
            if event_id in marking.failed or self.is_blocked(marking.failed, event_id):
                continue
            if event_id not in marking.active:
                rate *= self._events[event_id].dormancy
            if rate > 0:
                enabled[event_id] = rate
        return enabled

    def _fail_event(self, working: _Working, event_id: str):
        self._fail_single(working, event_id)
        while True:
            dependent = self._next_dependent(working)
            if dependent is None:
                return
            logger.debug("FDEP cascade fails %s", dependent)
            self._fail_single(working, dependent)

    def _fail_single(self, working: _Working, event_id: str):
        working.failed_bes.append(event_id)
        working.failed.add(event_id)
        queue = deque([event_id])
        while queue:
            child = queue.popleft()
            for parent in self._parents.get(child, ()):
                if parent in working.failed:
                    continue
                if self._gate_fails(working, self._gates[parent]):
                    working.failed.add(parent)
                    queue.append(parent)
        for gate in self._pands:
            if gate.id in working.failed or gate.id in working.fail_safe:
                continue
            operational_left = False
            for child in gate.children:
                if child not in working.failed:
                    operational_left = True
                elif operational_left:
                    working.fail_safe.add(gate.id)
                    break

    def _gate_fails(self, working: _Working, gate: Gate) -> bool:
        failed = working.failed
        if gate.kind == GateKind.Or:
            return any(c in failed for c in gate.children)
        if gate.kind in (GateKind.And, GateKind.Seq):
            return all(c in failed for c in gate.children)
        if gate.kind == GateKind.Vot:
            return sum(1 for c in gate.children if c in failed) >= gate.threshold
        if gate.kind == GateKind.Pand:
            return gate.id not in working.fail_safe and all(c in failed for c in gate.children)
        return self._switch_spare(working, gate)

    def _switch_spare(self, working: _Working, gate: Gate) -> bool:
        """Moves a SPARE to its next operational child; True if none is left."""
        using = working.spare_using[gate.id]
        if gate.children[using] not in working.failed:
            return False
        for index in range(using + 1, len(gate.children)):
            if gate.children[index] not in working.failed:
                working.spare_using[gate.id] = index
                if gate.id in working.active:
                    self._activate(working, gate.children[index])
                return False
        return True

    def _next_dependent(self, working: _Working) -> Optional[str]:
        for dependency in self._fdeps:
            if dependency.trigger not in working.failed:
                continue
            for target in dependency.targets:
                if target not in working.failed and not self.is_blocked(working.failed, target):
                    return target
        return None

    def _activate(self, working: _Working, root: str):
        stack = [root]
        while stack:
            element = stack.pop()
            if element in working.active:
                continue
            working.active.add(element)
            gate = self._gates.get(element)
            if gate is not None:
                if gate.kind == GateKind.Spare:
                    stack.append(gate.children[working.spare_using[element]])
                else:
                    stack.extend(gate.children)
            stack.extend(self._adeps.get(element, ()))


def evaluate_marking(dft: Dft, sequence: Iterable[str]) -> Marking:
    """
    Returns the marking after failing the basic events of `sequence` in
    order. Raises `SeqViolationError` when the order violates a SEQ gate and
    `UnknownElementError` for ids that are not basic events.
    """
    return DftSemantics(dft).run(sequence)


def enabled_failures(
    dft: Dft, marking: Marking, valuation: Optional[Mapping[str, float]] = None
) -> Dict[str, float]:
    """Effective failure rate of every basic event that can fail next in `marking`."""
    return DftSemantics(dft).enabled_failures(marking, valuation)
