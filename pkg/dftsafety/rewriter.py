"""
Measure-preserving simplification of DFTs, applied to a fixpoint.

Rules:

- flatten an OR (AND) child of an OR (AND) parent when the child has no
  other parent;
- remove single-child AND, OR and VOT gates;
- turn VOT(1) into OR and VOT(n of n) into AND;
- remove FDEPs whose trigger fails the top-level event along a pure OR path,
  and dummy events that no FDEP targets and no ADEP names from OR gates;
- drop components connected to neither the top-level event nor a label.

Elements referenced by a label are never removed or merged. Ordering gates
(PAND, SEQ, SPARE), dormancy and ADEP endpoints are left alone.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from typing import Dict, List, Set

import networkx as nx

from dftsafety.errors import ValidationError
from dftsafety.models.dft import BasicEvent, Dependency, Dft, Gate
from dftsafety.models.enums import DependencyKind, GateKind
from dftsafety.semantics import validate

logger = logging.getLogger(__name__)

_FLATTENABLE = (GateKind.And, GateKind.Or)
_SINGLE_CHILD = (GateKind.And, GateKind.Or, GateKind.Vot)


class _Rewriter(object):
    def __init__(self, dft: Dft):
        self.dft = dft.copy()
        self.protected: Set[str] = set(dft.labels.elements())
        self.reported: Set[str] = set()
        self.statistics: Dict[str, int] = defaultdict(int)
        self.initial_size = len(dft.elements)

    def run(self) -> Dft:
        rules = (
            self.normalize_voting,
            self.flatten,
            self.remove_single_child,
            self.remove_implied_dependencies,
            self.remove_idle_dummies,
            self.remove_disconnected,
        )
        changed = True
        while changed:
            changed = False
            for rule in rules:
                while rule():
                    changed = True
        logger.info(
            "Rewrite: %d -> %d elements (%s)",
            self.initial_size,
            len(self.dft.elements),
            ", ".join("{} {}".format(v, k) for k, v in sorted(self.statistics.items()))
            or "no change",
        )
        return self.dft

    def parents(self) -> Dict[str, List[Gate]]:
        parents: Dict[str, List[Gate]] = defaultdict(list)
        for gate in self.dft.gates:
            for child in gate.children:
                parents[child].append(gate)
        return parents

    def activation_endpoints(self) -> Set[str]:
        endpoints = set()
        for dependency in self.dft.dependencies:
            if dependency.kind == DependencyKind.Adep:
                endpoints.add(dependency.trigger)
                endpoints.update(dependency.targets)
        return endpoints

    def triggers(self) -> Set[str]:
        return {d.trigger for d in self.dft.dependencies if d.kind == DependencyKind.Fdep}

    def is_protected(self, element_id: str, rule: str) -> bool:
        if element_id not in self.protected:
            return False
        if element_id not in self.reported:
            self.reported.add(element_id)
            logger.warning("Keeping %s: referenced by a label (%s skipped)", element_id, rule)
        return True

    def replace(self, element: Gate):
        self.dft.elements[element.id] = element

    def remove(self, element_id: str, statistic: str):
        del self.dft.elements[element_id]
        self.statistics[statistic] += 1

    def normalize_voting(self) -> bool:
        for gate in self.dft.gates:
            if gate.kind != GateKind.Vot:
                continue
            if gate.threshold == 1:
                kind = GateKind.Or
            elif gate.threshold == len(gate.children):
                kind = GateKind.And
            else:
                continue
            self.replace(Gate(gate.id, kind, gate.children))
            self.statistics["normalized"] += 1
            return True
        return False

    def flatten(self) -> bool:
        parents = self.parents()
        excluded = self.activation_endpoints() | self.triggers() | {self.dft.top}
        for gate in self.dft.gates:
            if gate.kind not in _FLATTENABLE:
                continue
            for child_id in gate.children:
                child = self.dft.elements[child_id]
                if (
                    not isinstance(child, Gate)
                    or child.kind != gate.kind
                    or len(parents[child_id]) != 1
                    or child_id in excluded
                    or self.is_protected(child_id, "flattening")
                ):
                    continue
                children: List[str] = []
                for c in gate.children:
                    for grandchild in child.children if c == child_id else [c]:
                        if grandchild not in children:
                            children.append(grandchild)
                self.replace(Gate(gate.id, gate.kind, children))
                self.remove(child_id, "flattened")
                return True
        return False

    def remove_single_child(self) -> bool:
        parents = self.parents()
        excluded = self.activation_endpoints()
        for gate in self.dft.gates:
            if gate.kind not in _SINGLE_CHILD or len(gate.children) != 1 or gate.id in excluded:
                continue
            child = gate.children[0]
            gate_parents = parents[gate.id]
            if any(p.kind == GateKind.Spare for p in gate_parents) and len(parents[child]) > 1:
                continue
            if any(child in p.children and p.kind not in _FLATTENABLE for p in gate_parents):
                continue
            if self.is_protected(gate.id, "single-child removal"):
                continue
            for parent in gate_parents:
                children: List[str] = []
                for c in parent.children:
                    c = child if c == gate.id else c
                    if c not in children:
                        children.append(c)
                self.replace(Gate(parent.id, parent.kind, children, parent.threshold))
            for dependency in self.dft.dependencies:
                if dependency.trigger == gate.id:
                    self.dft.elements[dependency.id] = Dependency(
                        dependency.id, dependency.kind, child, dependency.targets
                    )
            if self.dft.top == gate.id:
                self.dft.top = child
            self.remove(gate.id, "single-child gates removed")
            return True
        return False

    def fatal_elements(self) -> Set[str]:
        """Elements whose failure fails the top-level event through OR gates only."""
        fatal = set()
        pending = [self.dft.top]
        while pending:
            element_id = pending.pop()
            if element_id in fatal:
                continue
            fatal.add(element_id)
            element = self.dft.elements.get(element_id)
            if isinstance(element, Gate) and element.kind == GateKind.Or:
                pending.extend(element.children)
        return fatal

    def remove_implied_dependencies(self) -> bool:
        fatal = self.fatal_elements()
        for dependency in self.dft.dependencies:
            if dependency.kind == DependencyKind.Fdep and dependency.trigger in fatal:
                if self.is_protected(dependency.id, "dependency removal"):
                    continue
                self.remove(dependency.id, "dependencies removed")
                return True
        return False

    def remove_idle_dummies(self) -> bool:
        kept = self.activation_endpoints()
        for dependency in self.dft.dependencies:
            if dependency.kind == DependencyKind.Fdep:
                kept.update(dependency.targets)
        for gate in self.dft.gates:
            if gate.kind != GateKind.Or or len(gate.children) < 2:
                continue
            for child in gate.children:
                element = self.dft.elements[child]
                if not isinstance(element, BasicEvent) or not element.dummy or child in kept:
                    continue
                if self.is_protected(child, "dummy removal"):
                    continue
                self.replace(Gate(gate.id, gate.kind, [c for c in gate.children if c != child]))
                self.statistics["dummy children removed"] += 1
                return True
        return False

    def remove_disconnected(self) -> bool:
        graph = nx.Graph()
        graph.add_nodes_from(self.dft.elements)
        for gate in self.dft.gates:
            graph.add_edges_from((gate.id, child) for child in gate.children)
        for dependency in self.dft.dependencies:
            operands = [dependency.trigger] + dependency.targets
            graph.add_edges_from((dependency.id, o) for o in operands)
        anchors = self.protected | {self.dft.top}
        removed = False
        for component in list(nx.connected_components(graph)):
            if component & anchors:
                continue
            for element_id in sorted(component):
                self.remove(element_id, "disconnected elements dropped")
            removed = True
        return removed


def rewrite(dft: Dft) -> Dft:
    """
    Returns a simplified copy of a well-formed DFT with the same measures.
    Raises `ValidationError` if `dft` is not well-formed.
    """
    diagnostics = validate(dft)
    if diagnostics:
        raise ValidationError(diagnostics)
    return _Rewriter(dft).run()
