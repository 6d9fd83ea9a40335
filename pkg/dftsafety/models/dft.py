from __future__ import annotations

import copy
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Union

from dftsafety.errors import DftError, UnknownElementError
from dftsafety.models.enums import DependencyKind, GateKind
from dftsafety.models.expressions import ZERO, LabelExpression, RateExpression
from dftsafety.models.utilities import _classname

FAILED_LABEL = "failed"
"""The reserved label of top-level failure."""
DEGRADED_LABEL = "degraded"
"""The label degradation measures read."""


class BasicEvent(object):
    """A leaf of the tree with an exponentially distributed failure time."""

    id: str
    """Unique element id."""
    rate: RateExpression
    """Failure rate per hour while active."""
    dormancy: float
    """Factor in [0, 1] scaling the rate while the event is inactive."""
    transient: bool
    """
    Transient faults vanish after occurring; they only matter when they
    immediately fail the top-level event.
    """
    dummy: bool
    """Dummy events never fail by themselves, only through FDEPs."""

    def __init__(
        self,
        id: str,
        rate: Union[RateExpression, float] = ZERO,
        dormancy: float = 1.0,
        transient: bool = False,
        dummy: bool = False,
    ):
        self.id = id
        self.rate = rate if isinstance(rate, RateExpression) else RateExpression.parse(rate)
        self.dormancy = float(dormancy)
        self.transient = transient
        self.dummy = dummy

    @classmethod
    def dummy_event(cls, id: str) -> BasicEvent:
        """A dummy BE, typically the dependent event of an FDEP."""
        return cls(id, ZERO, dummy=True)

    def _key(self) -> tuple:
        return ("be", self.id, self.rate, self.dormancy, self.transient, self.dummy)

    def __eq__(self, other) -> bool:
        if isinstance(other, BasicEvent):
            return self._key() == other._key()
        return False

    def __repr__(self) -> str:
        return "{}({}, rate={}, dormancy={}, transient={}, dummy={})".format(
            _classname(self),
            repr(self.id),
            repr(str(self.rate)),
            repr(self.dormancy),
            repr(self.transient),
            repr(self.dummy),
        )


class Gate(object):
    """A gate whose failure condition ranges over its ordered children."""

    id: str
    """Unique element id."""
    kind: GateKind
    """The gate type."""
    children: List[str]
    """Ordered child ids; order matters for PAND, SEQ and SPARE."""
    threshold: Optional[int]
    """k of a VOT(k) gate; None for other kinds."""

    def __init__(
        self, id: str, kind: GateKind, children: Iterable[str], threshold: Optional[int] = None
    ):
        self.id = id
        self.kind = kind
        self.children = list(children)
        self.threshold = threshold if kind == GateKind.Vot else None

    def _key(self) -> tuple:
        return ("gate", self.id, self.kind, tuple(self.children), self.threshold)

    def __eq__(self, other) -> bool:
        if isinstance(other, Gate):
            return self._key() == other._key()
        return False

    def __repr__(self) -> str:
        return "{}({}, {}, {}, threshold={})".format(
            _classname(self), repr(self.id), self.kind, repr(self.children), repr(self.threshold)
        )


class Dependency(object):
    """
    An FDEP forwards the trigger's failure to its (basic event) targets; an
    ADEP forwards the source's activation to its targets. Dependencies are
    never children of gates.
    """

    id: str
    """Unique element id."""
    kind: DependencyKind
    trigger: str
    """FDEP trigger or ADEP source."""
    targets: List[str]
    """Dependent events (FDEP) or activation destinations (ADEP), in order."""

    def __init__(self, id: str, kind: DependencyKind, trigger: str, targets: Iterable[str]):
        self.id = id
        self.kind = kind
        self.trigger = trigger
        self.targets = list(targets)

    def _key(self) -> tuple:
        return ("dep", self.id, self.kind, self.trigger, tuple(self.targets))

    def __eq__(self, other) -> bool:
        if isinstance(other, Dependency):
            return self._key() == other._key()
        return False

    def __repr__(self) -> str:
        return "{}({}, {}, {}, {})".format(
            _classname(self), repr(self.id), self.kind, repr(self.trigger), repr(self.targets)
        )


Element = Union[BasicEvent, Gate, Dependency]


class LabelSpec(object):
    """
    Named predicates over element failures, e.g. `degraded`.

    The `failed` label is reserved: it always denotes top-level failure and is
    attached by the state-space builder.
    """

    predicates: Dict[str, LabelExpression]
    """Predicates by label name, in declaration order."""

    def __init__(self, predicates: Optional[Mapping[str, Union[LabelExpression, str]]] = None):
        self.predicates = {}
        for name, predicate in (predicates or {}).items():
            self.add(name, predicate)

    def add(self, name: str, predicate: Union[LabelExpression, str]):
        if name == FAILED_LABEL:
            raise DftError("Label name is reserved for top-level failure", name)
        if isinstance(predicate, str):
            predicate = LabelExpression.parse(predicate)
        self.predicates[name] = predicate

    def elements(self) -> set:
        """All element ids any predicate refers to."""
        referenced = set()
        for predicate in self.predicates.values():
            referenced |= predicate.elements()
        return referenced

    def __len__(self) -> int:
        return len(self.predicates)

    def __iter__(self) -> Iterator[str]:
        return iter(self.predicates)

    def __eq__(self, other) -> bool:
        if isinstance(other, LabelSpec):
            return list(self.predicates.items()) == list(other.predicates.items())
        return False

    def __repr__(self) -> str:
        return "{}({})".format(
            _classname(self), repr({name: str(p) for name, p in self.predicates.items()})
        )


class Diagnostic(object):
    """One violated well-formedness rule."""

    element: Optional[str]
    """The offending element, if the rule concerns one."""
    rule: str
    """Short description of the violated rule."""

    def __init__(self, element: Optional[str], rule: str):
        self.element = element
        self.rule = rule

    def __str__(self) -> str:
        if self.element is None:
            return self.rule
        return "{}: {}".format(self.element, self.rule)

    def __eq__(self, other) -> bool:
        if isinstance(other, Diagnostic):
            return (self.element, self.rule) == (other.element, other.rule)
        return False

    def __repr__(self) -> str:
        return "{}({}, {})".format(_classname(self), repr(self.element), repr(self.rule))


class Dft(object):
    """
    A dynamic fault tree: typed elements, a top-level event, declared rate
    parameters and optional label predicates.

    A `Dft` whose `top` is None is a fragment, as produced while a scenario is
    being synthesised. Instances are treated as immutable once built; the
    rewriter and the synthesis functions return new trees.
    """

    elements: Dict[str, Element]
    """Elements by id, in declaration order."""
    top: Optional[str]
    """The top-level event."""
    parameters: Dict[str, Optional[float]]
    """
    Declared rate parameters with their default values; None marks a
    parameter that every valuation must supply.
    """
    labels: LabelSpec
    """Label predicates shipped with the tree."""
    duplicates: List[str]
    """Ids declared more than once; reported by `validate`."""

    def __init__(
        self,
        elements: Iterable[Element] = (),
        top: Optional[str] = None,
        parameters: Optional[Mapping[str, Optional[float]]] = None,
        labels: Optional[LabelSpec] = None,
    ):
        self.elements = {}
        self.duplicates = []
        for element in elements:
            self.add(element)
        self.top = top
        self.parameters = dict(parameters or {})
        self.labels = labels if labels is not None else LabelSpec()

    def add(self, element: Element):
        if element.id in self.elements:
            self.duplicates.append(element.id)
            return
        self.elements[element.id] = element

    def element(self, element_id: str) -> Element:
        try:
            return self.elements[element_id]
        except KeyError:
            raise UnknownElementError(element_id)

    def basic_event(self, element_id: str) -> BasicEvent:
        element = self.element(element_id)
        if not isinstance(element, BasicEvent):
            raise UnknownElementError(element_id, "Not a basic event")
        return element

    @property
    def basic_events(self) -> List[BasicEvent]:
        return [e for e in self.elements.values() if isinstance(e, BasicEvent)]

    @property
    def gates(self) -> List[Gate]:
        return [e for e in self.elements.values() if isinstance(e, Gate)]

    @property
    def dependencies(self) -> List[Dependency]:
        return [e for e in self.elements.values() if isinstance(e, Dependency)]

    def valuation(self, overrides: Optional[Mapping[str, float]] = None) -> Dict[str, float]:
        """Declared parameter defaults updated with `overrides`."""
        values = {k: v for k, v in self.parameters.items() if v is not None}
        values.update(overrides or {})
        return values

    def copy(self) -> Dft:
        return copy.deepcopy(self)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, element_id: str) -> bool:
        return element_id in self.elements

    def __eq__(self, other) -> bool:
        if isinstance(other, Dft):
            return (
                list(self.elements.items()) == list(other.elements.items())
                and self.top == other.top
                and self.parameters == other.parameters
                and self.labels == other.labels
            )
        return False

    def __repr__(self) -> str:
        return "{}(top={}, elements={}, parameters={})".format(
            _classname(self), repr(self.top), len(self.elements), repr(self.parameters)
        )
