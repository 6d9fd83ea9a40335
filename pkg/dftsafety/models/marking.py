from __future__ import annotations

from typing import Dict, FrozenSet, Hashable, Tuple

from dftsafety.models.utilities import _classname


class Marking(object):
    """
    The dynamic status of a DFT after an ordered failure sequence.

    Markings are immutable; `DftSemantics` derives successors.
    """

    failed_bes: Tuple[str, ...]
    """Failed basic events in failure order, including FDEP-caused failures."""
    failed: FrozenSet[str]
    """Failed elements (basic events and gates)."""
    fail_safe: FrozenSet[str]
    """PAND gates whose order was violated; they can never fail."""
    spare_using: Dict[str, int]
    """For each SPARE, the index of the child currently in use."""
    active: FrozenSet[str]
    """Active elements; inactive basic events fail at their dormant rate."""
    top_failed: bool
    """Whether the top-level event has failed."""

    def __init__(
        self,
        failed_bes: Tuple[str, ...],
        failed: FrozenSet[str],
        fail_safe: FrozenSet[str],
        spare_using: Dict[str, int],
        active: FrozenSet[str],
        top_failed: bool,
    ):
        self.failed_bes = tuple(failed_bes)
        self.failed = frozenset(failed)
        self.fail_safe = frozenset(fail_safe)
        self.spare_using = dict(spare_using)
        self.active = frozenset(active)
        self.top_failed = top_failed

    @property
    def signature(self) -> Hashable:
        """
        Canonical key: two markings with equal signatures have
        indistinguishable futures. The failure order is dropped.
        """
        return (
            self.failed,
            self.fail_safe,
            tuple(sorted(self.spare_using.items())),
            self.active,
        )

    def is_failed(self, element_id: str) -> bool:
        return element_id in self.failed

    def is_active(self, element_id: str) -> bool:
        return element_id in self.active

    def describe(self) -> str:
        """Short human-readable summary, used in logs and exports."""
        if self.top_failed:
            return "failed"
        text = "{" + ", ".join(sorted(self.failed_bes)) + "}"
        if self.fail_safe:
            text += " fail-safe {" + ", ".join(sorted(self.fail_safe)) + "}"
        return text

    def __eq__(self, other) -> bool:
        if isinstance(other, Marking):
            return self.signature == other.signature and self.failed_bes == other.failed_bes
        return False

    def __hash__(self) -> int:
        return hash((self.signature, self.failed_bes))

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return "{}(failed_bes={}, fail_safe={}, spare_using={})".format(
            _classname(self),
            repr(self.failed_bes),
            repr(sorted(self.fail_safe)),
            repr(self.spare_using),
        )
