from __future__ import annotations

import copy
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Tuple

import numpy as np
from scipy import sparse

from dftsafety.errors import DftError
from dftsafety.models.dft import FAILED_LABEL
from dftsafety.models.marking import Marking
from dftsafety.models.utilities import _classname


class Ctmc(object):
    """
    A labelled continuous-time Markov chain over dense state indices.

    `rates[s, s']` holds the transition rate from `s` to `s'`; the exit rate
    of `s` is the row sum. Labels are boolean masks over states.
    """

    rates: sparse.csr_matrix
    """Square sparse matrix of transition rates; stored entries are positive."""
    initial: int
    """The initial state."""
    labels: Dict[str, np.ndarray]
    """Boolean state masks by label name; `failed` is always present."""
    markings: List[Optional[Marking]]
    """Provenance: the DFT marking of each state, None for the merged failed sink."""
    entry_states: List[int]
    """Start states of an evidence query; just the initial state otherwise."""
    index: Dict[Hashable, int]
    """Canonical marking signature to state index."""
    failed_state: Optional[int]
    """The merged failed sink, if reached."""

    def __init__(
        self,
        rates: sparse.spmatrix,
        initial: int = 0,
        labels: Optional[Mapping[str, np.ndarray]] = None,
        markings: Optional[List[Optional[Marking]]] = None,
        entry_states: Optional[List[int]] = None,
        index: Optional[Dict[Hashable, int]] = None,
        failed_state: Optional[int] = None,
    ):
        rates = sparse.csr_matrix(rates, dtype=np.float64)
        if rates.shape[0] != rates.shape[1]:
            raise DftError("Rate matrix must be square")
        rates.eliminate_zeros()
        if rates.nnz and rates.data.min() < 0:
            raise DftError("Transition rates must be positive")
        self.rates = rates
        self.initial = initial
        self.labels = {
            name: np.asarray(mask, dtype=bool) for name, mask in (labels or {}).items()
        }
        if FAILED_LABEL not in self.labels:
            failed = np.zeros(self.num_states, dtype=bool)
            if failed_state is not None:
                failed[failed_state] = True
            self.labels[FAILED_LABEL] = failed
        self.markings = markings if markings is not None else [None] * self.num_states
        self.entry_states = entry_states if entry_states is not None else [initial]
        self.index = index if index is not None else {}
        self.failed_state = failed_state
        self._exit_rates: Optional[np.ndarray] = None

    @classmethod
    def from_transitions(
        cls,
        num_states: int,
        transitions: Iterable[Tuple[int, int, float]],
        initial: int = 0,
        labels: Optional[Mapping[str, Iterable[int]]] = None,
    ) -> Ctmc:
        """Builds a chain from `(source, target, rate)` triples and labelled state lists."""
        rows, cols, data = [], [], []
        for source, target, rate in transitions:
            rows.append(source)
            cols.append(target)
            data.append(rate)
        rates = sparse.coo_matrix((data, (rows, cols)), shape=(num_states, num_states))
        masks = {}
        for name, states in (labels or {}).items():
            mask = np.zeros(num_states, dtype=bool)
            mask[list(states)] = True
            masks[name] = mask
        return cls(rates.tocsr(), initial, masks)

    @property
    def num_states(self) -> int:
        return self.rates.shape[0]

    @property
    def num_transitions(self) -> int:
        return self.rates.nnz

    @property
    def exit_rates(self) -> np.ndarray:
        if self._exit_rates is None:
            self._exit_rates = np.asarray(self.rates.sum(axis=1)).ravel()
        return self._exit_rates

    @property
    def absorbing(self) -> np.ndarray:
        """Mask of states without outgoing transitions."""
        return self.exit_rates == 0

    def label(self, name: str) -> np.ndarray:
        """The mask of `name`; an all-false mask for labels the chain does not carry."""
        mask = self.labels.get(name)
        if mask is None:
            return np.zeros(self.num_states, dtype=bool)
        return mask

    def states(self, name: str) -> List[int]:
        return [int(s) for s in np.flatnonzero(self.label(name))]

    def successors(self, state: int) -> List[Tuple[int, float]]:
        start, end = self.rates.indptr[state], self.rates.indptr[state + 1]
        return [
            (int(target), float(rate))
            for target, rate in zip(self.rates.indices[start:end], self.rates.data[start:end])
        ]

    def with_initial(self, state: int) -> Ctmc:
        """A view of this chain with another initial state; matrices are shared."""
        other = copy.copy(self)
        other.initial = state
        return other

    def describe(self, state: int) -> str:
        marking = self.markings[state] if state < len(self.markings) else None
        if marking is not None:
            return marking.describe()
        if state == self.failed_state:
            return "failed"
        return str(state)

    def __repr__(self) -> str:
        return "{}(states={}, transitions={}, initial={}, labels={})".format(
            _classname(self),
            self.num_states,
            self.num_transitions,
            self.initial,
            repr(sorted(self.labels)),
        )
