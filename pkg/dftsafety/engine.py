"""
Numeric kernels on CTMCs: uniformization, time-bounded and unbounded
reach-avoid probabilities, expected times and forward first-passage
distributions.

State sets may be given as boolean masks or as iterables of state indices.
"""

from __future__ import annotations

import logging
from typing import Iterable, Optional, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve, spsolve_triangular
from scipy.stats import poisson

from dftsafety.errors import ConvergenceError, UndefinedExpectedTimeError
from dftsafety.models.ctmc import Ctmc
from dftsafety.models.settings import DEFAULT_SETTINGS, SolverSettings

logger = logging.getLogger(__name__)

StateSet = Union[np.ndarray, Iterable[int], None]


def _mask(ctmc: Ctmc, states: StateSet) -> np.ndarray:
    mask = np.zeros(ctmc.num_states, dtype=bool)
    if states is None:
        return mask
    if isinstance(states, np.ndarray) and states.dtype == bool:
        mask |= states
        return mask
    mask[list(states)] = True
    return mask


def poisson_window(rate_time: float, epsilon: float) -> Tuple[int, np.ndarray]:
    """
    Left truncation point and Poisson weights covering all but `epsilon` of
    the mass, split evenly between both tails.
    """
    if rate_time <= 0:
        return 0, np.ones(1)
    left = max(int(poisson.ppf(epsilon / 2, rate_time)), 0)
    right = max(int(poisson.isf(epsilon / 2, rate_time)), left)
    weights = poisson.pmf(np.arange(left, right + 1), rate_time)
    return left, weights


def _uniformized(
    ctmc: Ctmc, absorbing: np.ndarray, settings: SolverSettings
) -> Tuple[Optional[sparse.csr_matrix], float]:
    """
    The uniformized DTMC of `ctmc` with the `absorbing` states made
    absorbing, and its rate; (None, 0) if nothing can move.
    """
    keep = (~absorbing).astype(np.float64)
    rates = sparse.diags(keep) @ ctmc.rates
    exit_rates = ctmc.exit_rates * keep
    max_exit = float(exit_rates.max()) if exit_rates.size else 0.0
    if max_exit <= 0:
        return None, 0.0
    uniform = settings.uniformization_slack * max_exit
    matrix = (
        sparse.identity(ctmc.num_states, format="csr")
        - sparse.diags(exit_rates / uniform)
        + rates / uniform
    )
    return sparse.csr_matrix(matrix), uniform


def transient_distribution(
    ctmc: Ctmc,
    t: float,
    initial_distribution: Optional[np.ndarray] = None,
    absorbing: StateSet = None,
    settings: Optional[SolverSettings] = None,
) -> np.ndarray:
    """
    The state distribution at time `t` by uniformization, starting from
    `initial_distribution` (a point mass on the initial state by default).
    States in `absorbing` are made absorbing first.
    """
    settings = settings or DEFAULT_SETTINGS
    if initial_distribution is None:
        initial_distribution = np.zeros(ctmc.num_states)
        initial_distribution[ctmc.initial] = 1.0
    vector = np.asarray(initial_distribution, dtype=np.float64)
    matrix, uniform = _uniformized(ctmc, _mask(ctmc, absorbing), settings)
    if matrix is None or t <= 0:
        return vector.copy()
    return _poisson_sum(matrix.T.tocsr(), vector, uniform * t, settings)


def _poisson_sum(
    matrix: sparse.csr_matrix, vector: np.ndarray, rate_time: float, settings: SolverSettings
) -> np.ndarray:
    left, weights = poisson_window(rate_time, settings.epsilon)
    right = left + len(weights) - 1
    logger.debug("Uniformization window [%d, %d] for rate*time %g", left, right, rate_time)
    result = np.zeros_like(vector)
    for step in range(right + 1):
        if step >= left:
            result += weights[step - left] * vector
        if step < right:
            vector = matrix @ vector
    return result


def bounded_reach_backward(
    ctmc: Ctmc,
    bad: StateSet,
    target: StateSet,
    t: float,
    settings: Optional[SolverSettings] = None,
) -> np.ndarray:
    """
    For every state s, the probability of reaching `target` within `t` hours
    while avoiding `bad`. States in both sets count as target.
    """
    settings = settings or DEFAULT_SETTINGS
    target_mask = _mask(ctmc, target)
    bad_mask = _mask(ctmc, bad) & ~target_mask
    indicator = target_mask.astype(np.float64)
    matrix, uniform = _uniformized(ctmc, bad_mask | target_mask, settings)
    if matrix is None or t <= 0:
        return indicator
    return np.clip(_poisson_sum(matrix, indicator, uniform * t, settings), 0.0, 1.0)


def bounded_first_passage_forward(
    ctmc: Ctmc,
    absorbing: StateSet,
    t: float,
    settings: Optional[SolverSettings] = None,
) -> np.ndarray:
    """
    Probability that the first state of `absorbing` reached from the initial
    state within `t` hours is s, for all s at once. The result is indexed by
    state and zero outside `absorbing`.
    """
    mask = _mask(ctmc, absorbing)
    distribution = transient_distribution(ctmc, t, absorbing=mask, settings=settings)
    return np.where(mask, np.clip(distribution, 0.0, 1.0), 0.0)


def backward_reachable(ctmc: Ctmc, targets: np.ndarray, through: np.ndarray) -> np.ndarray:
    """States reaching `targets` along paths whose intermediate states lie in `through`."""
    reached = targets.copy()
    frontier = targets.copy()
    while frontier.any():
        predecessors = (ctmc.rates @ frontier.astype(np.float64)) > 0
        new = predecessors & through & ~reached
        reached |= new
        frontier = new
    return reached


def forward_reachable(ctmc: Ctmc, sources: np.ndarray, through: np.ndarray) -> np.ndarray:
    """States reached from `sources` whose predecessors along the path lie in `through`."""
    transposed = ctmc.rates.T.tocsr()
    reached = sources.copy()
    frontier = sources & through
    while frontier.any():
        successors = (transposed @ frontier.astype(np.float64)) > 0
        new = successors & ~reached
        reached |= new
        frontier = new & through
    return reached


def solve_linear(matrix: sparse.spmatrix, rhs: np.ndarray, settings: SolverSettings) -> np.ndarray:
    """
    Solves `matrix @ x = rhs`: sparse LU up to `direct_threshold` unknowns,
    Gauss-Seidel beyond.
    """
    if rhs.size == 0:
        return rhs.copy()
    if rhs.size <= settings.direct_threshold:
        solution = spsolve(sparse.csc_matrix(matrix), rhs)
        return np.atleast_1d(np.asarray(solution, dtype=np.float64))
    return _gauss_seidel(sparse.csr_matrix(matrix), rhs, settings)


def _gauss_seidel(matrix: sparse.csr_matrix, rhs: np.ndarray, settings: SolverSettings):
    lower = sparse.tril(matrix, format="csr")
    upper = sparse.triu(matrix, k=1, format="csr")
    solution = np.zeros_like(rhs)
    for iteration in range(1, settings.max_iterations + 1):
        updated = spsolve_triangular(lower, rhs - upper @ solution, lower=True)
        if not np.all(np.isfinite(updated)):
            raise ConvergenceError(iteration, "Gauss-Seidel iteration diverged")
        scale = np.maximum(np.abs(updated), np.finfo(np.float64).tiny)
        change = float(np.max(np.abs(updated - solution) / scale))
        solution = updated
        if change <= settings.tolerance:
            logger.debug("Gauss-Seidel converged after %d iterations", iteration)
            return solution
    raise ConvergenceError(settings.max_iterations)


def unbounded_reach_avoid(
    ctmc: Ctmc,
    bad: StateSet,
    target: StateSet,
    settings: Optional[SolverSettings] = None,
) -> np.ndarray:
    """For every state, the probability of eventually reaching `target` while avoiding `bad`."""
    settings = settings or DEFAULT_SETTINGS
    target_mask = _mask(ctmc, target)
    bad_mask = _mask(ctmc, bad) & ~target_mask
    passable = ~(bad_mask | target_mask)
    maybe = backward_reachable(ctmc, target_mask, passable) & passable
    result = target_mask.astype(np.float64)
    states = np.flatnonzero(maybe)
    if states.size == 0:
        return result
    rates = ctmc.rates[states]
    system = sparse.diags(ctmc.exit_rates[states]) - rates[:, states]
    rhs = np.asarray(rates[:, np.flatnonzero(target_mask)].sum(axis=1)).ravel()
    result[states] = np.clip(solve_linear(system, rhs, settings), 0.0, 1.0)
    return result


def expected_time(
    ctmc: Ctmc,
    target: StateSet,
    states: Optional[Iterable[int]] = None,
    settings: Optional[SolverSettings] = None,
    terminal: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Expected time to reach `target` from every state.

    The value is only defined where `target` is reached with probability one;
    if any of `states` (the initial state by default) lacks this, raises
    `UndefinedExpectedTimeError` naming a state that cannot reach the target.
    Entries of other states without a defined value are NaN. `terminal`
    optionally assigns a residual time to target states (zero by default).
    """
    settings = settings or DEFAULT_SETTINGS
    target_mask = _mask(ctmc, target)
    passable = ~target_mask
    reaching = backward_reachable(ctmc, target_mask, passable)
    stuck = ~reaching
    undefined = backward_reachable(ctmc, stuck, passable)
    queried = [ctmc.initial] if states is None else list(states)
    for state in queried:
        if undefined[state]:
            witness = _witness(ctmc, state, stuck, passable)
            raise UndefinedExpectedTimeError(witness, ctmc.describe(witness))
    result = np.full(ctmc.num_states, np.nan)
    result[target_mask] = 0.0 if terminal is None else terminal[target_mask]
    solvable = np.flatnonzero(~undefined & passable)
    if solvable.size == 0:
        return result
    rates = ctmc.rates[solvable]
    system = sparse.diags(ctmc.exit_rates[solvable]) - rates[:, solvable]
    rhs = np.ones(solvable.size)
    if terminal is not None:
        targets = np.flatnonzero(target_mask)
        rhs += rates[:, targets] @ terminal[targets]
    result[solvable] = solve_linear(system, rhs, settings)
    return result


def _witness(ctmc: Ctmc, state: int, stuck: np.ndarray, passable: np.ndarray) -> int:
    start = np.zeros(ctmc.num_states, dtype=bool)
    start[state] = True
    candidates = np.flatnonzero(forward_reachable(ctmc, start, passable) & stuck)
    return int(candidates[0]) if candidates.size else state


def unbounded_first_passage_forward(
    ctmc: Ctmc, absorbing: StateSet, settings: Optional[SolverSettings] = None
) -> np.ndarray:
    """
    Probability that the first state of `absorbing` ever reached from the
    initial state is s, for all s at once; zero outside `absorbing`.
    """
    settings = settings or DEFAULT_SETTINGS
    mask = _mask(ctmc, absorbing)
    result = np.zeros(ctmc.num_states)
    if mask[ctmc.initial]:
        result[ctmc.initial] = 1.0
        return result
    passable = ~mask
    start = np.zeros(ctmc.num_states, dtype=bool)
    start[ctmc.initial] = True
    transient = (
        forward_reachable(ctmc, start, passable)
        & backward_reachable(ctmc, mask, passable)
        & passable
    )
    states = np.flatnonzero(transient)
    if states.size == 0:
        return result
    exit_rates = ctmc.exit_rates[states]
    jumps = sparse.diags(1.0 / exit_rates) @ ctmc.rates[states]
    system = sparse.identity(states.size, format="csr") - jumps[:, states]
    start_vector = (states == ctmc.initial).astype(np.float64)
    visits = solve_linear(system.T, start_vector, settings)
    targets = np.flatnonzero(mask)
    result[targets] = np.clip(jumps[:, targets].T @ visits, 0.0, 1.0)
    return result
