"""
Safety measures as model-checking queries on CTMCs, plus evidence queries
and sensitivity sweeps that rebuild the chain as needed.

Degraded states are the operational states satisfying the `degraded`
label; the failed sink never counts as degraded.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Union

import numpy as np

from dftsafety.engine import (
    bounded_first_passage_forward,
    bounded_reach_backward,
    expected_time,
    unbounded_first_passage_forward,
)
from dftsafety.errors import DftError, NoDegradedStatesError
from dftsafety.models.ctmc import Ctmc
from dftsafety.models.dft import FAILED_LABEL, Dft, LabelSpec
from dftsafety.models.enums import Measure
from dftsafety.models.results import MeasureParams, MeasureResult
from dftsafety.models.settings import DEFAULT_SETTINGS, SolverSettings
from dftsafety.statespace import StateExplorer, locate_entry_states

logger = logging.getLogger(__name__)


def _failed(ctmc: Ctmc) -> np.ndarray:
    return ctmc.label(FAILED_LABEL)


def _degraded(ctmc: Ctmc, settings: SolverSettings) -> np.ndarray:
    return ctmc.label(settings.degraded_label) & ~_failed(ctmc)


def _probability(name: str, value: float, time: Optional[float] = None, **kwargs) -> MeasureResult:
    value = float(min(max(value, 0.0), 1.0))
    return MeasureResult(name, value, 1.0 - value, time, **kwargs)


def _unreliability_value(ctmc: Ctmc, t: float, settings: SolverSettings) -> float:
    return float(bounded_reach_backward(ctmc, None, _failed(ctmc), t, settings)[ctmc.initial])


def reliability(ctmc: Ctmc, t: float, settings: Optional[SolverSettings] = None) -> MeasureResult:
    """Probability of no top-level failure within `t` hours."""
    settings = settings or DEFAULT_SETTINGS
    return _probability("reliability", 1.0 - _unreliability_value(ctmc, t, settings), t)


def unreliability(
    ctmc: Ctmc, t: float, settings: Optional[SolverSettings] = None
) -> MeasureResult:
    """Probability of top-level failure within `t` hours."""
    settings = settings or DEFAULT_SETTINGS
    return _probability("unreliability", _unreliability_value(ctmc, t, settings), t)


def afh(ctmc: Ctmc, lifetime: float, settings: Optional[SolverSettings] = None) -> MeasureResult:
    """Average failure probability per hour over `lifetime`."""
    settings = settings or DEFAULT_SETTINGS
    if lifetime <= 0:
        raise DftError("AFH requires a positive lifetime", str(lifetime))
    value = _unreliability_value(ctmc, lifetime, settings) / lifetime
    return MeasureResult("afh", value, None, lifetime)


def mttf(ctmc: Ctmc, settings: Optional[SolverSettings] = None) -> MeasureResult:
    """Mean time to failure; raises `UndefinedExpectedTimeError` if failure is not certain."""
    settings = settings or DEFAULT_SETTINGS
    value = expected_time(ctmc, _failed(ctmc), settings=settings)[ctmc.initial]
    return MeasureResult("mttf", float(value))


def ffa(ctmc: Ctmc, t: float, settings: Optional[SolverSettings] = None) -> MeasureResult:
    """Full-function availability: neither failed nor degraded within `t` hours."""
    settings = settings or DEFAULT_SETTINGS
    target = _failed(ctmc) | _degraded(ctmc, settings)
    reached = bounded_reach_backward(ctmc, None, target, t, settings)[ctmc.initial]
    return _probability("ffa", 1.0 - float(reached), t)


def _fwd_value(ctmc: Ctmc, t: float, settings: SolverSettings) -> float:
    degraded = _degraded(ctmc, settings)
    target = _failed(ctmc) & ~degraded
    return float(bounded_reach_backward(ctmc, degraded, target, t, settings)[ctmc.initial])


def fwd(ctmc: Ctmc, t: float, settings: Optional[SolverSettings] = None) -> MeasureResult:
    """Failure within `t` hours without passing through a degraded state first."""
    settings = settings or DEFAULT_SETTINGS
    return _probability("fwd", _fwd_value(ctmc, t, settings), t)


def mtdf(ctmc: Ctmc, settings: Optional[SolverSettings] = None) -> MeasureResult:
    """
    Mean time from degradation to failure: the expected time to failure from
    each degraded state, weighted by the probability that it is the first
    degraded state reached. Zero, with a warning, if no degraded state is
    reachable.
    """
    settings = settings or DEFAULT_SETTINGS
    degraded = _degraded(ctmc, settings)
    first = unbounded_first_passage_forward(ctmc, degraded | _failed(ctmc), settings)
    entered = [int(s) for s in np.flatnonzero(degraded & (first > 0))]
    if not entered:
        logger.warning("MTDF: no degraded states reachable, reporting 0")
        return MeasureResult("mtdf", 0.0, breakdown={})
    times = expected_time(ctmc, _failed(ctmc), states=entered, settings=settings)
    breakdown = {s: float(first[s] * times[s]) for s in entered}
    return MeasureResult("mtdf", float(sum(breakdown.values())), breakdown=breakdown)


def mdr(ctmc: Ctmc, t: float, settings: Optional[SolverSettings] = None) -> MeasureResult:
    """
    Minimal degraded reliability: the worst reliability over `t` hours from
    any degraded state, with the minimising state as witness.
    """
    settings = settings or DEFAULT_SETTINGS
    degraded = np.flatnonzero(_degraded(ctmc, settings))
    if degraded.size == 0:
        raise NoDegradedStatesError("mdr")
    reach = bounded_reach_backward(ctmc, None, _failed(ctmc), t, settings)
    values = {int(s): 1.0 - float(reach[s]) for s in degraded}
    witness = min(values, key=lambda s: (values[s], s))
    return _probability(
        "mdr",
        values[witness],
        t,
        witness=witness,
        witness_description=ctmc.describe(witness),
        breakdown=values,
    )


def _flod_breakdown(
    ctmc: Ctmc, t: float, drivecycle: float, settings: SolverSettings
) -> Dict[int, float]:
    degraded = _degraded(ctmc, settings)
    if not degraded.any():
        return {}
    first = bounded_first_passage_forward(ctmc, degraded | _failed(ctmc), t, settings)
    residual = bounded_reach_backward(ctmc, None, _failed(ctmc), drivecycle, settings)
    return {int(s): float(first[s] * residual[s]) for s in np.flatnonzero(degraded)}


def flod(
    ctmc: Ctmc, t: float, drivecycle: float, settings: Optional[SolverSettings] = None
) -> MeasureResult:
    """
    Failure under limited operation in degradation: the probability of
    entering a degraded state within `t` hours and failing within one
    `drivecycle` from there.
    """
    settings = settings or DEFAULT_SETTINGS
    breakdown = _flod_breakdown(ctmc, t, drivecycle, settings)
    return _probability("flod", sum(breakdown.values()), t, breakdown=breakdown)


def silfo(
    ctmc: Ctmc, t: float, drivecycle: float, settings: Optional[SolverSettings] = None
) -> MeasureResult:
    """System integrity under limited fail-operation: 1 - (FWD + FLOD)."""
    settings = settings or DEFAULT_SETTINGS
    fwd_value = _fwd_value(ctmc, t, settings)
    flod_value = sum(_flod_breakdown(ctmc, t, drivecycle, settings).values())
    return _probability(
        "silfo",
        1.0 - (fwd_value + flod_value),
        t,
        components={"fwd": fwd_value, "flod": flod_value},
    )


_DISPATCH: Dict[Measure, Callable[[Ctmc, MeasureParams, SolverSettings], MeasureResult]] = {
    Measure.Reliability: lambda c, p, s: reliability(c, p.time, s),
    Measure.Unreliability: lambda c, p, s: unreliability(c, p.time, s),
    Measure.Afh: lambda c, p, s: afh(c, p.lifetime, s),
    Measure.Mttf: lambda c, p, s: mttf(c, s),
    Measure.Ffa: lambda c, p, s: ffa(c, p.time, s),
    Measure.Fwd: lambda c, p, s: fwd(c, p.time, s),
    Measure.Mtdf: lambda c, p, s: mtdf(c, s),
    Measure.Mdr: lambda c, p, s: mdr(c, p.time, s),
    Measure.Flod: lambda c, p, s: flod(c, p.time, p.drivecycle, s),
    Measure.Silfo: lambda c, p, s: silfo(c, p.time, p.drivecycle, s),
}


def measure_by_name(name: Union[str, Measure]) -> Measure:
    if isinstance(name, Measure):
        return name
    try:
        return Measure(name.strip().lower())
    except ValueError:
        raise DftError("Unknown measure", name)


def evaluate_measure(
    ctmc: Ctmc,
    measure: Union[str, Measure],
    params: Optional[MeasureParams] = None,
    settings: Optional[SolverSettings] = None,
) -> MeasureResult:
    """Evaluates one measure from the chain's initial state."""
    measure = measure_by_name(measure)
    result = _DISPATCH[measure](ctmc, params or MeasureParams(), settings or DEFAULT_SETTINGS)
    result.states = ctmc.num_states
    logger.info("%s = %r (%d states)", measure.value, result.value, ctmc.num_states)
    return result


def with_evidence(
    dft: Dft,
    labels: Optional[LabelSpec],
    valuation: Optional[Mapping[str, float]],
    evidence: Iterable[str],
    measure: Union[str, Measure],
    params: Optional[MeasureParams] = None,
    ctmc: Optional[Ctmc] = None,
    settings: Optional[SolverSettings] = None,
) -> List[MeasureResult]:
    """
    Evaluates a measure from every entry state induced by the evidence.

    A previously built full chain can be passed as `ctmc`; it is reused when
    every entry marking occurs in it. Without evidence the single result
    equals the plain measure.
    """
    explorer = StateExplorer(dft, valuation, labels, settings)
    evidence = list(evidence)
    entries = explorer.entry_markings(evidence)
    states = locate_entry_states(ctmc, entries) if ctmc is not None else None
    if states is None:
        ctmc = explorer.build(evidence)
        states = ctmc.entry_states
    else:
        logger.info("Reusing CTMC with %d states for evidence query", ctmc.num_states)
    results = []
    for state in states:
        result = evaluate_measure(ctmc.with_initial(state), measure, params, settings)
        if evidence:
            result.state = state
        results.append(result)
    return results


def iter_sensitivity_sweep(
    dft: Dft,
    labels: Optional[LabelSpec],
    valuations: Iterable[Mapping[str, float]],
    measure: Union[str, Measure],
    params: Optional[MeasureParams] = None,
    settings: Optional[SolverSettings] = None,
    workers: int = 1,
) -> Iterator[MeasureResult]:
    """
    Yields one result per valuation as soon as it and all earlier rows are
    done, rebuilding the CTMC each time. Rows may be evaluated on `workers`
    threads; their order always follows `valuations`.
    """
    valuations = [dict(v) for v in valuations]
    measure = measure_by_name(measure)

    def row(valuation: Dict[str, float]) -> MeasureResult:
        ctmc = StateExplorer(dft, valuation, labels, settings).build()
        result = evaluate_measure(ctmc, measure, params, settings)
        result.valuation = valuation
        return result

    if workers > 1 and len(valuations) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            yield from executor.map(row, valuations)
    else:
        for valuation in valuations:
            yield row(valuation)


def sensitivity_sweep(
    dft: Dft,
    labels: Optional[LabelSpec],
    valuations: Iterable[Mapping[str, float]],
    measure: Union[str, Measure],
    params: Optional[MeasureParams] = None,
    settings: Optional[SolverSettings] = None,
    workers: int = 1,
) -> List[MeasureResult]:
    """All rows of `iter_sensitivity_sweep`, in valuation order."""
    return list(
        iter_sensitivity_sweep(dft, labels, valuations, measure, params, settings, workers)
    )
