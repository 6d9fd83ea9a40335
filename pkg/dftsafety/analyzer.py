from __future__ import annotations

import logging
from typing import Generator, Iterable, List, Mapping, Optional, Union

from dftsafety.approximation import approx_mttf, approx_unreliability
from dftsafety.errors import DftError
from dftsafety.measures import (
    evaluate_measure,
    iter_sensitivity_sweep,
    measure_by_name,
    with_evidence,
)
from dftsafety.models.ctmc import Ctmc
from dftsafety.models.dft import Dft, LabelSpec
from dftsafety.models.enums import Measure
from dftsafety.models.results import BoundInterval, MeasureParams, MeasureResult
from dftsafety.models.scenario import Scenario
from dftsafety.models.settings import DEFAULT_SETTINGS, SolverSettings
from dftsafety.models.utilities import _classname
from dftsafety.parser import parse_dft
from dftsafety.rewriter import rewrite
from dftsafety.scenario_io import load_scenario
from dftsafety.statespace import build_ctmc
from dftsafety.synthesis import synthesize

logger = logging.getLogger(__name__)

APPROXIMABLE = (Measure.Unreliability, Measure.Mttf)


class Analyzer(object):
    """
    Specifies a strategy for analysing DFTs: solver settings, whether trees
    are simplified before state-space generation, and how many threads a
    sensitivity sweep may use.

    This class ties parsing, synthesis, rewriting, chain generation and the
    measures together; `Analyzer.sweep` yields one result per valuation.
    """

    settings: SolverSettings
    """Numeric configuration passed to every computation."""
    rewrite: bool
    """Simplify trees with the measure-preserving rewriter before analysis."""
    workers: int
    """
    Threads used by sensitivity sweeps. Rows are independent, so results do
    not depend on this value; only their computation order does.
    """

    def __init__(
        self,
        settings: Optional[SolverSettings] = None,
        rewrite: bool = False,
        workers: int = 1,
    ):
        self.settings = settings or DEFAULT_SETTINGS
        self.rewrite = rewrite
        self.workers = max(1, workers)

    def __repr__(self) -> str:
        return "{}(settings={}, rewrite={}, workers={})".format(
            _classname(self), repr(self.settings), repr(self.rewrite), repr(self.workers)
        )

    def load(self, path: str) -> Dft:
        """Reads a DFT text file, or synthesises the DFT of a `.yaml`/`.yml` scenario."""
        if path.endswith((".yaml", ".yml")):
            return self.synthesize(load_scenario(path))
        with open(path, "r", encoding="utf-8") as f:
            return self.prepare(parse_dft(f.read()))

    def synthesize(self, scenario: Scenario) -> Dft:
        return self.prepare(synthesize(scenario))

    def prepare(self, dft: Dft) -> Dft:
        """Applies the rewriter if enabled."""
        if self.rewrite:
            return rewrite(dft)
        return dft

    def chain(
        self,
        dft: Dft,
        valuation: Optional[Mapping[str, float]] = None,
        labels: Optional[LabelSpec] = None,
        evidence: Iterable[str] = (),
    ) -> Ctmc:
        return build_ctmc(dft, labels, valuation, evidence, self.settings)

    def evaluate(
        self,
        dft: Dft,
        measures: Iterable[Union[str, Measure]],
        params: Optional[MeasureParams] = None,
        valuation: Optional[Mapping[str, float]] = None,
        labels: Optional[LabelSpec] = None,
        evidence: Iterable[str] = (),
    ) -> List[MeasureResult]:
        """
        Evaluates each measure on one chain. With evidence, every measure
        yields one result per entry state.
        """
        measures = [measure_by_name(m) for m in measures]
        evidence = list(evidence)
        ctmc = self.chain(dft, valuation, labels, evidence)
        logger.info(
            "Built CTMC: %d states, %d transitions", ctmc.num_states, ctmc.num_transitions
        )
        results: List[MeasureResult] = []
        for measure in measures:
            if evidence:
                results.extend(
                    with_evidence(
                        dft, labels, valuation, evidence, measure, params, ctmc, self.settings
                    )
                )
            else:
                results.append(evaluate_measure(ctmc, measure, params, self.settings))
        return results

    def approximate(
        self,
        dft: Dft,
        measure: Union[str, Measure],
        rel_err: float,
        params: Optional[MeasureParams] = None,
        valuation: Optional[Mapping[str, float]] = None,
        labels: Optional[LabelSpec] = None,
    ) -> BoundInterval:
        """
        Bounds unreliability (at `params.time`) or MTTF from a partial state
        space. Raises `CapReachedWithoutPrecisionError` carrying the best
        interval if the state cap is reached first.
        """
        measure = measure_by_name(measure)
        if measure not in APPROXIMABLE:
            raise DftError("Only unreliability and mttf can be approximated", measure.value)
        params = params or MeasureParams()
        if measure == Measure.Unreliability:
            return approx_unreliability(
                dft, labels, valuation, params.time, rel_err, self.settings
            )
        return approx_mttf(dft, labels, valuation, rel_err, self.settings)

    def sweep(
        self,
        dft: Dft,
        measure: Union[str, Measure],
        valuations: Iterable[Mapping[str, float]],
        params: Optional[MeasureParams] = None,
        labels: Optional[LabelSpec] = None,
    ) -> Generator[MeasureResult, None, None]:
        """
        Yields one result per valuation, in valuation order, each as soon as
        it is computed.
        """
        yield from iter_sensitivity_sweep(
            dft, labels, valuations, measure, params, self.settings, self.workers
        )
