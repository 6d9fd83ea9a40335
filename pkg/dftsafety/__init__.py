"""dftsafety: dynamic fault tree synthesis and CTMC-based safety analysis."""

# models before errors: errors imports models.utilities
from .models import (
    BasicEvent,
    Block,
    BlockDiagram,
    BlockTemplateKind,
    BoundInterval,
    Ctmc,
    Dependency,
    DependencyKind,
    Dft,
    EEArchitecture,
    ExportFormat,
    Gate,
    GateKind,
    HardwareTemplate,
    LabelSpec,
    Measure,
    MeasureParams,
    MeasureResult,
    Path,
    RedundancyMode,
    Scenario,
    SolverSettings,
    Task,
    TaskSpec,
)
from .errors import (
    CapReachedWithoutPrecisionError,
    DftError,
    DftSyntaxError,
    ScenarioError,
    StateSpaceLimitExceeded,
    UndefinedExpectedTimeError,
    ValidationError,
)
from .analyzer import Analyzer
from .approximation import approx_mttf, approx_unreliability
from .export import emit_results
from .measures import evaluate_measure, iter_sensitivity_sweep, sensitivity_sweep, with_evidence
from .parser import parse_dft, serialize_dft
from .rewriter import rewrite
from .scenario_io import load_scenario, parse_scenario
from .semantics import validate
from .statespace import build_ctmc
from .synthesis import synthesize

__all__ = [
    "Analyzer",
    "BasicEvent",
    "Block",
    "BlockDiagram",
    "BlockTemplateKind",
    "BoundInterval",
    "Ctmc",
    "Dependency",
    "DependencyKind",
    "Dft",
    "EEArchitecture",
    "ExportFormat",
    "Gate",
    "GateKind",
    "HardwareTemplate",
    "LabelSpec",
    "Measure",
    "MeasureParams",
    "MeasureResult",
    "Path",
    "RedundancyMode",
    "Scenario",
    "SolverSettings",
    "Task",
    "TaskSpec",
    "CapReachedWithoutPrecisionError",
    "DftError",
    "DftSyntaxError",
    "ScenarioError",
    "StateSpaceLimitExceeded",
    "UndefinedExpectedTimeError",
    "ValidationError",
    "approx_mttf",
    "approx_unreliability",
    "build_ctmc",
    "emit_results",
    "evaluate_measure",
    "iter_sensitivity_sweep",
    "load_scenario",
    "parse_dft",
    "parse_scenario",
    "rewrite",
    "sensitivity_sweep",
    "serialize_dft",
    "synthesize",
    "validate",
    "with_evidence",
]
