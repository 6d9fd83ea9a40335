"""Models module for dftsafety. Contains the DFT, scenario, CTMC and result models, and enums."""

from .utilities import format_float, quote_id
from .enums import (
    BlockTemplateKind,
    DependencyKind,
    ExportFormat,
    GateKind,
    Measure,
    RedundancyMode,
)
from .expressions import LabelExpression, RateExpression
from .dft import BasicEvent, Dependency, Dft, Diagnostic, Gate, LabelSpec
from .marking import Marking
from .ctmc import Ctmc
from .results import BoundInterval, MeasureParams, MeasureResult
from .settings import DEFAULT_SETTINGS, SolverSettings
from .scenario import (
    Block,
    BlockDiagram,
    BlockFaultTree,
    EEArchitecture,
    HardwareAssignment,
    HardwareTemplate,
    Path,
    Scenario,
    Task,
    TaskSpec,
)

__all__ = [
    "format_float",
    "quote_id",
    "BlockTemplateKind",
    "DependencyKind",
    "ExportFormat",
    "GateKind",
    "Measure",
    "RedundancyMode",
    "LabelExpression",
    "RateExpression",
    "BasicEvent",
    "Dependency",
    "Dft",
    "Diagnostic",
    "Gate",
    "LabelSpec",
    "Marking",
    "Ctmc",
    "BoundInterval",
    "MeasureParams",
    "MeasureResult",
    "DEFAULT_SETTINGS",
    "SolverSettings",
    "Block",
    "BlockDiagram",
    "BlockFaultTree",
    "EEArchitecture",
    "HardwareAssignment",
    "HardwareTemplate",
    "Path",
    "Scenario",
    "Task",
    "TaskSpec",
]
