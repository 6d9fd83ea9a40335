"""
Result and chain exporters: measure CSV, Graphviz DOT and plain transition
lists.
"""

from __future__ import annotations

import csv
import io
import logging
from typing import Iterable, List, Optional, Union

import networkx as nx
import pydot
from networkx.drawing.nx_pydot import to_pydot

from dftsafety.errors import DftError
from dftsafety.models.ctmc import Ctmc
from dftsafety.models.dft import FAILED_LABEL
from dftsafety.models.enums import ExportFormat
from dftsafety.models.results import BoundInterval, MeasureResult
from dftsafety.models.utilities import format_float

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["measure", "time", "value", "complement", "lower", "upper", "states", "elapsed"]

Row = Union[MeasureResult, BoundInterval]


def _cell(value: Optional[float]) -> str:
    return "" if value is None else format_float(value)


def _csv_row(row: Row) -> List[str]:
    if isinstance(row, BoundInterval):
        return [
            row.name,
            _cell(row.time),
            "",
            "",
            _cell(row.lower),
            _cell(row.upper),
            str(row.states_explored),
            "{:.6f}".format(row.elapsed),
        ]
    return [row.label, _cell(row.time), _cell(row.value), _cell(row.complement), "", "", "", ""]


def results_to_csv(rows: Iterable[Row]) -> str:
    """
    One CSV line per result. Exact results leave the bound, state and time
    columns empty; intervals leave value and complement empty.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(_csv_row(row))
    return out.getvalue()


def _quoted(text: str) -> str:
    return '"{}"'.format(text.replace("\\", "\\\\").replace('"', '\\"'))


def ctmc_graph(ctmc: Ctmc) -> nx.DiGraph:
    """The chain as a networkx graph with DOT attributes, in state order."""
    graph = nx.DiGraph()
    failed = ctmc.label(FAILED_LABEL)
    for state in range(ctmc.num_states):
        names = sorted(name for name, mask in ctmc.labels.items() if mask[state])
        text = ctmc.describe(state)
        if names:
            text = "{}\\n{}".format(text, ", ".join(names))
        attributes = {"label": _quoted("{}: {}".format(state, text))}
        if failed[state]:
            attributes["shape"] = "doublecircle"
        if state == ctmc.initial:
            attributes["style"] = "bold"
        graph.add_node(state, **attributes)
    for state in range(ctmc.num_states):
        for target, rate in ctmc.successors(state):
            graph.add_edge(state, target, label=_quoted(format_float(rate)))
    return graph


def ctmc_to_pydot(ctmc: Ctmc) -> pydot.Dot:
    return to_pydot(ctmc_graph(ctmc))


def ctmc_to_dot(ctmc: Ctmc) -> str:
    return ctmc_to_pydot(ctmc).to_string()


def ctmc_to_transition_list(ctmc: Ctmc) -> str:
    """
    `<states> <transitions>` and `initial <state>`, then one
    `<source> <target> <rate>` line per transition and one
    `label <name> <states...>` line per label.
    """
    lines = ["{} {}".format(ctmc.num_states, ctmc.num_transitions)]
    lines.append("initial {}".format(ctmc.initial))
    for state in range(ctmc.num_states):
        for target, rate in sorted(ctmc.successors(state)):
            lines.append("{} {} {}".format(state, target, format_float(rate)))
    for name in sorted(ctmc.labels):
        states = " ".join(str(s) for s in ctmc.states(name))
        lines.append("label {} {}".format(name, states).rstrip())
    return "\n".join(lines) + "\n"


def emit_results(
    results: Union[Iterable[Row], Ctmc], format: Union[str, ExportFormat] = ExportFormat.Csv
) -> bytes:
    """
    Renders measure results as CSV, or a chain as DOT or a transition list,
    encoded as UTF-8.
    """
    try:
        format = ExportFormat(format)
    except ValueError:
        raise DftError("Unknown export format", str(format))
    if format == ExportFormat.Csv:
        if isinstance(results, Ctmc):
            raise DftError("CSV export needs measure results, not a chain")
        text = results_to_csv(results)
    else:
        if not isinstance(results, Ctmc):
            raise DftError("{} export needs a chain".format(format.value))
        if format == ExportFormat.Dot:
            text = ctmc_to_dot(results)
        else:
            text = ctmc_to_transition_list(results)
    logger.debug("Exported %d bytes as %s", len(text), format.value)
    return text.encode("utf-8")
