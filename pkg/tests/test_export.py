import csv
import io
import unittest

import pydot

import dftsafety
from dftsafety.export import CSV_COLUMNS, ctmc_graph, ctmc_to_transition_list, results_to_csv
from tests import fixtures


def line() -> dftsafety.Ctmc:
    return dftsafety.Ctmc.from_transitions(
        3, [(0, 1, 1.0), (1, 2, 2.0)], labels={"failed": [2], "degraded": [1]}
    )


def rows(text: str):
    return list(csv.reader(io.StringIO(text)))


class TestCsv(unittest.TestCase):
    def test_exact_result(self):
        result = dftsafety.MeasureResult("reliability", 0.25, complement=0.75, time=2.0)
        header, row = rows(results_to_csv([result]))
        self.assertEqual(header, CSV_COLUMNS)
        self.assertEqual(row, ["reliability", "2.0", "0.25", "0.75", "", "", "", ""])

    def test_interval(self):
        interval = dftsafety.BoundInterval(
            "unreliability", 0.1, 0.2, states_explored=7, iterations=3, time=1.0, elapsed=0.5
        )
        _, row = rows(results_to_csv([interval]))
        self.assertEqual(row, ["unreliability", "1.0", "", "", "0.1", "0.2", "7", "0.500000"])

    def test_qualified_labels(self):
        results = [
            dftsafety.MeasureResult("mttf", 1.5, state=3),
            dftsafety.MeasureResult("mttf", 2.5, valuation={"mu": 0.5}),
        ]
        table = rows(results_to_csv(results))
        self.assertEqual([r[0] for r in table[1:]], ["mttf@3", "mttf[mu=0.5]"])
        self.assertEqual(table[1][1], "")

    def test_emit(self):
        result = dftsafety.MeasureResult("mttf", 1.5)
        data = dftsafety.emit_results([result])
        self.assertIsInstance(data, bytes)
        self.assertTrue(data.decode("utf-8").startswith(",".join(CSV_COLUMNS)))
        self.assertEqual(dftsafety.emit_results([result], "csv"), data)


class TestChainExport(unittest.TestCase):
    def test_transition_list(self):
        self.assertEqual(
            ctmc_to_transition_list(line()),
            "3 2\ninitial 0\n0 1 1.0\n1 2 2.0\nlabel degraded 1\nlabel failed 2\n",
        )

    def test_emit_transition_list(self):
        data = dftsafety.emit_results(line(), dftsafety.ExportFormat.TransitionList)
        self.assertEqual(data.decode("utf-8").splitlines()[0], "3 2")

    def test_graph(self):
        graph = ctmc_graph(line())
        self.assertEqual(list(graph.nodes), [0, 1, 2])
        self.assertEqual(graph.nodes[2]["shape"], "doublecircle")
        self.assertEqual(graph.nodes[0]["style"], "bold")
        self.assertIn("degraded", graph.nodes[1]["label"])
        self.assertEqual(graph.edges[1, 2]["label"], '"2.0"')

    def test_dot(self):
        text = dftsafety.emit_results(fixtures.chain(fixtures.F_AND), "dot").decode("utf-8")
        (dot,) = pydot.graph_from_dot_data(text)
        self.assertEqual(len(dot.get_edges()), 4)
        self.assertIn("{A}", text)

    def test_format_mismatch(self):
        with self.assertRaises(dftsafety.DftError):
            dftsafety.emit_results(line(), "csv")
        with self.assertRaises(dftsafety.DftError):
            dftsafety.emit_results([], "dot")
        with self.assertRaises(dftsafety.DftError):
            dftsafety.emit_results([], "xml")
