import csv
import io
import os
import tempfile
import unittest
from unittest.mock import patch

from pytest import approx

import dftsafety
from dftsafety.analyzer import Analyzer
from dftsafety.cli import EXIT_ERROR, EXIT_INVALID, EXIT_OK, EXIT_UNDEFINED, main
from dftsafety.statespace import StateExplorer
from tests import fixtures


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.out = os.path.join(self.directory.name, "out")

    def tearDown(self):
        self.directory.cleanup()

    def write(self, name: str, text: str) -> str:
        path = os.path.join(self.directory.name, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    def output(self) -> str:
        with open(self.out, "r", encoding="utf-8") as f:
            return f.read()

    def table(self):
        return list(csv.DictReader(io.StringIO(self.output())))

    def run_cli(self, *argv: str) -> int:
        return main(["-q"] + list(argv))


class TestCheck(CliTestCase):
    def test_measures(self):
        path = self.write("and.dft", fixtures.F_AND)
        with patch("sys.stdout", new_callable=io.StringIO) as stdout:
            code = self.run_cli("check", path, "--measure", "mttf,unreliability", "--time", "1")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(len(stdout.getvalue().splitlines()), 3)

    def test_output(self):
        path = self.write("and.dft", fixtures.F_AND)
        code = self.run_cli("check", path, "--measure", "mttf,unreliability", "-o", self.out)
        self.assertEqual(code, EXIT_OK)
        mttf, unreliability = self.table()
        self.assertEqual(mttf["measure"], "mttf")
        self.assertEqual(float(mttf["value"]), approx(7 / 6))
        self.assertEqual(float(unreliability["time"]), 10_000.0)

    def test_stdout(self):
        path = self.write("or.dft", fixtures.F_OR)
        with patch("sys.stdout", new_callable=io.StringIO) as stdout:
            self.assertEqual(self.run_cli("check", path), EXIT_OK)
        self.assertTrue(stdout.getvalue().startswith("measure,time,value"))

    def test_evidence(self):
        path = self.write("and.dft", fixtures.F_AND)
        code = self.run_cli("check", path, "--measure", "mttf", "--evidence", "A", "-o", self.out)
        self.assertEqual(code, EXIT_OK)
        (row,) = self.table()
        self.assertTrue(row["measure"].startswith("mttf@"))
        self.assertEqual(float(row["value"]), approx(0.5))

    def test_parameter(self):
        path = self.write("single.dft", fixtures.F_SINGLE)
        code = self.run_cli(
            "check", path, "--param", "lambda_a=0.5", "--measure", "mttf", "-o", self.out
        )
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(float(self.table()[0]["value"]), approx(2.0))

    def test_scenario(self):
        code = self.run_cli(
            "check", fixtures.scenario_path("chain.yaml"), "--measure", "mttf", "-o", self.out
        )
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(float(self.table()[0]["value"]), approx(1 / 3))

    def test_undefined(self):
        path = self.write("pand.dft", fixtures.F_PAND)
        self.assertEqual(self.run_cli("check", path, "--measure", "mttf"), EXIT_UNDEFINED)
        path = self.write("and.dft", fixtures.F_AND)
        self.assertEqual(self.run_cli("check", path, "--measure", "mdr"), EXIT_UNDEFINED)

    def test_invalid_input(self):
        path = self.write("bad.dft", "toplevel T; T and A B; A lambda=1;")
        self.assertEqual(self.run_cli("check", path), EXIT_INVALID)
        path = self.write("broken.dft", "toplevel T; T and A")
        self.assertEqual(self.run_cli("check", path), EXIT_INVALID)

    def test_invalid_arguments(self):
        path = self.write("and.dft", fixtures.F_AND)
        self.assertEqual(self.run_cli("check", path, "--param", "lambda"), EXIT_INVALID)
        self.assertEqual(self.run_cli("check", path, "--time", "-1"), EXIT_INVALID)

    def test_errors(self):
        missing = os.path.join(self.directory.name, "missing.dft")
        self.assertEqual(self.run_cli("check", missing), EXIT_ERROR)
        path = self.write("and.dft", fixtures.F_AND)
        self.assertEqual(self.run_cli("check", path, "--measure", "availability"), EXIT_ERROR)


class TestOtherCommands(CliTestCase):
    def test_synth(self):
        code = self.run_cli("synth", fixtures.scenario_path("chain.yaml"), "-o", self.out)
        self.assertEqual(code, EXIT_OK)
        dft = dftsafety.parse_dft(self.output())
        self.assertEqual(dft.top, "system")
        self.assertIn("control.p1", dft)

    def test_synth_inconsistent_scenario(self):
        path = self.write("bad.yaml", "blocks: {A: {}}\n")
        self.assertEqual(self.run_cli("synth", path), EXIT_INVALID)

    def test_rewrite(self):
        path = self.write(
            "nested.dft", "toplevel T; T or G C; G or A B; A lambda=1; B lambda=1; C lambda=1;"
        )
        self.assertEqual(self.run_cli("rewrite", path, "-o", self.out), EXIT_OK)
        self.assertNotIn("G", dftsafety.parse_dft(self.output()))

    def test_approx(self):
        path = self.write("and.dft", fixtures.F_AND)
        code = self.run_cli(
            "approx", path, "--measure", "mttf", "--rel-err", "0.01", "-o", self.out
        )
        self.assertEqual(code, EXIT_OK)
        last = self.table()[-1]
        self.assertLessEqual(float(last["lower"]), 7 / 6 + 1e-9)
        self.assertGreaterEqual(float(last["upper"]), 7 / 6 - 1e-9)
        self.assertEqual(last["value"], "")

    def test_approx_cap(self):
        path = self.write("vot.dft", fixtures.F_VOT)
        code = self.run_cli("--state-cap", "2", "approx", path, "--time", "1", "-o", self.out)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(len(self.table()), 1)

    def test_approx_relative_error(self):
        path = self.write("and.dft", fixtures.F_AND)
        self.assertEqual(self.run_cli("approx", path, "--rel-err", "0"), EXIT_ERROR)

    def test_export(self):
        path = self.write("and.dft", fixtures.F_AND)
        code = self.run_cli("export", path, "--ctmc", "list", "-o", self.out)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(self.output().splitlines()[:2], ["4 4", "initial 0"])

    def test_sweep(self):
        path = self.write("single.dft", fixtures.F_SINGLE)
        code = self.run_cli(
            "--workers",
            "2",
            "sweep",
            path,
            "--param",
            "lambda_a=1e-5,1e-4",
            "--time",
            "1000",
            "-o",
            self.out,
        )
        self.assertEqual(code, EXIT_OK)
        rows = self.table()
        self.assertEqual(
            [r["measure"] for r in rows],
            ["reliability[lambda_a=1e-05]", "reliability[lambda_a=0.0001]"],
        )


class TestAnalyzer(unittest.TestCase):
    def test_rewrite_before_analysis(self):
        analyzer = Analyzer(rewrite=True)
        dft = analyzer.prepare(
            fixtures.load("toplevel T; T or G; G and A B; A lambda=1; B lambda=2;")
        )
        self.assertEqual(dft.top, "G")
        (result,) = analyzer.evaluate(dft, ["mttf"])
        self.assertEqual(result.value, approx(7 / 6))

    def test_approximate_only_supported_measures(self):
        with self.assertRaises(dftsafety.DftError):
            Analyzer().approximate(fixtures.load(fixtures.F_AND), "mdr", 0.01)

    def test_sweep_is_lazy(self):
        rows = Analyzer().sweep(
            fixtures.load(fixtures.F_SINGLE), "mttf", [{"lambda_a": 1.0}, {"lambda_a": 2.0}]
        )
        self.assertEqual([r.value for r in rows], approx([1.0, 0.5]))

    def test_sweep_yields_before_later_rows_are_built(self):
        dft = fixtures.load(fixtures.F_SINGLE)
        with patch("dftsafety.measures.StateExplorer", wraps=StateExplorer) as explorer:
            rows = Analyzer().sweep(dft, "mttf", [{"lambda_a": 1.0}, {"lambda_a": 2.0}])
            self.assertEqual(explorer.call_count, 0)
            self.assertEqual(next(rows).value, approx(1.0))
            self.assertEqual(explorer.call_count, 1)
            self.assertEqual(next(rows).value, approx(0.5))
            self.assertEqual(explorer.call_count, 2)
