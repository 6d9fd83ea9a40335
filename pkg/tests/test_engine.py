import math
import unittest

import numpy as np
from pytest import approx

import dftsafety
from dftsafety.engine import (
    bounded_first_passage_forward,
    bounded_reach_backward,
    expected_time,
    poisson_window,
    transient_distribution,
    unbounded_first_passage_forward,
    unbounded_reach_avoid,
)
from dftsafety.errors import ConvergenceError
from dftsafety.models.settings import SolverSettings

ITERATIVE = SolverSettings(direct_threshold=0)


def race() -> dftsafety.Ctmc:
    """State 0 moves to 1 at rate 1 and to 2 at rate 3."""
    return dftsafety.Ctmc.from_transitions(3, [(0, 1, 1.0), (0, 2, 3.0)])


def line() -> dftsafety.Ctmc:
    """0 -> 1 -> 2 at rates 1 and 2."""
    return dftsafety.Ctmc.from_transitions(3, [(0, 1, 1.0), (1, 2, 2.0)])


class TestPoissonWindow(unittest.TestCase):
    def test_mass(self):
        for rate_time in (0.1, 5.0, 250.0):
            with self.subTest(rate_time):
                left, weights = poisson_window(rate_time, 1e-10)
                self.assertGreaterEqual(weights.sum(), 1 - 2e-10)
                self.assertGreaterEqual(left, 0)

    def test_left_truncation(self):
        left, _ = poisson_window(1000.0, 1e-10)
        self.assertGreater(left, 500)

    def test_zero(self):
        left, weights = poisson_window(0.0, 1e-10)
        self.assertEqual(left, 0)
        self.assertEqual(list(weights), [1.0])


class TestTransient(unittest.TestCase):
    def test_distribution(self):
        result = transient_distribution(line(), 1.0)
        self.assertEqual(result[0], approx(math.exp(-1), abs=1e-9))
        self.assertEqual(result[1], approx(math.exp(-1) - math.exp(-2), abs=1e-9))
        self.assertEqual(result.sum(), approx(1.0, abs=1e-9))

    def test_zero_time(self):
        result = transient_distribution(line(), 0.0)
        self.assertEqual(list(result), [1.0, 0.0, 0.0])

    def test_absorbing(self):
        result = transient_distribution(line(), 5.0, absorbing=[1])
        self.assertEqual(result[2], approx(0.0, abs=1e-12))
        self.assertEqual(result[1], approx(1 - math.exp(-5), abs=1e-9))


class TestReachAvoid(unittest.TestCase):
    def test_bounded(self):
        t = 0.3
        result = bounded_reach_backward(race(), [2], [1], t)
        self.assertEqual(result[0], approx(0.25 * (1 - math.exp(-4 * t)), abs=1e-9))
        self.assertEqual(result[1], approx(1.0))
        self.assertEqual(result[2], 0.0)

    def test_bounded_is_monotone_in_time(self):
        values = [bounded_reach_backward(line(), None, [2], t)[0] for t in (0.5, 1.0, 2.0, 4.0)]
        self.assertEqual(values, sorted(values))
        self.assertTrue(all(0.0 <= v <= 1.0 for v in values))

    def test_bounded_line(self):
        t = 1.5
        expected = 1 - 2 * math.exp(-t) + math.exp(-2 * t)
        self.assertEqual(
            bounded_reach_backward(line(), None, [2], t)[0], approx(expected, abs=1e-9)
        )

    def test_unbounded(self):
        result = unbounded_reach_avoid(race(), [2], [1])
        self.assertEqual(result[0], approx(0.25))
        self.assertEqual(result[2], 0.0)

    def test_unbounded_iterative(self):
        result = unbounded_reach_avoid(race(), [2], [1], ITERATIVE)
        self.assertEqual(result[0], approx(0.25))

    def test_target_unreachable(self):
        result = unbounded_reach_avoid(line(), [1], [2])
        self.assertEqual(list(result), [0.0, 0.0, 1.0])


class TestFirstPassage(unittest.TestCase):
    def test_bounded(self):
        t = 0.5
        result = bounded_first_passage_forward(race(), [1, 2], t)
        self.assertEqual(result[0], 0.0)
        self.assertEqual(result[1], approx(0.25 * (1 - math.exp(-4 * t)), abs=1e-9))
        self.assertEqual(result[2], approx(0.75 * (1 - math.exp(-4 * t)), abs=1e-9))

    def test_unbounded(self):
        result = unbounded_first_passage_forward(race(), [1, 2])
        self.assertEqual(result.tolist(), approx([0.0, 0.25, 0.75]))

    def test_first_hit_only(self):
        result = unbounded_first_passage_forward(line(), [1, 2])
        self.assertEqual(result.tolist(), approx([0.0, 1.0, 0.0]))

    def test_initial_in_set(self):
        result = unbounded_first_passage_forward(line(), [0])
        self.assertEqual(list(result), [1.0, 0.0, 0.0])


class TestExpectedTime(unittest.TestCase):
    def test_line(self):
        result = expected_time(line(), [2])
        self.assertEqual(result[0], approx(1.5))
        self.assertEqual(result[1], approx(0.5))
        self.assertEqual(result[2], 0.0)

    def test_iterative(self):
        self.assertEqual(expected_time(line(), [2], settings=ITERATIVE)[0], approx(1.5))

    def test_terminal(self):
        terminal = np.array([0.0, 0.0, 10.0])
        self.assertEqual(expected_time(line(), [2], terminal=terminal)[0], approx(11.5))

    def test_undefined(self):
        with self.assertRaises(dftsafety.UndefinedExpectedTimeError) as context:
            expected_time(race(), [2])
        self.assertEqual(context.exception.witness, 1)

    def test_undefined_states_are_nan(self):
        result = expected_time(race(), [2], states=[2])
        self.assertTrue(math.isnan(result[0]))
        self.assertEqual(result[2], 0.0)

    def test_convergence(self):
        settings = SolverSettings(direct_threshold=0, max_iterations=1)
        with self.assertRaises(ConvergenceError):
            expected_time(line(), [2], settings=settings)
