import unittest

from pytest import approx

import dftsafety
from dftsafety.errors import MissingParameterError
from dftsafety.models.expressions import (
    ONE,
    ZERO,
    Conjunction,
    Disjunction,
    FailedAtom,
    LabelExpression,
    Negation,
    RateExpression,
    Truth,
)


class TestRateExpression(unittest.TestCase):
    def test_literals(self):
        self.assertEqual(RateExpression.parse("1e-4").evaluate({}), 1e-4)
        self.assertEqual(RateExpression.parse(".5").evaluate({}), 0.5)
        self.assertEqual(RateExpression.parse(3).evaluate({}), 3.0)

    def test_precedence(self):
        rate = RateExpression.parse("1 + 2 * 3 - 4 / 2")
        self.assertEqual(rate.evaluate({}), 5.0)
        self.assertEqual(RateExpression.parse("-2 ** 2").evaluate({}), -4.0)
        self.assertEqual(RateExpression.parse("(1 + 2) * 3").evaluate({}), 9.0)

    def test_parameters(self):
        rate = RateExpression.parse("(1 - c) * mu + lambda_s")
        self.assertEqual(rate.parameters(), {"c", "mu", "lambda_s"})
        value = rate.evaluate({"c": 0.25, "mu": 2.0, "lambda_s": 0.5})
        self.assertEqual(value, approx(2.0))

    def test_names_are_plain_parameters(self):
        rate = RateExpression.parse("E * I")
        self.assertEqual(rate.parameters(), {"E", "I"})
        self.assertEqual(rate.evaluate({"E": 2.0, "I": 3.0}), 6.0)

    def test_missing_parameter(self):
        with self.assertRaises(MissingParameterError):
            RateExpression.parse("2 * mu").evaluate({})

    def test_division_by_zero(self):
        with self.assertRaises(dftsafety.DftError):
            RateExpression.parse("1 / p").evaluate({"p": 0.0})

    def test_malformed(self):
        for text in ("", "1 +", "2 ** ", "(mu", "mu)", "3 % 2", "a b"):
            with self.subTest(text):
                with self.assertRaises(dftsafety.DftError):
                    RateExpression.parse(text)

    def test_constants_fold(self):
        rate = (ONE - 0.99) * RateExpression.parse(1e-5)
        self.assertEqual(rate.parameters(), set())
        self.assertEqual(rate.evaluate({}), approx(1e-7))
        self.assertTrue((ZERO * RateExpression.parse("mu")).is_zero())
        self.assertTrue(RateExpression.parse("mu - mu").is_zero())
        self.assertFalse(RateExpression.parse("mu").is_zero())

    def test_equality_ignores_integer_spelling(self):
        self.assertEqual(RateExpression.parse("2 * mu"), RateExpression.parse("2.0 * mu"))
        self.assertEqual(hash(RateExpression(2)), hash(RateExpression.parse("2")))
        self.assertEqual(RateExpression(2), RateExpression.parse("2"))
        self.assertNotEqual(RateExpression.parse("mu"), RateExpression.parse("nu"))

    def test_text_is_reparsable(self):
        for text in ("1e-05", "0.1 * mu", "(1 - c) * mu", "mu / (2 + nu)", "-mu"):
            with self.subTest(text):
                rate = RateExpression.parse(text)
                self.assertEqual(RateExpression.parse(str(rate)), rate)
        self.assertEqual(str(RateExpression.parse("0.1")), "0.1")


class TestLabelExpression(unittest.TestCase):
    def test_precedence(self):
        label = LabelExpression.parse("failed(A) | failed(B) & !failed(C)")
        expected = Disjunction(
            FailedAtom("A"), Conjunction(FailedAtom("B"), Negation(FailedAtom("C")))
        )
        self.assertEqual(label, expected)

    def test_parentheses(self):
        label = LabelExpression.parse("(failed(A) | failed(B)) & failed(C)")
        self.assertFalse(label.evaluate(frozenset({"A"})))
        self.assertTrue(label.evaluate(frozenset({"B", "C"})))

    def test_keywords(self):
        label = LabelExpression.parse("NOT Failed(A) And (TRUE or false)")
        expected = Conjunction(Negation(FailedAtom("A")), Disjunction(Truth(True), Truth(False)))
        self.assertEqual(label, expected)
        self.assertTrue(label.evaluate(frozenset()))

    def test_quoted_ids(self):
        label = LabelExpression.parse('failed("my \\"pump\\"") & failed(valve-1.a)')
        self.assertEqual(label.elements(), {'my "pump"', "valve-1.a"})

    def test_text_is_reparsable(self):
        label = ~FailedAtom("and") | (FailedAtom("A") & Truth(True))
        self.assertEqual(LabelExpression.parse(str(label)), label)

    def test_malformed(self):
        for text in ("", "failed(A", "failed()", "A & B", "failed(A) |", "!"):
            with self.subTest(text):
                with self.assertRaises(dftsafety.DftError):
                    LabelExpression.parse(text)
