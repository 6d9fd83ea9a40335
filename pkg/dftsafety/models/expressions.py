"""
Rate expressions over named parameters and boolean label predicates over
element failures.
"""

from __future__ import annotations

import re
from typing import FrozenSet, Mapping, Set, Union

import sympy
from lark import Lark, Transformer
from lark.exceptions import LarkError
from sympy.printing.str import StrPrinter

from dftsafety.errors import DftError, MissingParameterError
from dftsafety.models.utilities import _classname, format_float, quote_id

_RATE_GRAMMAR = r"""
    ?start: sum

    ?sum: product
        | sum "+" product -> add
        | sum "-" product -> sub

    ?product: factor
        | product "*" factor -> mul
        | product "/" factor -> div

    ?factor: power
        | "-" factor -> neg
        | "+" factor

    ?power: atom
        | atom "**" factor -> pow

    ?atom: NUMBER -> number
        | NAME -> parameter
        | "(" sum ")"

    NUMBER: /(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?/
    NAME: /[A-Za-z_][A-Za-z0-9_]*/

    %import common.WS
    %ignore WS
"""


class _RateBuilder(Transformer):
    """Builds a sympy expression; every literal becomes a double-precision Float."""

    def number(self, children):
        return sympy.Float(float(children[0]))

    def parameter(self, children):
        return sympy.Symbol(str(children[0]))

    def add(self, children):
        return children[0] + children[1]

    def sub(self, children):
        return children[0] - children[1]

    def mul(self, children):
        return children[0] * children[1]

    def div(self, children):
        return children[0] / children[1]

    def neg(self, children):
        return -children[0]

    def pow(self, children):
        return children[0] ** children[1]


_RATE_PARSER = Lark(_RATE_GRAMMAR, parser="lalr", transformer=_RateBuilder())


class _RatePrinter(StrPrinter):
    """sympy's infix form with floats written to round-trip exactly."""

    def _print_Float(self, expr):
        return format_float(float(expr))


def _canonical(expr: sympy.Expr) -> sympy.Expr:
    return expr.xreplace({n: sympy.Float(float(n)) for n in expr.atoms(sympy.Number)})


class RateExpression(object):
    """
    Arithmetic over literals and named parameters, held as a sympy
    expression.

    Expressions are immutable and compare by their canonical sympy form.
    Combining expressions with `+`, `-`, `*` and `/` folds constants, so
    templates instantiated with numeric values yield plain constants.
    """

    expr: sympy.Expr
    """The underlying sympy expression; parameters are its free symbols."""

    def __init__(self, expr: Union[sympy.Expr, float, int]):
        self.expr = sympy.sympify(expr)
        if not isinstance(self.expr, sympy.Expr):
            raise DftError("Malformed rate expression", str(expr))

    def evaluate(self, valuation: Mapping[str, float]) -> float:
        """Evaluates the expression; raises `MissingParameterError` for unset parameters."""
        if self.expr.is_Number:
            return float(self.expr)
        symbols = {}
        for symbol in sorted(self.expr.free_symbols, key=lambda s: s.name):
            if symbol.name not in valuation:
                raise MissingParameterError(symbol.name)
            symbols[symbol] = sympy.Float(float(valuation[symbol.name]))
        value = self.expr.subs(symbols)
        if not value.is_finite:
            raise DftError("Division by zero in rate expression", str(self))
        return float(value)

    def parameters(self) -> Set[str]:
        """The parameter names this expression refers to."""
        return {s.name for s in self.expr.free_symbols}

    def is_zero(self) -> bool:
        """True iff the expression is the constant zero."""
        return self.expr.is_zero is True

    def __eq__(self, other) -> bool:
        if isinstance(other, RateExpression):
            return _canonical(self.expr) == _canonical(other.expr)
        return False

    def __hash__(self) -> int:
        return hash(_canonical(self.expr))

    def __add__(self, other) -> RateExpression:
        return RateExpression(self.expr + _lift(other).expr)

    def __radd__(self, other) -> RateExpression:
        return RateExpression(_lift(other).expr + self.expr)

    def __sub__(self, other) -> RateExpression:
        return RateExpression(self.expr - _lift(other).expr)

    def __rsub__(self, other) -> RateExpression:
        return RateExpression(_lift(other).expr - self.expr)

    def __mul__(self, other) -> RateExpression:
        return RateExpression(self.expr * _lift(other).expr)

    def __rmul__(self, other) -> RateExpression:
        return RateExpression(_lift(other).expr * self.expr)

    def __truediv__(self, other) -> RateExpression:
        return RateExpression(self.expr / _lift(other).expr)

    def __str__(self) -> str:
        return _RatePrinter().doprint(self.expr)

    def __repr__(self) -> str:
        return "{}({})".format(_classname(self), repr(str(self)))

    @classmethod
    def parse(cls, text: Union[str, float, int]) -> RateExpression:
        """
        Parses infix arithmetic such as `1e-4`, `lambda_s` or `(1 - c) * mu`.

        Raises `DftError` for anything but numbers, parameter names,
        parentheses and the arithmetic operators.
        """
        if isinstance(text, (int, float)) and not isinstance(text, bool):
            return cls(sympy.Float(float(text)))
        try:
            return cls(_RATE_PARSER.parse(str(text)))
        except LarkError:
            raise DftError("Malformed rate expression", str(text))


ZERO = RateExpression(sympy.Float(0.0))
ONE = RateExpression(sympy.Float(1.0))


def _lift(value: Union[RateExpression, float, int]) -> RateExpression:
    if isinstance(value, RateExpression):
        return value
    return RateExpression(sympy.Float(float(value)))


_LABEL_GRAMMAR = r"""
    ?start: disjunction

    ?disjunction: conjunction
        | disjunction _OR conjunction -> either

    ?conjunction: negation
        | conjunction _AND negation -> both

    ?negation: atom
        | _NOT negation -> negate

    ?atom: "(" disjunction ")"
        | _TRUE -> true
        | _FALSE -> false
        | _FAILED "(" element ")" -> failed

    element: ID | STRING

    _OR: "|" | "or"i
    _AND: "&" | "and"i
    _NOT: "!" | "not"i
    _TRUE: "true"i
    _FALSE: "false"i
    _FAILED: "failed"i
    ID: /[A-Za-z0-9_.\-]+/
    STRING: /"(?:[^"\\]|\\.)*"/

    %import common.WS
    %ignore WS
"""


class LabelExpression(object):
    """
    A boolean predicate over `failed(<id>)` atoms.

    Text form: atoms `failed(A)` (ids may be quoted), constants `true` and
    `false`, negation `!`/`not`, conjunction `&`/`and`, disjunction `|`/`or`
    and parentheses; `!` binds tightest, then `&`, then `|`.
    """

    def evaluate(self, failed: FrozenSet[str]) -> bool:
        """Evaluates the predicate for the given set of failed elements."""
        raise NotImplementedError

    def elements(self) -> Set[str]:
        """Element ids referenced by `failed(...)` atoms."""
        raise NotImplementedError

    def _key(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other) -> bool:
        if isinstance(other, LabelExpression):
            return self._key() == other._key()
        return False

    def __hash__(self) -> int:
        return hash(self._key())

    def __and__(self, other: LabelExpression) -> LabelExpression:
        return Conjunction(self, other)

    def __or__(self, other: LabelExpression) -> LabelExpression:
        return Disjunction(self, other)

    def __invert__(self) -> LabelExpression:
        return Negation(self)

    def __repr__(self) -> str:
        return "{}({})".format(_classname(self), repr(str(self)))

    @classmethod
    def parse(cls, text: str) -> LabelExpression:
        """Parses a predicate; raises `DftError` on malformed input."""
        try:
            return _LABEL_PARSER.parse(text)
        except LarkError as e:
            raise DftError("Malformed label expression", "{}: {}".format(text, _first_line(e)))


class FailedAtom(LabelExpression):
    element: str
    """The element whose failure the atom tests."""

    def __init__(self, element: str):
        self.element = element

    def evaluate(self, failed: FrozenSet[str]) -> bool:
        return self.element in failed

    def elements(self) -> Set[str]:
        return {self.element}

    def _key(self) -> tuple:
        return ("failed", self.element)

    def __str__(self) -> str:
        return "failed({})".format(quote_id(self.element))


class Truth(LabelExpression):
    value: bool

    def __init__(self, value: bool):
        self.value = value

    def evaluate(self, failed: FrozenSet[str]) -> bool:
        return self.value

    def elements(self) -> Set[str]:
        return set()

    def _key(self) -> tuple:
        return ("truth", self.value)

    def __str__(self) -> str:
        return "true" if self.value else "false"


class Negation(LabelExpression):
    operand: LabelExpression

    def __init__(self, operand: LabelExpression):
        self.operand = operand

    def evaluate(self, failed: FrozenSet[str]) -> bool:
        return not self.operand.evaluate(failed)

    def elements(self) -> Set[str]:
        return self.operand.elements()

    def _key(self) -> tuple:
        return ("not", self.operand._key())

    def __str__(self) -> str:
        return "!{}".format(self.operand)


class Conjunction(LabelExpression):
    left: LabelExpression
    right: LabelExpression

    def __init__(self, left: LabelExpression, right: LabelExpression):
        self.left = left
        self.right = right

    def evaluate(self, failed: FrozenSet[str]) -> bool:
        return self.left.evaluate(failed) and self.right.evaluate(failed)

    def elements(self) -> Set[str]:
        return self.left.elements() | self.right.elements()

    def _key(self) -> tuple:
        return ("and", self.left._key(), self.right._key())

    def __str__(self) -> str:
        return "({} & {})".format(self.left, self.right)


class Disjunction(LabelExpression):
    left: LabelExpression
    right: LabelExpression

    def __init__(self, left: LabelExpression, right: LabelExpression):
        self.left = left
        self.right = right

    def evaluate(self, failed: FrozenSet[str]) -> bool:
        return self.left.evaluate(failed) or self.right.evaluate(failed)

    def elements(self) -> Set[str]:
        return self.left.elements() | self.right.elements()

    def _key(self) -> tuple:
        return ("or", self.left._key(), self.right._key())

    def __str__(self) -> str:
        return "({} | {})".format(self.left, self.right)


def _unquote(raw: str) -> str:
    return re.sub(r"\\(.)", r"\1", raw[1:-1])


def _first_line(error: Exception) -> str:
    return str(error).strip().splitlines()[0] if str(error).strip() else type(error).__name__


class _LabelBuilder(Transformer):
    def either(self, children):
        return Disjunction(children[0], children[1])

    def both(self, children):
        return Conjunction(children[0], children[1])

    def negate(self, children):
        return Negation(children[0])

    def true(self, children):
        return Truth(True)

    def false(self, children):
        return Truth(False)

    def failed(self, children):
        return FailedAtom(children[0])

    def element(self, children):
        token = children[0]
        if token.type == "STRING":
            return _unquote(str(token))
        return str(token)


_LABEL_PARSER = Lark(_LABEL_GRAMMAR, parser="lalr", transformer=_LabelBuilder())
