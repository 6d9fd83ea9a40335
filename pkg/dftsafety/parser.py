"""
The line-oriented DFT text format.

    toplevel "System";
    param lambda_s=1e-07;
    "System" or PathA PathB;
    PathA 2of3 S1 S2 S3;
    PathB wsp Main Backup;
    Trigger fdep Power S1 S2;
    S1 lambda=lambda_s dorm=0.5;
    Glitch lambda="2 * lambda_s" transient;
    label degraded when failed(PathA) & !failed("System");

Statements end with `;`, `//` starts a comment. Ids and attribute values
may be double-quoted.
"""

from __future__ import annotations

import logging
import re
from typing import List, Optional

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedCharacters

from dftsafety.errors import DftError, DftSyntaxError, ValidationError
from dftsafety.models.dft import BasicEvent, Dependency, Dft, Gate, LabelSpec
from dftsafety.models.enums import DependencyKind, GateKind
from dftsafety.models.expressions import RateExpression
from dftsafety.models.utilities import format_float, quote_id
from dftsafety.semantics import validate

logger = logging.getLogger(__name__)

_GATE_KEYWORDS = {
    "and": GateKind.And,
    "or": GateKind.Or,
    "pand": GateKind.Pand,
    "seq": GateKind.Seq,
    "wsp": GateKind.Spare,
    "csp": GateKind.Spare,
    "hsp": GateKind.Spare,
    "spare": GateKind.Spare,
}

_DEPENDENCY_KEYWORDS = {"fdep": DependencyKind.Fdep, "adep": DependencyKind.Adep}

_VOTING = re.compile(r"^(\d+)of(\d+)$", re.IGNORECASE)

_STATEMENT_GRAMMAR = r"""
    start: statement* tail?
    statement: items? SEMI
    tail: items
    items: item+
    ?item: ATTRIBUTE | WORD | STRING

    SEMI: ";"
    ATTRIBUTE.2: /[^\s;"=\/]+=(?:"(?:[^"\\\n]|\\.)*"|(?:[^\s;"\/]|\/(?!\/))*)/
    WORD: /(?:[^\s;"\/]|\/(?!\/))+/
    STRING: /"(?:[^"\\\n]|\\.)*"/
    COMMENT: /\/\/[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""


def _unescape(raw: str) -> str:
    return re.sub(r"\\(.)", r"\1", raw)


class _Token(object):
    """A word, attribute or quoted string with its source position."""

    def __init__(self, token: Token):
        value = str(token)
        self.quoted = token.type == "STRING"
        if self.quoted:
            value = _unescape(value[1:-1])
        elif token.type == "ATTRIBUTE":
            key, _, rest = value.partition("=")
            if rest.startswith('"'):
                value = "{}={}".format(key, _unescape(rest[1:-1]))
        self.text = value
        self.start = token.start_pos
        self.line = token.line
        self.column = token.column

    def keyword(self) -> Optional[str]:
        return None if self.quoted else self.text.lower()


class _Statement(object):
    def __init__(self, tokens: List[_Token], end: Optional[_Token]):
        self.tokens = tokens
        self.end = end
        """The terminating `;`; None for a trailing statement without one."""


class _StatementBuilder(Transformer):
    def items(self, children):
        return [_Token(t) for t in children]

    def statement(self, children):
        tokens = children[0] if len(children) == 2 else []
        return _Statement(tokens, _Token(children[-1]))

    def tail(self, children):
        return _Statement(children[0], None)

    def start(self, children):
        return children


_STATEMENT_PARSER = Lark(_STATEMENT_GRAMMAR, parser="lalr", transformer=_StatementBuilder())


def _tokenize(text: str) -> List[_Statement]:
    try:
        statements = _STATEMENT_PARSER.parse(text)
    except UnexpectedCharacters as e:
        message = "Unterminated string" if text[e.pos_in_stream] == '"' else "Unexpected character"
        raise DftSyntaxError(message, e.line, e.column)
    if statements and statements[-1].end is None:
        last = statements[-1].tokens[-1]
        raise DftSyntaxError("Missing ';' at end of statement", last.line, last.column)
    return statements


class _Parser(object):
    def __init__(self, text: str):
        self.text = text
        self.dft = Dft()
        self.labels = LabelSpec()

    def parse(self) -> Dft:
        for statement in _tokenize(self.text):
            if statement.tokens:
                self.statement(statement)
        self.dft.labels = self.labels
        return self.dft

    def statement(self, statement: _Statement):
        tokens = statement.tokens
        head = tokens[0].keyword()
        if head == "toplevel":
            self.toplevel(statement)
        elif head == "param":
            self.parameters(statement)
        elif head == "label":
            self.label(statement)
        else:
            self.element(statement)

    def toplevel(self, statement: _Statement):
        tokens = statement.tokens
        if len(tokens) != 2:
            raise self.error("Expected exactly one top-level event", statement, 1)
        if self.dft.top is not None:
            raise self.error("Top-level event declared twice", statement, 0)
        self.dft.top = tokens[1].text

    def parameters(self, statement: _Statement):
        tokens = statement.tokens
        if len(tokens) < 2:
            raise self.error("Expected parameter declaration", statement, 1)
        for index, token in enumerate(tokens[1:], start=1):
            name, _, value = token.text.partition("=")
            if not name:
                raise self.error("Expected parameter name", statement, index)
            if not token.text.count("="):
                self.dft.parameters[name] = None
                continue
            try:
                self.dft.parameters[name] = float(value)
            except ValueError:
                raise self.error("Parameter value must be a number", statement, index)

    def label(self, statement: _Statement):
        tokens = statement.tokens
        if len(tokens) < 4 or tokens[2].keyword() != "when":
            raise self.error(
                "Expected 'label <name> when <predicate>'", statement, min(len(tokens), 2)
            )
        source = self.text[tokens[3].start : statement.end.start]
        try:
            self.labels.add(tokens[1].text, source)
        except DftError as e:
            raise DftSyntaxError(
                "{}: {}".format(e.message, e.element), tokens[1].line, tokens[1].column
            )

    def element(self, statement: _Statement):
        tokens = statement.tokens
        if len(tokens) < 2:
            raise self.error("Expected gate type or attributes", statement, 1)
        element_id = tokens[0].text
        kind = tokens[1].keyword()
        operands = [t.text for t in tokens[2:]]
        voting = _VOTING.match(kind) if kind else None
        if kind in _GATE_KEYWORDS:
            if not operands:
                raise self.error("Expected at least one child", statement, 2)
            self.dft.add(Gate(element_id, _GATE_KEYWORDS[kind], operands))
        elif voting is not None:
            threshold, count = int(voting.group(1)), int(voting.group(2))
            if count != len(operands):
                raise self.error(
                    "Voting gate declares {} children but lists {}".format(count, len(operands)),
                    statement,
                    2,
                )
            self.dft.add(Gate(element_id, GateKind.Vot, operands, threshold))
        elif kind in _DEPENDENCY_KEYWORDS:
            if len(operands) < 2:
                raise self.error(
                    "Expected trigger and at least one dependent element", statement, 2
                )
            self.dft.add(
                Dependency(element_id, _DEPENDENCY_KEYWORDS[kind], operands[0], operands[1:])
            )
        else:
            self.basic_event(statement)

    def basic_event(self, statement: _Statement):
        tokens = statement.tokens
        rate: Optional[RateExpression] = None
        dormancy = 1.0
        transient = dummy = False
        for index, token in enumerate(tokens[1:], start=1):
            key, _, value = token.text.partition("=")
            key = key.lower() if not token.quoted else key
            if key == "lambda" and "=" in token.text:
                try:
                    rate = RateExpression.parse(value)
                except DftError:
                    raise self.error("Malformed rate expression", statement, index)
            elif key == "dorm" and "=" in token.text:
                try:
                    dormancy = float(value)
                except ValueError:
                    raise self.error("Dormancy must be a number", statement, index)
            elif token.text.lower() == "transient" and not token.quoted:
                transient = True
            elif token.text.lower() == "dummy" and not token.quoted:
                dummy = True
            else:
                raise self.error("Unknown gate type or attribute", statement, index)
        if rate is None and not dummy:
            raise self.error("Basic event requires lambda=<rate>", statement, 1)
        event = BasicEvent(tokens[0].text, dormancy=dormancy, transient=transient, dummy=dummy)
        if rate is not None:
            event.rate = rate
        self.dft.add(event)

    def error(self, message: str, statement: _Statement, index: int) -> DftSyntaxError:
        tokens = statement.tokens
        at = tokens[index] if index < len(tokens) else statement.end
        return DftSyntaxError(message, at.line, at.column)


def parse_dft(text: str, check: bool = True) -> Dft:
    """
    Parses a DFT document. Raises `DftSyntaxError` with line and column on
    malformed input and, unless `check` is False, `ValidationError` if the
    parsed tree is not well-formed.
    """
    dft = _Parser(text).parse()
    if check:
        diagnostics = validate(dft)
        if diagnostics:
            raise ValidationError(diagnostics)
    logger.debug("Parsed DFT with %d elements, top %s", len(dft), dft.top)
    return dft


def _format_rate(rate: RateExpression) -> str:
    text = str(rate)
    if re.search(r'[\s;"]|//', text):
        return '"{}"'.format(text)
    return text


def _format_element(element) -> str:
    head = quote_id(element.id)
    if isinstance(element, Gate):
        if element.kind == GateKind.Vot:
            keyword = "{}of{}".format(element.threshold, len(element.children))
        else:
            keyword = element.kind.value
        return " ".join([head, keyword] + [quote_id(c) for c in element.children])
    if isinstance(element, Dependency):
        operands = [element.trigger] + element.targets
        return " ".join([head, element.kind.value] + [quote_id(o) for o in operands])
    parts = [head, "lambda={}".format(_format_rate(element.rate))]
    if element.dormancy != 1.0:
        parts.append("dorm={}".format(format_float(element.dormancy)))
    if element.transient:
        parts.append("transient")
    if element.dummy:
        parts.append("dummy")
    return " ".join(parts)


def serialize_dft(dft: Dft) -> str:
    """Writes `dft` in the text format; `parse_dft` reads it back unchanged."""
    lines = []
    if dft.top is not None:
        lines.append("toplevel {};".format(quote_id(dft.top)))
    for name, value in dft.parameters.items():
        if value is None:
            lines.append("param {};".format(name))
        else:
            lines.append("param {}={};".format(name, format_float(value)))
    for element in dft.elements.values():
        lines.append(_format_element(element) + ";")
    for name, predicate in dft.labels.predicates.items():
        lines.append("label {} when {};".format(quote_id(name), predicate))
    return "\n".join(lines) + "\n"
