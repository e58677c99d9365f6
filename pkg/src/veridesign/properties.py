"""Property language: a PCTL subset with probability, reward, and steady-state operators.

Grammar (whitespace-insensitive; documented bit-exactly in docs/formats.md)::

    property  := term ('*' term)*
    term      := 'P' '=?' '[' (pred 'U' pred | 'X' pred) ']'
               | 'R' '{' STRING '}' ['min'] '=?' '[' ('F' pred | 'S') ']'
               | 'S' '=?' '[' pred ']'
               | 'filter' '(' 'state' ',' term ',' pred ')'
    pred      := and_pred ('|' and_pred)*
    and_pred  := unary ('&' unary)*
    unary     := '!' unary | '(' pred ')' | 'true' | 's' '=' NAME

Constructs that are recognizably PCTL but outside this subset (``G``, ``F``
inside ``P``, bounded until, probability bounds) raise
:class:`UnknownConstruct` rather than misparsing.

``min`` on reward queries is accepted and ignored: a discrete-time Markov
chain has a unique expectation, so the minimum coincides with it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import (
    PropertySyntaxError,
    UnknownConstruct,
    UnknownLabel,
    UnknownPropertyId,
    VeridesignError,
)


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruePred:
    pass


@dataclass(frozen=True)
class Label:
    name: str


@dataclass(frozen=True)
class Not:
    operand: "Predicate"


@dataclass(frozen=True)
class And:
    left: "Predicate"
    right: "Predicate"


@dataclass(frozen=True)
class Or:
    left: "Predicate"
    right: "Predicate"


Predicate = TruePred | Label | Not | And | Or


@dataclass(frozen=True)
class UntilProbability:
    """P=? [ stay U target ]; the avoid set is the complement of ``stay``."""

    stay: Predicate
    target: Predicate


@dataclass(frozen=True)
class NextProbability:
    target: Predicate


@dataclass(frozen=True)
class ReachReward:
    reward: str
    target: Predicate
    minimum: bool = False


@dataclass(frozen=True)
class SteadyStateProbability:
    pred: Predicate


@dataclass(frozen=True)
class SteadyStateReward:
    reward: str


@dataclass(frozen=True)
class FilterState:
    inner: "PropertyAst"
    condition: Predicate


@dataclass(frozen=True)
class Product:
    left: "PropertyAst"
    right: "PropertyAst"


PropertyAst = (
    UntilProbability
    | NextProbability
    | ReachReward
    | SteadyStateProbability
    | SteadyStateReward
    | FilterState
    | Product
)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"[^"]*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<number>\d+(\.\d+)?)
  | (?P<op><=|>=|=\?|[=\?\[\](){},*!&|<>])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # ident | string | number | op | eof
    value: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise PropertySyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            kind = m.lastgroup
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.cur
        self.i += 1
        return tok

    def fail(self, message: str, expected=()):
        raise PropertySyntaxError(message, self.cur.pos, expected)

    def expect_op(self, op: str):
        if self.cur.kind == "op" and self.cur.value == op:
            return self.advance()
        self.fail(f"got {self.cur.value!r}" if self.cur.kind != "eof" else "unexpected end of input",
                  expected=(op,))

    def accept_op(self, op: str) -> bool:
        if self.cur.kind == "op" and self.cur.value == op:
            self.advance()
            return True
        return False

    def expect_ident(self, name: str | None = None) -> str:
        if self.cur.kind == "ident" and (name is None or self.cur.value == name):
            return self.advance().value
        self.fail(f"got {self.cur.value!r}" if self.cur.kind != "eof" else "unexpected end of input",
                  expected=(name or "identifier",))

    # --- predicates ---

    def predicate(self) -> Predicate:
        node = self.and_pred()
        while self.accept_op("|"):
            node = Or(node, self.and_pred())
        return node

    def and_pred(self) -> Predicate:
        node = self.unary_pred()
        while self.accept_op("&"):
            node = And(node, self.unary_pred())
        return node

    def unary_pred(self) -> Predicate:
        if self.accept_op("!"):
            return Not(self.unary_pred())
        if self.accept_op("("):
            node = self.predicate()
            self.expect_op(")")
            return node
        if self.cur.kind == "ident":
            if self.cur.value == "true":
                self.advance()
                return TruePred()
            if self.cur.value == "s":
                self.advance()
                self.expect_op("=")
                name = self.expect_ident()
                return Label(name)
        self.fail("expected a predicate", expected=("s=NAME", "true", "!", "("))

    # --- properties ---

    def property_expr(self) -> PropertyAst:
        node = self.property_term()
        while self.accept_op("*"):
            node = Product(node, self.property_term())
        return node

    def property_term(self) -> PropertyAst:
        if self.cur.kind != "ident":
            self.fail("expected a property", expected=("P", "R", "S", "filter"))
        head = self.cur.value
        if head == "P":
            return self.p_operator()
        if head == "R":
            return self.r_operator()
        if head == "S":
            return self.s_operator()
        if head == "filter":
            return self.filter_operator()
        raise UnknownConstruct(head, self.cur.pos)

    def _expect_query(self):
        # '=?', possibly tokenized as '=' '?'
        if self.accept_op("=?"):
            return
        if self.cur.kind == "op" and self.cur.value in ("<", ">", "<=", ">="):
            raise UnknownConstruct(f"bound '{self.cur.value}'", self.cur.pos)
        self.expect_op("=")
        self.expect_op("?")

    def p_operator(self) -> PropertyAst:
        self.expect_ident("P")
        self._expect_query()
        self.expect_op("[")
        if self.cur.kind == "ident" and self.cur.value in ("G", "F"):
            raise UnknownConstruct(self.cur.value, self.cur.pos)
        if self.cur.kind == "ident" and self.cur.value == "X":
            self.advance()
            target = self.predicate()
            self.expect_op("]")
            return NextProbability(target)
        left = self.predicate()
        self.expect_ident("U")
        if self.cur.kind == "op" and self.cur.value in ("<", "<=", ">", ">="):
            raise UnknownConstruct("bounded until", self.cur.pos)
        right = self.predicate()
        self.expect_op("]")
        return UntilProbability(left, right)

    def r_operator(self) -> PropertyAst:
        self.expect_ident("R")
        self.expect_op("{")
        if self.cur.kind != "string":
            self.fail("expected a quoted reward name", expected=('"name"',))
        reward = self.advance().value[1:-1]
        self.expect_op("}")
        minimum = False
        if self.cur.kind == "ident" and self.cur.value in ("min", "max"):
            if self.cur.value == "max":
                raise UnknownConstruct("max", self.cur.pos)
            minimum = True
            self.advance()
        self._expect_query()
        self.expect_op("[")
        if self.cur.kind == "ident" and self.cur.value == "S":
            self.advance()
            self.expect_op("]")
            return SteadyStateReward(reward)
        if self.cur.kind == "ident" and self.cur.value == "F":
            self.advance()
            target = self.predicate()
            self.expect_op("]")
            return ReachReward(reward, target, minimum)
        if self.cur.kind == "ident" and self.cur.value in ("C", "I"):
            raise UnknownConstruct(self.cur.value, self.cur.pos)
        self.fail("expected 'F <pred>' or 'S' in reward query", expected=("F", "S"))

    def s_operator(self) -> PropertyAst:
        self.expect_ident("S")
        self._expect_query()
        self.expect_op("[")
        pred = self.predicate()
        self.expect_op("]")
        return SteadyStateProbability(pred)

    def filter_operator(self) -> PropertyAst:
        self.expect_ident("filter")
        self.expect_op("(")
        mode = self.expect_ident()
        if mode != "state":
            raise UnknownConstruct(f"filter({mode}, ...)", self.cur.pos)
        self.expect_op(",")
        inner = self.property_term()
        self.expect_op(",")
        cond = self.predicate()
        self.expect_op(")")
        return FilterState(inner, cond)


def parse_property(text: str) -> PropertyAst:
    """Parse one property string into its AST.

    Raises :class:`PropertySyntaxError` with position and expected tokens on
    malformed input, and :class:`UnknownConstruct` for PCTL outside the
    supported subset.
    """
    parser = _Parser(text)
    node = parser.property_expr()
    if parser.cur.kind != "eof":
        parser.fail(f"unexpected trailing input {parser.cur.value!r}", expected=("end of input",))
    return node


def parse_predicate(text: str) -> Predicate:
    parser = _Parser(text)
    node = parser.predicate()
    if parser.cur.kind != "eof":
        parser.fail(f"unexpected trailing input {parser.cur.value!r}", expected=("end of input",))
    return node


# ---------------------------------------------------------------------------
# Formatting (canonical rendering; parse(format(parse(t))) == parse(t))
# ---------------------------------------------------------------------------

_PREC = {Or: 1, And: 2, Not: 3, Label: 4, TruePred: 4}


def format_predicate(pred: Predicate, _min_prec: int = 1) -> str:
    prec = _PREC[type(pred)]
    if isinstance(pred, TruePred):
        text = "true"
    elif isinstance(pred, Label):
        text = f"s={pred.name}"
    elif isinstance(pred, Not):
        text = "!" + format_predicate(pred.operand, 3)
    elif isinstance(pred, And):
        text = f"{format_predicate(pred.left, 2)} & {format_predicate(pred.right, 3)}"
    elif isinstance(pred, Or):
        text = f"{format_predicate(pred.left, 1)} | {format_predicate(pred.right, 2)}"
    else:
        raise TypeError(f"not a predicate: {pred!r}")
    if prec < _min_prec:
        return f"({text})"
    return text


def format_property(prop: PropertyAst) -> str:
    """Render an AST to the canonical property string."""
    if isinstance(prop, UntilProbability):
        return f"P=? [ {format_predicate(prop.stay)} U {format_predicate(prop.target)} ]"
    if isinstance(prop, NextProbability):
        return f"P=? [ X {format_predicate(prop.target)} ]"
    if isinstance(prop, ReachReward):
        flag = "min" if prop.minimum else ""
        return f'R{{"{prop.reward}"}}{flag}=? [ F {format_predicate(prop.target)} ]'
    if isinstance(prop, SteadyStateProbability):
        return f"S=? [ {format_predicate(prop.pred)} ]"
    if isinstance(prop, SteadyStateReward):
        return f'R{{"{prop.reward}"}}=? [ S ]'
    if isinstance(prop, FilterState):
        return f"filter(state, {format_property(prop.inner)}, {format_predicate(prop.condition)})"
    if isinstance(prop, Product):
        return f"{format_property(prop.left)} * {format_property(prop.right)}"
    raise TypeError(f"not a property: {prop!r}")


# ---------------------------------------------------------------------------
# Predicate evaluation against a labeled state space
# ---------------------------------------------------------------------------

def predicate_states(pred: Predicate, chain) -> frozenset[int]:
    """The set of states satisfying ``pred``.

    Complement and the boolean connectives distribute over state sets; a
    label that occurs on no state raises :class:`UnknownLabel`.
    """
    all_states = frozenset(range(chain.n_states))
    if isinstance(pred, TruePred):
        return all_states
    if isinstance(pred, Label):
        states = chain.states_with_label(pred.name)
        if not states and pred.name not in chain.label_universe():
            raise UnknownLabel(pred.name)
        return states
    if isinstance(pred, Not):
        return all_states - predicate_states(pred.operand, chain)
    if isinstance(pred, And):
        return predicate_states(pred.left, chain) & predicate_states(pred.right, chain)
    if isinstance(pred, Or):
        return predicate_states(pred.left, chain) | predicate_states(pred.right, chain)
    raise TypeError(f"not a predicate: {pred!r}")


# ---------------------------------------------------------------------------
# Property sets and success criteria
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PropertyEntry:
    pid: str
    source: str
    ast: PropertyAst


class PropertyFileError(VeridesignError):
    """One or more lines of a property file failed to parse."""

    def __init__(self, errors: list[tuple[int, Exception]]):
        self.errors = errors
        super().__init__("; ".join(f"line {line}: {err}" for line, err in errors))


@dataclass
class PropertySet:
    """Ordered, uniquely identified properties; order fixes the result-vector layout."""

    entries: list[PropertyEntry]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def ids(self) -> list[str]:
        return [e.pid for e in self.entries]

    def get(self, pid: str) -> PropertyEntry:
        for e in self.entries:
            if e.pid == pid:
                return e
        raise UnknownPropertyId(pid)

    def index_of(self, pid: str) -> int:
        for i, e in enumerate(self.entries):
            if e.pid == pid:
                return i
        raise UnknownPropertyId(pid)


_ID_PREFIX_RE = re.compile(r"^\s*(phi\d+)\s*:\s*(.*)$")


def parse_property_file(text: str) -> PropertySet:
    """Parse a property file: one property per non-comment line.

    Lines may carry an explicit ``phiK:`` id prefix; unprefixed lines are
    numbered by position.  All parse failures are aggregated with their line
    numbers before reporting.
    """
    entries: list[PropertyEntry] = []
    errors: list[tuple[int, Exception]] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _ID_PREFIX_RE.match(line)
        if m:
            pid, body = m.group(1), m.group(2)
        else:
            pid, body = f"phi{len(entries) + 1}", line
        try:
            if pid in seen:
                raise UnknownPropertyId(f"duplicate id '{pid}'")
            ast = parse_property(body)
        except VeridesignError as err:
            errors.append((lineno, err))
            continue
        seen.add(pid)
        entries.append(PropertyEntry(pid, body, ast))
    if errors:
        raise PropertyFileError(errors)
    return PropertySet(entries)


@dataclass(frozen=True)
class SuccessCriterion:
    """A per-property threshold test: ``value <comparator> threshold``."""

    prop_id: str
    comparator: str  # ">=" | "<="
    threshold: float

    def holds(self, value: float) -> bool:
        if self.comparator == ">=":
            return value >= self.threshold
        return value <= self.threshold

    def __str__(self) -> str:
        return f"{self.prop_id} {self.comparator} {self.threshold:g}"


def parse_success_criteria(text: str, properties: PropertySet | None = None) -> list[SuccessCriterion]:
    """Parse ``<id> <op> <value>`` lines; ops are limited to ``>=`` and ``<=``.

    When ``properties`` is given, every referenced id must exist in it.
    """
    out: list[SuccessCriterion] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[1] not in (">=", "<="):
            raise PropertySyntaxError("expected '<id> >=|<= <value>'", 0, line=lineno)
        try:
            threshold = float(parts[2])
        except ValueError:
            raise PropertySyntaxError(f"bad threshold {parts[2]!r}", 0, line=lineno) from None
        if not threshold == threshold or threshold in (float("inf"), float("-inf")):
            raise PropertySyntaxError(f"threshold must be finite, got {parts[2]}", 0, line=lineno)
        if properties is not None:
            properties.get(parts[0])  # raises UnknownPropertyId
        out.append(SuccessCriterion(parts[0], parts[1], threshold))
    return out
