"""Multi-parameter constraint language.

Grammar, loosest binding first::

    constraint ::= disjunction [ "->" constraint ]
    disjunction ::= conjunction { " v " conjunction }
    conjunction ::= unary { "^" unary }
    unary ::= "!" unary | primary
    primary ::= "(" constraint ")" | pred "(" name ")" | "True" | "False"
              | name op value
    op ::= "<" | ">" | "<=" | ">=" | "=" | "!="      ("==" is read as "=")
    value ::= string | number | "True" | "False" | "None"

``v`` is only an operator when whitespace surrounds it, so parameters may
still be called ``v``.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterator, List, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np

from .errors import ConstraintSyntaxError, UnknownOperator


class Operator(str, Enum):
    LT = "<"
    GT = ">"
    LE = "<="
    GE = ">="
    EQ = "="
    NE = "!="

    @property
    def is_ordering(self) -> bool:
        return self in (Operator.LT, Operator.GT, Operator.LE, Operator.GE)


class PredKind(str, Enum):
    IGNORED = "Ignored"
    SPECIFIED = "Specified"

    def flipped(self) -> "PredKind":
        return PredKind.SPECIFIED if self is PredKind.IGNORED else PredKind.IGNORED


COMPLEMENT = {
    Operator.LT: Operator.GE,
    Operator.GE: Operator.LT,
    Operator.GT: Operator.LE,
    Operator.LE: Operator.GT,
    Operator.EQ: Operator.NE,
    Operator.NE: Operator.EQ,
}

MIRROR = {
    Operator.LT: Operator.GT,
    Operator.GT: Operator.LT,
    Operator.LE: Operator.GE,
    Operator.GE: Operator.LE,
    Operator.EQ: Operator.EQ,
    Operator.NE: Operator.NE,
}

PREDICATE_SPELLINGS = {
    "ignore": PredKind.IGNORED,
    "ignored": PredKind.IGNORED,
    "no_effect": PredKind.IGNORED,
    "unused": PredKind.IGNORED,
    "override": PredKind.IGNORED,
    "overridden": PredKind.IGNORED,
    "specify": PredKind.SPECIFIED,
    "specified": PredKind.SPECIFIED,
    "have_effect": PredKind.SPECIFIED,
    "has_effect": PredKind.SPECIFIED,
    "exist": PredKind.SPECIFIED,
    "exists": PredKind.SPECIFIED,
    "significant": PredKind.SPECIFIED,
}

CANONICAL_PREDICATE = {PredKind.IGNORED: "ignore", PredKind.SPECIFIED: "specified"}


# Values


@dataclass(frozen=True)
class Str:
    text: str

    @property
    def python(self) -> str:
        return self.text

    def __str__(self) -> str:
        quote = "'" if '"' in self.text and "'" not in self.text else '"'
        body = self.text.replace("\\", "\\\\").replace(quote, "\\" + quote)
        return f"{quote}{body}{quote}"


@dataclass(frozen=True)
class Num:
    value: Union[int, float]

    @property
    def python(self) -> Union[int, float]:
        return self.value

    @property
    def text(self) -> str:
        return str(self.value) if isinstance(self.value, int) else repr(self.value)

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class Bool:
    truth: bool

    @property
    def python(self) -> bool:
        return self.truth

    @property
    def text(self) -> str:
        return str(self.truth)

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class NoneValue:
    @property
    def python(self) -> None:
        return None

    @property
    def text(self) -> str:
        return "None"

    def __str__(self) -> str:
        return "None"


NONE = NoneValue()

Value = Union[Str, Num, Bool, NoneValue]


def value_of(obj: Any) -> Value:
    """Wrap a Python literal as a constraint Value"""
    if obj is None:
        return NONE
    if isinstance(obj, bool):
        return Bool(obj)
    if isinstance(obj, (int, float)):
        return Num(obj)
    if isinstance(obj, str):
        return Str(obj)
    raise TypeError(f"Not a constraint literal: {obj!r}")


@dataclass(frozen=True)
class Expression:
    param: str
    op: Operator
    value: Value

    def __str__(self) -> str:
        return f"{self.param} {self.op.value} {self.value}"


# Constraint tree


@dataclass(frozen=True)
class Atom:
    expr: Expression


@dataclass(frozen=True)
class Not:
    operand: "Constraint"


@dataclass(frozen=True)
class And:
    left: "Constraint"
    right: "Constraint"


@dataclass(frozen=True)
class Or:
    left: "Constraint"
    right: "Constraint"


@dataclass(frozen=True)
class Implies:
    left: "Constraint"
    right: "Constraint"


@dataclass(frozen=True)
class FuzzyPred:
    kind: PredKind
    param: str


@dataclass(frozen=True)
class Truth:
    value: bool


Constraint = Union[Atom, Not, And, Or, Implies, FuzzyPred, Truth]
Leaf = Union[Atom, FuzzyPred, Truth]

TRUE = Truth(True)
FALSE = Truth(False)


def atom(param: str, op: Union[Operator, str], value: Any) -> Atom:
    """Shorthand used by analyses and tests: ``atom("x", "<", 3)``"""
    if not isinstance(value, (Str, Num, Bool, NoneValue)):
        value = value_of(value)
    return Atom(Expression(param, Operator(op), value))


def conjoin(items: List[Constraint]) -> Constraint:
    """Left-nested conjunction with constant folding; empty -> True"""
    result: Optional[Constraint] = None
    for item in items:
        if item == TRUE:
            continue
        if item == FALSE:
            return FALSE
        result = item if result is None else And(result, item)
    return TRUE if result is None else result


def disjoin(items: List[Constraint]) -> Constraint:
    """Left-nested disjunction with constant folding; empty -> False"""
    result: Optional[Constraint] = None
    for item in items:
        if item == FALSE:
            continue
        if item == TRUE:
            return TRUE
        result = item if result is None else Or(result, item)
    return FALSE if result is None else result


# Printing


def print_expression(e: Expression) -> str:
    return f"({e})"


def print_constraint(c: Constraint) -> str:
    """Canonical, fully parenthesized text of a constraint"""
    if isinstance(c, Atom):
        return print_expression(c.expr)
    if isinstance(c, FuzzyPred):
        return f"({CANONICAL_PREDICATE[c.kind]}({c.param}))"
    if isinstance(c, Truth):
        return f"({c.value})"
    if isinstance(c, Not):
        return f"(!{print_constraint(c.operand)})"
    if isinstance(c, And):
        return f"({print_constraint(c.left)} ^ {print_constraint(c.right)})"
    if isinstance(c, Or):
        return f"({print_constraint(c.left)} v {print_constraint(c.right)})"
    if isinstance(c, Implies):
        return f"({print_constraint(c.left)} -> {print_constraint(c.right)})"
    raise TypeError(f"Not a constraint: {c!r}")


def structurally_equal(a: Constraint, b: Constraint) -> bool:
    return print_constraint(a) == print_constraint(b)


# Parsing


class _Token(NamedTuple):
    kind: str
    text: str
    pos: int
    spaced: bool = False


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"-?\d+(\.\d+)?([eE][+-]?\d+)?")
_OPCHARS = re.compile(r"[<>=!~]+")
_OPERATORS = {"<": "<", ">": ">", "<=": "<=", ">=": ">=", "=": "=", "==": "=", "!=": "!="}


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token("LPAREN", ch, i))
            i += 1
        elif ch == ")":
            tokens.append(_Token("RPAREN", ch, i))
            i += 1
        elif ch == "^":
            tokens.append(_Token("AND", ch, i))
            i += 1
        elif text.startswith("->", i):
            tokens.append(_Token("IMPLIES", "->", i))
            i += 2
        elif ch in "\"'":
            # backslash escapes only the quote and itself
            chars: List[str] = []
            j = i + 1
            while j < n and text[j] != ch:
                if text[j] == "\\" and j + 1 < n and text[j + 1] in (ch, "\\"):
                    j += 1
                chars.append(text[j])
                j += 1
            if j >= n:
                raise ConstraintSyntaxError("Unterminated string", _offset(text, i))
            tokens.append(_Token("STRING", "".join(chars), i))
            i = j + 1
        elif ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            match = _NUMBER.match(text, i)
            tokens.append(_Token("NUMBER", match.group(0), i))
            i = match.end()
        elif _IDENT.match(text, i):
            match = _IDENT.match(text, i)
            word = match.group(0)
            spaced = (i > 0 and text[i - 1].isspace()) and (
                match.end() < n and text[match.end()].isspace()
            )
            tokens.append(_Token("IDENT", word, i, spaced))
            i = match.end()
        elif _OPCHARS.match(text, i):
            run = _OPCHARS.match(text, i).group(0)
            if set(run) == {"!"}:
                for k in range(len(run)):
                    tokens.append(_Token("NOT", "!", i + k))
            else:
                tokens.append(_op_token(text, run, i))
            i += len(run)
        else:
            raise ConstraintSyntaxError(f"Unexpected character '{ch}'", _offset(text, i))
    tokens.append(_Token("EOF", "", n))
    return tokens


def _op_token(text: str, run: str, pos: int) -> _Token:
    if run not in _OPERATORS:
        raise UnknownOperator(run, _offset(text, pos))
    return _Token("OP", _OPERATORS[run], pos)


def _offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        token = self.peek()
        self.i += 1
        return token

    def fail(self, token: _Token, expected: List[str]) -> ConstraintSyntaxError:
        found = token.text or "end of input"
        return ConstraintSyntaxError(
            f"Unexpected '{found}'", _offset(self.text, token.pos), expected
        )

    def expect(self, kind: str, label: str) -> _Token:
        token = self.next()
        if token.kind != kind:
            raise self.fail(token, [label])
        return token

    def parse(self) -> Constraint:
        if self.peek().kind == "EOF":
            raise self.fail(self.peek(), ["constraint"])
        result = self.implication()
        if self.peek().kind != "EOF":
            raise self.fail(self.peek(), ["->", "v", "^", "end of input"])
        return result

    def implication(self) -> Constraint:
        left = self.disjunction()
        if self.peek().kind == "IMPLIES":
            self.next()
            return Implies(left, self.implication())
        return left

    def _at_or(self) -> bool:
        token = self.peek()
        return token.kind == "IDENT" and token.text == "v" and token.spaced

    def disjunction(self) -> Constraint:
        left = self.conjunction()
        while self._at_or():
            self.next()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Constraint:
        left = self.unary()
        while self.peek().kind == "AND":
            self.next()
            left = And(left, self.unary())
        return left

    def unary(self) -> Constraint:
        if self.peek().kind == "NOT":
            self.next()
            return Not(self.unary())
        return self.primary()

    def primary(self) -> Constraint:
        token = self.peek()
        if token.kind == "LPAREN":
            self.next()
            inner = self.implication()
            self.expect("RPAREN", ")")
            return inner
        if token.kind != "IDENT":
            raise self.fail(token, ["(", "!", "parameter", "True", "False"])

        following = self.peek(1)
        if token.text in PREDICATE_SPELLINGS and following.kind == "LPAREN":
            self.next()
            self.next()
            name = self.expect("IDENT", "parameter")
            self.expect("RPAREN", ")")
            return FuzzyPred(PREDICATE_SPELLINGS[token.text], name.text)
        if token.text in ("True", "False") and following.kind != "OP":
            self.next()
            return Truth(token.text == "True")

        self.next()
        op = self.next()
        if op.kind != "OP":
            raise self.fail(op, ["<", ">", "<=", ">=", "=", "!="])
        return Atom(Expression(token.text, Operator(op.text), self.value()))

    def value(self) -> Value:
        token = self.next()
        if token.kind == "STRING":
            return Str(token.text)
        if token.kind == "NUMBER":
            if any(ch in token.text for ch in ".eE"):
                return Num(float(token.text))
            return Num(int(token.text))
        if token.kind == "IDENT" and token.text in ("True", "False"):
            return Bool(token.text == "True")
        if token.kind == "IDENT" and token.text == "None":
            return NONE
        raise self.fail(token, ["string", "number", "True", "False", "None"])


def parse_constraint(text: str) -> Constraint:
    """
    Parse constraint-language text into a Constraint tree.

    Args:
        text: Constraint source, e.g. ``(x = 1) -> (ignore(y))``

    Returns:
        The constraint AST, with ``Implies`` kept as written

    Raises:
        ConstraintSyntaxError: With byte offset and expected tokens
        UnknownOperator: For comparison operators outside the grammar
    """
    return _Parser(text).parse()


# Normalization


def negate_expression(e: Expression) -> Expression:
    return Expression(e.param, COMPLEMENT[e.op], e.value)


def normalize(c: Constraint) -> Constraint:
    """Negation-normal form without implications"""
    return _nnf(c, False)


def _nnf(c: Constraint, negate: bool) -> Constraint:
    if isinstance(c, Atom):
        return Atom(negate_expression(c.expr)) if negate else c
    if isinstance(c, FuzzyPred):
        return FuzzyPred(c.kind.flipped(), c.param) if negate else c
    if isinstance(c, Truth):
        return Truth(not c.value) if negate else c
    if isinstance(c, Not):
        return _nnf(c.operand, not negate)
    if isinstance(c, And):
        if negate:
            return Or(_nnf(c.left, True), _nnf(c.right, True))
        return And(_nnf(c.left, False), _nnf(c.right, False))
    if isinstance(c, Or):
        if negate:
            return And(_nnf(c.left, True), _nnf(c.right, True))
        return Or(_nnf(c.left, False), _nnf(c.right, False))
    if isinstance(c, Implies):
        if negate:
            return And(_nnf(c.left, False), _nnf(c.right, True))
        return Or(_nnf(c.left, True), _nnf(c.right, False))
    raise TypeError(f"Not a constraint: {c!r}")


# Traversal


def leaves(c: Constraint) -> List[Leaf]:
    """Leaves in left-to-right order"""
    return list(_iter_leaves(c))


def _iter_leaves(c: Constraint) -> Iterator[Leaf]:
    if isinstance(c, (Atom, FuzzyPred, Truth)):
        yield c
    elif isinstance(c, Not):
        yield from _iter_leaves(c.operand)
    else:
        yield from _iter_leaves(c.left)
        yield from _iter_leaves(c.right)


def params_of(c: Constraint) -> Tuple[str, ...]:
    """Parameter names in order of first appearance"""
    seen: Dict[str, None] = {}
    for leaf in _iter_leaves(c):
        if isinstance(leaf, Atom):
            seen.setdefault(leaf.expr.param)
        elif isinstance(leaf, FuzzyPred):
            seen.setdefault(leaf.param)
    return tuple(seen)


def expressions_of(c: Constraint) -> List[Expression]:
    return [leaf.expr for leaf in _iter_leaves(c) if isinstance(leaf, Atom)]


def has_fuzzy(c: Constraint) -> bool:
    return any(isinstance(leaf, FuzzyPred) for leaf in _iter_leaves(c))


def map_leaves(c: Constraint, fn) -> Constraint:
    """Rebuild ``c`` with every leaf replaced by ``fn(leaf)``"""
    if isinstance(c, (Atom, FuzzyPred, Truth)):
        return fn(c)
    if isinstance(c, Not):
        return Not(map_leaves(c.operand, fn))
    return type(c)(map_leaves(c.left, fn), map_leaves(c.right, fn))


# Crisp evaluation


def compare(left: Any, op: Operator, right: Any) -> bool:
    """Compare two Python literals the way constraints do.

    Equality never holds across bool/number/str/None kinds; ordering is only
    defined between numbers.
    """
    if op in (Operator.EQ, Operator.NE):
        equal = _same_kind(left, right) and left == right
        return equal if op is Operator.EQ else not equal
    if not (_is_number(left) and _is_number(right)):
        return False
    if op is Operator.LT:
        return left < right
    if op is Operator.GT:
        return left > right
    if op is Operator.LE:
        return left <= right
    return left >= right


def _is_number(obj: Any) -> bool:
    return isinstance(obj, (int, float)) and not isinstance(obj, bool)


def _kind(obj: Any) -> str:
    if obj is None:
        return "none"
    if isinstance(obj, bool):
        return "bool"
    if _is_number(obj):
        return "number"
    if isinstance(obj, str):
        return "str"
    return "object"


def _same_kind(left: Any, right: Any) -> bool:
    return _kind(left) == _kind(right)


def evaluate(c: Constraint, assignment: Mapping[str, Any]) -> bool:
    """
    Evaluate a crisp constraint on concrete parameter values.

    Raises:
        KeyError: If a parameter has no value in ``assignment``
        ValueError: If ``c`` contains a fuzzy predicate
    """
    if isinstance(c, Atom):
        e = c.expr
        return compare(assignment[e.param], e.op, e.value.python)
    if isinstance(c, Truth):
        return c.value
    if isinstance(c, FuzzyPred):
        raise ValueError(f"Fuzzy predicate on '{c.param}' has no crisp value")
    if isinstance(c, Not):
        return not evaluate(c.operand, assignment)
    if isinstance(c, And):
        return evaluate(c.left, assignment) and evaluate(c.right, assignment)
    if isinstance(c, Or):
        return evaluate(c.left, assignment) or evaluate(c.right, assignment)
    if isinstance(c, Implies):
        return (not evaluate(c.left, assignment)) or evaluate(c.right, assignment)
    raise TypeError(f"Not a constraint: {c!r}")


# Operator embeddings


class OperatorEmbedding(NamedTuple):
    """Characteristic bits: Comparison, Equation, Greater, Less, Negativity"""

    c: int
    e: int
    g: int
    l: int
    n: int

    @property
    def vector(self) -> np.ndarray:
        return np.array(self, dtype=float)


_EMBEDDINGS = {
    Operator.LT: OperatorEmbedding(1, 0, 0, 1, 0),
    Operator.GT: OperatorEmbedding(1, 0, 1, 0, 0),
    Operator.LE: OperatorEmbedding(1, 1, 0, 1, 0),
    Operator.GE: OperatorEmbedding(1, 1, 1, 0, 0),
    Operator.EQ: OperatorEmbedding(0, 1, 0, 0, 0),
    Operator.NE: OperatorEmbedding(0, 1, 0, 0, 1),
}


def operator_embedding(op: Union[Operator, str]) -> OperatorEmbedding:
    return _EMBEDDINGS[Operator(op)]
