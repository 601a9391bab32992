"""Code model of a single function.

``parse_function`` turns one Python function into a small statement IR and
rejects anything outside the analyzable subset. ``normalize_function`` then
rewrites the IR so that every input the control flow depends on is a
parameter:

1. ``self.x`` reads and writes become parameter ``x``.
2. Calls in value position become fresh ``call_<callee>`` parameters.
3. ``raise`` and ``warnings.warn`` become ErrorEnd returns tagged with the
   parameters named by their guards.
4. A synthetic final return captures the parameter bindings.
5. Conditional expressions in assignments and returns become if/else.

String literals are interned starting at ``STRING_BASE``.
"""

import ast
import itertools
import re
import textwrap
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

from .constraint_lang import (
    MIRROR,
    Atom,
    Constraint,
    Expression,
    NONE,
    Not,
    Num,
    Operator,
    Str,
    Truth,
    Value,
    compare,
    conjoin,
    disjoin,
    normalize,
    value_of,
)
from .errors import UnsupportedSyntax
from .sat import STRING_BASE


class Terminal(str, Enum):
    NORMAL = "Normal"
    ERROR_END = "ErrorEnd"


# Expressions


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class SelfAttr:
    attr: str


@dataclass(frozen=True)
class Const:
    value: Value


@dataclass(frozen=True)
class ConstTuple:
    items: Tuple[Value, ...]


@dataclass(frozen=True)
class Compare:
    left: "Expr"
    op: str
    right: "Expr"


@dataclass(frozen=True)
class BoolOp:
    op: str
    values: Tuple["Expr", ...]


@dataclass(frozen=True)
class NotExpr:
    operand: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple["Expr", ...]
    symbol: Optional[str] = None


@dataclass(frozen=True)
class Ternary:
    test: "Expr"
    body: "Expr"
    orelse: "Expr"


@dataclass(frozen=True)
class Opaque:
    text: str
    parts: Tuple["Expr", ...] = ()


Expr = Union[Name, SelfAttr, Const, ConstTuple, Compare, BoolOp, NotExpr, Call, Ternary, Opaque]


# Statements


@dataclass(frozen=True)
class Assign:
    sid: int
    line: int
    target: str
    value: Expr
    kind: str = "local"  # local | attribute | subscript
    self_root: bool = False


@dataclass(frozen=True)
class If:
    sid: int
    line: int
    test: Expr
    body: Tuple["Stmt", ...]
    orelse: Tuple["Stmt", ...] = ()


@dataclass(frozen=True)
class Return:
    sid: int
    line: int
    value: Optional[Expr] = None
    terminal: Terminal = Terminal.NORMAL
    tag: str = ""
    synthetic: bool = False


@dataclass(frozen=True)
class Raise:
    sid: int
    line: int
    value: Optional[Expr] = None


@dataclass(frozen=True)
class Warn:
    sid: int
    line: int
    args: Tuple[Expr, ...] = ()


@dataclass(frozen=True)
class ExprStmt:
    sid: int
    line: int
    value: Expr


Stmt = Union[Assign, If, Return, Raise, Warn, ExprStmt]


@dataclass(frozen=True)
class FunctionModel:
    name: str
    params: Tuple[str, ...]
    body: Tuple[Stmt, ...]
    string_table: Mapping[str, int] = field(default_factory=dict)
    param_types: Mapping[str, str] = field(default_factory=dict)
    declared: Tuple[str, ...] = ()
    normalized: bool = False
    line: int = 1


# Parsing

_UNSUPPORTED_STATEMENTS = {
    "For": "loop",
    "AsyncFor": "loop",
    "While": "loop",
    "Try": "try statement",
    "TryStar": "try statement",
    "With": "with statement",
    "AsyncWith": "with statement",
    "FunctionDef": "nested definition",
    "AsyncFunctionDef": "nested definition",
    "ClassDef": "nested definition",
    "Global": "global declaration",
    "Nonlocal": "global declaration",
    "Delete": "del statement",
    "Match": "match statement",
}

_UNSUPPORTED_EXPRESSIONS = {
    "ListComp": "comprehension",
    "SetComp": "comprehension",
    "DictComp": "comprehension",
    "GeneratorExp": "comprehension",
    "Lambda": "lambda",
    "NamedExpr": "assignment expression",
    "Yield": "generator",
    "YieldFrom": "generator",
    "Await": "await",
}

_COMPARE_OPS = {
    ast.Eq: "==",
    ast.NotEq: "!=",
    ast.Lt: "<",
    ast.LtE: "<=",
    ast.Gt: ">",
    ast.GtE: ">=",
    ast.Is: "is",
    ast.IsNot: "is not",
    ast.In: "in",
    ast.NotIn: "not in",
}


def _is_self(node: ast.AST) -> bool:
    return isinstance(node, ast.Name) and node.id == "self"


def _is_warn(func: ast.AST) -> bool:
    if isinstance(func, ast.Name):
        return func.id == "warn"
    return (
        isinstance(func, ast.Attribute)
        and func.attr == "warn"
        and isinstance(func.value, ast.Name)
        and func.value.id == "warnings"
    )


def _literal(node: ast.AST) -> Optional[Value]:
    if isinstance(node, ast.Constant) and (
        node.value is None or isinstance(node.value, (bool, int, float, str))
    ):
        return value_of(node.value)
    if (
        isinstance(node, ast.UnaryOp)
        and isinstance(node.op, ast.USub)
        and isinstance(node.operand, ast.Constant)
        and isinstance(node.operand.value, (int, float))
        and not isinstance(node.operand.value, bool)
    ):
        return Num(-node.operand.value)
    return None


class _Builder:
    def __init__(self):
        self.sids = itertools.count()
        self.in_condition = 0

    def block(self, nodes: List[ast.stmt]) -> Tuple[Stmt, ...]:
        out: List[Stmt] = []
        for node in nodes:
            out.extend(self.stmt(node))
        return tuple(out)

    def stmt(self, node: ast.stmt) -> List[Stmt]:
        line = node.lineno
        kind = type(node).__name__
        if kind in _UNSUPPORTED_STATEMENTS:
            raise UnsupportedSyntax(line, _UNSUPPORTED_STATEMENTS[kind])

        if isinstance(node, ast.Expr):
            if isinstance(node.value, ast.Constant) and isinstance(node.value.value, str):
                return []
            if isinstance(node.value, ast.Call) and _is_warn(node.value.func):
                args = tuple(self.expr(a) for a in node.value.args)
                return [Warn(next(self.sids), line, args)]
            return [ExprStmt(next(self.sids), line, self.expr(node.value))]

        if isinstance(node, ast.Assign):
            value = self.expr(node.value)
            out: List[Stmt] = []
            for target in node.targets:
                out.extend(self.targets(target, value, line))
            return out

        if isinstance(node, ast.AnnAssign):
            if node.value is None:
                return []
            return self.targets(node.target, self.expr(node.value), line)

        if isinstance(node, ast.AugAssign):
            current = self.expr(_as_load(node.target))
            value = Opaque(ast.unparse(node), (current, self.expr(node.value)))
            return self.targets(node.target, value, line)

        if isinstance(node, ast.If):
            test = self.condition(node.test)
            sid = next(self.sids)
            return [If(sid, line, test, self.block(node.body), self.block(node.orelse))]

        if isinstance(node, ast.Return):
            value = self.expr(node.value) if node.value is not None else None
            return [Return(next(self.sids), line, value)]

        if isinstance(node, ast.Raise):
            value = self.expr(node.exc) if node.exc is not None else None
            return [Raise(next(self.sids), line, value)]

        if isinstance(node, ast.Assert):
            test = self.condition(node.test)
            sid = next(self.sids)
            message = self.expr(node.msg) if node.msg is not None else None
            return [If(sid, line, NotExpr(test), (Raise(next(self.sids), line, message),))]

        if isinstance(node, (ast.Pass, ast.Import, ast.ImportFrom)):
            return []

        raise UnsupportedSyntax(line, kind)

    def targets(self, target: ast.AST, value: Expr, line: int) -> List[Stmt]:
        if isinstance(target, ast.Name):
            return [Assign(next(self.sids), line, target.id, value, "local")]
        if isinstance(target, ast.Attribute) and _is_self(target.value):
            return [Assign(next(self.sids), line, target.attr, value, "attribute", True)]
        if isinstance(target, (ast.Tuple, ast.List)):
            out: List[Stmt] = []
            for element in target.elts:
                out.extend(self.targets(element, value, line))
            return out
        if isinstance(target, ast.Starred):
            return self.targets(target.value, value, line)
        if isinstance(target, (ast.Attribute, ast.Subscript)):
            root = _root(target.value)
            if root is None:
                return [ExprStmt(next(self.sids), line, value)]
            name, on_self = root
            return [Assign(next(self.sids), line, name, value, "subscript", on_self)]
        raise UnsupportedSyntax(line, f"assignment to {type(target).__name__}")

    def condition(self, node: ast.expr) -> Expr:
        self.in_condition += 1
        try:
            return self.expr(node)
        finally:
            self.in_condition -= 1

    def expr(self, node: ast.expr) -> Expr:
        kind = type(node).__name__
        if kind in _UNSUPPORTED_EXPRESSIONS:
            raise UnsupportedSyntax(node.lineno, _UNSUPPORTED_EXPRESSIONS[kind])

        literal = _literal(node)
        if literal is not None:
            return Const(literal)
        if isinstance(node, ast.Name):
            return Name(node.id)
        if isinstance(node, ast.Attribute) and _is_self(node.value):
            return SelfAttr(node.attr)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Not):
            return NotExpr(self.expr(node.operand))
        if isinstance(node, ast.BoolOp):
            op = "and" if isinstance(node.op, ast.And) else "or"
            return BoolOp(op, tuple(self.expr(v) for v in node.values))
        if isinstance(node, ast.Compare):
            return self.compare(node)
        if isinstance(node, ast.Call):
            return self.call(node)
        if isinstance(node, ast.IfExp):
            if self.in_condition:
                raise UnsupportedSyntax(node.lineno, "conditional expression in a condition")
            return Ternary(self.expr(node.test), self.expr(node.body), self.expr(node.orelse))
        if isinstance(node, (ast.Tuple, ast.List, ast.Set)):
            items = [_literal(e) for e in node.elts]
            if all(item is not None for item in items):
                return ConstTuple(tuple(items))
        return self.opaque(node)

    def compare(self, node: ast.Compare) -> Expr:
        pairs = []
        left = self.expr(node.left)
        for op, comparator in zip(node.ops, node.comparators):
            right = self.expr(comparator)
            pairs.append(Compare(left, _COMPARE_OPS[type(op)], right))
            left = right
        return pairs[0] if len(pairs) == 1 else BoolOp("and", tuple(pairs))

    def call(self, node: ast.Call) -> Call:
        args: List[Expr] = []
        for arg in node.args:
            args.append(self.expr(arg.value if isinstance(arg, ast.Starred) else arg))
        for keyword in node.keywords:
            args.append(self.expr(keyword.value))
        if isinstance(node.func, ast.Attribute) and not _is_self(node.func.value):
            args.extend(self.parts(node.func.value))
        return Call(ast.unparse(node.func), tuple(args))

    def opaque(self, node: ast.AST) -> Opaque:
        for child in ast.walk(node):
            kind = type(child).__name__
            if kind in _UNSUPPORTED_EXPRESSIONS:
                raise UnsupportedSyntax(getattr(child, "lineno", node.lineno), _UNSUPPORTED_EXPRESSIONS[kind])
            if kind == "IfExp" and self.in_condition:
                raise UnsupportedSyntax(child.lineno, "conditional expression in a condition")
        return Opaque(ast.unparse(node), tuple(self.parts(node)))

    def parts(self, node: ast.AST) -> List[Expr]:
        if isinstance(node, ast.Name) and isinstance(node.ctx, ast.Load):
            return [Name(node.id)]
        if isinstance(node, ast.Attribute) and _is_self(node.value):
            return [SelfAttr(node.attr)]
        if isinstance(node, ast.Call):
            return [self.call(node)]
        found: List[Expr] = []
        for child in ast.iter_child_nodes(node):
            found.extend(self.parts(child))
        return found


def _as_load(target: ast.AST) -> ast.AST:
    node = ast.parse(ast.unparse(target), mode="eval").body
    return ast.copy_location(node, target)


def _root(node: ast.AST) -> Optional[Tuple[str, bool]]:
    if isinstance(node, ast.Name):
        return node.id, False
    if isinstance(node, ast.Attribute):
        if _is_self(node.value):
            return node.attr, True
        return _root(node.value)
    if isinstance(node, ast.Subscript):
        return _root(node.value)
    return None


def parse_function(source: str, param_types: Optional[Mapping[str, str]] = None) -> FunctionModel:
    """
    Parse the first function definition in ``source``.

    Args:
        source: Function source text; indentation is removed first
        param_types: Documented type text per parameter, used when lowering
            bare truth tests

    Returns:
        The un-normalized FunctionModel

    Raises:
        UnsupportedSyntax: For constructs outside the analyzable subset
    """
    try:
        tree = ast.parse(textwrap.dedent(source))
    except SyntaxError as e:
        raise UnsupportedSyntax(e.lineno or 1, f"invalid syntax ({e.msg})")

    fn = next((n for n in tree.body if isinstance(n, (ast.FunctionDef, ast.AsyncFunctionDef))), None)
    if fn is None:
        raise UnsupportedSyntax(1, "no function definition")
    if isinstance(fn, ast.AsyncFunctionDef):
        raise UnsupportedSyntax(fn.lineno, "async function")

    arguments = fn.args
    positional = [a.arg for a in arguments.posonlyargs + arguments.args]
    if positional and positional[0] in ("self", "cls"):
        positional = positional[1:]
    declared = positional
    if arguments.vararg is not None:
        declared.append(arguments.vararg.arg)
    declared.extend(a.arg for a in arguments.kwonlyargs)
    if arguments.kwarg is not None:
        declared.append(arguments.kwarg.arg)

    body = _Builder().block(fn.body)
    return FunctionModel(
        name=fn.name,
        params=tuple(declared),
        body=body,
        param_types=dict(param_types or {}),
        declared=tuple(declared),
        line=fn.lineno,
    )


# Normalization


def iter_statements(body: Tuple[Stmt, ...]) -> Iterator[Stmt]:
    for stmt in body:
        yield stmt
        if isinstance(stmt, If):
            yield from iter_statements(stmt.body)
            yield from iter_statements(stmt.orelse)


def iter_exprs(expr: Optional[Expr]) -> Iterator[Expr]:
    """Pre-order walk over an expression and its sub-expressions"""
    if expr is None:
        return
    yield expr
    if isinstance(expr, Compare):
        yield from iter_exprs(expr.left)
        yield from iter_exprs(expr.right)
    elif isinstance(expr, BoolOp):
        for value in expr.values:
            yield from iter_exprs(value)
    elif isinstance(expr, NotExpr):
        yield from iter_exprs(expr.operand)
    elif isinstance(expr, Call):
        for arg in expr.args:
            yield from iter_exprs(arg)
    elif isinstance(expr, Ternary):
        yield from iter_exprs(expr.test)
        yield from iter_exprs(expr.body)
        yield from iter_exprs(expr.orelse)
    elif isinstance(expr, Opaque):
        for part in expr.parts:
            yield from iter_exprs(part)


def statement_exprs(stmt: Stmt) -> List[Expr]:
    if isinstance(stmt, Assign):
        return [stmt.value]
    if isinstance(stmt, If):
        return [stmt.test]
    if isinstance(stmt, (Return, Raise)):
        return [stmt.value] if stmt.value is not None else []
    if isinstance(stmt, Warn):
        return list(stmt.args)
    return [stmt.value]


def _symbol_base(func: str) -> str:
    if func.startswith("self."):
        func = func[len("self.") :]
    return "call_" + re.sub(r"\W", "_", func.replace(".", "_"))


class _Normalizer:
    def __init__(self, m: FunctionModel):
        self.declared = list(m.declared or m.params)
        self.attrs: Dict[str, None] = {}
        self.symbols: Dict[str, None] = {}
        self.counts: Counter = Counter()
        last = max((s.sid for s in iter_statements(m.body)), default=-1)
        self.sids = itertools.count(last + 1)

    def known(self, name: str) -> bool:
        return name in self.declared or name in self.attrs or name in self.symbols

    def attr(self, name: str) -> None:
        if name not in self.declared:
            self.attrs.setdefault(name)

    def symbol(self, func: str) -> str:
        base = _symbol_base(func)
        self.counts[base] += 1
        name = base if self.counts[base] == 1 else f"{base}_{self.counts[base]}"
        self.symbols.setdefault(name)
        return name

    def expr(self, e: Expr, value_position: bool = True) -> Expr:
        if isinstance(e, SelfAttr):
            self.attr(e.attr)
            return Name(e.attr)
        if isinstance(e, Call):
            args = tuple(self.expr(a) for a in e.args)
            symbol = self.symbol(e.func) if value_position else None
            return Call(e.func, args, symbol)
        if isinstance(e, Compare):
            return Compare(self.expr(e.left), e.op, self.expr(e.right))
        if isinstance(e, BoolOp):
            return BoolOp(e.op, tuple(self.expr(v) for v in e.values))
        if isinstance(e, NotExpr):
            return NotExpr(self.expr(e.operand))
        if isinstance(e, Ternary):
            parts = (self.expr(e.test), self.expr(e.body), self.expr(e.orelse))
            return Opaque("<conditional expression>", parts)
        if isinstance(e, Opaque):
            return Opaque(e.text, tuple(self.expr(p) for p in e.parts))
        return e

    def block(self, body: Tuple[Stmt, ...], guards: Tuple[Expr, ...]) -> Tuple[Stmt, ...]:
        out: List[Stmt] = []
        for stmt in body:
            out.extend(self.stmt(stmt, guards))
        return tuple(out)

    def stmt(self, s: Stmt, guards: Tuple[Expr, ...]) -> List[Stmt]:
        if isinstance(s, Assign):
            if isinstance(s.value, Ternary):
                t = s.value
                expanded = If(
                    s.sid,
                    s.line,
                    t.test,
                    (replace(s, sid=next(self.sids), value=t.body),),
                    (replace(s, sid=next(self.sids), value=t.orelse),),
                )
                return self.stmt(expanded, guards)
            if s.kind == "attribute" or (s.kind == "subscript" and s.self_root):
                self.attr(s.target)
            return [replace(s, value=self.expr(s.value))]

        if isinstance(s, If):
            test = self.expr(s.test)
            inner = guards + (test,)
            return [If(s.sid, s.line, test, self.block(s.body, inner), self.block(s.orelse, inner))]

        if isinstance(s, Return):
            if isinstance(s.value, Ternary):
                t = s.value
                expanded = If(
                    s.sid,
                    s.line,
                    t.test,
                    (replace(s, sid=next(self.sids), value=t.body),),
                    (replace(s, sid=next(self.sids), value=t.orelse),),
                )
                return self.stmt(expanded, guards)
            value = self.expr(s.value) if s.value is not None else None
            return [replace(s, value=value)]

        if isinstance(s, (Raise, Warn)):
            return [Return(s.sid, s.line, None, Terminal.ERROR_END, self.error_tag(guards))]

        if isinstance(s, ExprStmt):
            return [replace(s, value=self.expr(s.value, value_position=not isinstance(s.value, Call)))]

        raise TypeError(f"Not a statement: {s!r}")

    def error_tag(self, guards: Tuple[Expr, ...]) -> str:
        named: Dict[str, None] = {}
        for guard in guards:
            for e in iter_exprs(guard):
                if isinstance(e, Name) and self.known(e.ident):
                    named.setdefault(e.ident)
                elif isinstance(e, Call) and e.symbol is not None:
                    named.setdefault(e.symbol)
        return "".join(f"({p})_" for p in named) + "ERROR_END"


def _string_table(body: Tuple[Stmt, ...]) -> Dict[str, int]:
    table: Dict[str, int] = {}
    for stmt in iter_statements(body):
        for root in statement_exprs(stmt):
            for e in iter_exprs(root):
                values = []
                if isinstance(e, Const):
                    values = [e.value]
                elif isinstance(e, ConstTuple):
                    values = list(e.items)
                for v in values:
                    if isinstance(v, Str) and v.text not in table:
                        table[v.text] = STRING_BASE + len(table)
    return table


def normalize_function(m: FunctionModel) -> FunctionModel:
    """
    Apply the five normalization rewrites to a parsed model.

    Parameters come out ordered as declared parameters, then ``self``
    attributes in order of first appearance, then ``call_*`` symbols.
    Normalizing an already normalized model returns it unchanged.
    """
    if m.normalized:
        return m
    normalizer = _Normalizer(m)
    body = normalizer.block(m.body, ())
    last_line = max((s.line for s in iter_statements(body)), default=m.line)
    body = body + (Return(next(normalizer.sids), last_line, None, Terminal.NORMAL, "", True),)
    params = tuple(normalizer.declared) + tuple(normalizer.attrs) + tuple(normalizer.symbols)
    return replace(
        m,
        params=params,
        body=body,
        string_table=_string_table(body),
        declared=tuple(normalizer.declared),
        normalized=True,
    )


def load_function(source: str, param_types: Optional[Mapping[str, str]] = None) -> FunctionModel:
    """Parse and normalize in one step"""
    return normalize_function(parse_function(source, param_types))


# Symbolic values and condition lowering


@dataclass(frozen=True)
class Sym:
    param: str


@dataclass(frozen=True)
class Val:
    value: Value


@dataclass(frozen=True)
class Cond:
    constraint: Constraint


@dataclass(frozen=True)
class Unknown:
    text: str


SymValue = Union[Sym, Val, Cond, Unknown]

_LOWERED_OPS = {
    "==": Operator.EQ,
    "!=": Operator.NE,
    "<": Operator.LT,
    "<=": Operator.LE,
    ">": Operator.GT,
    ">=": Operator.GE,
    "is": Operator.EQ,
    "is not": Operator.NE,
}


def initial_env(m: FunctionModel) -> Dict[str, SymValue]:
    return {p: Sym(p) for p in m.params}


def symbolic_value(expr: Expr, env: Mapping[str, SymValue], m: FunctionModel, line: int = 0) -> SymValue:
    """Value of an expression in terms of the model's parameters"""
    if isinstance(expr, Name):
        return env.get(expr.ident, Unknown(expr.ident))
    if isinstance(expr, Const):
        return Val(expr.value)
    if isinstance(expr, Call):
        return Sym(expr.symbol) if expr.symbol is not None else Unknown(expr.func)
    if isinstance(expr, (Compare, BoolOp, NotExpr)):
        try:
            return Cond(lower_condition(expr, env, m, line))
        except UnsupportedSyntax:
            return Unknown("<condition>")
    if isinstance(expr, Opaque):
        return Unknown(expr.text)
    return Unknown(type(expr).__name__)


def symbolic_text(value: SymValue) -> str:
    if isinstance(value, Sym):
        return value.param
    if isinstance(value, Val):
        return str(value.value)
    if isinstance(value, Cond):
        from .constraint_lang import print_constraint

        return print_constraint(value.constraint)
    return value.text


def lower_condition(
    expr: Expr, env: Mapping[str, SymValue], m: FunctionModel, line: int = 0
) -> Constraint:
    """
    Lower a branch test to a constraint over parameters, in negation-normal form.

    ``is None`` / ``is not None`` become ``= None`` / ``!= None``; membership
    in a literal tuple becomes a disjunction of equalities. A bare truth test
    of a parameter becomes ``p != False`` when its documented type mentions
    bool or is unknown, and ``p != None`` otherwise.

    Raises:
        UnsupportedSyntax: For comparisons between parameters or over values
            the model cannot express
    """
    return normalize(_Lowering(env, m, line).lower(expr))


class _Lowering:
    def __init__(self, env: Mapping[str, SymValue], m: FunctionModel, line: int):
        self.env = env
        self.m = m
        self.line = line

    def lower(self, expr: Expr) -> Constraint:
        if isinstance(expr, BoolOp):
            parts = [self.lower(v) for v in expr.values]
            return conjoin(parts) if expr.op == "and" else disjoin(parts)
        if isinstance(expr, NotExpr):
            return normalize(Not(self.lower(expr.operand)))
        if isinstance(expr, Compare):
            return self.compare(expr)
        return self.truthiness(symbolic_value(expr, self.env, self.m, self.line))

    def compare(self, expr: Compare) -> Constraint:
        left = symbolic_value(expr.left, self.env, self.m, self.line)
        if expr.op in ("in", "not in"):
            if not isinstance(expr.right, ConstTuple):
                raise UnsupportedSyntax(self.line, "membership test against a non-literal collection")
            if expr.op == "in":
                return disjoin([self.relate(left, Operator.EQ, Val(v)) for v in expr.right.items])
            return conjoin([self.relate(left, Operator.NE, Val(v)) for v in expr.right.items])

        right = symbolic_value(expr.right, self.env, self.m, self.line)
        if expr.op in ("is", "is not") and not (isinstance(left, Val) or isinstance(right, Val)):
            raise UnsupportedSyntax(self.line, "identity comparison between values")
        return self.relate(left, _LOWERED_OPS[expr.op], right)

    def relate(self, left: SymValue, op: Operator, right: SymValue) -> Constraint:
        if isinstance(left, Sym) and isinstance(right, Val):
            return Atom(Expression(left.param, op, right.value))
        if isinstance(left, Val) and isinstance(right, Sym):
            return Atom(Expression(right.param, MIRROR[op], left.value))
        if isinstance(left, Val) and isinstance(right, Val):
            return Truth(compare(left.value.python, op, right.value.python))
        if isinstance(left, Sym) and isinstance(right, Sym):
            raise UnsupportedSyntax(self.line, "comparison between parameters")
        raise UnsupportedSyntax(self.line, "comparison over computed value")

    def truthiness(self, value: SymValue) -> Constraint:
        if isinstance(value, Sym):
            declared = self.m.param_types.get(value.param)
            if declared is None or "bool" in declared.lower():
                return Atom(Expression(value.param, Operator.NE, value_of(False)))
            return Atom(Expression(value.param, Operator.NE, NONE))
        if isinstance(value, Val):
            return Truth(bool(value.value.python))
        if isinstance(value, Cond):
            return value.constraint
        raise UnsupportedSyntax(self.line, "condition over computed value")


def assign_value(stmt: Assign, env: Dict[str, SymValue], m: FunctionModel) -> None:
    """Apply an assignment to a symbolic environment in place"""
    if stmt.kind == "subscript":
        env[stmt.target] = Unknown(f"{stmt.target}[...]")
    else:
        env[stmt.target] = symbolic_value(stmt.value, env, m, stmt.line)
