"""Satisfiability of crisp constraints over typed parameters, backed by z3.

Every parameter gets one sort. Strings only meet ``=`` and ``!=`` in the
grammar, so they are interned to integers starting at ``STRING_BASE`` and
any value outside the interned literals stands for "some other string".
A parameter compared against ``None`` additionally carries a boolean
``<name>__is_none`` flag; ordering atoms require the flag to be false.
"""

import itertools
import logging
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Mapping, Optional, Set, Tuple

import z3

from .constraint_lang import (
    And,
    Atom,
    Bool,
    Constraint,
    FuzzyPred,
    Implies,
    Not,
    NoneValue,
    Num,
    Operator,
    Or,
    Str,
    Truth,
    expressions_of,
    has_fuzzy,
    params_of,
    print_constraint,
)
from .errors import CdiError, SortMismatch, UnknownSort
from .logger import logger

STRING_BASE = 1_000_000

_Z3_LOCK = threading.RLock()
_MEMO: Dict[Tuple[str, Tuple["TypedVar", ...]], "SatResult"] = {}
_MEMO_LIMIT = 4096


class Sort(str, Enum):
    INT = "Int"
    REAL = "Real"
    STR = "InternedStr"
    BOOL = "Bool"
    NONE = "NoneOnly"

    @property
    def numeric(self) -> bool:
        return self in (Sort.INT, Sort.REAL)


@dataclass(frozen=True)
class TypedVar:
    name: str
    sort: Sort
    maybe_none: bool = False


@dataclass(frozen=True)
class SatQuery:
    vars: Tuple[TypedVar, ...]
    formula: Constraint

    def __post_init__(self):
        names = [v.name for v in self.vars]
        for name in names:
            if names.count(name) > 1:
                raise SortMismatch(name, "declared with more than one sort")
        missing = [p for p in params_of(self.formula) if p not in names]
        if missing:
            raise UnknownSort(f"No sort declared for: {', '.join(missing)}")
        if has_fuzzy(self.formula):
            raise ValueError("Fuzzy predicates cannot be decided by the solver")


@dataclass(frozen=True)
class SatResult:
    satisfiable: bool
    model: Tuple[Tuple[str, Any], ...] = ()

    def __bool__(self) -> bool:
        return self.satisfiable

    @property
    def witness(self) -> Dict[str, Any]:
        return dict(self.model)


UNSAT = SatResult(False)


def _literal_sort(value: Any) -> Optional[Sort]:
    if isinstance(value, Str):
        return Sort.STR
    if isinstance(value, Bool):
        return Sort.BOOL
    if isinstance(value, Num):
        return Sort.INT if isinstance(value.value, int) else Sort.REAL
    return None


def infer_query(formula: Constraint) -> SatQuery:
    """
    Infer one sort per parameter from the literals it is compared with.

    Raises:
        SortMismatch: If a parameter meets literals of two sorts, or an
            ordering operator meets a string, boolean or None
    """
    kinds: Dict[str, Set[Sort]] = {}
    nones: Set[str] = set()
    for e in expressions_of(formula):
        kinds.setdefault(e.param, set())
        sort = _literal_sort(e.value)
        if e.op.is_ordering and sort not in (Sort.INT, Sort.REAL):
            raise SortMismatch(e.param, f"ordering '{e.op.value}' against {e.value}")
        if sort is None:
            nones.add(e.param)
        else:
            kinds[e.param].add(sort)

    variables = []
    for name in params_of(formula):
        found = kinds.get(name, set())
        families = {"number" if s.numeric else s.value for s in found}
        if len(families) > 1:
            raise SortMismatch(name, f"compared with {', '.join(sorted(families))}")
        if Sort.REAL in found:
            sort = Sort.REAL
        elif found:
            sort = next(iter(found))
        else:
            sort = Sort.NONE
        variables.append(TypedVar(name, sort, name in nones))
    return SatQuery(tuple(variables), formula)


class _Encoder:
    def __init__(self, query: SatQuery, string_table: Mapping[str, int]):
        self.vars = {v.name: v for v in query.vars}
        self.table = dict(string_table)
        self.terms: Dict[str, Any] = {}
        self.none_flags: Dict[str, Any] = {}
        for v in query.vars:
            if v.sort in (Sort.INT, Sort.STR):
                self.terms[v.name] = z3.Int(v.name)
            elif v.sort is Sort.REAL:
                self.terms[v.name] = z3.Real(v.name)
            elif v.sort is Sort.BOOL:
                self.terms[v.name] = z3.Bool(v.name)
            if v.maybe_none:
                self.none_flags[v.name] = z3.Bool(f"{v.name}__is_none")

    def intern(self, text: str) -> int:
        if text not in self.table:
            self.table[text] = max(self.table.values(), default=STRING_BASE - 1) + 1
        return self.table[text]

    def is_none(self, name: str):
        return self.none_flags.get(name, z3.BoolVal(False))

    def encode(self, c: Constraint):
        if isinstance(c, Atom):
            return self.atom(c)
        if isinstance(c, Truth):
            return z3.BoolVal(c.value)
        if isinstance(c, Not):
            return z3.Not(self.encode(c.operand))
        if isinstance(c, And):
            return z3.And(self.encode(c.left), self.encode(c.right))
        if isinstance(c, Or):
            return z3.Or(self.encode(c.left), self.encode(c.right))
        if isinstance(c, Implies):
            return z3.Implies(self.encode(c.left), self.encode(c.right))
        if isinstance(c, FuzzyPred):
            raise ValueError("Fuzzy predicates cannot be decided by the solver")
        raise TypeError(f"Not a constraint: {c!r}")

    def atom(self, c: Atom):
        e = c.expr
        var = self.vars[e.param]
        is_none = self.is_none(e.param)

        if isinstance(e.value, NoneValue):
            if e.op.is_ordering:
                raise SortMismatch(e.param, "ordering against None")
            return is_none if e.op is Operator.EQ else z3.Not(is_none)

        sort = _literal_sort(e.value)
        compatible = (sort.numeric and var.sort.numeric) or sort is var.sort
        if not compatible:
            raise SortMismatch(e.param, f"{var.sort.value} compared with {e.value}")
        if e.op.is_ordering and not var.sort.numeric:
            raise SortMismatch(e.param, f"ordering on {var.sort.value}")

        term = self.terms[e.param]
        if isinstance(e.value, Str):
            literal = z3.IntVal(self.intern(e.value.text))
        elif isinstance(e.value, Bool):
            literal = z3.BoolVal(e.value.truth)
        elif isinstance(e.value.value, int) and var.sort is Sort.INT:
            literal = z3.IntVal(e.value.value)
        else:
            exact = Fraction(repr(e.value.value)) if isinstance(e.value.value, float) else Fraction(e.value.value)
            literal = z3.Q(exact.numerator, exact.denominator)

        compare = {
            Operator.EQ: lambda: term == literal,
            Operator.NE: lambda: term != literal,
            Operator.LT: lambda: term < literal,
            Operator.GT: lambda: term > literal,
            Operator.LE: lambda: term <= literal,
            Operator.GE: lambda: term >= literal,
        }[e.op]()
        if e.op is Operator.NE:
            return z3.Or(is_none, compare)
        return z3.And(z3.Not(is_none), compare)

    def decode(self, model) -> Tuple[Tuple[str, Any], ...]:
        reverse = {v: k for k, v in self.table.items()}
        others: Dict[int, str] = {}
        witness = []
        for name, var in self.vars.items():
            flag = self.none_flags.get(name)
            if flag is not None and z3.is_true(model.eval(flag, model_completion=True)):
                witness.append((name, None))
                continue
            if var.sort is Sort.NONE:
                witness.append((name, "<object>"))
                continue
            value = model.eval(self.terms[name], model_completion=True)
            if var.sort is Sort.BOOL:
                witness.append((name, z3.is_true(value)))
            elif var.sort is Sort.INT:
                witness.append((name, value.as_long()))
            elif var.sort is Sort.REAL:
                witness.append((name, float(value.as_fraction())))
            else:
                number = value.as_long()
                if number in reverse:
                    witness.append((name, reverse[number]))
                else:
                    others.setdefault(number, self._fresh_string(len(others)))
                    witness.append((name, others[number]))
        return tuple(witness)

    def _fresh_string(self, index: int) -> str:
        candidate = f"__other_{index}__"
        while candidate in self.table:
            candidate = f"_{candidate}_"
        return candidate


def check_sat(query: SatQuery, string_table: Optional[Mapping[str, int]] = None) -> SatResult:
    """
    Decide a query and return a witness when it is satisfiable.

    Args:
        query: Typed variables and a crisp formula over them
        string_table: Optional interning table shared with a FunctionModel;
            literals missing from it are interned after its largest id

    Returns:
        SatResult, truthy iff satisfiable

    Raises:
        SortMismatch: If a literal or operator does not fit a variable's sort
    """
    text = print_constraint(query.formula)
    key = (text, query.vars)
    with _Z3_LOCK:
        if key in _MEMO:
            return _MEMO[key]
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(f"sat query: {text}")

        encoder = _Encoder(query, string_table or {})
        solver = z3.Solver()
        solver.add(encoder.encode(query.formula))
        outcome = solver.check()
        if outcome == z3.sat:
            result = SatResult(True, encoder.decode(solver.model()))
        elif outcome == z3.unsat:
            result = UNSAT
        else:
            raise CdiError(f"Solver could not decide: {text}")

        if len(_MEMO) >= _MEMO_LIMIT:
            _MEMO.clear()
        _MEMO[key] = result
        return result


def is_satisfiable(formula: Constraint, string_table: Optional[Mapping[str, int]] = None) -> bool:
    return check_sat(infer_query(formula), string_table).satisfiable


def implies(a: Constraint, b: Constraint) -> bool:
    """True iff every assignment satisfying ``a`` satisfies ``b``"""
    return not is_satisfiable(And(a, Not(b)))


def equivalent(a: Constraint, b: Constraint) -> bool:
    return implies(a, b) and implies(b, a)


def _family(value: Any) -> Optional[str]:
    sort = _literal_sort(value)
    if sort is None:
        return None
    return "number" if sort.numeric else sort.value


def _fix_types(c: Constraint, chosen: Mapping[str, str]) -> Constraint:
    if isinstance(c, Atom):
        e = c.expr
        family = _family(e.value)
        if e.param not in chosen or family is None or family == chosen[e.param]:
            return c
        return Truth(e.op is Operator.NE)
    if isinstance(c, Not):
        return Not(_fix_types(c.operand, chosen))
    if isinstance(c, (And, Or, Implies)):
        return type(c)(_fix_types(c.left, chosen), _fix_types(c.right, chosen))
    return c


def is_feasible(formula: Constraint, string_table: Optional[Mapping[str, int]] = None) -> bool:
    """
    Satisfiability where a parameter may be compared with literals of
    several sorts, as in ``if n == "auto": ... elif n > 3: ...``.

    A value has one runtime type. For each choice of type per mixed
    parameter, atoms against a literal of another type become false,
    ``!=`` atoms become true, and the rest goes to the solver.

    Raises:
        SortMismatch: If an ordering meets a string, boolean or None
    """
    families: Dict[str, Set[str]] = {}
    for e in expressions_of(formula):
        family = _family(e.value)
        if family is not None:
            families.setdefault(e.param, set()).add(family)
    mixed = {name: sorted(found) for name, found in families.items() if len(found) > 1}
    if not mixed:
        return is_satisfiable(formula, string_table)

    names = sorted(mixed)
    # "other" covers any type none of the literals has
    for choice in itertools.product(*(mixed[name] + ["other"] for name in names)):
        if is_satisfiable(_fix_types(formula, dict(zip(names, choice))), string_table):
            return True
    return False
