"""Def-use chains and condition-driven slicing over normalized function models.

Used to decide the usage predicates ``ignore(x)`` and ``specified(x)``: a
parameter is ignored under a condition when the slice of the function
reachable under that condition never makes effective use of it.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from .code_model import (
    Assign,
    Call,
    FunctionModel,
    If,
    Name,
    Return,
    Stmt,
    SymValue,
    Terminal,
    Unknown,
    assign_value,
    initial_env,
    iter_exprs,
    iter_statements,
    lower_condition,
    normalize_function,
    statement_exprs,
)
from .constraint_lang import Constraint, Not, Truth, conjoin, has_fuzzy, normalize, params_of
from .errors import SortMismatch, UnsupportedCondition, UnsupportedSyntax
from .logger import logger
from .sat import is_feasible

ENTRY = -1
EXIT = -2

EFFECTIVE_USES = frozenset({"test", "return", "expr", "call_arg", "attribute_store"})


@dataclass(frozen=True)
class UseSite:
    sid: int
    kind: str
    target: Optional[str] = None


@dataclass(frozen=True)
class DefUse:
    site: int
    uses: Tuple[UseSite, ...]


@dataclass(frozen=True)
class DuChain:
    chains: Dict[str, Tuple[DefUse, ...]] = field(default_factory=dict)

    def definitions(self, var: str) -> Tuple[DefUse, ...]:
        return self.chains.get(var, ())

    def uses_of(self, var: str, site: int) -> Tuple[UseSite, ...]:
        for definition in self.definitions(var):
            if definition.site == site:
                return definition.uses
        return ()


# CFG


def build_cfg(m: FunctionModel) -> Dict[int, Tuple[int, ...]]:
    """Successor map keyed by statement id, plus ENTRY"""
    successors: Dict[int, Tuple[int, ...]] = {}

    def link(body: Tuple[Stmt, ...], follow: int) -> int:
        entry = follow
        for stmt in reversed(body):
            if isinstance(stmt, Return):
                successors[stmt.sid] = (EXIT,)
            elif isinstance(stmt, If):
                successors[stmt.sid] = (link(stmt.body, entry), link(stmt.orelse, entry))
            else:
                successors[stmt.sid] = (entry,)
            entry = stmt.sid
        return entry

    successors[ENTRY] = (link(m.body, EXIT),)
    successors[EXIT] = ()
    return successors


def _statement_uses(stmt: Stmt) -> List[Tuple[str, str, Optional[str]]]:
    """(variable, use kind, copy target) for every name a statement reads"""
    uses: List[Tuple[str, str, Optional[str]]] = []
    if isinstance(stmt, Return) and stmt.synthetic:
        return uses

    if isinstance(stmt, Assign):
        direct = "attribute_store" if stmt.kind == "attribute" else "copy"
        target = None if stmt.kind == "attribute" else stmt.target
        if stmt.kind == "subscript":
            uses.append((stmt.target, "copy", stmt.target))
    elif isinstance(stmt, If):
        direct, target = "test", None
    elif isinstance(stmt, Return):
        direct, target = "return", None
    else:
        direct, target = "expr", None

    for root in statement_exprs(stmt):
        call_args: Set[int] = set()
        for e in iter_exprs(root):
            if isinstance(e, Call):
                for arg in e.args:
                    call_args.update(id(sub) for sub in iter_exprs(arg))
        for e in iter_exprs(root):
            if isinstance(e, Name):
                if id(e) in call_args:
                    uses.append((e.ident, "call_arg", None))
                else:
                    uses.append((e.ident, direct, target))
    return uses


def build_du_chains(m: FunctionModel) -> DuChain:
    """
    Def-use chains from reaching definitions over the CFG.

    Parameters are defined at ENTRY. A store through a subscript or a
    non-self attribute is a weak update: it defines the base variable
    without killing earlier definitions.
    """
    m = normalize_function(m)
    statements = {s.sid: s for s in iter_statements(m.body)}
    successors = build_cfg(m)
    predecessors: Dict[int, List[int]] = {node: [] for node in successors}
    for node, nexts in successors.items():
        for nxt in nexts:
            predecessors.setdefault(nxt, []).append(node)

    def gen(node: int) -> Set[Tuple[str, int]]:
        if node == ENTRY:
            return {(p, ENTRY) for p in m.params}
        stmt = statements.get(node)
        if isinstance(stmt, Assign):
            return {(stmt.target, node)}
        return set()

    def transfer(node: int, incoming: FrozenSet[Tuple[str, int]]) -> FrozenSet[Tuple[str, int]]:
        stmt = statements.get(node)
        kept = incoming
        if isinstance(stmt, Assign) and stmt.kind != "subscript":
            kept = frozenset(d for d in incoming if d[0] != stmt.target)
        return frozenset(kept | gen(node))

    reach_in: Dict[int, FrozenSet[Tuple[str, int]]] = {node: frozenset() for node in successors}
    reach_out: Dict[int, FrozenSet[Tuple[str, int]]] = {node: frozenset() for node in successors}
    worklist = list(successors)
    while worklist:
        node = worklist.pop(0)
        incoming: FrozenSet[Tuple[str, int]] = frozenset().union(
            *(reach_out[p] for p in predecessors.get(node, []))
        )
        reach_in[node] = incoming
        out = transfer(node, incoming)
        if out != reach_out[node]:
            reach_out[node] = out
            worklist.extend(n for n in successors[node] if n not in worklist)

    uses: Dict[Tuple[str, int], List[UseSite]] = {}
    for node in successors:
        for var, site in gen(node):
            uses.setdefault((var, site), [])
    for sid, stmt in statements.items():
        for var, kind, target in _statement_uses(stmt):
            for name, site in reach_in[sid]:
                if name == var:
                    uses[(var, site)].append(UseSite(sid, kind, target))

    chains: Dict[str, List[DefUse]] = {}
    for (var, site), found in sorted(uses.items(), key=lambda item: (item[0][0], item[0][1])):
        chains.setdefault(var, []).append(DefUse(site, tuple(found)))
    return DuChain({var: tuple(defs) for var, defs in chains.items()})


def is_used(param: str, m: FunctionModel, transitive: bool = True) -> bool:
    """
    True iff ``param``'s entry value is used, ignoring the synthetic return.

    With ``transitive`` on, a copy into another variable only counts when
    that copy itself reaches an effective use.
    """
    chains = build_du_chains(m)
    entry_uses = chains.uses_of(param, ENTRY)
    if not transitive:
        return bool(entry_uses)

    visited: Set[Tuple[str, int]] = set()

    def effective(var: str, site: int) -> bool:
        if (var, site) in visited:
            return False
        visited.add((var, site))
        for use in chains.uses_of(var, site):
            if use.kind in EFFECTIVE_USES:
                return True
            if use.kind == "copy" and use.target is not None and effective(use.target, use.sid):
                return True
        return False

    return effective(param, ENTRY)


# Slicing


def _terminates(body: Tuple[Stmt, ...]) -> bool:
    if not body:
        return False
    last = body[-1]
    if isinstance(last, Return):
        return True
    if isinstance(last, If):
        return _terminates(last.body) and _terminates(last.orelse)
    return False


def _feasible(formula: Constraint, m: FunctionModel) -> bool:
    try:
        return is_feasible(formula, m.string_table)
    except SortMismatch as e:
        logger.debug(f"Keeping undecided branch in {m.name}: {e}")
        return True


def _assigned(body: Tuple[Stmt, ...]) -> Set[str]:
    return {s.target for s in iter_statements(body) if isinstance(s, Assign)}


class _Slicer:
    def __init__(self, m: FunctionModel):
        self.m = m
        self.tested: Set[str] = set()

    def walk(self, body: Tuple[Stmt, ...], pc: Constraint, env: Dict[str, SymValue]) -> Tuple[Stmt, ...]:
        out: List[Stmt] = []
        for index, stmt in enumerate(body):
            rest = body[index + 1 :]
            if isinstance(stmt, Assign):
                assign_value(stmt, env, self.m)
                out.append(stmt)
            elif isinstance(stmt, Return):
                out.append(stmt)
                return tuple(out)
            elif isinstance(stmt, If):
                return tuple(out) + self.branch(stmt, rest, pc, env)
            else:
                out.append(stmt)
        return tuple(out)

    def branch(self, stmt: If, rest: Tuple[Stmt, ...], pc: Constraint, env: Dict[str, SymValue]) -> Tuple[Stmt, ...]:
        try:
            test = lower_condition(stmt.test, env, self.m, stmt.line)
        except UnsupportedSyntax:
            test = None

        if test is None:
            positive = negative = True
            true_pc, false_pc = pc, pc
        else:
            self.tested.update(params_of(test))
            true_pc = conjoin([pc, test])
            false_pc = conjoin([pc, normalize(Not(test))])
            positive = _feasible(true_pc, self.m)
            negative = _feasible(false_pc, self.m)

        if positive and negative:
            body = self.walk(stmt.body, true_pc, dict(env))
            orelse = self.walk(stmt.orelse, false_pc, dict(env))
            kept = If(stmt.sid, stmt.line, stmt.test, body, orelse)
            if _terminates(body) and _terminates(orelse):
                return (kept,)
            for name in _assigned(stmt.body) | _assigned(stmt.orelse):
                env[name] = Unknown(name)
            if _terminates(body):
                pc = false_pc
            elif _terminates(orelse):
                pc = true_pc
            return (kept,) + self.walk(rest, pc, env)
        if positive:
            return self.walk(stmt.body + rest, true_pc, env)
        if negative:
            return self.walk(stmt.orelse + rest, false_pc, env)
        return ()


def slice_under_condition(m: FunctionModel, cond: Constraint) -> FunctionModel:
    """
    Keep the statements reachable by some assignment satisfying ``cond``.

    Branches whose guard contradicts the path condition are dropped and
    branches implied by it are inlined. A condition without parameters
    returns the model unchanged.

    Raises:
        UnsupportedCondition: If ``cond`` names no parameter the function
            tests; the unpruned model is attached to the error
        ValueError: If ``cond`` contains a fuzzy predicate
    """
    m = normalize_function(m)
    if has_fuzzy(cond):
        raise ValueError("Cannot slice under a fuzzy predicate")
    wanted = set(params_of(cond))
    if isinstance(cond, Truth) or not wanted:
        return m

    slicer = _Slicer(m)
    body = slicer.walk(m.body, normalize(cond), initial_env(m))
    if not wanted & slicer.tested:
        raise UnsupportedCondition(
            f"Condition on {', '.join(sorted(wanted))} is never tested in {m.name}", model=m
        )
    return replace(m, body=body)


# Branch conditions


def branch_conditions(m: FunctionModel) -> List[Tuple[Constraint, bool]]:
    """
    Conditions of the top-level if/elif chains, in source order.

    Each entry is (condition, ends_in_error). A chain without an explicit
    else contributes its fall-through condition as a final branch.
    """
    m = normalize_function(m)
    env = initial_env(m)
    found: List[Tuple[Constraint, bool]] = []
    for stmt in m.body:
        if isinstance(stmt, Assign):
            assign_value(stmt, env, m)
            continue
        if not isinstance(stmt, If):
            continue

        tests: List[Constraint] = []
        blocks: List[Tuple[Stmt, ...]] = []
        current: Optional[If] = stmt
        orelse: Tuple[Stmt, ...] = ()
        try:
            while current is not None:
                tests.append(lower_condition(current.test, env, m, current.line))
                blocks.append(current.body)
                orelse = current.orelse
                if len(orelse) == 1 and isinstance(orelse[0], If):
                    current = orelse[0]
                else:
                    current = None
        except UnsupportedSyntax as e:
            logger.debug(f"Skipping branch chain on line {stmt.line} of {m.name}: {e}")
            for name in _assigned((stmt,)):
                env[name] = Unknown(name)
            continue

        for k, test in enumerate(tests):
            parts = [test]
            for j in range(k):
                if _feasible(conjoin([test, tests[j]]), m):
                    parts.append(normalize(Not(tests[j])))
            found.append((conjoin(parts), _ends_in_error(blocks[k])))
        fallthrough = conjoin([normalize(Not(t)) for t in tests])
        found.append((fallthrough, _ends_in_error(orelse)))

        for name in _assigned((stmt,)):
            env[name] = Unknown(name)
    return found


def _ends_in_error(body: Tuple[Stmt, ...]) -> bool:
    return bool(body) and isinstance(body[-1], Return) and body[-1].terminal is Terminal.ERROR_END


def _used_under(param: str, m: FunctionModel, condition: Constraint) -> bool:
    try:
        sliced = slice_under_condition(m, condition)
    except UnsupportedCondition as e:
        sliced = e.model
    return is_used(param, sliced)


def ignored_conditions(param: str, m: FunctionModel) -> List[Constraint]:
    """
    Top-level branch conditions under which ``param`` is not used.

    A parameter used nowhere is ignored unconditionally: ``[True]``.
    """
    m = normalize_function(m)
    if param not in m.params:
        raise ValueError(f"Unknown parameter: {param}")
    if not is_used(param, m):
        return [Truth(True)]
    branches = [(c, err) for c, err in branch_conditions(m) if not err]
    if not branches:
        return []
    return [c for c, _ in branches if not _used_under(param, m, c)]


def used_conditions(param: str, m: FunctionModel) -> List[Constraint]:
    """Top-level branch conditions under which ``param`` is used"""
    m = normalize_function(m)
    if param not in m.params:
        raise ValueError(f"Unknown parameter: {param}")
    if not is_used(param, m):
        return []
    branches = [(c, err) for c, err in branch_conditions(m) if not err]
    if not branches:
        return [Truth(True)]
    return [c for c, _ in branches if _used_under(param, m, c)]
