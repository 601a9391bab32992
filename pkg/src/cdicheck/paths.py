"""Static enumeration of feasible paths through a normalized function model."""

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

from .code_model import (
    Assign,
    FunctionModel,
    If,
    Return,
    Stmt,
    SymValue,
    Terminal,
    assign_value,
    initial_env,
    lower_condition,
    normalize_function,
    symbolic_text,
)
from .constraint_lang import (
    And,
    Atom,
    Constraint,
    Expression,
    Or,
    Truth,
    conjoin,
    negate_expression,
    print_expression,
)
from .errors import SortMismatch
from .logger import logger
from .sat import is_feasible


@dataclass(frozen=True)
class PathConstraint:
    atoms: Tuple[Expression, ...]
    terminal: Terminal
    bindings: Tuple[Tuple[str, str], ...] = ()
    payload: str = ""

    def as_constraint(self) -> Constraint:
        return conjoin([Atom(e) for e in self.atoms])

    @property
    def params(self) -> Tuple[str, ...]:
        seen: Dict[str, None] = {}
        for e in self.atoms:
            seen.setdefault(e.param)
        return tuple(seen)

    @property
    def is_error(self) -> bool:
        return self.terminal is Terminal.ERROR_END


@dataclass(frozen=True)
class PathSet:
    paths: Tuple[PathConstraint, ...]
    truncated: bool = False

    def __iter__(self) -> Iterator[PathConstraint]:
        return iter(self.paths)

    def __len__(self) -> int:
        return len(self.paths)

    def __getitem__(self, index: int) -> PathConstraint:
        return self.paths[index]


def decompose(c: Constraint, positive: bool) -> List[List[Expression]]:
    """
    Split a branch test into disjoint conjunctions following short-circuit order.

    ``c`` must be in negation-normal form. The returned cases cover ``c``
    (or its negation when ``positive`` is false) and no two of them can hold
    at once.
    """
    if isinstance(c, Atom):
        return [[c.expr if positive else negate_expression(c.expr)]]
    if isinstance(c, Truth):
        return [[]] if c.value == positive else []
    if isinstance(c, And):
        if positive:
            return [a + b for a in decompose(c.left, True) for b in decompose(c.right, True)]
        return decompose(c.left, False) + [
            a + b for a in decompose(c.left, True) for b in decompose(c.right, False)
        ]
    if isinstance(c, Or):
        if positive:
            return decompose(c.left, True) + [
                a + b for a in decompose(c.left, False) for b in decompose(c.right, True)
            ]
        return [a + b for a in decompose(c.left, False) for b in decompose(c.right, False)]
    raise ValueError(f"Branch test is not in negation-normal form: {c!r}")


def _merge(
    atoms: Tuple[Expression, ...], case: List[Expression], m: FunctionModel
) -> Optional[Tuple[Expression, ...]]:
    fresh = [e for e in dict.fromkeys(case) if e not in atoms]
    if not fresh:
        return atoms
    merged = atoms + tuple(fresh)
    if any(negate_expression(e) in merged for e in fresh):
        return None
    formula = conjoin([Atom(e) for e in merged])
    try:
        feasible = is_feasible(formula, m.string_table)
    except SortMismatch as e:
        logger.debug(f"Keeping undecided path in {m.name}: {e}")
        feasible = True
    return merged if feasible else None


def _finish(stmt: Return, atoms: Tuple[Expression, ...], env: Dict[str, SymValue], m: FunctionModel) -> PathConstraint:
    bindings = tuple((p, symbolic_text(env[p])) for p in m.params if p in env)
    if stmt.terminal is Terminal.ERROR_END:
        payload = stmt.tag
    else:
        payload = " ^ ".join(f"({name} = {text})" for name, text in bindings)
    return PathConstraint(atoms, stmt.terminal, bindings, payload)


def enumerate_paths(m: FunctionModel, max_paths: int = 256) -> PathSet:
    """
    Enumerate every feasible root-to-return path of a function.

    Branches are explored true side first. A candidate path is kept only if
    its atoms are jointly satisfiable; paths whose atoms mix sorts are kept.

    Args:
        m: Function model; normalized first if needed
        max_paths: Upper bound on returned paths

    Returns:
        PathSet, with ``truncated`` set when more paths existed

    Raises:
        UnsupportedSyntax: When a branch test cannot be expressed as a constraint
    """
    if max_paths < 1:
        raise ValueError("max_paths must be at least 1")
    m = normalize_function(m)

    paths: List[PathConstraint] = []
    truncated = False
    stack: List[Tuple[Tuple[Stmt, ...], Tuple[Expression, ...], Dict[str, SymValue]]] = [
        (m.body, (), initial_env(m))
    ]
    while stack:
        rest, atoms, env = stack.pop()
        finished: Optional[PathConstraint] = None
        while rest:
            stmt, rest = rest[0], rest[1:]
            if isinstance(stmt, Assign):
                assign_value(stmt, env, m)
            elif isinstance(stmt, Return):
                finished = _finish(stmt, atoms, env, m)
                break
            elif isinstance(stmt, If):
                test = lower_condition(stmt.test, env, m, stmt.line)
                branches = []
                for positive, body in ((True, stmt.body), (False, stmt.orelse)):
                    for case in decompose(test, positive):
                        merged = _merge(atoms, case, m)
                        if merged is not None:
                            branches.append((body + rest, merged, dict(env)))
                stack.extend(reversed(branches))
                break
        else:
            finished = PathConstraint(atoms, Terminal.NORMAL)

        if finished is not None:
            if len(paths) >= max_paths:
                truncated = True
                break
            paths.append(finished)

    result = PathSet(tuple(paths), truncated)
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(f"paths of {m.name}:\n{dump_paths(result)}")
    return result


def dump_paths(paths) -> str:
    """One line per path: ``terminal | atom ^ atom ^ ...``"""
    lines = []
    for path in paths:
        body = " ^ ".join(print_expression(e) for e in path.atoms) or "(True)"
        lines.append(f"{path.terminal.value} | {body}")
    return "\n".join(lines)
