"""Fuzzy constraint logic.

Similarity of a documented constraint to the atoms of a code path, and the
membership degree of the constraint in the set of constraints the code
actually enforces. Expression similarity weighs parameter names and values
by normalized edit distance and operators by the cosine of their
characteristic vectors.
"""

from typing import List, Mapping, Optional, Sequence

import numpy as np

from .code_model import Terminal
from .configs import FclConfig
from .constraint_lang import (
    And,
    Atom,
    Constraint,
    Expression,
    FuzzyPred,
    Implies,
    Not,
    Operator,
    Or,
    Truth,
    Value,
    conjoin,
    has_fuzzy,
    map_leaves,
    normalize,
    operator_embedding,
)
from .errors import EmptyEnvironment, SortMismatch
from .models import Membership, PathScore
from .sat import is_satisfiable

DEFAULT_FCL = FclConfig()


def levenshtein(s1: str, s2: str) -> int:
    """Edit distance with unit-cost insertions, deletions and substitutions"""
    if len(s1) < len(s2):
        s1, s2 = s2, s1
    if not s2:
        return len(s1)

    previous = list(range(len(s2) + 1))
    for i, c1 in enumerate(s1, start=1):
        current = [i]
        for j, c2 in enumerate(s2, start=1):
            cost = 0 if c1 == c2 else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def nld(s1: str, s2: str) -> float:
    """Normalized Levenshtein similarity; two empty strings are identical"""
    longest = max(len(s1), len(s2))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(s1, s2) / longest


def op_similarity(op1: Operator, op2: Operator) -> float:
    v1 = operator_embedding(op1).vector
    v2 = operator_embedding(op2).vector
    return float(np.dot(v1, v2) / (np.linalg.norm(v1) * np.linalg.norm(v2)))


def value_text(value: Value) -> str:
    """Surface text of a value: strings unquoted, numbers in shortest form"""
    return value.text


def expr_similarity(e1: Expression, e2: Expression, cfg: FclConfig = DEFAULT_FCL) -> float:
    """
    Weighted similarity of two atomic expressions.

    Args:
        e1: First expression
        e2: Second expression
        cfg: Weights; ``alpha`` for names and values, ``beta`` for operators

    Returns:
        Similarity in [0, 1]
    """
    score = (
        cfg.alpha * nld(e1.param, e2.param)
        + cfg.beta * op_similarity(e1.op, e2.op)
        + cfg.alpha * nld(value_text(e1.value), value_text(e2.value))
    )
    return min(1.0, max(0.0, score))


def constraint_similarity(
    c: Constraint, env: Sequence[Expression], cfg: FclConfig = DEFAULT_FCL
) -> float:
    """
    Similarity of a constraint to an environment of path atoms.

    An atom scores its best match in ``env``; negation complements,
    conjunction takes the minimum and disjunction the maximum. A usage
    predicate scores the closest parameter name found in ``env``.

    Raises:
        EmptyEnvironment: If ``env`` is empty
    """
    if not env:
        raise EmptyEnvironment("Cannot compare a constraint with an empty environment")
    if isinstance(c, Implies):
        return constraint_similarity(normalize(c), env, cfg)
    if isinstance(c, Atom):
        return max(expr_similarity(c.expr, e, cfg) for e in env)
    if isinstance(c, FuzzyPred):
        return max(nld(c.param, e.param) for e in env)
    if isinstance(c, Truth):
        return 1.0 if c.value else 0.0
    if isinstance(c, Not):
        return 1.0 - constraint_similarity(c.operand, env, cfg)
    if isinstance(c, And):
        return min(constraint_similarity(c.left, env, cfg), constraint_similarity(c.right, env, cfg))
    if isinstance(c, Or):
        return max(constraint_similarity(c.left, env, cfg), constraint_similarity(c.right, env, cfg))
    raise TypeError(f"Not a constraint: {c!r}")


def closest_atom(e: Expression, env: Sequence[Expression], cfg: FclConfig = DEFAULT_FCL) -> Expression:
    """Most similar atom of ``env``; ties go to the earliest"""
    best, best_score = env[0], -1.0
    for candidate in env:
        score = expr_similarity(e, candidate, cfg)
        if score > best_score:
            best, best_score = candidate, score
    return best


def anchor(c: Constraint, env: Sequence[Expression], cfg: FclConfig = DEFAULT_FCL) -> Constraint:
    """
    Rewrite each atom of ``c`` onto its closest atom in ``env``.

    The parameter name (and the value, when both are of the same kind) is
    taken from the closest atom once their similarity reaches
    ``cfg.anchor_threshold``. The operator is always kept.
    """

    def rewrite(leaf):
        if not isinstance(leaf, Atom):
            return leaf
        e = leaf.expr
        best = closest_atom(e, env, cfg)
        param = best.param if nld(e.param, best.param) >= cfg.anchor_threshold else e.param
        value = e.value
        if type(best.value) is type(e.value) and nld(value_text(e.value), value_text(best.value)) >= cfg.anchor_threshold:
            value = best.value
        return Atom(Expression(param, e.op, value))

    return map_leaves(c, rewrite)


def membership(
    c: Constraint,
    paths: Sequence,
    cfg: FclConfig = DEFAULT_FCL,
    string_table: Optional[Mapping[str, int]] = None,
) -> Membership:
    """
    Degree to which ``c`` belongs to the constraints enforced along ``paths``.

    For every path with atoms, the constraint is anchored onto the path and
    checked against it; error paths must reject it. A path contributes its
    similarity when the check holds and the complement when it fails, and
    the membership is the mean contribution.

    Args:
        c: Crisp constraint
        paths: PathConstraint objects
        cfg: Fuzzy logic weights
        string_table: Interning table of the function the paths come from

    Returns:
        Membership with per-path scores

    Raises:
        EmptyEnvironment: If no path has atoms
        ValueError: If ``c`` contains a usage predicate
    """
    if has_fuzzy(c):
        raise ValueError("Membership is only defined for crisp constraints")
    c = normalize(c)

    scores: List[PathScore] = []
    for index, path in enumerate(paths):
        env = list(path.atoms)
        if not env:
            continue
        rho = constraint_similarity(c, env, cfg)
        anchored = anchor(c, env, cfg)
        try:
            satisfied = is_satisfiable(conjoin([anchored, path.as_constraint()]), string_table)
        except SortMismatch:
            satisfied = False
        if path.terminal is Terminal.ERROR_END:
            satisfied = not satisfied
        score = rho if satisfied else 1.0 - rho
        scores.append(PathScore(index=index, rho=rho, satisfied=satisfied, score=score))

    if not scores:
        raise EmptyEnvironment("No path with atoms to compare against")
    value = float(np.mean([s.score for s in scores]))
    return Membership(value=min(1.0, max(0.0, value)), per_path=scores)
