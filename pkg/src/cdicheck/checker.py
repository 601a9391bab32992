"""Consistency checks between documented constraints and code."""

from typing import List, Mapping, Optional, Sequence, Tuple

from .code_model import FunctionModel, load_function, normalize_function
from .configs import CheckConfig
from .constraint_lang import (
    TRUE,
    Atom,
    Constraint,
    FuzzyPred,
    Implies,
    Not,
    Or,
    PredKind,
    conjoin,
    has_fuzzy,
    leaves,
    normalize,
    params_of,
    parse_constraint,
    print_constraint,
    print_expression,
)
from .dataflow import ignored_conditions, is_used, slice_under_condition, used_conditions
from .errors import CdiError, EmptyEnvironment, SortMismatch, UnsupportedCondition
from .fcl import membership, nld
from .logger import logger
from .models import (
    CorpusRecord,
    InconsistencyKind,
    Membership,
    PathScore,
    ReportSummary,
    Status,
    Verdict,
)
from .paths import PathConstraint, enumerate_paths
from .sat import is_satisfiable


def _describe(index: int, path: PathConstraint) -> str:
    atoms = " ^ ".join(print_expression(e) for e in path.atoms) or "(True)"
    return f"path {index} [{path.terminal.value}] {atoms}"


def _unresolved(c: Optional[Constraint], reason: str) -> Verdict:
    return Verdict(
        status=Status.UNRESOLVED,
        constraint=print_constraint(c) if c is not None else "",
        reason=reason,
    )


def check_crisp(
    c: Constraint,
    paths: Sequence[PathConstraint],
    relevance_filter: bool = True,
    string_table: Optional[Mapping[str, int]] = None,
) -> Verdict:
    """
    Check a crisp constraint against every relevant path.

    Normal paths must admit the constraint and error paths must exclude it.
    With relevance filtering, only paths naming a parameter of ``c`` are
    considered, and a Normal path is decisive only when it names all of them.

    Args:
        c: Constraint without usage predicates
        paths: Paths of the documented function
        relevance_filter: Drop paths unrelated to the constraint
        string_table: Interning table of the function

    Returns:
        Verdict; Unresolved when no path is decisive
    """
    if has_fuzzy(c):
        raise ValueError("Crisp checking does not accept usage predicates")
    wanted = set(params_of(c))

    decisive: List[Tuple[int, PathConstraint, bool]] = []
    for index, path in enumerate(paths):
        named = set(path.params)
        if relevance_filter and not named & wanted:
            continue
        if relevance_filter and not path.is_error and not wanted <= named:
            continue
        satisfiable = is_satisfiable(conjoin([c, path.as_constraint()]), string_table)
        passed = not satisfiable if path.is_error else satisfiable
        decisive.append((index, path, passed))

    if not decisive:
        return _unresolved(c, "no relevant paths")

    per_path = [
        PathScore(index=i, rho=1.0, satisfied=ok, score=1.0 if ok else 0.0) for i, _, ok in decisive
    ]
    value = sum(1 for *_, ok in decisive if ok) / len(decisive)
    failed = [_describe(i, p) for i, p, ok in decisive if not ok]
    return Verdict(
        status=Status.INCONSISTENT if failed else Status.CONSISTENT,
        kind=InconsistencyKind.INCORRECTNESS if failed else None,
        membership=Membership(value=value, per_path=per_path),
        evidence=failed,
        constraint=print_constraint(c),
    )


def _fuzzy_relevant(path: PathConstraint, wanted: Sequence[str], threshold: float) -> bool:
    return any(nld(p, q) >= threshold for p in path.params for q in wanted)


def check_fuzzy(
    c: Constraint,
    paths: Sequence[PathConstraint],
    cfg: CheckConfig,
    string_table: Optional[Mapping[str, int]] = None,
) -> Verdict:
    """
    Decide consistency by membership degree against ``cfg.fcl.tau``.

    When every atom of ``c`` appears verbatim on some relevant path, the
    crisp verdict is returned instead.
    """
    c = normalize(c)
    wanted = params_of(c)
    indexed = [
        (i, p)
        for i, p in enumerate(paths)
        if not cfg.relevance_filter or _fuzzy_relevant(p, wanted, cfg.fcl.anchor_threshold)
    ]
    if not indexed:
        return _unresolved(c, "no relevant paths")

    seen = {e for _, p in indexed for e in p.atoms}
    if all(leaf.expr in seen for leaf in leaves(c) if isinstance(leaf, Atom)):
        return check_crisp(c, paths, cfg.relevance_filter, string_table)

    try:
        result = membership(c, [p for _, p in indexed], cfg.fcl, string_table)
    except EmptyEnvironment as e:
        return _unresolved(c, str(e))

    per_path = [s.model_copy(update={"index": indexed[s.index][0]}) for s in result.per_path]
    result = Membership(value=result.value, per_path=per_path)
    consistent = result.value >= cfg.fcl.tau
    evidence = []
    if not consistent:
        for score in per_path:
            path = paths[score.index]
            evidence.append(
                f"{_describe(score.index, path)} rho={score.rho:.3f} "
                f"holds={score.satisfied} score={score.score:.3f}"
            )
    return Verdict(
        status=Status.CONSISTENT if consistent else Status.INCONSISTENT,
        kind=None if consistent else InconsistencyKind.INCORRECTNESS,
        membership=result,
        evidence=evidence,
        constraint=print_constraint(c),
    )


def split_usage_constraint(c: Constraint) -> Optional[Tuple[Constraint, FuzzyPred]]:
    """Split ``A -> pred(x)`` (or ``pred(x)`` alone) into its condition and predicate"""
    if isinstance(c, Not) and isinstance(c.operand, FuzzyPred):
        return TRUE, FuzzyPred(c.operand.kind.flipped(), c.operand.param)
    if isinstance(c, FuzzyPred):
        return TRUE, c
    if isinstance(c, Implies) and not has_fuzzy(c.left):
        found = split_usage_constraint(c.right)
        if found is not None and found[0] == TRUE:
            return normalize(c.left), found[1]
        return None
    if isinstance(c, Or):
        for crisp, pred in ((c.left, c.right), (c.right, c.left)):
            if isinstance(pred, FuzzyPred) and not has_fuzzy(crisp):
                return normalize(Not(crisp)), pred
    return None


def _covered(b: Constraint, condition: Constraint, m: FunctionModel) -> bool:
    try:
        return not is_satisfiable(conjoin([b, normalize(Not(condition))]), m.string_table)
    except SortMismatch:
        return True


def check_usage_predicate(c: Constraint, m: FunctionModel) -> Verdict:
    """
    Check an ``ignore(x)`` or ``specified(x)`` claim under its condition.

    Incorrectness: the claim fails inside the slice selected by the
    condition. Incompleteness: the claim also holds under a branch the
    condition does not cover; those branches are the evidence.
    """
    m = normalize_function(m)
    split = split_usage_constraint(c)
    if split is None:
        return _unresolved(c, "unsupported usage-predicate shape")
    condition, pred = split
    if pred.param not in m.params:
        return _unresolved(c, f"Unknown parameter: {pred.param}")

    try:
        sliced = slice_under_condition(m, condition)
    except UnsupportedCondition as e:
        return _unresolved(c, str(e))

    used = is_used(pred.param, sliced)
    if pred.kind is PredKind.IGNORED:
        claim_fails = used
        holds_under = ignored_conditions(pred.param, m)
        failure = f"{pred.param} is used under {print_constraint(condition)}"
    else:
        claim_fails = not used
        holds_under = used_conditions(pred.param, m)
        failure = f"{pred.param} is not used under {print_constraint(condition)}"

    if claim_fails:
        return Verdict(
            status=Status.INCONSISTENT,
            kind=InconsistencyKind.INCORRECTNESS,
            evidence=[failure],
            constraint=print_constraint(c),
        )

    uncovered = [b for b in holds_under if not _covered(b, condition, m)]
    if uncovered:
        return Verdict(
            status=Status.INCONSISTENT,
            kind=InconsistencyKind.INCOMPLETENESS,
            evidence=[print_constraint(b) for b in uncovered],
            constraint=print_constraint(c),
        )
    return Verdict(status=Status.CONSISTENT, constraint=print_constraint(c))


def _sort_key(verdict: Verdict) -> Tuple[bool, float]:
    if verdict.mu is not None:
        mu = verdict.mu
    else:
        mu = 0.0 if verdict.status is Status.INCONSISTENT else 1.0
    return verdict.status is Status.UNRESOLVED, mu


def classify(verdicts: Sequence[Verdict]) -> ReportSummary:
    """Count verdicts and order them most suspicious first"""
    ordered = sorted(verdicts, key=_sort_key)
    return ReportSummary(
        total=len(ordered),
        consistent=sum(v.status is Status.CONSISTENT for v in ordered),
        inconsistent=sum(v.status is Status.INCONSISTENT for v in ordered),
        unresolved=sum(v.status is Status.UNRESOLVED for v in ordered),
        incorrectness=sum(v.kind is InconsistencyKind.INCORRECTNESS for v in ordered),
        incompleteness=sum(v.kind is InconsistencyKind.INCOMPLETENESS for v in ordered),
        verdicts=ordered,
    )


def check_constraint(c: Constraint, m: FunctionModel, cfg: CheckConfig) -> Verdict:
    """Route a parsed constraint to the matching check"""
    m = normalize_function(m)
    if has_fuzzy(c):
        if not cfg.fuzzy_enabled:
            return _unresolved(c, "usage predicates are only checked in fuzzy mode")
        return check_usage_predicate(c, m)

    paths = enumerate_paths(m, cfg.max_paths)
    if paths.truncated:
        logger.warning(f"Path enumeration of {m.name} stopped at {cfg.max_paths} paths")
    if cfg.fuzzy_enabled:
        return check_fuzzy(c, list(paths), cfg, m.string_table)
    return check_crisp(c, list(paths), cfg.relevance_filter, m.string_table)


def check_record(record: CorpusRecord, cfg: CheckConfig) -> Verdict:
    """
    Run the whole check for one corpus record.

    Analysis errors never escape: they become Unresolved verdicts carrying
    the error text as the reason.
    """
    context = {
        "function": record.owner,
        "file_path": record.file_path,
        "record_id": record.record_id,
        "doc_text": record.doc_text,
    }
    if record.mismatch_note:
        verdict = _unresolved(None, f"checked in a called function: {record.mismatch_note}")
        return verdict.model_copy(update={**context, "constraint": record.constraint_text})
    if not record.constraint_text.strip():
        verdict = _unresolved(None, "no constraint text")
        return verdict.model_copy(update=context)

    try:
        c = parse_constraint(record.constraint_text)
        m = load_function(record.code_source, record.param_types)
        verdict = check_constraint(c, m, cfg)
    except CdiError as e:
        logger.debug(f"Record {record.record_id} unresolved: {e}")
        verdict = _unresolved(None, str(e)).model_copy(update={"constraint": record.constraint_text})
    return verdict.model_copy(update=context)
