"""Corpus files and the documentation mutation engine.

Records are stored as JSONL, one ``CorpusRecord`` per line. Mutation applies
one of eight inconsistency patterns to a record's constraint or doc text and
is fully determined by (record id, pattern, seed).
"""

import random
import re
import string
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .checker import check_record
from .code_model import load_function
from .configs import CheckConfig
from .constraint_lang import (
    COMPLEMENT,
    And,
    Atom,
    Bool,
    Constraint,
    Expression,
    FuzzyPred,
    Implies,
    NoneValue,
    NONE,
    Not,
    Num,
    Operator,
    Or,
    PredKind,
    Str,
    Truth,
    atom,
    map_leaves,
    params_of,
    parse_constraint,
    print_constraint,
)
from .errors import CdiError, CorpusParseError, InapplicablePattern
from .logger import logger
from .models import (
    CorpusRecord,
    EvaluationSummary,
    Label,
    ManifestEntry,
    MutationInfo,
    MutationPattern,
    Status,
    Validation,
    Verdict,
)
from .sat import implies

DEFAULT_MUTATIONS_PER_RECORD = 2

_SYNONYMS = {
    "must": "should",
    "ignored": "not used",
    "required": "needed",
    "if": "when",
    "only": "just",
    "raised": "emitted",
    "specified": "given",
}


# Files


def read_records(path: Union[str, Path]) -> List[CorpusRecord]:
    """
    Read a JSONL corpus.

    Raises:
        CorpusParseError: With the 1-based line number of the first bad line
    """
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(CorpusRecord.model_validate_json(line))
            except ValueError as e:
                raise CorpusParseError(number, str(e).splitlines()[0])
    return records


def write_records(records: Sequence[CorpusRecord], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(record.model_dump_json() + "\n")


def write_manifest(entries: Sequence[ManifestEntry], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for entry in entries:
            f.write(entry.model_dump_json() + "\n")


# Tree edits


def _is_leaf(c: Constraint) -> bool:
    return isinstance(c, (Atom, FuzzyPred, Truth)) or (isinstance(c, Not) and _is_leaf(c.operand))


def _count(c: Constraint, match: Callable[[Constraint], bool]) -> int:
    total = 1 if match(c) else 0
    if isinstance(c, Not):
        total += _count(c.operand, match)
    elif isinstance(c, (And, Or, Implies)):
        total += _count(c.left, match) + _count(c.right, match)
    return total


def _rewrite_nth(
    c: Constraint,
    match: Callable[[Constraint], bool],
    n: int,
    rewrite: Callable[[Constraint], Constraint],
) -> Constraint:
    """Replace the ``n``-th node (pre-order) satisfying ``match``"""
    seen = [0]

    def walk(node: Constraint) -> Constraint:
        if match(node):
            index = seen[0]
            seen[0] += 1
            if index == n:
                return rewrite(node)
        if isinstance(node, Not):
            return Not(walk(node.operand))
        if isinstance(node, (And, Or, Implies)):
            return type(node)(walk(node.left), walk(node.right))
        return node

    return walk(c)


def _pick(
    c: Constraint,
    match: Callable[[Constraint], bool],
    rng: random.Random,
    rewrite: Callable[[Constraint], Constraint],
    pattern: MutationPattern,
    reason: str,
) -> Constraint:
    total = _count(c, match)
    if total == 0:
        raise InapplicablePattern(pattern.value, reason)
    return _rewrite_nth(c, match, rng.randrange(total), rewrite)


def one_edit_variant(name: str, rng: random.Random) -> str:
    """A different identifier one insertion, deletion or substitution away"""
    letters = string.ascii_lowercase
    for _ in range(32):
        i = rng.randrange(len(name))
        kind = rng.choice(("delete", "substitute", "insert"))
        if kind == "delete" and len(name) > 1:
            candidate = name[:i] + name[i + 1 :]
        elif kind == "substitute":
            candidate = name[:i] + rng.choice(letters) + name[i + 1 :]
        else:
            candidate = name[:i] + rng.choice(letters) + name[i:]
        if candidate != name and re.fullmatch(r"[A-Za-z_]\w*", candidate):
            return candidate
    return name + rng.choice(letters)


def _scope(record: CorpusRecord, c: Constraint) -> List[str]:
    names: Dict[str, None] = dict.fromkeys(params_of(c))
    try:
        model = load_function(record.code_source, record.param_types)
        names.update(dict.fromkeys(p for p in model.params if not p.startswith("call_")))
    except CdiError:
        pass
    return list(names)


def _literals(c: Constraint, param: str) -> List:
    found = []

    def visit(leaf):
        if isinstance(leaf, Atom) and leaf.expr.param == param:
            found.append(leaf.expr.value)
        return leaf

    map_leaves(c, visit)
    return found


def _change_value(leaf: Atom, rng: random.Random) -> Atom:
    e = leaf.expr
    value = e.value
    if isinstance(value, Bool):
        changed = Bool(not value.truth)
    elif isinstance(value, Num):
        changed = Num(value.value + 1)
    else:
        changed = Str(f"{value.text}_{rng.choice(string.ascii_lowercase)}{rng.randrange(10)}")
    return Atom(Expression(e.param, e.op, changed))


def _new_atom(param: str, c: Constraint, rng: random.Random) -> Atom:
    literals = [v for v in _literals(c, param) if not isinstance(v, NoneValue)]
    if not literals:
        return atom(param, Operator.NE, NONE)
    value = rng.choice(literals)
    if isinstance(value, Num):
        return atom(param, rng.choice([Operator.LT, Operator.GT, Operator.LE, Operator.GE]), value)
    return atom(param, Operator.NE, value)


def _mutate_constraint(
    record: CorpusRecord, c: Constraint, pattern: MutationPattern, rng: random.Random
) -> Constraint:
    if pattern is MutationPattern.PARAM_NAME_CHANGE:
        def rename(leaf):
            old = leaf.param if isinstance(leaf, FuzzyPred) else leaf.expr.param
            others = [p for p in _scope(record, c) if p not in params_of(c)]
            new = rng.choice(others) if others and rng.random() < 0.5 else one_edit_variant(old, rng)
            if isinstance(leaf, FuzzyPred):
                return FuzzyPred(leaf.kind, new)
            return Atom(Expression(new, leaf.expr.op, leaf.expr.value))

        return _pick(
            c, lambda n: isinstance(n, (Atom, FuzzyPred)), rng, rename, pattern, "no parameter to rename"
        )

    if pattern is MutationPattern.VALUE_CHANGE:
        return _pick(
            c,
            lambda n: isinstance(n, Atom) and not isinstance(n.expr.value, NoneValue),
            rng,
            lambda leaf: _change_value(leaf, rng),
            pattern,
            "no literal value other than None",
        )

    if pattern is MutationPattern.LOGIC_CHANGE:
        if _count(c, lambda n: isinstance(n, (And, Or))):
            return _pick(
                c,
                lambda n: isinstance(n, (And, Or)),
                rng,
                lambda n: Or(n.left, n.right) if isinstance(n, And) else And(n.left, n.right),
                pattern,
                "",
            )
        if _count(c, lambda n: isinstance(n, Atom)):
            return _pick(
                c,
                lambda n: isinstance(n, Atom),
                rng,
                lambda n: Atom(Expression(n.expr.param, COMPLEMENT[n.expr.op], n.expr.value)),
                pattern,
                "",
            )
        return _pick(
            c,
            lambda n: isinstance(n, FuzzyPred),
            rng,
            lambda n: FuzzyPred(n.kind.flipped(), n.param),
            pattern,
            "no operator to change",
        )

    if pattern is MutationPattern.REMOVE_PARAMETER:
        def drop(node):
            sides = [side for side in ("left", "right") if _is_leaf(getattr(node, side))]
            removed = rng.choice(sides)
            return node.right if removed == "left" else node.left

        return _pick(
            c,
            lambda n: isinstance(n, (And, Or, Implies)) and (_is_leaf(n.left) or _is_leaf(n.right)),
            rng,
            drop,
            pattern,
            "constraint is a single leaf",
        )

    if pattern is MutationPattern.ADD_CONSTRAINT:
        scope = _scope(record, c)
        if not scope:
            raise InapplicablePattern(pattern.value, "no parameter in scope")
        return And(c, _new_atom(rng.choice(scope), c, rng))

    if pattern is MutationPattern.REMOVE_CONSTRAINT:
        return _pick(
            c,
            lambda n: isinstance(n, And),
            rng,
            lambda n: rng.choice([n.left, n.right]),
            pattern,
            "constraint has no conjunction",
        )

    raise ValueError(f"{pattern.value} does not act on the constraint")


def _modify_description(text: str, rng: random.Random) -> str:
    matches = [w for w in _SYNONYMS if re.search(rf"\b{w}\b", text, flags=re.IGNORECASE)]
    if not matches:
        return f"Note that {text}" if text else "Note that this is documented elsewhere."
    word = rng.choice(matches)
    return re.sub(rf"\b{word}\b", _SYNONYMS[word], text, count=1, flags=re.IGNORECASE)


def mutate(record: CorpusRecord, pattern: MutationPattern, seed: int) -> CorpusRecord:
    """
    Apply one mutation pattern to a record.

    The result depends only on (record id, pattern, seed). The mutant keeps
    the parent's label; ``run_mutate`` decides the final label.

    Raises:
        InapplicablePattern: If the pattern cannot act on this record
        ConstraintSyntaxError: If the record's constraint does not parse
    """
    pattern = MutationPattern(pattern)
    rng = random.Random(f"{seed}:{pattern.value}:{record.record_id}")
    update: Dict = {
        "record_id": f"{record.record_id}~{pattern.value}~{seed}",
        "mutation": MutationInfo(parent_id=record.record_id, pattern=pattern, seed=seed),
    }

    if pattern is MutationPattern.MISSING_DOCUMENTATION:
        update.update(constraint_text="", doc_text="", label=Label.UNKNOWN)
    elif pattern is MutationPattern.MODIFY_DESCRIPTION:
        update["doc_text"] = _modify_description(record.doc_text, rng)
    else:
        if not record.constraint_text.strip():
            raise InapplicablePattern(pattern.value, "record has no constraint")
        c = parse_constraint(record.constraint_text)
        update["constraint_text"] = print_constraint(_mutate_constraint(record, c, pattern, rng))
    return record.model_copy(update=update)


def _decidable(c: Constraint) -> Constraint:
    """Replace usage predicates by boolean atoms so the solver can compare them"""

    def lower(leaf):
        if isinstance(leaf, FuzzyPred):
            return atom(f"__ignored__{leaf.param}", Operator.EQ, leaf.kind is PredKind.IGNORED)
        return leaf

    return map_leaves(c, lower)


def validate_mutant(original: Constraint, mutant: Constraint) -> Validation:
    """
    Compare a mutant with its original by mutual implication.

    Returns:
        Equivalent when each implies the other, Weaker when only the
        original implies the mutant, Stronger for the converse and Violates
        otherwise

    Raises:
        SortMismatch: If the two constraints type a parameter differently
    """
    o, m = _decidable(original), _decidable(mutant)
    forward = implies(o, m)
    backward = implies(m, o)
    if forward and backward:
        return Validation.EQUIVALENT
    if forward:
        return Validation.WEAKER
    if backward:
        return Validation.STRONGER
    return Validation.VIOLATES


def validate_record(parent: CorpusRecord, mutant: CorpusRecord) -> Validation:
    if not mutant.constraint_text:
        return Validation.UNDECIDED
    if mutant.constraint_text == parent.constraint_text:
        return Validation.EQUIVALENT
    try:
        return validate_mutant(parse_constraint(parent.constraint_text), parse_constraint(mutant.constraint_text))
    except CdiError as e:
        logger.warning(f"Could not validate {mutant.record_id}: {e}")
        return Validation.UNDECIDED


def _label_of(verdict: Verdict) -> Label:
    if verdict.status is Status.CONSISTENT:
        return Label.CONSISTENT
    if verdict.status is Status.INCONSISTENT:
        return Label.INCONSISTENT
    return Label.UNKNOWN


def run_mutate(
    records: Sequence[CorpusRecord],
    patterns: Optional[Sequence[MutationPattern]] = None,
    seed: int = 0,
    per_record: int = DEFAULT_MUTATIONS_PER_RECORD,
    cfg: CheckConfig = CheckConfig(),
) -> Tuple[List[CorpusRecord], List[ManifestEntry]]:
    """
    Mutate every record with ``per_record`` patterns drawn from ``patterns``.

    A mutant equivalent to its parent keeps the parent's label; any other
    mutant is labelled by the checker.

    Returns:
        (mutants, manifest entries) in record order
    """
    patterns = [MutationPattern(p) for p in (patterns or list(MutationPattern))]
    mutants: List[CorpusRecord] = []
    manifest: List[ManifestEntry] = []
    for record in records:
        rng = random.Random(f"{seed}:{record.record_id}")
        chosen = rng.sample(patterns, min(per_record, len(patterns)))
        for pattern in chosen:
            try:
                mutant = mutate(record, pattern, seed)
            except InapplicablePattern as e:
                logger.warning(f"Skipping {record.record_id}: {e}")
                continue
            except CdiError as e:
                logger.warning(f"Skipping {record.record_id} for {pattern.value}: {e}")
                continue

            validation = validate_record(record, mutant)
            if validation is Validation.EQUIVALENT:
                label = record.label
            elif pattern is MutationPattern.MISSING_DOCUMENTATION:
                label = Label.UNKNOWN
            else:
                label = _label_of(check_record(mutant, cfg))
            mutant = mutant.model_copy(update={"label": label})
            mutants.append(mutant)
            manifest.append(
                ManifestEntry(
                    record_id=mutant.record_id,
                    parent_id=record.record_id,
                    pattern=pattern,
                    seed=seed,
                    validation=validation,
                    label=label,
                )
            )
    logger.info(f"Produced {len(mutants)} mutants from {len(records)} records")
    return mutants, manifest


def evaluate_corpus(records: Sequence[CorpusRecord], verdicts: Sequence[Verdict]) -> EvaluationSummary:
    """Precision and recall of Inconsistent verdicts against record labels"""
    by_id = {v.record_id: v for v in verdicts}
    summary = EvaluationSummary()
    for record in records:
        verdict = by_id.get(record.record_id)
        if verdict is None or verdict.status is Status.UNRESOLVED or record.label is Label.UNKNOWN:
            summary.unresolved += 1
            continue
        flagged = verdict.status is Status.INCONSISTENT
        actual = record.label is Label.INCONSISTENT
        if flagged and actual:
            summary.true_positives += 1
        elif flagged:
            summary.false_positives += 1
        elif actual:
            summary.false_negatives += 1
        else:
            summary.true_negatives += 1

    flagged_total = summary.true_positives + summary.false_positives
    actual_total = summary.true_positives + summary.false_negatives
    if flagged_total:
        summary.precision = summary.true_positives / flagged_total
    if actual_total:
        summary.recall = summary.true_positives / actual_total
    return summary
