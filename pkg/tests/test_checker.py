import pytest

from cdicheck.checker import (
    check_constraint,
    check_crisp,
    check_record,
    check_usage_predicate,
    classify,
    split_usage_constraint,
)
from cdicheck.code_model import load_function
from cdicheck.configs import CheckConfig, FclConfig
from cdicheck.constraint_lang import TRUE, FuzzyPred, PredKind, atom, parse_constraint
from cdicheck.corpus import mutate
from cdicheck.models import InconsistencyKind, Membership, MutationPattern, Status, Verdict
from cdicheck.paths import enumerate_paths

from conftest import (
    AUTOREG_BUG,
    AUTOREG_FIXED,
    AUTOREG_INIT,
    AUTOREG_TYPES,
    FIT_SAMPLE_WEIGHT,
    GUARDS,
    LARS_BUG,
    LARS_FIXED,
    LARS_PATH,
    SPECTRAL_BUG,
    SPECTRAL_FIT,
    SPECTRAL_FIXED,
)

CRISP = CheckConfig(fuzzy_enabled=False)
FUZZY = CheckConfig(fuzzy_enabled=True)

TYPO = '(sample_weight != None) -> (stratgy != "uniform")'


def check(text, source, cfg, param_types=None):
    return check_constraint(parse_constraint(text), load_function(source, param_types), cfg)


@pytest.mark.parametrize("cfg", [CRISP, FUZZY])
def test_trend_and_seasonal_misuse_of_conjunction(cfg):
    verdict = check(AUTOREG_BUG, AUTOREG_INIT, cfg, AUTOREG_TYPES)
    assert verdict.status is Status.INCONSISTENT
    assert verdict.kind is InconsistencyKind.INCORRECTNESS
    assert verdict.evidence == ['path 0 [ErrorEnd] (deterministic != None) ^ (trend != "n")']

    verdict = check(AUTOREG_FIXED, AUTOREG_INIT, cfg, AUTOREG_TYPES)
    assert verdict.status is Status.CONSISTENT
    assert verdict.membership.value == 1.0


def test_ignored_parameter_documented_for_one_branch_only():
    verdict = check(SPECTRAL_BUG, SPECTRAL_FIT, FUZZY)
    assert verdict.status is Status.INCONSISTENT
    assert verdict.kind is InconsistencyKind.INCOMPLETENESS
    assert verdict.evidence == [
        '(affinity = "precomputed_nearest_neighbors")',
        '(affinity = "precomputed")',
    ]
    assert check(SPECTRAL_FIXED, SPECTRAL_FIT, FUZZY).status is Status.CONSISTENT


def test_usage_predicates_need_fuzzy_mode():
    verdict = check(SPECTRAL_BUG, SPECTRAL_FIT, CRISP)
    assert verdict.status is Status.UNRESOLVED


def test_ignored_claim_contradicted_by_use():
    verdict = check('(affinity = "rbf") -> ignore(gamma)', SPECTRAL_FIT, FUZZY)
    assert verdict.status is Status.INCONSISTENT
    assert verdict.kind is InconsistencyKind.INCORRECTNESS
    assert verdict.evidence == ['gamma is used under (affinity = "rbf")']


def test_specified_claim():
    source = SPECTRAL_FIT
    verdict = check(
        '((affinity = "nearest_neighbors") v (affinity = "precomputed_nearest_neighbors")) -> specified(n_neighbors)',
        source,
        FUZZY,
    )
    assert verdict.status is Status.CONSISTENT
    verdict = check('(affinity = "precomputed") -> specified(n_neighbors)', source, FUZZY)
    assert verdict.kind is InconsistencyKind.INCORRECTNESS


@pytest.mark.parametrize("cfg", [CRISP, FUZZY])
def test_gram_required_when_x_is_none(cfg):
    verdict = check(LARS_BUG, LARS_PATH, cfg)
    assert verdict.status is Status.INCONSISTENT
    assert verdict.kind is InconsistencyKind.INCORRECTNESS
    assert check(LARS_FIXED, LARS_PATH, cfg).status is Status.CONSISTENT


def test_typo_is_tolerated_in_fuzzy_mode_only():
    fuzzy = check(TYPO, FIT_SAMPLE_WEIGHT, FUZZY)
    assert fuzzy.status is Status.CONSISTENT
    assert fuzzy.mu == pytest.approx(0.9536, abs=1e-3)
    assert fuzzy.evidence == []

    crisp = check(TYPO, FIT_SAMPLE_WEIGHT, CRISP)
    assert crisp.status is Status.INCONSISTENT


def test_threshold_decides_fuzzy_verdicts():
    strict = CheckConfig(fcl=FclConfig(tau=0.99))
    verdict = check(TYPO, FIT_SAMPLE_WEIGHT, strict)
    assert verdict.status is Status.INCONSISTENT
    assert len(verdict.evidence) == 3
    assert "rho=" in verdict.evidence[0]


def test_crisp_relevance_filter():
    paths = list(enumerate_paths(load_function(LARS_PATH)))
    c = parse_constraint("(verbose > 0)")
    assert check_crisp(c, paths).status is Status.UNRESOLVED
    unfiltered = check_crisp(c, paths, relevance_filter=False)
    assert unfiltered.status is Status.INCONSISTENT
    with pytest.raises(ValueError):
        check_crisp(FuzzyPred(PredKind.IGNORED, "X"), paths)


def test_split_usage_constraint():
    gamma = FuzzyPred(PredKind.IGNORED, "gamma")
    assert split_usage_constraint(gamma) == (TRUE, gamma)
    assert split_usage_constraint(parse_constraint("!ignore(gamma)")) == (
        TRUE,
        FuzzyPred(PredKind.SPECIFIED, "gamma"),
    )
    assert split_usage_constraint(parse_constraint("(a = 1) -> ignore(gamma)")) == (atom("a", "=", 1), gamma)
    assert split_usage_constraint(parse_constraint("(a = 1) v ignore(gamma)")) == (atom("a", "!=", 1), gamma)
    assert split_usage_constraint(parse_constraint("ignore(a) ^ ignore(gamma)")) is None


def test_usage_predicate_on_unknown_parameter():
    verdict = check_usage_predicate(parse_constraint("ignore(nope)"), load_function(SPECTRAL_FIT))
    assert verdict.status is Status.UNRESOLVED
    assert "nope" in verdict.reason


def test_unconditional_ignore():
    m = load_function("def f(a, b):\n    return a\n")
    assert check_usage_predicate(parse_constraint("ignore(b)"), m).status is Status.CONSISTENT
    assert check_usage_predicate(parse_constraint("ignore(a)"), m).kind is InconsistencyKind.INCORRECTNESS


def test_check_record_reports_golden_corpus(golden_records, corrected_records):
    verdicts = [check_record(r, FUZZY) for r in golden_records]
    assert [v.status for v in verdicts] == [Status.INCONSISTENT] * 3
    assert [v.kind for v in verdicts] == [
        InconsistencyKind.INCORRECTNESS,
        InconsistencyKind.INCOMPLETENESS,
        InconsistencyKind.INCORRECTNESS,
    ]
    assert verdicts[0].record_id == "autoreg"
    assert verdicts[0].function == "autoreg.AutoReg.__init__"
    assert verdicts[1].doc_text == "Ignored for affinity='nearest_neighbors'."

    assert [check_record(r, FUZZY).status for r in corrected_records] == [Status.CONSISTENT] * 3


def test_check_record_turns_errors_into_unresolved(golden_records):
    broken = golden_records[0].model_copy(update={"constraint_text": "(x = "})
    verdict = check_record(broken, FUZZY)
    assert verdict.status is Status.UNRESOLVED
    assert "offset" in verdict.reason
    assert verdict.constraint == "(x = "

    unsupported = golden_records[0].model_copy(update={"code_source": "def f(a):\n    for x in a:\n        pass\n"})
    assert "loop" in check_record(unsupported, FUZZY).reason

    empty = golden_records[0].model_copy(update={"constraint_text": ""})
    assert check_record(empty, FUZZY).reason == "no constraint text"

    deferred = golden_records[0].model_copy(update={"mismatch_note": "checked in _fit"})
    assert check_record(deferred, FUZZY).status is Status.UNRESOLVED


def test_consistent_guards_in_both_modes(guards):
    for record in guards:
        assert check_record(record, CRISP).status is Status.CONSISTENT, record.record_id
        assert check_record(record, FUZZY).status is Status.CONSISTENT, record.record_id


def test_classify_orders_most_suspicious_first():
    verdicts = [
        Verdict(status=Status.CONSISTENT, membership=Membership(value=0.9)),
        Verdict(status=Status.UNRESOLVED, reason="no relevant paths"),
        Verdict(status=Status.INCONSISTENT, kind=InconsistencyKind.INCOMPLETENESS),
        Verdict(status=Status.INCONSISTENT, kind=InconsistencyKind.INCORRECTNESS, membership=Membership(value=0.3)),
    ]
    summary = classify(verdicts)
    assert (summary.total, summary.consistent, summary.inconsistent, summary.unresolved) == (4, 1, 2, 1)
    assert (summary.incorrectness, summary.incompleteness) == (1, 1)
    assert [v.status for v in summary.verdicts] == [
        Status.INCONSISTENT,
        Status.INCONSISTENT,
        Status.CONSISTENT,
        Status.UNRESOLVED,
    ]
    assert summary.verdicts[0].kind is InconsistencyKind.INCOMPLETENESS


def misspell(name: str) -> str:
    replacement = "q" if name[2] == "x" else "x"
    return name[:2] + replacement + name[3:]


def test_one_character_typos(guards):
    crisp, fuzzy = [], []
    for record, (first, *_rest) in zip(guards, GUARDS):
        typo = record.model_copy(update={"constraint_text": record.constraint_text.replace(first, misspell(first), 1)})
        crisp.append(check_record(typo, CRISP).status)
        fuzzy.append(check_record(typo, FUZZY).status)
    assert crisp == [Status.INCONSISTENT] * len(GUARDS)
    assert sum(s is Status.CONSISTENT for s in fuzzy) >= 18


@pytest.mark.parametrize("cfg", [CRISP, FUZZY])
def test_logic_change_is_reported(guards, cfg):
    for record in guards[:8]:
        mutant = mutate(record, MutationPattern.LOGIC_CHANGE, seed=1)
        assert mutant.constraint_text != record.constraint_text
        verdict = check_record(mutant, cfg)
        assert verdict.status is Status.INCONSISTENT, mutant.constraint_text
