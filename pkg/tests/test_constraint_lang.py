import itertools
import random

import numpy as np
import pytest

from cdicheck.constraint_lang import (
    FALSE,
    NONE,
    TRUE,
    And,
    Atom,
    Bool,
    FuzzyPred,
    Implies,
    Not,
    Num,
    Operator,
    Or,
    PredKind,
    Str,
    Truth,
    atom,
    conjoin,
    disjoin,
    evaluate,
    has_fuzzy,
    normalize,
    operator_embedding,
    params_of,
    parse_constraint,
    print_constraint,
)
from cdicheck.errors import ConstraintSyntaxError, UnknownOperator

DOMAIN = {"x": [0, 1, 2, 3], "y": [None, "a", "b"], "flag": [True, False]}


def random_leaf(rng: random.Random):
    name = rng.choice(sorted(DOMAIN))
    if name == "x":
        return atom("x", rng.choice(list(Operator)), rng.randint(0, 3))
    if name == "y":
        return atom("y", rng.choice(["=", "!="]), rng.choice([None, "a", "b"]))
    return atom("flag", rng.choice(["=", "!="]), rng.choice([True, False]))


def random_constraint(rng: random.Random, depth: int = 3):
    if depth == 0 or rng.random() < 0.3:
        return random_leaf(rng)
    kind = rng.choice([Not, And, Or, Implies])
    if kind is Not:
        return Not(random_constraint(rng, depth - 1))
    return kind(random_constraint(rng, depth - 1), random_constraint(rng, depth - 1))


def assignments():
    names = sorted(DOMAIN)
    for values in itertools.product(*(DOMAIN[n] for n in names)):
        yield dict(zip(names, values))


def test_parse_implication_with_predicate():
    c = parse_constraint('(affinity = "nearest_neighbors") -> (ignore(gamma))')
    assert c == Implies(atom("affinity", "=", "nearest_neighbors"), FuzzyPred(PredKind.IGNORED, "gamma"))


def test_parse_bare_atom():
    assert parse_constraint("x = 1") == atom("x", "=", 1)
    assert parse_constraint("x == 1") == atom("x", "=", 1)


def test_parse_conjunction_of_values():
    c = parse_constraint('(trend != "n") ^ (seasonal != False)')
    assert c == And(atom("trend", "!=", "n"), atom("seasonal", "!=", False))
    assert isinstance(c.right.expr.value, Bool)


def test_parse_literals():
    assert parse_constraint("(x = None)").expr.value == NONE
    assert parse_constraint("(x = -2)").expr.value == Num(-2)
    assert parse_constraint("(x < 0.5)").expr.value == Num(0.5)
    assert parse_constraint("(x = 'a')").expr.value == Str("a")


def test_precedence():
    c = parse_constraint("(a = 1) ^ (b = 2) v (c = 3) -> (d = 4) -> (e = 5)")
    assert isinstance(c, Implies)
    assert isinstance(c.left, Or)
    assert isinstance(c.left.left, And)
    assert isinstance(c.right, Implies)


def test_v_is_a_name_without_spaces():
    assert parse_constraint("(v = 1)") == atom("v", "=", 1)
    assert isinstance(parse_constraint("(v = 1) v (w = 2)"), Or)


def test_predicate_spellings():
    assert parse_constraint("no_effect(gamma)") == FuzzyPred(PredKind.IGNORED, "gamma")
    assert parse_constraint("has_effect(gamma)") == FuzzyPred(PredKind.SPECIFIED, "gamma")
    assert parse_constraint("True") == TRUE
    assert parse_constraint("!False") == Not(FALSE)


def test_print_canonical():
    assert print_constraint(atom("x", "=", 1)) == "(x = 1)"
    assert print_constraint(FuzzyPred(PredKind.IGNORED, "gamma")) == "(ignore(gamma))"
    assert print_constraint(And(atom("a", "=", 1), atom("b", "=", 2))) == "((a = 1) ^ (b = 2))"
    assert print_constraint(Or(atom("a", "=", 1), Not(TRUE))) == "((a = 1) v (!(True)))"
    assert print_constraint(atom("s", "=", "nearest")) == '(s = "nearest")'


@pytest.mark.parametrize("text", ['say "hi"', "it's", "a\"b'c", "back\\slash", 'trailing\\'])
def test_string_literals_survive_printing(text):
    c = atom("s", "=", text)
    assert parse_constraint(print_constraint(c)) == c


def test_quoted_string_escapes():
    assert str(Str('a"b')) == "'a\"b'"
    assert str(Str("a\"b'c")) == '"a\\"b\'c"'
    assert parse_constraint(r"(s = 'it\'s')").expr.value == Str("it's")
    assert parse_constraint(r"(s = 'C:\path')").expr.value == Str(r"C:\path")


@pytest.mark.parametrize(
    "text,offset",
    [
        ("(x = 1", 6),
        ("(x 1)", 3),
        ("(x = 1) ^", 9),
        ("", 0),
        ('(name = "é") ^ ?', 16),
    ],
)
def test_syntax_error_offsets(text, offset):
    with pytest.raises(ConstraintSyntaxError) as info:
        parse_constraint(text)
    assert info.value.offset == offset


def test_syntax_error_lists_expected_tokens():
    with pytest.raises(ConstraintSyntaxError) as info:
        parse_constraint("(x = 1")
    assert info.value.expected == (")",)


def test_unknown_operator():
    with pytest.raises(UnknownOperator) as info:
        parse_constraint("(x => 1)")
    assert info.value.operator == "=>"
    assert info.value.offset == 3


def test_non_ascii_identifier_is_rejected():
    with pytest.raises(ConstraintSyntaxError):
        parse_constraint("(größe = 1)")


def test_normalize_pushes_negation_into_operator():
    assert normalize(Not(atom("x", "<", 3))) == atom("x", ">=", 3)
    assert normalize(Not(FuzzyPred(PredKind.IGNORED, "g"))) == FuzzyPred(PredKind.SPECIFIED, "g")


def test_normalize_de_morgan():
    c = Not(And(atom("a", "=", 1), atom("b", "<", 2)))
    assert normalize(c) == Or(atom("a", "!=", 1), atom("b", ">=", 2))
    c = Not(Implies(atom("a", "=", 1), atom("b", "<", 2)))
    assert normalize(c) == And(atom("a", "=", 1), atom("b", ">=", 2))


def test_conjoin_and_disjoin_fold_constants():
    a, b = atom("a", "=", 1), atom("b", "=", 2)
    assert conjoin([]) == TRUE
    assert disjoin([]) == FALSE
    assert conjoin([TRUE, a]) == a
    assert conjoin([a, FALSE, b]) == FALSE
    assert disjoin([a, TRUE]) == TRUE
    assert conjoin([a, b]) == And(a, b)


def test_params_of_in_order_of_appearance():
    c = parse_constraint("(b = 1) ^ (a = 2) -> ignore(b) v (c != None)")
    assert params_of(c) == ("b", "a", "c")
    assert has_fuzzy(c)
    assert not has_fuzzy(atom("a", "=", 1))


def test_evaluate_kinds_do_not_mix():
    assert evaluate(atom("x", "!=", False), {"x": None})
    assert not evaluate(atom("x", "=", 1), {"x": True})
    assert not evaluate(atom("x", "<", 3), {"x": "a"})
    assert evaluate(Truth(True), {})
    with pytest.raises(ValueError):
        evaluate(FuzzyPred(PredKind.IGNORED, "x"), {"x": 1})


@pytest.mark.parametrize(
    "op,bits",
    [
        ("<", (1, 0, 0, 1, 0)),
        (">", (1, 0, 1, 0, 0)),
        ("<=", (1, 1, 0, 1, 0)),
        (">=", (1, 1, 1, 0, 0)),
        ("=", (0, 1, 0, 0, 0)),
        ("!=", (0, 1, 0, 0, 1)),
    ],
)
def test_operator_embedding(op, bits):
    embedding = operator_embedding(op)
    assert tuple(embedding) == bits
    np.testing.assert_array_equal(embedding.vector, np.array(bits, dtype=float))


def test_print_then_parse_is_identity():
    rng = random.Random(7)
    for _ in range(500):
        c = random_constraint(rng)
        assert parse_constraint(print_constraint(c)) == c


def test_normalize_is_idempotent_and_preserves_meaning():
    rng = random.Random(11)
    points = list(assignments())
    for _ in range(300):
        c = random_constraint(rng)
        n = normalize(c)
        assert normalize(n) == n
        assert not any(isinstance(node, (Not, Implies)) for node in _nodes(n))
        for point in points:
            assert evaluate(n, point) == evaluate(c, point)


def _nodes(c):
    yield c
    if isinstance(c, Not):
        yield from _nodes(c.operand)
    elif isinstance(c, (And, Or, Implies)):
        yield from _nodes(c.left)
        yield from _nodes(c.right)


def test_atom_is_hashable():
    assert len({atom("x", "=", 1), atom("x", "=", 1), Atom(atom("x", "=", 2).expr)}) == 2
