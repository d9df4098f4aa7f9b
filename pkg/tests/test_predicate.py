import random

import pytest

from oracles import naive_eval
from ztpm.predicate import (
    Cmp,
    Conj,
    Disj,
    EvalContext,
    Exists,
    Lit,
    Member,
    Not,
    Path,
    PredicateSyntaxError,
    PredicateTypeError,
    evaluate,
    parse,
    to_source,
)


def test_parse_comparison_and_path():
    ast = parse("tool.pit_class >= 3 and env.human_present")
    assert ast == Conj((
        Cmp(">=", Path(("tool", "pit_class")), Lit(3)),
        Path(("env", "human_present")),
    ))


def test_parse_membership():
    ast = parse('subject.role in ["Robotic","Vision"]')
    assert ast == Member(Path(("subject", "role")), (Lit("Robotic"), Lit("Vision")))


def test_parse_error_position():
    with pytest.raises(PredicateSyntaxError) as err:
        parse("and and")
    assert err.value.line == 1
    assert err.value.col == 1
    assert str(err.value).startswith("1:1:")


def test_parse_error_unterminated_string():
    with pytest.raises(PredicateSyntaxError):
        parse('subject.id = "unfinished')


def test_trailing_garbage_rejected():
    with pytest.raises(PredicateSyntaxError):
        parse("true true")


def test_literal_true():
    assert evaluate(parse("true"), EvalContext({})) is True
    assert evaluate(parse("false"), EvalContext({})) is False


def test_human_distance_comparison():
    ctx = EvalContext({"env.human_distance_m": 0.5})
    assert evaluate(parse("env.human_distance_m < 1.0"), ctx) is True


def test_absent_paths_collapse_to_false():
    ctx = EvalContext({})
    assert evaluate(parse("exists env.human_present"), ctx) is False
    assert evaluate(parse("env.human_present"), ctx) is False
    assert evaluate(parse("params.speed > 0.1"), ctx) is False
    assert evaluate(parse('subject.role in ["Robotic"]'), ctx) is False
    # not(collapsed false) is true by the documented three-valued collapse
    assert evaluate(parse("not env.human_present"), ctx) is True


def test_type_error_on_kind_mismatch():
    ctx = EvalContext({"subject.role": "Robotic"})
    with pytest.raises(PredicateTypeError):
        evaluate(parse("subject.role > 3"), ctx)
    with pytest.raises(PredicateTypeError):
        evaluate(parse('subject.role = 3'), ctx)


def test_ordering_on_strings_rejected():
    ctx = EvalContext({"subject.role": "Robotic"})
    with pytest.raises(PredicateTypeError):
        evaluate(parse('subject.role < "Vision"'), ctx)


def test_numeric_comparison_is_exact():
    # integers compare exactly; reals compare with no tolerance band
    assert evaluate(parse("tick = 7"), EvalContext({"tick": 7})) is True
    assert evaluate(parse("tick = 7"), EvalContext({"tick": 7.0})) is True
    assert evaluate(parse("trust = 0.6"), EvalContext({"trust": 0.6})) is True
    assert evaluate(parse("trust = 0.6"), EvalContext({"trust": 0.6000000001})) is False
    assert evaluate(parse("trust >= 0.6"), EvalContext({"trust": 0.5999999999})) is False


def test_evaluation_is_pure():
    ctx = EvalContext({"trust": 0.7})
    ast = parse("trust >= 0.6")
    assert all(evaluate(ast, ctx) for _ in range(10))
    assert ctx.values == {"trust": 0.7}


def test_parentheses_and_precedence():
    ctx = EvalContext({"a": True, "b": False, "c": False})
    assert evaluate(parse("a or b and c"), ctx) is True
    assert evaluate(parse("(a or b) and c"), ctx) is False


CORPUS = [
    "true",
    "tool.pit_class >= 3 and env.human_present",
    'subject.role in ["Robotic", "Vision"]',
    "not (env.human_present or params.speed > 0.5)",
    "exists chain.depth and chain.depth <= 6",
    '(trust >= 0.6 or dual_auth) and tool.physical',
    'params.key = "mode" or params.key = "payload"',
    "params.speed <= 0.25 or params.speed > 0.9",
]


@pytest.mark.parametrize("src", CORPUS)
def test_print_parse_round_trip(src):
    ast = parse(src)
    printed = to_source(ast)
    assert parse(printed) == ast
    # canonical form is a fixpoint
    assert to_source(parse(printed)) == printed


# -- randomized AST vs naive oracle ------------------------------------------

_PATHS = ["a.x", "a.y", "b.flag", "b.mode", "trust"]


def _random_term(rng):
    roll = rng.random()
    if roll < 0.4:
        return Path(tuple(rng.choice(_PATHS).split(".")))
    if roll < 0.7:
        return Lit(rng.choice([0, 1, 3, 0.5, 2.5]))
    return Lit(rng.choice(["Robotic", "Vision", "mode"]))


def _random_cmp(rng):
    roll = rng.random()
    if roll < 0.25:
        # boolean atom
        return Path(tuple(rng.choice(["b.flag", "b.other"]).split(".")))
    if roll < 0.4:
        return Exists(Path(tuple(rng.choice(_PATHS).split("."))))
    if roll < 0.55:
        values = tuple(Lit(v) for v in rng.sample([0, 1, 3, "Robotic", "mode"], k=2))
        return Member(_random_term(rng), values)
    op = rng.choice(["=", "!=", "<", "<=", ">", ">="])
    return Cmp(op, _random_term(rng), _random_term(rng))


def _random_expr(rng, depth=0):
    roll = rng.random()
    if depth >= 2 or roll < 0.5:
        node = _random_cmp(rng)
        return Not(node) if rng.random() < 0.2 else node
    items = tuple(_random_expr(rng, depth + 1) for _ in range(rng.randint(2, 3)))
    return Conj(items) if roll < 0.75 else Disj(items)


def _random_ctx(rng):
    values = {}
    for path in _PATHS:
        if rng.random() < 0.7:
            values[path] = rng.choice([0, 1, 3, 0.5, "Robotic", "mode"])
    for path in ["b.flag", "b.other"]:
        if rng.random() < 0.7:
            values[path] = rng.random() < 0.5
    return values


def test_tokenizer_edges():
    # negative literals, deep paths, keyword-prefixed identifiers
    assert evaluate(parse("trust > -0.5"), EvalContext({"trust": 0.0})) is True
    assert evaluate(parse("a.b.c.d = 1"), EvalContext({"a.b.c.d": 1})) is True
    ctx = EvalContext({"order.state": "open", "android.ok": True})
    assert evaluate(parse('order.state = "open"'), ctx) is True
    assert evaluate(parse("android.ok"), ctx) is True
    assert evaluate(parse("x in [-1, 2]"), EvalContext({"x": -1})) is True


def test_multiline_error_positions():
    with pytest.raises(PredicateSyntaxError) as err:
        parse("trust >= 0.6\nand and")
    assert err.value.line == 2
    assert err.value.col == 5


def test_parser_never_panics_on_noise():
    # arbitrary junk must come back as a syntax error (or parse), never an
    # unhandled exception
    rng = random.Random(1965)
    alphabet = 'abz_.()[]<>=!" \n\t0123456789andorotexists-'
    for _ in range(2000):
        src = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 30)))
        try:
            parse(src)
        except PredicateSyntaxError:
            pass


def _outcome(fn, *args):
    try:
        return ("ok", fn(*args))
    except PredicateTypeError:
        return ("type-error", None)


def test_random_asts_match_naive_evaluator():
    rng = random.Random(424242)
    agreements = 0
    for _ in range(1000):
        ast = _random_expr(rng)
        values = _random_ctx(rng)
        ctx = EvalContext(values)
        expected = _outcome(naive_eval, ast, values)
        got = _outcome(evaluate, ast, ctx)
        assert got == expected
        if expected[0] == "ok":
            agreements += 1
            # printing and reparsing preserves semantics as well
            assert evaluate(parse(to_source(ast)), ctx) == expected[1]
    assert agreements > 300  # plenty of well-typed cases exercised
