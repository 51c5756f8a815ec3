"""The bounded-exhaustive reference solver and the seeded instance mill.

The oracle's contract: decide by ``evaluate`` alone, enumerate in a
fixed shortest-then-lex order, and return the first in-bounds model —
so results are deterministic and stable as length bounds grow.  The
generator's contract: same seed, same instance; every instance passes
the straight-line gate and stays cheap to brute-force.
"""

import pytest

from slsolve.automata import Alphabet
from slsolve.constraints import (
    And,
    ConcatEq,
    IntTerm,
    Leaf,
    LenTerm,
    LinearAtom,
    Lit,
    Not,
    Problem,
    RegAtom,
    TransducerEq,
    Var,
    evaluate,
    problem_wellformed,
)
from slsolve.oracle import (
    OracleConfig,
    brute_force_solve,
    gen_random_problem,
    source_candidates,
)
from slsolve.regex import regex_parse
from slsolve.straightline import check_straightline
from slsolve.transducer import erase_transducer

AB = Alphabet.of("ab")


def reg(var: str, pattern: str) -> Leaf:
    return Leaf(RegAtom(var, regex_parse(pattern, AB), pattern))


def test_source_candidates_are_shortest_then_lex():
    problem = Problem(alphabet=AB, str_vars=("x",), regular=reg("x", "(bb|b|a)"))
    assert source_candidates(problem, "x", 4) == ["a", "b", "bb"]
    assert source_candidates(problem, "x", 4, limit=2) == ["a", "b"]


def test_source_candidates_respect_length_bound():
    problem = Problem(alphabet=AB, str_vars=("x",), regular=reg("x", "aaaaa"))
    assert source_candidates(problem, "x", 4) == []
    assert source_candidates(problem, "x", 5) == ["aaaaa"]


def test_oracle_returns_the_minimal_model():
    problem = Problem(alphabet=AB, str_vars=("x",), regular=reg("x", "(bb|b|a)"))
    assert brute_force_solve(problem) == {"x": "a"}
    negated = Problem(
        alphabet=AB,
        str_vars=("x",),
        regular=And((reg("x", "(bb|b|a)"), Not(reg("x", "a")))),
    )
    assert brute_force_solve(negated) == {"x": "b"}


def test_oracle_solves_through_concatenation():
    problem = Problem(
        alphabet=AB,
        str_vars=("y", "x"),
        relations=(ConcatEq("x", (Var("y"), Var("y"))),),
        regular=And((reg("y", "(a|b)*"), reg("x", "abab"))),
    )
    model = brute_force_solve(problem)
    assert model == {"y": "ab", "x": "abab"}
    assert evaluate(problem, model)


def test_oracle_solves_through_transducer_image():
    problem = Problem(
        alphabet=AB,
        str_vars=("x", "y"),
        relations=(TransducerEq("y", "dropA", erase_transducer(AB, "a"), "x"),),
        regular=And((reg("x", "(a|b)*"), reg("y", "bb"))),
    )
    model = brute_force_solve(problem)
    assert model == {"x": "bb", "y": "bb"}


def test_oracle_reports_none_when_out_of_bounds():
    problem = Problem(alphabet=AB, str_vars=("x",), regular=reg("x", "aaaaa"))
    assert brute_force_solve(problem, OracleConfig(max_len=4)) is None
    assert brute_force_solve(problem, OracleConfig(max_len=5)) == {"x": "aaaaa"}


def test_oracle_reports_none_on_truly_unsat_input():
    problem = Problem(
        alphabet=AB,
        str_vars=("x",),
        regular=And((reg("x", "a"), reg("x", "b"))),
    )
    assert brute_force_solve(problem) is None


def test_oracle_assigns_integers_from_zero_upward():
    low = Problem(
        alphabet=AB,
        str_vars=(),
        int_vars=("u",),
        integers=Leaf(LinearAtom(((1, IntTerm("u")),), 5)),
    )
    assert brute_force_solve(low) == {"u": 0}
    # -u <= -2, i.e. u >= 2: the first admissible value is taken.
    high = Problem(
        alphabet=AB,
        str_vars=(),
        int_vars=("u",),
        integers=Leaf(LinearAtom(((-1, IntTerm("u")),), -2)),
    )
    assert brute_force_solve(high) == {"u": 2}
    assert brute_force_solve(high, OracleConfig(max_int=1)) is None


def test_oracle_couples_string_and_integer_bounds():
    problem = Problem(
        alphabet=AB,
        str_vars=("x",),
        int_vars=("u",),
        regular=reg("x", "a*"),
        # u - len(x) <= 0 and -u <= -3: needs len(x) >= u >= 3.
        integers=And(
            (
                Leaf(LinearAtom(((1, IntTerm("u")), (-1, LenTerm("x"))), 0)),
                Leaf(LinearAtom(((-1, IntTerm("u")),), -3)),
            )
        ),
    )
    assert brute_force_solve(problem) == {"x": "aaa", "u": 3}


def test_oracle_is_deterministic():
    problem = gen_random_problem(5)
    config = OracleConfig(max_len=6, max_int=3)
    assert brute_force_solve(problem, config) == brute_force_solve(problem, config)


def test_first_model_is_stable_as_length_bound_grows():
    hits = 0
    for seed in range(20):
        problem = gen_random_problem(seed)
        small = brute_force_solve(problem, OracleConfig(max_len=4, max_int=2))
        if small is None:
            continue
        hits += 1
        big = brute_force_solve(problem, OracleConfig(max_len=7, max_int=2))
        assert big == small
    assert hits > 5  # the sweep must actually exercise the property


# ---------------------------------------------------------------------------
# Seeded instances


def test_generator_is_deterministic():
    assert gen_random_problem(1) == gen_random_problem(1)
    assert gen_random_problem(2, with_extensions=True) == gen_random_problem(
        2, with_extensions=True
    )


def test_generator_varies_with_the_seed():
    assert gen_random_problem(1) != gen_random_problem(2)


def test_generated_instances_are_wellformed_and_straightline():
    for seed in range(100):
        problem = gen_random_problem(seed)
        assert problem_wellformed(problem) == []
        check_straightline(problem)  # must not raise


def test_generated_extension_instances_use_the_extensions():
    for seed in range(20):
        problem = gen_random_problem(seed, with_extensions=True)
        assert problem.has_extensions
        assert problem.int_vars
        check_straightline(problem)


def test_oracle_models_satisfy_evaluate_on_seeded_instances():
    config = OracleConfig(max_len=6, max_int=4)
    solved = 0
    for seed in range(25):
        problem = gen_random_problem(seed, with_extensions=True)
        model = brute_force_solve(problem, config)
        if model is not None:
            solved += 1
            assert evaluate(problem, model)
    assert solved > 5
