"""The straight-line gate: unique definitions, acyclic dependencies.

Covers the canonical evaluation order, minimal failure witnesses
(shortest cycles, first multiply-defined variable), the split-count
bookkeeping behind the dimension statistic, and linear-time scaling on
a very long equation chain.
"""

import time

import pytest

from slsolve.automata import Alphabet
from slsolve.constraints import ConcatEq, Lit, Problem, TransducerEq, Var
from slsolve.straightline import (
    CyclicDefinition,
    MultiplyDefined,
    NotStraightLine,
    check_straightline,
    dimension,
    split_counts,
)
from slsolve.transducer import identity_transducer

AB = Alphabet.of("ab")
COPY = identity_transducer(AB)


def concat(lhs: str, *items: object) -> ConcatEq:
    wrapped = tuple(
        item if isinstance(item, (Var, Lit)) else Var(str(item)) for item in items
    )
    return ConcatEq(lhs, wrapped)


def test_copy_loop_is_rejected_with_its_cycle():
    problem = Problem(
        alphabet=AB,
        str_vars=("x", "y"),
        relations=(concat("x", "y"), TransducerEq("y", "copy", COPY, "x")),
    )
    with pytest.raises(CyclicDefinition) as info:
        check_straightline(problem)
    assert info.value.cycle == ("x", "y", "x")
    assert "x -> y -> x" in str(info.value)


def test_shared_input_with_concatenation_is_accepted():
    problem = Problem(
        alphabet=AB,
        str_vars=("x", "zp", "y", "z"),
        relations=(
            TransducerEq("y", "copy", COPY, "x"),
            concat("z", "y", "y", "zp"),
        ),
    )
    graph = check_straightline(problem)
    assert graph.order == ("x", "zp", "y", "z")
    assert graph.sources == ("x", "zp")
    assert graph.uses["z"] == ("y", "zp")
    assert graph.uses["y"] == ("x",)
    assert graph.is_source("x") and not graph.is_source("y")


def test_self_reference_is_a_two_step_cycle():
    problem = Problem(
        alphabet=AB, str_vars=("x", "y"), relations=(concat("x", "x", "y"),)
    )
    with pytest.raises(CyclicDefinition) as info:
        check_straightline(problem)
    assert info.value.cycle == ("x", "x")


def test_cycle_witness_is_shortest_and_deterministic():
    problem = Problem(
        alphabet=AB,
        str_vars=("w", "x", "y", "z"),
        relations=(
            concat("w", "x"),       # dead-end feeder into the loop
            concat("x", "y"),
            concat("y", "z"),
            concat("z", "x"),
        ),
    )
    with pytest.raises(CyclicDefinition) as info:
        check_straightline(problem)
    assert info.value.cycle == ("x", "y", "z", "x")


def test_double_definition_is_rejected():
    problem = Problem(
        alphabet=AB,
        str_vars=("x", "y"),
        relations=(concat("x", "y"), TransducerEq("x", "copy", COPY, "y")),
    )
    with pytest.raises(MultiplyDefined) as info:
        check_straightline(problem)
    assert info.value.var == "x"
    assert isinstance(info.value, NotStraightLine)


def test_illformed_problem_raises_plain_value_error():
    problem = Problem(alphabet=AB, str_vars=("x",), relations=(concat("x", "ghost"),))
    with pytest.raises(ValueError) as info:
        check_straightline(problem)
    assert not isinstance(info.value, NotStraightLine)
    assert "ghost" in str(info.value)


def test_order_breaks_ties_by_declaration_position():
    forward = Problem(alphabet=AB, str_vars=("a", "b"))
    backward = Problem(alphabet=AB, str_vars=("b", "a"))
    assert check_straightline(forward).order == ("a", "b")
    assert check_straightline(backward).order == ("b", "a")


def test_uses_lists_distinct_variables_in_first_occurrence_order():
    problem = Problem(
        alphabet=AB,
        str_vars=("y", "z", "x"),
        relations=(concat("x", "z", Lit("ab"), "y", "z"),),
    )
    graph = check_straightline(problem)
    assert graph.uses["x"] == ("z", "y")


# ---------------------------------------------------------------------------
# Split counts and the dimension statistic


def test_split_counts_sum_variable_occurrences():
    problem = Problem(
        alphabet=AB,
        str_vars=("y", "x", "z"),
        relations=(
            concat("x", "y", Lit("ab"), "y"),
            TransducerEq("z", "copy", COPY, "x"),
        ),
    )
    counts = split_counts(problem).counts
    assert counts == {"y": 1, "x": 2, "z": 2}
    with_literals = split_counts(problem, count_literals=True).counts
    assert with_literals == {"y": 1, "x": 3, "z": 3}


def test_dimension_is_the_largest_split_count():
    doubling = Problem(
        alphabet=AB,
        str_vars=("x0", "x1", "x2", "x3"),
        relations=(
            concat("x1", "x0", "x0"),
            concat("x2", "x1", "x1"),
            concat("x3", "x2", "x2"),
        ),
    )
    assert dimension(doubling) == 8

    problem = Problem(
        alphabet=AB,
        str_vars=("y", "x"),
        relations=(concat("x", "y", Lit("a"), Lit("b"), "y"),),
    )
    assert dimension(problem) == 2
    assert dimension(problem, count_constants=True) == 4


def test_dimension_of_variable_free_problem_is_zero():
    assert dimension(Problem(alphabet=AB, str_vars=())) == 0


def test_dimension_of_unrelated_variables_is_one():
    assert dimension(Problem(alphabet=AB, str_vars=("x", "y"))) == 1


# ---------------------------------------------------------------------------
# Scaling


def test_hundred_thousand_atom_chain_is_checked_fast():
    names = tuple(f"x{i}" for i in range(100_001))
    relations = tuple(
        concat(names[i + 1], names[i], Lit("a")) for i in range(100_000)
    )
    problem = Problem(alphabet=AB, str_vars=names, relations=relations)
    start = time.monotonic()
    graph = check_straightline(problem)
    elapsed = time.monotonic() - start
    assert graph.order == names
    assert elapsed < 1.0
