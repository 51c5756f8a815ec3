"""The bounded decision layer for integer, character, index-of, and
disequality constraints.

Three angles: frozen verdicts on small hand problems (including the
sharpness of plain ``unsat`` versus ``unsat-within-bounds``), unit
checks of the match-automaton and multi-track product against brute
force, and a seeded differential sweep against the exhaustive oracle.
"""

import itertools

from slsolve.automata import Alphabet, nfa_enumerate
from slsolve.constraints import (
    And,
    CharAtom,
    CharConst,
    CharPos,
    ConcatEq,
    CountTerm,
    Disequality,
    IndexOfAtom,
    IntTerm,
    Leaf,
    LenTerm,
    LinearAtom,
    Lit,
    Not,
    Problem,
    RegAtom,
    Var,
    evaluate,
)
from slsolve.extensions import (
    _kmp_delta,
    build_tree_solution_automaton,
    default_int_bound,
)
from slsolve.oracle import OracleConfig, brute_force_solve, gen_random_problem
from slsolve.regex import regex_parse
from slsolve.solver import AcForest, solve
from slsolve.transducer import (
    erase_transducer,
    identity_transducer,
    transducer_membership,
)

AB = Alphabet.of("ab")


def reg(var: str, pattern: str) -> Leaf:
    return Leaf(RegAtom(var, regex_parse(pattern, AB), pattern))


def le(terms: tuple, bound: int) -> Leaf:
    return Leaf(LinearAtom(terms, bound))


# ---------------------------------------------------------------------------
# Hand problems: integer layer


def test_count_constraint_forces_the_empty_word():
    problem = Problem(
        alphabet=AB,
        str_vars=("x",),
        regular=reg("x", "a*"),
        integers=le(((1, CountTerm("x", "a")),), 0),
    )
    verdict = solve(problem)
    assert verdict.is_sat
    assert verdict.model == {"x": ""}


def test_length_window_on_a_square():
    problem = Problem(
        alphabet=AB,
        str_vars=("y", "x"),
        relations=(ConcatEq("x", (Var("y"), Var("y"))),),
        integers=And((le(((-1, LenTerm("x")),), -2), le(((1, LenTerm("x")),), 3))),
    )
    verdict = solve(problem)
    assert verdict.is_sat
    assert len(verdict.model["x"]) == 2  # the only even length in [2, 3]
    assert evaluate(problem, verdict.model)


def test_odd_length_square_is_plainly_unsat():
    """The refutation is definitive, not bound-limited: lengths are capped."""
    problem = Problem(
        alphabet=AB,
        str_vars=("y", "x"),
        relations=(ConcatEq("x", (Var("y"), Var("y"))),),
        integers=And((le(((-1, LenTerm("x")),), -3), le(((1, LenTerm("x")),), 3))),
    )
    assert solve(problem).status == "unsat"


def test_unbounded_integer_demand_weakens_to_within_bounds():
    problem = Problem(
        alphabet=AB,
        str_vars=(),
        int_vars=("u",),
        integers=le(((-1, IntTerm("u")),), -9),  # u >= 9
    )
    verdict = solve(problem, int_bound=8)
    assert verdict.status == "unsat-within-bounds"
    assert verdict.int_bound == 8
    raised = solve(problem, int_bound=12)
    assert raised.is_sat
    assert raised.model == {"u": 9}


def test_default_int_bound_is_reported_on_the_verdict():
    problem = Problem(
        alphabet=AB,
        str_vars=(),
        int_vars=("u",),
        integers=le(((-1, IntTerm("u")),), -100),
    )
    assert default_int_bound(problem) == 64
    verdict = solve(problem)
    assert verdict.status == "unsat-within-bounds"
    assert verdict.int_bound == 64


# ---------------------------------------------------------------------------
# Hand problems: character layer


def test_char_constraint_picks_the_position():
    problem = Problem(
        alphabet=AB,
        str_vars=("x",),
        int_vars=("u",),
        regular=reg("x", "ab"),
        chars=Leaf(CharAtom(CharPos("x", "u"), CharConst("b"))),
    )
    verdict = solve(problem)
    assert verdict.is_sat
    assert verdict.model == {"x": "ab", "u": 2}


def test_char_constraint_lands_past_a_literal_prefix():
    problem = Problem(
        alphabet=AB,
        str_vars=("y", "x"),
        relations=(ConcatEq("x", (Lit("a"), Var("y"))),),
        chars=Leaf(CharAtom(CharPos("x", 2), CharConst("b"))),
    )
    verdict = solve(problem)
    assert verdict.is_sat
    assert verdict.model["x"] == "a" + verdict.model["y"]
    assert verdict.model["y"].startswith("b")


def test_negated_char_constraint_allows_out_of_range():
    problem = Problem(
        alphabet=AB,
        str_vars=("x",),
        int_vars=("u",),
        regular=reg("x", "a"),
        chars=Not(Leaf(CharAtom(CharPos("x", "u"), CharConst("a")))),
    )
    verdict = solve(problem)
    assert verdict.is_sat
    assert evaluate(problem, verdict.model)


def test_char_equality_between_two_variables():
    problem = Problem(
        alphabet=AB,
        str_vars=("x", "y"),
        regular=And((reg("x", "ab"), reg("y", "(a|b)"))),
        chars=Leaf(CharAtom(CharPos("x", 2), CharPos("y", 1))),
    )
    verdict = solve(problem)
    assert verdict.is_sat
    assert verdict.model["y"] == "b"


# ---------------------------------------------------------------------------
# Hand problems: index-of layer


def test_indexof_in_a_literal_haystack():
    problem = Problem(
        alphabet=AB,
        str_vars=(),
        int_vars=("u",),
        indexofs=(IndexOfAtom("u", "ba", Lit("abab"), first=True),),
    )
    verdict = solve(problem)
    assert verdict.is_sat
    assert verdict.model == {"u": 2}


def test_indexof_anywhere_with_a_lower_bound():
    problem = Problem(
        alphabet=AB,
        str_vars=("x",),
        int_vars=("u",),
        regular=reg("x", "(a|b)*"),
        indexofs=(IndexOfAtom("u", "ab", Var("x"), first=False),),
        integers=le(((-1, IntTerm("u")),), -2),
    )
    verdict = solve(problem)
    assert verdict.is_sat
    assert verdict.model["u"] >= 2
    assert evaluate(problem, verdict.model)


def test_indexof_occurrence_inside_a_concatenation_literal():
    problem = Problem(
        alphabet=AB,
        str_vars=("y", "z", "x"),
        relations=(ConcatEq("x", (Var("y"), Lit("ab"), Var("z"))),),
        int_vars=("u",),
        indexofs=(IndexOfAtom("u", "ab", Var("x"), first=False),),
    )
    verdict = solve(problem)
    assert verdict.is_sat
    assert evaluate(problem, verdict.model)


def test_first_occurrence_is_pinned_down():
    # Any nonempty (ab)^k has its first "ab" at position 1; empty has
    # none, so demanding u >= 2 is unsatisfiable.  Without a length cap
    # the word can grow past every counter, so the refutation is honest
    # only up to the integer bound; adding a cap makes it definitive.
    def first_at_least_two(cap: bool) -> Problem:
        parts = [le(((-1, IntTerm("u")),), -2)]
        if cap:
            parts.append(le(((1, LenTerm("x")),), 6))
        return Problem(
            alphabet=AB,
            str_vars=("x",),
            int_vars=("u",),
            regular=reg("x", "(ab)*"),
            indexofs=(IndexOfAtom("u", "ab", Var("x"), first=True),),
            integers=parts[0] if len(parts) == 1 else And(tuple(parts)),
        )

    open_ended = solve(first_at_least_two(cap=False), int_bound=8)
    assert open_ended.status == "unsat-within-bounds"
    assert open_ended.int_bound == 8
    assert solve(first_at_least_two(cap=True), int_bound=8).status == "unsat"


def test_first_occurrence_through_a_square_stays_sharp():
    def square_first_b(y_cap: int) -> Problem:
        return Problem(
            alphabet=AB,
            str_vars=("y", "x"),
            relations=(ConcatEq("x", (Var("y"), Var("y"))),),
            int_vars=("u",),
            indexofs=(IndexOfAtom("u", "b", Var("x"), first=True),),
            integers=And(
                (
                    le(((-1, IntTerm("u")),), -3),  # u >= 3
                    le(((1, LenTerm("y")),), y_cap),
                )
            ),
        )

    # |y| <= 2 cannot push the first b to position 3 — and the solver
    # can see the length cap, so the answer is a definitive unsat.
    assert solve(square_first_b(2)).status == "unsat"
    verdict = solve(square_first_b(3))
    assert verdict.is_sat
    assert verdict.model["y"] == "aab"
    assert verdict.model["u"] == 3


# ---------------------------------------------------------------------------
# Hand problems: disequalities


def test_disequality_finds_distinct_values():
    problem = Problem(
        alphabet=AB,
        str_vars=("x", "y"),
        regular=And((reg("x", "(a|b)"), reg("y", "(a|b)"))),
        disequalities=(Disequality("x", "y"),),
    )
    verdict = solve(problem)
    assert verdict.is_sat
    assert verdict.model["x"] != verdict.model["y"]


def test_disequality_differs_by_length_alone():
    problem = Problem(
        alphabet=AB,
        str_vars=("x", "y"),
        regular=And((reg("x", "a*"), reg("y", "a*"))),
        disequalities=(Disequality("x", "y"),),
    )
    verdict = solve(problem)
    assert verdict.is_sat
    assert verdict.model["x"] != verdict.model["y"]


def test_disequality_on_singleton_languages_is_unsat():
    problem = Problem(
        alphabet=AB,
        str_vars=("x", "y"),
        regular=And((reg("x", "aa"), reg("y", "aa"))),
        disequalities=(Disequality("x", "y"),),
    )
    assert solve(problem).status == "unsat"


# ---------------------------------------------------------------------------
# Verdict plumbing


def test_resource_limit_is_reported():
    problem = Problem(
        alphabet=AB,
        str_vars=("y", "x"),
        relations=(ConcatEq("x", (Var("y"), Var("y"))),),
        int_vars=("u",),
        indexofs=(IndexOfAtom("u", "b", Var("x"), first=True),),
        integers=le(((-1, IntTerm("u")),), -3),
    )
    assert solve(problem, resource_limit=20).status == "resource-limit"


def test_extension_solves_are_deterministic():
    problem = gen_random_problem(7, with_extensions=True)
    first = solve(problem, int_bound=6)
    second = solve(problem, int_bound=6)
    assert first == second


def test_extension_stats_counters_are_reported():
    problem = Problem(
        alphabet=AB,
        str_vars=("x",),
        int_vars=("u",),
        regular=reg("x", "ab"),
        chars=Leaf(CharAtom(CharPos("x", "u"), CharConst("b"))),
    )
    stats: dict = {}
    solve(problem, stats=stats)
    for key in ("membership-branches", "forests", "scenarios", "walks", "budget-left"):
        assert key in stats
        assert isinstance(stats[key], int)


# ---------------------------------------------------------------------------
# Unit: the match automaton


def test_match_automaton_tracks_first_completion():
    """Walking the automaton finds needle completions exactly where
    Python's ``find`` says they are."""
    for needle in ["a", "ab", "aab", "abab", "bb"]:
        delta = _kmp_delta(needle, AB)
        p = len(needle)
        for n in range(7):
            for letters in itertools.product("ab", repeat=n):
                text = "".join(letters)
                q = 0
                first = None
                for i, ch in enumerate(text):
                    q = delta[q][ch]
                    if q == p and first is None:
                        first = i + 1 - p  # 0-based start of the match
                expected = text.find(needle)
                assert first == (expected if expected >= 0 else None)


def test_match_automaton_state_is_the_matched_prefix_length():
    delta = _kmp_delta("abab", AB)
    q = 0
    for ch, expect in [("a", 1), ("b", 2), ("a", 3), ("a", 1), ("b", 2)]:
        q = delta[q][ch]
        assert q == expect


# ---------------------------------------------------------------------------
# Unit: the multi-track product


def mk_forest(nodes, edges):
    order = tuple(name for name, _nfa in nodes)
    nfas = {name: nfa for name, nfa in nodes}
    children = {name: [] for name in order}
    parent = {}
    for pn, cn, machine in edges:
        children[pn].append((cn, machine))
        parent[cn] = (pn, machine)
    return AcForest(order=order, nfas=nfas, children=children, parent=parent)


def test_single_track_tuples_are_the_language():
    nfa = regex_parse("(a|bb)*", AB)
    forest = mk_forest([(("x", 0), nfa)], [])
    tuples = build_tree_solution_automaton(forest).accepted_tuples(3)
    assert tuples == {(w,) for w in nfa_enumerate(nfa, 3)}


def test_two_track_tuples_match_brute_force():
    root_lang = regex_parse("(a|b)*", AB)
    child_lang = regex_parse("b*", AB)
    machine = erase_transducer(AB, "a")
    forest = mk_forest(
        [(("x", 0), root_lang), (("y", 0), child_lang)],
        [(("x", 0), ("y", 0), machine)],
    )
    tuples = build_tree_solution_automaton(forest).accepted_tuples(3)
    expected = {
        (x, y)
        for x in nfa_enumerate(root_lang, 3)
        for y in nfa_enumerate(child_lang, 3)
        if transducer_membership(machine, x, y)
    }
    assert tuples == expected
    assert ("ab", "b") in tuples and ("ab", "ab") not in tuples


def test_branching_forest_tuples_match_brute_force():
    root_lang = regex_parse("(a|b)*", AB)
    copy_lang = regex_parse("(a|b)*", AB)
    drop_lang = regex_parse("(a|b)*", AB)
    copy = identity_transducer(AB)
    drop = erase_transducer(AB, "b")
    forest = mk_forest(
        [(("x", 0), root_lang), (("y", 0), copy_lang), (("z", 0), drop_lang)],
        [(("x", 0), ("y", 0), copy), (("x", 0), ("z", 0), drop)],
    )
    tuples = build_tree_solution_automaton(forest).accepted_tuples(2)
    expected = {
        (x, y, z)
        for x in nfa_enumerate(root_lang, 2)
        for y in nfa_enumerate(copy_lang, 2)
        for z in nfa_enumerate(drop_lang, 2)
        if transducer_membership(copy, x, y) and transducer_membership(drop, x, z)
    }
    assert tuples == expected


# ---------------------------------------------------------------------------
# Seeded differential against the oracle


def test_extended_solver_agrees_with_oracle_within_bounds():
    """Where both sides are decisive they must agree, and a bounded
    refutation must at least cover everything the bounded oracle sees."""
    config = OracleConfig(max_len=6, max_int=6)
    statuses = {"sat": 0, "unsat": 0, "unsat-within-bounds": 0}
    for seed in range(40):
        problem = gen_random_problem(seed, with_extensions=True)
        verdict = solve(problem, int_bound=6)
        assert verdict.status != "resource-limit"
        statuses[verdict.status] += 1
        witness = brute_force_solve(problem, config)
        if verdict.is_sat:
            assert evaluate(problem, verdict.model)
        else:
            # Plain unsat refutes everything; within-bounds refutes at
            # least the oracle's search space.  Either way: no witness.
            assert witness is None, f"seed {seed}: oracle found {witness}"
        if witness is not None:
            assert verdict.is_sat, f"seed {seed}: oracle sat, solver {verdict.status}"
    assert statuses["sat"] > 10 and statuses["unsat"] > 3
