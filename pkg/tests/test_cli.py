"""The command-line front end: output bytes and exit codes.

Everything runs through :func:`slsolve.cli.run` in-process with
``capsys``, so the assertions cover exactly what a shell user sees.
"""

import sys

import pytest

from slsolve.cli import main, run

SQUARE_UNSAT = """\
alphabet "ab"
str y x
x = y . y
regc (and (in y /a*|b*/) (in x /ab/))
"""

CHAR_SAT = """\
alphabet "ab"
str x
int u
regc (in x /ab/)
charc (= x[u] 'b')
"""

CYCLE = """\
alphabet "ab"
str x y
x = y
y = identity(x)
"""

UNBOUNDED = """\
alphabet "ab"
int u
intc (<= (* -1 u) -9)
"""


@pytest.fixture
def slp(tmp_path):
    def write(text: str, name: str = "problem.slp") -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


def test_solve_sat_prints_sat_and_exits_zero(slp, capsys):
    assert run(["solve", slp(CHAR_SAT)]) == 0
    assert capsys.readouterr().out == "sat\n"


def test_solve_model_lines_follow_declaration_order(slp, capsys):
    assert run(["solve", slp(CHAR_SAT), "--model"]) == 0
    assert capsys.readouterr().out == 'sat\nmodel x = "ab"\nmodel u = 2\n'


def test_solve_unsat_prints_unsat_and_exits_one(slp, capsys):
    assert run(["solve", slp(SQUARE_UNSAT)]) == 1
    assert capsys.readouterr().out == "unsat\n"


def test_solve_within_bounds_reports_the_bound(slp, capsys):
    assert run(["solve", slp(UNBOUNDED), "--int-bound", "8"]) == 3
    assert capsys.readouterr().out == "unsat-within-bounds int-bound=8\n"


def test_solve_resource_limit(slp, capsys):
    path = slp(
        'alphabet "ab"\nstr y x\nint u\nx = y . y\n'
        'u = indexof("b", x, first)\nintc (<= (* -1 u) -3)\n'
    )
    assert run(["solve", path, "--resource-limit", "20"]) == 3
    assert capsys.readouterr().out == "resource-limit\n"


def test_solve_stats_are_sorted_key_value_lines(slp, capsys):
    assert run(["solve", slp(SQUARE_UNSAT), "--stats"]) == 1
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "unsat"
    stats = lines[1:]
    assert stats == sorted(stats)
    assert all("=" in line for line in stats)
    assert any(line.startswith("membership-branches=") for line in stats)


def test_model_quoting_escapes_quote_and_backslash(slp, capsys):
    path = slp('alphabet "\\"\\\\a"\nstr x\nregc (in x /"\\\\/)\n')
    assert run(["solve", path, "--model"]) == 0
    assert capsys.readouterr().out == 'sat\nmodel x = "\\"\\\\"\n'


def test_output_is_byte_stable_across_runs(slp, capsys):
    path = slp(CHAR_SAT)
    run(["solve", path, "--model", "--stats"])
    first = capsys.readouterr()
    run(["solve", path, "--model", "--stats"])
    second = capsys.readouterr()
    assert first.out == second.out
    assert first.err == second.err == ""


# ---------------------------------------------------------------------------
# check / dimension / oracle


def test_check_straightline(slp, capsys):
    assert run(["check", slp(SQUARE_UNSAT)]) == 0
    assert capsys.readouterr().out == "straight-line\n"


def test_check_reports_the_cycle(slp, capsys):
    assert run(["check", slp(CYCLE)]) == 2
    out = capsys.readouterr().out
    assert "cycle" in out and "x -> y -> x" in out


def test_dimension_prints_the_number(slp, capsys):
    assert run(["dimension", slp(SQUARE_UNSAT)]) == 0
    assert capsys.readouterr().out == "2\n"


def test_dimension_count_constants_flag(slp, capsys):
    path = slp('alphabet "ab"\nstr y x\nx = y . "ab" . y\n')
    run(["dimension", path])
    assert capsys.readouterr().out == "2\n"
    run(["dimension", path, "--count-constants"])
    assert capsys.readouterr().out == "3\n"


def test_oracle_sat_with_model(slp, capsys):
    assert run(["oracle", slp(CHAR_SAT), "--model"]) == 0
    assert capsys.readouterr().out == 'sat\nmodel x = "ab"\nmodel u = 2\n'


def test_oracle_exhausted_exit_code(slp, capsys):
    path = slp('alphabet "ab"\nstr x\nregc (in x /aaaaa/)\n')
    assert run(["oracle", path, "--max-len", "4"]) == 3
    assert capsys.readouterr().out == "exhausted\n"
    assert run(["oracle", path, "--max-len", "5"]) == 0


# ---------------------------------------------------------------------------
# bench


def test_bench_solves_by_name(capsys):
    assert run(["bench", "ex_corrected"]) == 1
    assert capsys.readouterr().out == "unsat\n"


def test_bench_model_replays_an_attack(capsys):
    assert run(["bench", "ex_cacm", "--model"]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0] == "sat"
    assert any(line.startswith("model cat = ") for line in lines)
    assert any(line.startswith("model ci = ") for line in lines)


def test_bench_unknown_name(capsys):
    assert run(["bench", "nope"]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "unknown benchmark 'nope'" in captured.err
    assert "ex_cacm" in captured.err


# ---------------------------------------------------------------------------
# Errors


def test_parse_error_location_format(slp, capsys):
    path = slp('alphabet "ab"\nstr x\nx = )oops\n', name="bad.slp")
    assert run(["solve", path]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    assert captured.err.startswith(f"{path}:3:1: error: ")
    assert "cannot parse right-hand side" in captured.err


def test_missing_file_is_a_usage_error(tmp_path, capsys):
    path = str(tmp_path / "absent.slp")
    assert run(["solve", path]) == 2
    err = capsys.readouterr().err
    assert path in err and "No such file" in err


def test_solving_outside_the_fragment_fails_cleanly(slp, capsys):
    assert run(["solve", slp(CYCLE)]) == 2
    err = capsys.readouterr().err
    assert err == "not straight-line: definitions form a cycle: x -> y -> x\n"


def test_usage_errors_exit_two(capsys):
    assert run([]) == 2
    assert run(["solve"]) == 2
    assert run(["solve", "--bogus-flag", "x.slp"]) == 2
    capsys.readouterr()  # argparse noise, not part of the contract


def test_main_uses_process_argv(slp, monkeypatch, capsys):
    monkeypatch.setattr(sys, "argv", ["slsolve", "dimension", slp(SQUARE_UNSAT)])
    assert main() == 0
    assert capsys.readouterr().out == "2\n"
