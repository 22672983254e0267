from __future__ import annotations

import shutil
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfaforge.errors import ExternalSolverError
from cfaforge.frontend import ast as A
from cfaforge.semantics import eval_expr
from cfaforge.solver import SAT, UNKNOWN, UNSAT, Solver, encode, solve, solve_external, to_smtlib

from conftest import expr
from progen import generate_formula, solver_violations

Z3 = shutil.which("z3")
needs_z3 = pytest.mark.skipif(Z3 is None, reason="z3 not installed")


def test_simple_sat():
    v = solve(expr("x > 0 && x < 2"))
    assert v.status == SAT and v.model == {"x": 1}


def test_integer_tightening():
    assert solve(expr("x > 0 && x < 1")).status == UNSAT
    assert solve(expr("2 * x == 1")).status == UNSAT
    assert solve(expr("3 * x + 3 * y == 6 && x > 5 && y > -5")).status == SAT
    assert solve(expr("3 * x + 3 * y == 6 && x > 5 && y > -4")).status == UNSAT


def test_core():
    parts = [expr("b || x >= 5"), expr("!b"), expr("x <= 3")]
    v = solve(parts, want_core=True)
    assert v.status == UNSAT and len(v.core) == 3
    v = solve([expr("y == 1"), expr("x > 3"), expr("x < 2")], want_core=True)
    assert [str(c) for c in v.core] == ["x > 3", "x < 2"]
    assert solve(v.core).status == UNSAT


def test_true_and_false():
    v = solve(A.BoolLit(True, A.BOOL))
    assert v.status == SAT and v.model == {}
    assert solve(A.BoolLit(False, A.BOOL)).status == UNSAT


def test_booleans_and_disequalities():
    v = solve(expr("(p == q) && p && x != 0 && x != 1 && x >= 0 && x <= 2"))
    assert v.status == SAT and v.model == {"p": True, "q": True, "x": 2}
    assert solve(expr("x != x")).status == UNSAT


def test_division_and_modulo():
    v = solve(expr("x / 3 == 2 && x % 3 == 1"))
    assert v.status == SAT and v.model["x"] == 7
    assert solve(expr("x % 2 == 1 && 2 * y == x")).status == UNSAT


def test_nonlinear_is_sat_or_unknown():
    v = solve(expr("x * y == 6 && x > 1 && y > 1"))
    assert v.status in (SAT, UNKNOWN)
    if v.sat:
        assert v.model["x"] * v.model["y"] == 6


def test_models_hold_under_evaluation():
    f = expr("x + 2 * y > 7 && x - y <= 1 && (z == x || z == y) && z > 3")
    v = solve(f)
    assert v.sat and eval_expr(f, v.model, wrapping=False)


def test_memoizing_solver():
    s = Solver(command=None)
    f = [expr("x > 0"), expr("x < 0")]
    assert s.check(f).unsat and s.check(f).unsat and s.calls == 1
    assert s.is_sat(expr("x > 0")) is True


def test_smtlib_text():
    text = to_smtlib(encode([expr("x > 0 && b")]))
    assert "(set-logic QF_LIA)" in text and "(declare-fun |x| () Int)" in text
    assert "(check-sat)" in text


def test_malformed_endpoint():
    with pytest.raises(ExternalSolverError):
        solve_external(expr("x > 0"), "/nonexistent/solver-binary")
    with pytest.raises(ExternalSolverError):
        solve_external(expr("x > 0"), [sys.executable, "-c", "print('maybe')"])


def test_fallback_on_broken_endpoint():
    s = Solver(command=[sys.executable, "-c", "print('(((')"])
    assert s.check(expr("x > 0 && x < 2")).sat and s.fallbacks == 1


@needs_z3
def test_external_agrees():
    for f in ("x > 0 && x < 2", "x > 0 && x < 1", "b && !b", "x / 3 == 2 && x % 3 == 1"):
        ours, theirs = solve(expr(f)), solve_external(expr(f), f"{Z3} -in")
        assert ours.status == theirs.status
    assert solve_external(A.BoolLit(True, A.BOOL), f"{Z3} -in").model == {}


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=10**7))
def test_agrees_with_enumeration(seed):
    assert solver_violations(generate_formula(seed)) == []
