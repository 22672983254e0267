from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfaforge.cfa import Edge, assign, assume, cfg_to_cfa, havoc
from cfaforge.errors import RefinementStuck
from cfaforge.frontend import ast as A
from cfaforge.interpreter import ASSERT_FAILED, KeyedHavoc, interpret
from cfaforge.pipeline import replay_witness
from cfaforge.slicer import BACKWARD, THIN, extract_criteria, make_slice
from cfaforge.verifier import (BFS, DFS, Counterexample, Limits, Precision, abstract_post, check_cfa,
                               check_feasibility, derive_predicates, explore, forall, path_formula,
                               simplify)

from conftest import build, expr
from progen import generate_program

INT = {"x": A.INT, "i": A.INT}


def _precision(*texts):
    p = Precision()
    for t in texts:
        p.add(expr(t))
    return p


def _path(*ops):
    return [Edge(k, op, k + 1) for k, op in enumerate(ops)]


def test_abstract_post_examples():
    one = A.IntLit(1, A.INT)
    assert abstract_post((None,), assign("x", one), _precision("x > 0")) == (True,)
    assert abstract_post((True,), havoc("x"), _precision("x > 0")) == (None,)
    assert abstract_post((True,), assume(expr("i == 0")), _precision("i != 0")) is None
    assert abstract_post((None,), assume(expr("i == 0")), _precision("i != 0")) == (False,)


def test_precision_deduplicates():
    p = _precision("x > 0", "0 < x", "x >= 1")
    assert len(p) <= 2 and not p.add(expr("x > 0"))
    assert not p.add(A.BoolLit(True, A.BOOL))


def test_explore_assert_false():
    cfa = cfg_to_cfa(build("int main(){ assert(false); return 0; }"))
    result = explore(cfa, Precision())
    assert result.counterexample is not None and result.counterexample[-1].dst == cfa.error


def test_explore_proves_with_the_right_predicate():
    cfa = cfg_to_cfa(build("int main(){ int x = 1; assert(x == 1); return 0; }"))
    assert explore(cfa, Precision()).counterexample is not None
    assert explore(cfa, _precision("x == 1")).counterexample is None


def test_path_formula_versions():
    conj, versions = path_formula([assign("x", A.IntLit(0, A.INT)), havoc("x"), assume(expr("x > 0"))], INT)
    assert [str(c) for c in conj] == ["x#1 == 0", "true", "x#2 > 0"]
    assert versions[-1] == {"x": 2}


def test_feasibility_examples():
    feasible = check_feasibility(_path(assume(A.BoolLit(True, A.BOOL))), INT)
    assert feasible.feasible is True
    loop_exit = _path(assign("i", A.IntLit(0, A.INT)), assume(expr("i >= 11")), assume(expr("i == 0")))
    cex = check_feasibility(loop_exit, INT)
    assert (cex.feasible, cex.failure_index) == (False, 2)
    contradiction = _path(havoc("x"), assume(expr("x > 0")), assume(expr("x < 0")))
    cex = check_feasibility(contradiction, INT)
    assert (cex.feasible, cex.failure_index) == (False, 3)


def test_feasible_path_records_inputs():
    path = [Edge(0, havoc("x"), 1, node=5), Edge(1, assume(expr("x > 41 && x < 43")), 2, node=6)]
    cex = check_feasibility(path, INT)
    assert cex.feasible and cex.havoc_values == {(5, 0): 42}


def test_wraparound_divergence_is_not_feasible():
    path = _path(havoc("x"), assume(expr("x > 2147483646")), assign("x", expr("x + 1 > 0").left),
                 assume(expr("x > 2147483647")))
    assert check_feasibility(path, INT).feasible is None


def test_derive_predicates():
    cex = check_feasibility(_path(assign("x", A.IntLit(0, A.INT)), assume(expr("x != 0"))), INT)
    found = derive_predicates(cex, INT)
    assert [str(p) for p in found] == ["x == 0"]
    known = Precision()
    for p in found:
        known.add(p)
    with pytest.raises(RefinementStuck):
        derive_predicates(cex, INT, known)
    with pytest.raises(ValueError):
        derive_predicates(Counterexample([]), INT)


def test_forall_projection():
    q = expr("x > 0 || y > 3")
    assert str(simplify(forall("x", A.INT, q))) == "y > 3"
    assert forall("z", A.INT, q) == q


@pytest.fixture
def fig1(fig1_source):
    return build(fig1_source)


def test_fig1_backward_slice_refines_to_safe(fig1):
    cfa = cfg_to_cfa(make_slice(BACKWARD, fig1, extract_criteria(fig1)[0]).cfg)
    first = explore(cfa, Precision())
    cex = check_feasibility(first.counterexample, cfa)
    assert cex.feasible is False
    assert [str(p) for p in derive_predicates(cex, cfa.var_types)] == ["i < 11"]
    verdict = check_cfa(cfa)
    assert verdict.safe is True and verdict.iterations == 2 and verdict.reason == "fixpoint"


@pytest.mark.parametrize("search", [BFS, DFS])
def test_fig1_asserts_are_safe(fig1, search):
    for crit in extract_criteria(fig1):
        assert check_cfa(cfg_to_cfa(make_slice(BACKWARD, fig1, crit).cfg), search).safe is True


def test_fig1_whole_program_is_safe(fig1):
    assert check_cfa(cfg_to_cfa(fig1)).safe is True


def test_thin_slice_witness_crosses_a_predicate(fig1):
    verdict = check_cfa(cfg_to_cfa(make_slice(THIN, fig1, extract_criteria(fig1)[0]).cfg))
    assert verdict.safe is False and verdict.witness.phi_edges()


def test_assert_false_is_unsafe():
    verdict = check_cfa(cfg_to_cfa(build("int main(){ assert(false); return 0; }")))
    assert verdict.safe is False and verdict.witness.feasible


def test_limits_give_unknown(fig1):
    cfa = cfg_to_cfa(fig1)
    assert check_cfa(cfa, limits=Limits(max_iterations=1)).safe is None
    assert check_cfa(cfa, limits=Limits(max_arg_nodes=3)).safe is None


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_verdicts_agree_with_execution(seed):
    cfg = build(generate_program(seed))
    for crit in extract_criteria(cfg)[:2]:
        sliced = make_slice(BACKWARD, cfg, crit).cfg
        verdict = check_cfa(cfg_to_cfa(sliced), limits=Limits(timeout_s=5))
        if verdict.safe is False:
            trace = replay_witness(sliced, verdict.witness)
            assert trace.status == ASSERT_FAILED and trace.error_node == crit.instruction
        elif verdict.safe:
            for k in range(30):
                trace = interpret(sliced, KeyedHavoc(k))
                assert not (trace.status == ASSERT_FAILED and trace.error_node == crit.instruction)
