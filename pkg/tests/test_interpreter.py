from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from cfaforge.interpreter import (ASSERT_FAILED, DIVISION_BY_ZERO, EXIT, MAX_STEPS, KeyedHavoc,
                                  interpret)
from cfaforge.semantics import INT_MAX, INT_MIN, c_div, c_mod, wrap

from conftest import build, node


def test_fig1_runs_to_exit(fig1_source):
    cfg = build(fig1_source)
    trace = interpret(cfg, record_stores=True)
    assert trace.status == EXIT and not trace.failed
    assert trace.final_store == {"i": 11, "sum": 55}
    assert [ok for _, ok in trace.assert_outcomes] == [True, True]
    assert len(trace.stores) == len(trace.steps)


def test_havoc_stream_is_consumed_in_order():
    cfg = build("int main(){ int x = __VERIFIER_nondet_int(); int y = __VERIFIER_nondet_int();"
                " assert(x != y); return 0; }")
    assert interpret(cfg, [3, 4]).status == EXIT
    trace = interpret(cfg, [5, 5])
    assert trace.status == ASSERT_FAILED and trace.error_node == node(cfg, "assert(x != y)")
    assert interpret(cfg, []).havocs_used == 2  # exhausted streams yield 0


def test_keep_going_after_failure():
    cfg = build("int main(){ assert(false); int x = 1; assert(x == 1); return 0; }")
    trace = interpret(cfg, stop_on_fail=False)
    assert trace.status == EXIT and [ok for _, ok in trace.assert_outcomes] == [False, True]


def test_division_by_zero_and_step_cap():
    cfg = build("int main(){ int z = 0; int x = 1 / z; return 0; }")
    assert interpret(cfg).status == DIVISION_BY_ZERO
    loop = build("int main(){ int x = 0; while (true) { x = x + 1; } return 0; }")
    assert interpret(loop, max_steps=50).status == MAX_STEPS


def test_wraparound():
    cfg = build("int main(){ int x = 2147483647; x = x + 1; assert(x < 0); return 0; }")
    trace = interpret(cfg)
    assert trace.final_store["x"] == INT_MIN and not trace.failed


def test_watch_records_each_visit(fig1_source):
    cfg = build(fig1_source)
    body = node(cfg, "sum = sum + i")
    trace = interpret(cfg, watch=[body])
    assert [s["i"] for s in trace.visits(body)] == list(range(11))


def test_keyed_havoc_is_deterministic():
    a, b = KeyedHavoc(7), KeyedHavoc(7)
    keys = [(3, 0), (3, 1), ("init", "x")]
    assert [a(k) for k in keys] == [b(k) for k in keys]
    assert all(-20 <= a(k) <= 20 for k in keys)


def test_keyed_havoc_initializes_unwritten_variables():
    cfg = build("int main(){ int x; assert(x == 0); return 0; }")
    values = {interpret(cfg, KeyedHavoc(s)).final_store["x"] for s in range(30)}
    assert len(values) > 1


@given(st.integers(INT_MIN, INT_MAX), st.integers(INT_MIN, INT_MAX).filter(bool))
def test_c_division_identity(a, b):
    assert wrap(c_div(a, b) * b + c_mod(a, b)) == a
    assert abs(c_mod(a, b)) < abs(b)
    assert c_mod(a, b) == 0 or (c_mod(a, b) < 0) == (a < 0)
