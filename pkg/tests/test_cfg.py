from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfaforge.cfg import Kind, build_call_graph, build_cfg, inline_functions, nodes_by_line
from cfaforge.errors import MissingMainError, RecursiveCallError
from cfaforge.frontend import ast as A, load_program, parse_source
from cfaforge.interpreter import interpret

from conftest import build, labels, node
from progen import generate_program


def test_fig1_cfg(fig1_source):
    cfg = build_cfg(load_program(fig1_source), "main")
    assert labels(cfg) == {"i = 0", "sum = 0", "branch(i < 11)", "sum = sum + i", "i = i + 1",
                           "assert(i != 0)", "assert(sum != 0)"}
    assert len(cfg) == 9
    branch = node(cfg, "branch(i < 11)")
    assert cfg.succ[node(cfg, "i = i + 1")] == (branch,)
    assert cfg.succ[branch] == (node(cfg, "sum = sum + i"), node(cfg, "assert(i != 0)"))
    cfg.check()


def test_empty_function():
    cfg = build_cfg(load_program("void f() { } int main() { return 0; }"), "f")
    assert set(cfg.nodes) == {cfg.entry, cfg.exit}
    assert cfg.succ[cfg.entry] == (cfg.exit,)


def test_diamond_has_join():
    cfg = build_cfg(load_program("int main(){ int c = 0; int x = 0; if (c) x = 1; else x = 2; return 0; }"), "main")
    branch = node(cfg, "branch(c != 0)")
    t, f = cfg.succ[branch]
    assert cfg.nodes[t].label() == "x = 1" and cfg.nodes[f].label() == "x = 2"
    assert cfg.succ[t] == cfg.succ[f]
    assert cfg.nodes[cfg.succ[t][0]].kind is Kind.SKIP


def test_switch_fallthrough():
    source = """int main() { int s = __VERIFIER_nondet_int(); int x = 0;
        switch (s) { case 1: x = x + 1; case 2: x = x + 10; break; default: x = 100; }
        assert(x != 5); return 0; }"""
    cfg = build(source)
    outcomes = {}
    for s in (1, 2, 3):
        trace = interpret(cfg, [s], record_stores=True)
        outcomes[s] = trace.final_store["x"]
    assert outcomes == {1: 11, 2: 10, 3: 100}


def test_goto_continue_do_while():
    source = """int main() { int i = 0; int n = 0;
        do { i = i + 1; if (i == 2) continue; n = n + 1; } while (i < 4);
        if (n == 3) goto done; n = 99;
        done: assert(n == 3); return 0; }"""
    trace = interpret(build(source))
    assert trace.final_store["n"] == 3 and not trace.failed


def test_call_graph_fig4(fig4_source):
    graph = build_call_graph(load_program(fig4_source))
    assert sorted(set(graph.callees("main"))) == ["fn1", "fn2", "fn3"]
    assert graph.defined == {"main"}


def test_call_graph_without_calls():
    graph = build_call_graph(load_program("int main(){ return 0; }"))
    assert graph.nodes == ["main"] and graph.edges == []


def test_call_graph_recursion():
    # the parser already rejects recursion, so splice the cycle into a parsed AST
    program = parse_source("int f(){return g();} int g(){return 1;} int main(){return 0;}")
    other = parse_source("int g(){return f();} int f(){return 1;} int main(){return 0;}")
    program.function("g").body = other.function("g").body
    with pytest.raises(RecursiveCallError) as info:
        build_call_graph(program)
    assert set(info.value.cycle) == {"f", "g"}


def test_inline_twice_gives_disjoint_copies():
    program = load_program("int g(){ int t = 1; return t; } int main(){ int a = g(); int b = g(); assert(a == b); return 0; }")
    cfg = inline_functions(program)
    assert not any(ins.kind is Kind.CALL for ins in cfg.nodes.values())
    copies = [{v for v in cfg.variables() if v.endswith(f"@g{k}")} for k in (1, 2)]
    assert copies[0] and copies[1] and not copies[0] & copies[1]
    assert interpret(cfg).final_store["a"] == 1


def test_inline_extern_becomes_havoc(fig4_source):
    cfg = inline_functions(load_program(fig4_source))
    havocs = [ins for ins in cfg.nodes.values() if ins.kind is Kind.HAVOC and ins.var == "x"]
    assert havocs and all(len(h.args) == 2 for h in havocs)


def test_inline_identity_without_calls(fig1_source):
    program = load_program(fig1_source)
    assert inline_functions(program) == build_cfg(program, "main")


def test_inline_parameters_and_globals():
    source = """int g = 5;
        int add(int a, int b) { g = g + 1; return a + b; }
        int main() { int x = add(2, 3); int y = add(x, g); assert(y == 11); return 0; }"""
    trace = interpret(build(source))
    assert trace.final_store["y"] == 11 and trace.final_store["g"] == 7 and not trace.failed


def test_missing_main():
    with pytest.raises(MissingMainError):
        inline_functions(load_program("int f(){ return 0; }"))


def test_error_function_becomes_assert_false():
    cfg = build("void reach_error(); int main(){ int x = 1; if (x > 0) reach_error(); return 0; }")
    asserts = [cfg.nodes[n] for n in cfg.asserts()]
    assert len(asserts) == 1 and asserts[0].expr == A.BoolLit(False)


def test_nodes_by_line(fig1_source):
    cfg = build(fig1_source)
    assert [cfg.nodes[n].label() for n in nodes_by_line(cfg)[10]] == ["assert(i != 0)"]


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_generated_cfgs_are_normalized(seed):
    cfg = build(generate_program(seed))
    cfg.check()
    preds = cfg.preds
    assert [n for n in cfg.nodes if not preds[n]] == [cfg.entry]
    assert [n for n in cfg.nodes if not cfg.succ[n]] == [cfg.exit]
    assert not any(ins.kind is Kind.CALL for ins in cfg.nodes.values())


def test_dot_output(fig1_source):
    dot = build(fig1_source).to_dot()
    assert dot.startswith("digraph") and 'label="T"' in dot and 'label="F"' in dot
