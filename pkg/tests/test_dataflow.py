from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfaforge.cfg import BRANCHING, Cfg, Instruction, Kind
from cfaforge.dataflow import (Definition, build_pdg, build_ud_chains, control_dependencies,
                               post_dominator_tree, reaching_definitions)
from cfaforge.errors import NoExitPathError

from conftest import build, node
from progen import dataflow_violations, generate_cfg, generate_program


@pytest.fixture
def fig1(fig1_source):
    return build(fig1_source)


def _defs(cfg, rd_set, var):
    return {cfg.nodes[d.site].label() for d in rd_set if d.variable == var}


def test_reaching_definitions_fig1_loop_merge(fig1):
    rd = reaching_definitions(fig1)
    assert _defs(fig1, rd[node(fig1, "assert(i != 0)")], "i") == {"i = 0", "i = i + 1"}


def test_reaching_definitions_kill_and_merge():
    cfg = build("int main(){ int x = 1; x = 2; int y = x; assert(y == 2); return 0; }")
    rd = reaching_definitions(cfg)
    assert _defs(cfg, rd[node(cfg, "y = x")], "x") == {"x = 2"}
    cfg = build("int main(){ int c = __VERIFIER_nondet_int(); int x = 0; if (c) x = 1; else x = 2;"
                " int y = x; assert(y > 0); return 0; }")
    rd = reaching_definitions(cfg)
    assert _defs(cfg, rd[node(cfg, "y = x")], "x") == {"x = 1", "x = 2"}


def test_ud_chains_fig1(fig1):
    ud = build_ud_chains(fig1)
    chain = {(fig1.nodes[d.site].label(), d.variable) for d in ud[node(fig1, "sum = sum + i")]}
    assert chain == {("sum = 0", "sum"), ("sum = sum + i", "sum"), ("i = 0", "i"), ("i = i + 1", "i")}
    assert {d.variable for d in ud[node(fig1, "assert(sum != 0)")]} == {"sum"}
    assert ud[node(fig1, "i = 0")] == frozenset()


def test_uninitialized_reads_reach_entry():
    cfg = Cfg({0: Instruction(0, Kind.ENTRY), 1: Instruction(1, Kind.ASSERT, expr=_gt("x")),
               2: Instruction(2, Kind.EXIT)}, {0: (1,), 1: (2,), 2: ()}, 0, 2)
    assert build_ud_chains(cfg)[1] == frozenset({Definition(0, "x")})


def _gt(name):
    from cfaforge.frontend import ast as A
    return A.Binary(">", A.Var(name, A.INT), A.IntLit(0), A.BOOL)


def test_post_dominators():
    cfg = build("int main(){ int a = 1; int b = 2; assert(a < b); return 0; }")
    pdt = post_dominator_tree(cfg)
    a, b = node(cfg, "a = 1"), node(cfg, "b = 2")
    assert pdt.ipdom[a] == b and pdt.ipdom[cfg.exit] == cfg.exit
    cfg = build("int main(){ int c = __VERIFIER_nondet_int(); int x = 0; if (c) x = 1; else x = 2; return 0; }")
    pdt = post_dominator_tree(cfg)
    branch = node(cfg, "branch(c != 0)")
    assert cfg.nodes[pdt.ipdom[branch]].kind is Kind.SKIP


def test_post_dominators_fig1(fig1):
    pdt = post_dominator_tree(fig1)
    assert pdt.ipdom[node(fig1, "branch(i < 11)")] == node(fig1, "assert(i != 0)")
    assert all(pdt.postdominates(fig1.exit, n) for n in fig1.nodes)


def test_post_dominators_require_exit_paths():
    cfg = Cfg({0: Instruction(0, Kind.ENTRY), 1: Instruction(1, Kind.SKIP), 2: Instruction(2, Kind.EXIT)},
              {0: (1,), 1: (1,), 2: ()}, 0, 2)
    with pytest.raises(NoExitPathError):
        post_dominator_tree(cfg)


def test_control_dependence_diamond_and_straight_line():
    cfg = build("int main(){ int c = __VERIFIER_nondet_int(); int x = 0; if (c) x = 1; else x = 2; return 0; }")
    cd = control_dependencies(cfg)
    branch = node(cfg, "branch(c != 0)")
    join = post_dominator_tree(cfg).ipdom[branch]
    assert (branch, node(cfg, "x = 1")) in cd and (branch, node(cfg, "x = 2")) in cd
    assert (branch, join) not in cd
    assert control_dependencies(build("int main(){ int a = 1; assert(a == 1); return 0; }")) == set()


def test_control_dependence_fig1(fig1):
    branch = node(fig1, "branch(i < 11)")
    controlled = {t for s, t in control_dependencies(fig1) if s == branch}
    assert controlled == {node(fig1, "sum = sum + i"), node(fig1, "i = i + 1"), branch}


def test_pdg_fig1(fig1):
    pdg = build_pdg(fig1)
    from_entry = {fig1.nodes[t].label() for s, t in pdg.control_edges if s == fig1.entry}
    assert from_entry == {"i = 0", "sum = 0", "branch(i < 11)", "assert(i != 0)", "assert(sum != 0)"}
    into_assert = {fig1.nodes[s].label() for s, t in pdg.data_edges if t == node(fig1, "assert(i != 0)")}
    assert into_assert == {"i = 0", "i = i + 1"}
    assert (node(fig1, "i = 0"), node(fig1, "branch(i < 11)")) in pdg.data_edges
    assert "style=dashed" in pdg.to_dot(fig1)


def test_pdg_single_assignment():
    cfg = build("int main(){ int a = 1; return 0; }")
    pdg = build_pdg(cfg)
    assert pdg.control_edges == {(cfg.entry, node(cfg, "a = 1"))}
    assert pdg.data_edges == set()


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_pdg_consistency(seed):
    cfg = build(generate_program(seed))
    pdg = build_pdg(cfg)
    for s, t in pdg.data_edges:
        var = cfg.nodes[s].defines() if s != cfg.entry else None
        assert var is None or var in cfg.nodes[t].reads()
    for s, _ in pdg.control_edges:
        assert s == cfg.entry or cfg.nodes[s].kind in BRANCHING


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=10**7))
def test_dataflow_matches_brute_force(seed):
    cfg = generate_cfg(seed)
    if cfg is not None:
        assert dataflow_violations(cfg, seed) == []
