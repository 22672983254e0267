from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cfaforge.interpreter import ASSERT_FAILED
from cfaforge.pipeline import (HEADER, RunConfig, SliceReport, aggregate, all_configs, emit_metrics,
                               expected_rows, prepare, read_metrics, replay_witness, run_pipeline,
                               run_source)

from conftest import DATA


def test_config_round_trip():
    config = RunConfig.parse("VFD")
    assert (config.slicer, config.optimizations, config.search) == ("value", False, "dfs")
    assert str(config) == "VFD"
    assert {c.abbreviation for c in all_configs()} == {
        s + o + q for s in "NBTV" for o in "FT" for q in "BD"}
    for bad in ("XFD", "VF", "VXB"):
        with pytest.raises(ValueError):
            RunConfig.parse(bad)
    with pytest.raises(ValueError):
        RunConfig(slicer="forward")


@given(st.sampled_from("NBTV"), st.sampled_from("TF"), st.sampled_from("BD"))
def test_every_code_round_trips(s, o, q):
    assert RunConfig.parse(s + o + q).abbreviation == s + o + q


def test_fig1_bfd(fig1_source):
    reports = run_source(fig1_source, RunConfig.parse("BFD"), "fig1.c")
    assert [(r.slice_no, r.safe) for r in reports] == [(1, True), (2, True)]
    assert all(r.end_locs == r.init_locs and r.end_edges == r.init_edges for r in reports)
    assert aggregate(reports) is True


def test_no_slicing_gives_one_report(fig1_source):
    reports = run_source(fig1_source, RunConfig.parse("NFB"), "fig1.c")
    assert len(reports) == 1 and reports[0].slice_no == 0 and reports[0].safe is True


def test_thin_slice_is_refined_until_safe(fig1_source):
    (first, _) = run_source(fig1_source, RunConfig.parse("TFB"), "fig1.c")
    assert first.safe is True and first.refinements >= 1
    assert first.end_locs >= first.init_locs


def test_unsafe_witness_replays():
    source = """int main() { int x = __VERIFIER_nondet_int(); int y = 0;
        if (x > 40) { y = x - 40; } assert(y != 2); return 0; }"""
    for code in ("BFB", "TFD", "VTB", "NFD"):
        (report,) = run_source(source, RunConfig.parse(code))
        assert report.safe is False and report.witness
        trace = replay_witness(prepare(source, report.optimizations).cfg, report.counterexample)
        assert trace.status == ASSERT_FAILED


def test_optimizer_removed_assert_is_safe():
    source = "int main(){ int x = 0; if (x > 1) { assert(false); } assert(x == 0); return 0; }"
    reports = run_source(source, RunConfig.parse("BTB"))
    assert [r.safe for r in reports] == [True, True]
    assert reports[0].reason == "assertion unreachable after optimization"
    assert prepare(source, True).units == 2


def test_run_pipeline_names_the_file(tmp_path, fig1_source):
    path = tmp_path / "prog.c"
    path.write_text(fig1_source)
    reports = run_pipeline(path, RunConfig.parse("BFB"), name="dir/prog.c")
    assert [r.slice_id for r in reports] == ["dir/prog.c#1", "dir/prog.c#2"]


def test_parallel_reports_keep_slice_order(fig1_source):
    reports = run_source(fig1_source, RunConfig.parse("VFB"), jobs=2)
    assert [r.slice_no for r in reports] == [1, 2]


def _report(no, safe):
    return SliceReport("locks/locks11_true.c", no, "value", False, "dfs", safe, 10, 12, 30, 11, 13, 5, 7)


def test_aggregate():
    assert aggregate([_report(1, True), _report(2, True)]) is True
    assert aggregate([_report(1, True), _report(2, None)]) is None
    assert aggregate([_report(1, None), _report(2, False)]) is False
    assert aggregate([]) is True


def test_emit_csv():
    assert emit_metrics([]).decode() == ",".join(HEADER) + "\n"
    data = emit_metrics([_report(1, True), _report(2, None)])
    lines = data.decode().splitlines()
    assert len(lines) == 3
    assert lines[1] == "locks/locks11_true.c,1,VALUE,false,DFS,true,10,12,30,11,13,5,7"
    assert [r["Safe"] for r in read_metrics(data)] == ["true", "unknown"]


def test_emit_jsonl():
    (line,) = emit_metrics([_report(2, False)], "jsonl").decode().splitlines()
    record = json.loads(line)
    assert record["Slice"] == "locks/locks11_true.c#2" and record["Safe"] == "false"
    assert set(HEADER) <= set(record)
    with pytest.raises(ValueError):
        emit_metrics([], "xml")


def test_expected_rows():
    assert expected_rows(9, 50, all_configs()) == 4 * 9 + 12 * 50
    assert expected_rows(2, 3, [RunConfig.parse("BFD")]) == 3
