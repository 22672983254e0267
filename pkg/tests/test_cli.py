from __future__ import annotations

import pytest

from cfaforge.cli import EXIT_SAFE, EXIT_UNKNOWN, EXIT_UNSAFE, EXIT_USAGE, main
from cfaforge.pipeline import HEADER, read_metrics

from conftest import DATA

FIG1 = str(DATA / "fig1.c")


@pytest.fixture
def bad(tmp_path):
    path = tmp_path / "bad.c"
    path.write_text("int main(){ assert(false); return 0; }")
    return str(path)


def test_verify_safe(capsys):
    assert main(["verify", FIG1, "--slicer", "backward", "--search", "dfs"]) == EXIT_SAFE
    rows = read_metrics(capsys.readouterr().out.encode())
    assert [(r["SliceNo"], r["Slicer"], r["Search"], r["Safe"]) for r in rows] == [
        ("1", "BACKWARD", "DFS", "true"), ("2", "BACKWARD", "DFS", "true")]


def test_verify_unsafe(bad, capsys):
    assert main(["verify", bad]) == EXIT_UNSAFE
    assert read_metrics(capsys.readouterr().out.encode())[0]["Safe"] == "false"


def test_verify_unknown(tmp_path):
    path = tmp_path / "loop.c"
    path.write_text("int main(){ int x = 0; while (x < 100000) { x = x + 1; } assert(x == 100000); return 0; }")
    assert main(["verify", str(path), "--max-cegar-iters", "1", "--out", str(tmp_path / "m.csv")]) == EXIT_UNKNOWN


def test_usage_errors(tmp_path, capsys):
    assert main(["verify", FIG1, "--slicer", "bogus"]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err
    assert main(["verify", FIG1, "--config", "ZZZ"]) == EXIT_USAGE
    assert main(["verify", str(tmp_path / "missing.c")]) == EXIT_USAGE
    broken = tmp_path / "broken.c"
    broken.write_text("int main() { int x = ; }")
    assert main(["verify", str(broken)]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE
    assert main(["--help"]) == 0


def test_config_shorthand_and_jsonl(tmp_path):
    out = tmp_path / "m.jsonl"
    assert main(["verify", FIG1, "--config", "VFD", "--format", "jsonl", "--out", str(out)]) == EXIT_SAFE
    assert out.read_text().count('"Slicer": "VALUE"') == 2


def test_corpus_empty_directory(tmp_path, capsys):
    assert main(["corpus", str(tmp_path)]) == EXIT_SAFE
    assert capsys.readouterr().out == ",".join(HEADER) + "\n"


def test_corpus_restricted_matrix(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["corpus", str(DATA / "metrics"), "--configs", "BFD", "--out", str(out)]) == EXIT_SAFE
    rows = read_metrics(out.read_bytes())
    assert len(rows) == 3 and {r["File"] for r in rows} == {"counter.c", "gate.c"}


def test_corpus_rejects_a_file():
    assert main(["corpus", FIG1]) == EXIT_USAGE


def test_slice_command(capsys):
    assert main(["slice", FIG1, "--slicer", "thin"]) == EXIT_SAFE
    out = capsys.readouterr().out
    assert out.count("slice ") == 2 and "phi    3" in out and "i = i + 1" in out


@pytest.mark.parametrize("what, marker", [("ast", "int main(void)"), ("cfg", "digraph"),
                                          ("pdg", "digraph"), ("cfa", "--[i := 0]-->")])
def test_dump_command(what, marker, capsys):
    assert main(["dump", FIG1, "--dump", what]) == EXIT_SAFE
    assert marker in capsys.readouterr().out


def test_verify_with_dump(capsys):
    assert main(["verify", FIG1, "--dump", "cfa"]) == EXIT_SAFE
    assert "# slice 1" in capsys.readouterr().err
