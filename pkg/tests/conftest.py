from __future__ import annotations

from pathlib import Path

import pytest

TESTS = Path(__file__).parent
DATA = TESTS / "data"
CORPUS = TESTS / "corpus"

_RESULTS = pytest.StashKey[dict]()


@pytest.fixture
def record_criterion(request):
    """Record an acceptance verdict; all of them are listed in the terminal summary."""
    results = request.config.stash.setdefault(_RESULTS, {})

    def record(number: int, ok: bool, detail: str) -> None:
        results[number] = (ok, detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def fig1_source() -> str:
    return (DATA / "fig1.c").read_text()


@pytest.fixture
def fig4_source() -> str:
    return (DATA / "fig4.c").read_text()


def build(source: str, optimize: bool = False):
    """Whole-program CFG of ``source`` as the pipeline prepares it."""
    from cfaforge.pipeline import prepare

    return prepare(source, optimize).cfg


def node(cfg, label: str) -> int:
    """The unique node whose label is ``label``."""
    found = [n for n, ins in cfg.nodes.items() if ins.label() == label]
    assert len(found) == 1, (label, found)
    return found[0]


def labels(cfg, nodes=None) -> set[str]:
    nodes = cfg.nodes if nodes is None else nodes
    return {cfg.nodes[n].label() for n in nodes if n not in (cfg.entry, cfg.exit)}


def expr(text: str, ints: str = "xyzij", bools: str = "bpq"):
    """Type-checked expression over int variables ``ints`` and bool variables ``bools``."""
    from cfaforge.frontend import ast as A, load_program

    decls = "".join(f"int {v} = 0; " for v in ints) + "".join(f"bool {v} = false; " for v in bools)
    program = load_program(f"int main() {{ {decls}assert({text}); return 0; }}")
    return next(s for s in program.function("main").body.stmts if isinstance(s, A.Assert)).cond
