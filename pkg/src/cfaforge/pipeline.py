"""End-to-end workflow: source -> CFG -> slices -> CFAs -> verdicts, plus metrics."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .cfa import cfg_to_cfa
from .cfg import Cfg, inline_functions
from .dataflow import cached_pdg
from .errors import CfaForgeError, NoAssertError, UnknownPredicateError
from .frontend import load_program
from .interpreter import ASSERT_FAILED, ExecutionTrace, KeyedHavoc, interpret
from .optimizer import optimize_fixpoint
from .slicer import (BACKWARD, NONE, THIN, VALUE, SliceCriterion, extract_criteria,
                     make_slice, nearest_predicate, refine_slice, whole_program)
from .solver import Solver
from .verifier import BFS, DFS, Counterexample, Limits, Verdict, check_cfa

log = logging.getLogger(__name__)

SLICERS = (NONE, BACKWARD, THIN, VALUE)
SEARCHES = (BFS, DFS)

HEADER = ("File", "SliceNo", "Slicer", "Optimizations", "Search", "Safe", "InitLocs", "InitEdges",
          "ArgSize", "EndLocs", "EndEdges", "OptimizationTimeMs", "VerificationTimeMs")

_SLICER_LETTER = {NONE: "N", BACKWARD: "B", THIN: "T", VALUE: "V"}
_SEARCH_LETTER = {BFS: "B", DFS: "D"}


@dataclass(frozen=True)
class RunConfig:
    slicer: str = BACKWARD
    optimizations: bool = False
    search: str = BFS
    timeout_s: float = 180.0
    solver_cmd: Optional[str] = None
    seed: int = 0
    max_arg_nodes: int = 1_000_000
    max_iterations: int = 200

    def __post_init__(self) -> None:
        if self.slicer not in SLICERS:
            raise ValueError(f"unknown slicer {self.slicer!r}")
        if self.search not in SEARCHES:
            raise ValueError(f"unknown search strategy {self.search!r}")

    @property
    def abbreviation(self) -> str:
        return (_SLICER_LETTER[self.slicer] + ("T" if self.optimizations else "F")
                + _SEARCH_LETTER[self.search])

    @classmethod
    def parse(cls, abbrev: str, **options) -> "RunConfig":
        """Decode a three-letter code such as ``VFD``."""
        code = abbrev.strip().upper()
        slicers = {v: k for k, v in _SLICER_LETTER.items()}
        searches = {v: k for k, v in _SEARCH_LETTER.items()}
        if len(code) != 3 or code[0] not in slicers or code[1] not in "TF" or code[2] not in searches:
            raise ValueError(f"bad configuration code {abbrev!r}")
        return cls(slicers[code[0]], code[1] == "T", searches[code[2]], **options)

    def limits(self) -> Limits:
        return Limits(self.timeout_s, self.max_arg_nodes, self.max_iterations)

    def __str__(self) -> str:
        return self.abbreviation


def all_configs(**options) -> list[RunConfig]:
    """The 16-configuration matrix: slicers x optimizations x searches."""
    return [RunConfig(s, o, q, **options) for s in SLICERS for o in (False, True) for q in SEARCHES]


@dataclass
class SliceReport:
    file: str
    slice_no: int
    slicer: str
    optimizations: bool
    search: str
    safe: Optional[bool]
    init_locs: int = 0
    init_edges: int = 0
    arg_size: int = 0
    end_locs: int = 0
    end_edges: int = 0
    optimization_time_ms: int = 0
    verification_time_ms: int = 0
    cumulative_arg_size: int = 0
    iterations: int = 0
    refinements: int = 0
    predicates: int = 0
    reason: str = ""
    witness: Optional[list[str]] = None
    counterexample: Optional[Counterexample] = None  # concrete inputs of the witness

    @property
    def slice_id(self) -> str:
        return f"{self.file}#{self.slice_no}"

    @property
    def safe_text(self) -> str:
        return {True: "true", False: "false", None: "unknown"}[self.safe]

    def row(self) -> list:
        return [self.file, self.slice_no, self.slicer.upper(), str(self.optimizations).lower(),
                self.search.upper(), self.safe_text, self.init_locs, self.init_edges, self.arg_size,
                self.end_locs, self.end_edges, self.optimization_time_ms, self.verification_time_ms]


# ---------------------------------------------------------------------------
# preparation
# ---------------------------------------------------------------------------


@dataclass
class Prepared:
    """A program after inlining (and optionally optimization), with its criteria."""

    cfg: Cfg
    criteria: list[SliceCriterion]
    optimize_ms: float
    removed: frozenset[int] = frozenset()  # asserts proved unreachable by the optimizer

    @property
    def units(self) -> int:
        return len(self.criteria)


def prepare(source: str, optimizations: bool) -> Prepared:
    """Front end, inlining, optional optimization and criterion extraction.

    Criteria come from the unoptimized program so that slice numbering does
    not depend on the optimization setting.
    """
    cfg = inline_functions(load_program(source))
    try:
        criteria = extract_criteria(cfg)
    except NoAssertError:
        criteria = []
    cfg, report = optimize_fixpoint(cfg, optimizations)
    removed = frozenset(c.instruction for c in criteria if c.instruction not in cfg.nodes)
    return Prepared(cfg, criteria, report.time_ms, removed)


# ---------------------------------------------------------------------------
# verification of one slice
# ---------------------------------------------------------------------------


def witness_havoc(cex: Counterexample, seed: int = 0):
    """Havoc source for the interpreter that reproduces a counterexample."""
    fallback = KeyedHavoc(seed)

    def source(key):
        if key in cex.havoc_values:
            return cex.havoc_values[key]
        if key[0] == "init" and key[1] in cex.initial_values:
            return int(cex.initial_values[key[1]])
        return fallback(key)
    return source


def replay_witness(cfg: Cfg, cex: Counterexample, seed: int = 0,
                   max_steps: int = 1_000_000) -> ExecutionTrace:
    return interpret(cfg, witness_havoc(cex, seed), max_steps)


def _confirms(trace: ExecutionTrace, target: Optional[int]) -> bool:
    return trace.status == ASSERT_FAILED and (target is None or trace.error_node == target)


def verify_unit(prepared: Prepared, index: int, config: RunConfig, file: str = "<input>",
                solver: Optional[Solver] = None) -> SliceReport:
    """Verify slice ``index`` (1-based; 0 is the whole program for ``none``)."""
    solver = solver or Solver(config.solver_cmd)
    cfg = prepared.cfg
    report = SliceReport(file, index, config.slicer, config.optimizations, config.search, None)
    opt_ms = prepared.optimize_ms
    start = time.perf_counter()
    if config.slicer == NONE:
        target = None
        sl = whole_program(cfg)
        pdg = None
    else:
        crit = prepared.criteria[index - 1]
        target = crit.instruction
        if target in prepared.removed:
            report.safe = True
            report.reason = "assertion unreachable after optimization"
            report.optimization_time_ms = round(opt_ms)
            return report
        crit = SliceCriterion(target, cfg.nodes[target].reads())
        pdg = cached_pdg(cfg)
        sl = make_slice(config.slicer, cfg, crit, pdg)
    cfa = cfg_to_cfa(sl.cfg)
    report.init_locs, report.init_edges = cfa.num_locations, cfa.num_edges
    slicing_ms = (time.perf_counter() - start) * 1000
    verify_ms = 0.0
    deadline = time.monotonic() + config.timeout_s
    while True:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            report.safe, report.reason = None, "timeout"
            break
        limits = replace(config.limits(), timeout_s=remaining)
        t0 = time.perf_counter()
        verdict = check_cfa(cfa, config.search, limits, solver)
        verify_ms += (time.perf_counter() - t0) * 1000
        _absorb(report, verdict)
        if verdict.safe is not False:
            break
        phis = [e.phi for e in verdict.witness.phi_edges()]
        if phis:
            # the path relies on an abstract predicate: refine the slice and retry
            t0 = time.perf_counter()
            try:
                pred = nearest_predicate(sl, pdg, phis)
                sl = refine_slice(sl, pdg, cfg, pred, VALUE)
            except UnknownPredicateError as exc:
                report.safe, report.reason = None, str(exc)
                break
            report.refinements += 1
            cfa = cfg_to_cfa(sl.cfg)
            slicing_ms += (time.perf_counter() - t0) * 1000
            continue
        trace = replay_witness(cfg, verdict.witness, config.seed)
        if not _confirms(trace, target):
            report.safe, report.reason = None, "witness did not replay in the interpreter"
        report.witness = [str(e) for e in verdict.witness.edges]
        report.counterexample = verdict.witness
        break
    report.end_locs, report.end_edges = cfa.num_locations, cfa.num_edges
    report.optimization_time_ms = round(opt_ms + slicing_ms)
    report.verification_time_ms = round(verify_ms)
    return report


def _absorb(report: SliceReport, verdict: Verdict) -> None:
    report.safe = verdict.safe
    report.reason = verdict.reason
    report.arg_size = verdict.arg_size
    report.cumulative_arg_size += verdict.cumulative_arg_size
    report.iterations += verdict.iterations
    report.predicates = len(verdict.predicates)


def _unit_indices(prepared: Prepared, config: RunConfig) -> list[int]:
    return [0] if config.slicer == NONE else list(range(1, prepared.units + 1))


def _run_unit(source: str, file: str, config: RunConfig, index: int) -> SliceReport:
    return verify_unit(prepare(source, config.optimizations), index, config, file)


def run_source(source: str, config: RunConfig, file: str = "<input>", jobs: int = 1) -> list[SliceReport]:
    """Run the workflow on source text; reports come back in slice order."""
    prepared = prepare(source, config.optimizations)
    indices = _unit_indices(prepared, config)
    if jobs <= 1 or len(indices) <= 1:
        solver = Solver(config.solver_cmd)
        return [verify_unit(prepared, i, config, file, solver) for i in indices]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_unit, source, file, config, i) for i in indices]
        return [f.result() for f in futures]


def run_pipeline(path, config: RunConfig, jobs: int = 1, name: Optional[str] = None) -> list[SliceReport]:
    """Run the workflow on a file."""
    path = Path(path)
    return run_source(path.read_text(), config, name or str(path), jobs)


# ---------------------------------------------------------------------------
# aggregation and corpus runs
# ---------------------------------------------------------------------------


def aggregate(reports: Iterable[SliceReport]) -> Optional[bool]:
    """Unsafe if any slice is unsafe, safe if all are safe, else unknown."""
    verdicts = [r.safe for r in reports]
    if any(v is False for v in verdicts):
        return False
    if all(v is True for v in verdicts):
        return True
    return None


def _failure_row(file: str, config: RunConfig, reason: str) -> SliceReport:
    return SliceReport(file, 0, config.slicer, config.optimizations, config.search, None, reason=reason)


def _corpus_task(path: str, name: str, config: RunConfig) -> list[SliceReport]:
    try:
        return run_pipeline(path, config, name=name)
    except CfaForgeError as exc:
        return [_failure_row(name, config, f"{type(exc).__name__}: {exc}")]
    except Exception as exc:  # keep the corpus run alive, but record what happened
        log.exception("unexpected failure on %s with %s", name, config)
        return [_failure_row(name, config, f"{type(exc).__name__}: {exc}")]


def corpus_files(directory) -> list[Path]:
    root = Path(directory)
    return sorted(p for p in root.rglob("*.c") if p.is_file())


def run_corpus(directory, configs: Sequence[RunConfig], jobs: int = 1) -> list[SliceReport]:
    """Every file under ``directory`` with every configuration; rows ordered by file, config, slice."""
    root = Path(directory)
    tasks = [(str(p), p.relative_to(root).as_posix(), c) for p in corpus_files(root) for c in configs]
    if jobs <= 1:
        results = [_corpus_task(*t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_corpus_task, *zip(*tasks))) if tasks else []
    return [r for rows in results for r in rows]


def expected_rows(files: int, slices: int, configs: Sequence[RunConfig]) -> int:
    """Row count for a corpus: one per file for ``none``, one per slice otherwise."""
    return sum(files if c.slicer == NONE else slices for c in configs)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def emit_metrics(reports: Sequence[SliceReport], fmt: str = "csv") -> bytes:
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HEADER)
        for r in reports:
            w.writerow(r.row())
    elif fmt == "jsonl":
        for r in reports:
            record = dict(zip(HEADER, r.row()))
            record.update(Slice=r.slice_id, CumulativeArgSize=r.cumulative_arg_size,
                          Iterations=r.iterations, Refinements=r.refinements,
                          Predicates=r.predicates, Reason=r.reason)
            buf.write(json.dumps(record) + "\n")
    else:
        raise ValueError(f"unknown metrics format {fmt!r}")
    return buf.getvalue().encode()


def read_metrics(data: bytes) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(data.decode())))


__all__ = [
    "RunConfig", "SliceReport", "Prepared", "HEADER", "SLICERS", "SEARCHES", "all_configs",
    "prepare", "verify_unit", "run_source", "run_pipeline", "run_corpus", "aggregate",
    "emit_metrics", "read_metrics", "expected_rows", "replay_witness", "witness_havoc",
    "interpret", "corpus_files",
]
