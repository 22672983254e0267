"""Command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .cfa import cfg_to_cfa
from .errors import CfaForgeError
from .frontend import load_program, print_program
from .pipeline import (SEARCHES, SLICERS, RunConfig, aggregate, all_configs, emit_metrics, prepare,
                       run_corpus, run_pipeline)
from .slicer import NONE, make_slice, whole_program
from .dataflow import cached_pdg

EXIT_SAFE, EXIT_UNSAFE, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3

DUMPS = ("ast", "cfg", "pdg", "cfa")


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with code 3 instead of argparse's 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--slicer", choices=SLICERS, default="backward")
    p.add_argument("-O", "--optimize", action="store_true", help="enable constant folding/propagation and dead-branch elimination")
    p.add_argument("--search", choices=SEARCHES, default="bfs")
    p.add_argument("--config", metavar="XYZ", help="three-letter shorthand such as VFD; overrides the three flags above")
    p.add_argument("--timeout", type=float, default=180.0, help="seconds per slice")
    p.add_argument("--max-arg-nodes", type=int, default=1_000_000)
    p.add_argument("--max-cegar-iters", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--solver-cmd", help="external SMT-LIB solver command (default: $CFAFORGE_SOLVER)")


def _output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="metrics destination (default: standard output)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cfaforge", description="Slice C programs per assertion and verify the slices with CEGAR.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    verify = sub.add_parser("verify", help="verify every assertion of the given files")
    verify.add_argument("files", nargs="+")
    _config_flags(verify)
    _output_flags(verify)
    verify.add_argument("--dump", choices=DUMPS, help="print an intermediate form to stderr before verifying")

    sl = sub.add_parser("slice", help="print the slice of each assertion")
    sl.add_argument("file")
    _config_flags(sl)

    dump = sub.add_parser("dump", help="print an intermediate representation")
    dump.add_argument("file")
    dump.add_argument("--dump", choices=DUMPS, default="cfa")
    _config_flags(dump)

    corpus = sub.add_parser("corpus", help="run a configuration matrix over a directory of .c files")
    corpus.add_argument("directory")
    corpus.add_argument("--configs", default="all", help="comma-separated codes such as BFD,VTB, or 'all'")
    corpus.add_argument("--timeout", type=float, default=180.0)
    corpus.add_argument("--max-arg-nodes", type=int, default=1_000_000)
    corpus.add_argument("--max-cegar-iters", type=int, default=200)
    corpus.add_argument("--seed", type=int, default=0)
    corpus.add_argument("--solver-cmd")
    _output_flags(corpus)
    return parser


def _options(args) -> dict:
    return dict(timeout_s=args.timeout, solver_cmd=args.solver_cmd, seed=args.seed,
                max_arg_nodes=args.max_arg_nodes, max_iterations=args.max_cegar_iters)


def config_from_args(args) -> RunConfig:
    if args.config:
        return RunConfig.parse(args.config, **_options(args))
    return RunConfig(args.slicer, args.optimize, args.search, **_options(args))


def _write(data: bytes, out: Optional[str]) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.write(data.decode())
        sys.stdout.flush()


def _exit_code(verdict: Optional[bool]) -> int:
    return {True: EXIT_SAFE, False: EXIT_UNSAFE, None: EXIT_UNKNOWN}[verdict]


def render_dump(source: str, what: str, config: RunConfig) -> str:
    if what == "ast":
        return print_program(load_program(source))
    prepared = prepare(source, config.optimizations)
    cfg = prepared.cfg
    if what == "cfg":
        return cfg.to_dot()
    if what == "pdg":
        return cached_pdg(cfg).to_dot(cfg)
    parts = []
    if config.slicer == NONE or not prepared.criteria:
        parts.append(cfg_to_cfa(whole_program(cfg).cfg).dump())
    else:
        pdg = cached_pdg(cfg)
        for i, crit in enumerate(prepared.criteria, 1):
            if crit.instruction in prepared.removed:
                parts.append(f"# slice {i}: assertion removed by the optimizer")
                continue
            s = make_slice(config.slicer, cfg, crit, pdg)
            parts.append(f"# slice {i} {crit}\n" + cfg_to_cfa(s.cfg).dump())
    return "\n".join(parts)


def render_slices(source: str, config: RunConfig) -> str:
    prepared = prepare(source, config.optimizations)
    cfg = prepared.cfg
    pdg = cached_pdg(cfg)
    lines = []
    for i, crit in enumerate(prepared.criteria, 1):
        lines.append(f"slice {i} criterion {crit}")
        if crit.instruction in prepared.removed:
            lines.append("  (assertion removed by the optimizer)")
            continue
        s = whole_program(cfg) if config.slicer == NONE else make_slice(config.slicer, cfg, crit, pdg)
        for n in sorted(s.cfg.nodes):
            ins = s.cfg.nodes[n]
            mark = "phi" if n in s.abstracted else "   "
            lines.append(f"  {mark} {n:4d}  line {ins.line or '-':>4}  {ins.label()}")
    return "\n".join(lines) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help and usage errors
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "corpus":
            options = _options(args)
            if args.configs.strip().lower() == "all":
                configs = all_configs(**options)
            else:
                configs = [RunConfig.parse(c, **options) for c in args.configs.split(",") if c.strip()]
            if not Path(args.directory).is_dir():
                raise ValueError(f"not a directory: {args.directory}")
            reports = run_corpus(args.directory, configs, args.jobs)
            _write(emit_metrics(reports, args.format), args.out)
            return _exit_code(aggregate(reports))
        config = config_from_args(args)
        if args.command == "verify":
            reports = []
            for f in args.files:
                if args.dump:
                    sys.stderr.write(render_dump(Path(f).read_text(), args.dump, config) + "\n")
                reports.extend(run_pipeline(f, config, args.jobs))
            _write(emit_metrics(reports, args.format), args.out)
            return _exit_code(aggregate(reports))
        if args.command == "slice":
            sys.stdout.write(render_slices(Path(args.file).read_text(), config))
            return EXIT_SAFE
        sys.stdout.write(render_dump(Path(args.file).read_text(), args.dump, config) + "\n")
        return EXIT_SAFE
    except ValueError as exc:
        print(f"cfaforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, CfaForgeError) as exc:
        print(f"cfaforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
