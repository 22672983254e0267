"""Print the backward, thin and value slice of every assertion in a C file,
then verify each slice.

    python3 demos/slices.py tests/data/fig4.c
"""

from __future__ import annotations

import sys
from pathlib import Path

from cfaforge.cfa import cfg_to_cfa
from cfaforge.dataflow import cached_pdg
from cfaforge.pipeline import prepare
from cfaforge.slicer import STRATEGIES, make_slice
from cfaforge.verifier import Limits, check_cfa


def main(path: str) -> None:
    prepared = prepare(Path(path).read_text(), optimizations=False)
    cfg = prepared.cfg
    pdg = cached_pdg(cfg)
    for number, crit in enumerate(prepared.criteria, 1):
        print(f"assertion {number}: {cfg.nodes[crit.instruction].label()} (line {cfg.nodes[crit.instruction].line})")
        for kind in STRATEGIES:
            s = make_slice(kind, cfg, crit, pdg)
            kept = sorted({cfg.nodes[n].line for n in s.retained if cfg.nodes[n].line})
            phis = sorted({cfg.nodes[n].line for n in s.abstracted})
            cfa = cfg_to_cfa(s.cfg)
            verdict = check_cfa(cfa, limits=Limits(timeout_s=30))
            print(f"  {kind:8s} lines {kept}  abstracted {phis}  "
                  f"{cfa.num_locations} locations  safe={verdict.safe}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else str(Path(__file__).parent.parent / "tests" / "data" / "fig4.c"))
