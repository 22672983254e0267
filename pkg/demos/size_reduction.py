"""Compare CFA sizes with and without slicing over a directory of C files.

    python3 demos/size_reduction.py tests/corpus/locks
"""

from __future__ import annotations

import statistics
import sys
from collections import defaultdict

from cfaforge.pipeline import RunConfig, run_corpus


def main(directory: str) -> None:
    configs = [RunConfig.parse(code, timeout_s=60) for code in ("NFB", "BFB", "VFB", "TFB")]
    reports = run_corpus(directory, configs)
    locs = defaultdict(list)
    verdicts = defaultdict(lambda: defaultdict(int))
    for r in reports:
        locs[r.slicer].append(r.init_locs)
        verdicts[r.slicer][r.safe_text] += 1
    for slicer, values in locs.items():
        print(f"{slicer:8s} mean InitLocs {statistics.mean(values):6.1f} over {len(values):3d} units  "
              f"verdicts {dict(verdicts[slicer])}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/corpus/locks")
