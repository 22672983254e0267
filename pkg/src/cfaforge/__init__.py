"""Per-assertion program slicing and CEGAR verification for a small C dialect."""

from .cfa import Cfa, cfg_to_cfa
from .cfg import Cfg, build_cfg, inline_functions
from .frontend import load_program
from .interpreter import KeyedHavoc, interpret
from .optimizer import optimize_fixpoint
from .pipeline import RunConfig, SliceReport, emit_metrics, run_corpus, run_pipeline, run_source
from .slicer import extract_criteria, make_slice, refine_slice
from .verifier import check_cfa

__version__ = "0.1.0"

__all__ = [
    "Cfa", "Cfg", "KeyedHavoc", "RunConfig", "SliceReport", "build_cfg", "cfg_to_cfa", "check_cfa",
    "emit_metrics", "extract_criteria", "inline_functions", "interpret", "load_program", "make_slice",
    "optimize_fixpoint", "refine_slice", "run_corpus", "run_pipeline", "run_source",
]
