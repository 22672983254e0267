"""Satisfiability of quantifier-free linear integer formulas.

Formulas are boolean-typed program expressions (``frontend.ast``); a list
is read as a conjunction and its elements are the units of unsat cores.
Arithmetic is over mathematical integers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from ..errors import ExternalSolverError
from ..frontend import ast as A
from ..semantics import DivisionByZero, eval_expr
from . import lia
from .dpll import dpll_t
from .formula import Encoding, conjuncts, encode
from .smtlib import ENV_VAR, resolve_command, run_external, to_smtlib

SAT, UNSAT, UNKNOWN = lia.SAT, lia.UNSAT, lia.UNKNOWN

log = logging.getLogger(__name__)

Formula = Union[A.Expr, Sequence[A.Expr]]


@dataclass
class SolverVerdict:
    status: str
    model: Optional[dict[str, Union[int, bool]]] = None
    core: Optional[list[A.Expr]] = None

    @property
    def sat(self) -> bool:
        return self.status == SAT

    @property
    def unsat(self) -> bool:
        return self.status == UNSAT


def _as_list(f: Formula) -> list[A.Expr]:
    if isinstance(f, (list, tuple)):
        return list(f)
    return conjuncts(f)


def free_vars(exprs: Sequence[A.Expr]) -> dict[str, str]:
    out: dict[str, str] = {}
    for e in exprs:
        for n in A.walk(e):
            if isinstance(n, A.Var):
                out.setdefault(n.name, n.ty or A.INT)
    return out


def _complete(model: dict, exprs: list[A.Expr]) -> Optional[dict]:
    """Restrict ``model`` to the formula's variables and validate it."""
    env = {}
    for name, ty in free_vars(exprs).items():
        v = model.get(name, False if ty == A.BOOL else 0)
        env[name] = bool(v) if ty == A.BOOL else int(v)
    try:
        if all(eval_expr(e, env, wrapping=False) for e in exprs):
            return env
    except (DivisionByZero, KeyError):
        pass
    return None


def _decide(exprs: list[A.Expr], endpoint, budget: int) -> SolverVerdict:
    enc = encode(exprs)
    if endpoint is not None:
        status, raw = run_external(enc, endpoint)
        if status != SAT:
            return SolverVerdict(status)
    else:
        status, ints, bools = dpll_t(enc.root, budget)
        if status != SAT:
            return SolverVerdict(status)
        raw = {**ints, **bools}
    model = _complete(raw, exprs)
    if model is None:
        if not enc.approximate:
            log.warning("model failed validation for %s", [str(e) for e in exprs])
        return SolverVerdict(UNKNOWN)
    return SolverVerdict(SAT, model)


def _core(exprs: list[A.Expr], endpoint, budget: int) -> list[A.Expr]:
    core = list(exprs)
    i = 0
    while i < len(core):
        trial = core[:i] + core[i + 1:]
        if _decide(trial, endpoint, budget).status == UNSAT:
            core = trial
        else:
            i += 1
    return core


def solve(f: Formula, want_core: bool = False, budget: int = lia.DEFAULT_BUDGET) -> SolverVerdict:
    """Internal decision procedure."""
    exprs = _as_list(f)
    verdict = _decide(exprs, None, budget)
    if verdict.status == UNSAT and want_core:
        verdict.core = _core(exprs, None, budget)
    return verdict


def solve_external(f: Formula, endpoint=None, want_core: bool = False) -> SolverVerdict:
    """Ask an SMT-LIB process; raises ``ExternalSolverError`` on any failure."""
    exprs = _as_list(f)
    verdict = _decide(exprs, endpoint if endpoint is not None else resolve_command(None), 0)
    if verdict.status == UNSAT and want_core:
        verdict.core = _core(exprs, endpoint, 0)
    return verdict


class Solver:
    """Memoizing front end; uses an external process when configured and
    falls back to the internal procedure if that process fails."""

    def __init__(self, command: Union[str, Sequence[str], None] = None, budget: int = lia.DEFAULT_BUDGET):
        self.command = resolve_command(command)
        self.budget = budget
        self._cache: dict[tuple, SolverVerdict] = {}
        self.calls = 0
        self.fallbacks = 0

    def check(self, f: Formula, want_core: bool = False) -> SolverVerdict:
        exprs = _as_list(f)
        key = (tuple(exprs), want_core)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        self.calls += 1
        verdict = None
        if self.command:
            try:
                verdict = _decide(exprs, self.command, self.budget)
            except ExternalSolverError as exc:
                self.fallbacks += 1
                log.warning("external solver failed (%s); using the internal one", exc)
        if verdict is None:
            verdict = _decide(exprs, None, self.budget)
        if verdict.status == UNSAT and want_core:
            verdict = SolverVerdict(UNSAT, core=self._core(exprs))
        self._cache[key] = verdict
        return verdict

    def _core(self, exprs: list[A.Expr]) -> list[A.Expr]:
        core = list(exprs)
        i = 0
        while i < len(core):
            trial = core[:i] + core[i + 1:]
            if self.check(trial).status == UNSAT:
                core = trial
            else:
                i += 1
        return core

    def is_sat(self, f: Formula) -> Optional[bool]:
        st = self.check(f).status
        return None if st == UNKNOWN else st == SAT


__all__ = [
    "SAT", "UNSAT", "UNKNOWN", "SolverVerdict", "Solver", "solve", "solve_external",
    "to_smtlib", "encode", "ENV_VAR",
]
