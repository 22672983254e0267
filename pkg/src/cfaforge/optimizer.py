"""Constant folding, constant propagation and dead branch elimination."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Optional

from .cfg import Cfg, Instruction, Kind
from .dataflow import UdChain, build_ud_chains
from .frontend import ast as A
from .semantics import DivisionByZero, eval_expr

log = logging.getLogger(__name__)

MAX_ROUNDS = 50


# -- constant lattice --------------------------------------------------------

BOTTOM = "bottom"
TOP = "top"


@dataclass(frozen=True)
class Const:
    value: object


def join(a, b):
    """Least upper bound on the flat constant lattice."""
    if a == BOTTOM:
        return b
    if b == BOTTOM:
        return a
    if a == TOP or b == TOP:
        return TOP
    return a if a == b else TOP


# -- folding -----------------------------------------------------------------


def _literal(v, ty: Optional[str]) -> A.Expr:
    if isinstance(v, bool):
        return A.BoolLit(v, A.BOOL)
    return A.IntLit(v, A.INT)


def fold_expr(e: A.Expr) -> A.Expr:
    """Evaluate every subtree whose leaves are all literals."""
    if isinstance(e, A.Unary):
        inner = fold_expr(e.operand)
        new = e if inner is e.operand else A.Unary(e.op, inner, e.ty)
        if A.is_literal(inner):
            return _literal(eval_expr(new, {}), e.ty)
        return new
    if isinstance(e, A.Binary):
        left, right = fold_expr(e.left), fold_expr(e.right)
        new = e if (left is e.left and right is e.right) else A.Binary(e.op, left, right, e.ty)
        if A.is_literal(left) and A.is_literal(right):
            try:
                return _literal(eval_expr(new, {}), e.ty)
            except DivisionByZero:
                return new
        return new
    return e


def fold_constants(cfg: Cfg) -> Cfg:
    nodes = {n: ins.map_exprs(fold_expr) for n, ins in cfg.nodes.items()}
    return cfg.with_changes(nodes=nodes)


# -- propagation -------------------------------------------------------------


def _def_value(cfg: Cfg, site: int):
    ins = cfg.nodes[site]
    if ins.kind is Kind.ASSIGN and A.is_literal(ins.expr):
        return Const(ins.expr.value)
    return TOP  # havoc, entry pseudo-definition or a non-literal assignment


def propagate_constants(cfg: Cfg, ud: Optional[UdChain] = None) -> Cfg:
    """Replace a read by ``c`` when every reaching definition assigns ``c``."""
    if ud is None:
        ud = build_ud_chains(cfg)
    nodes = dict(cfg.nodes)
    for n, ins in cfg.nodes.items():
        values: dict[str, object] = {}
        for d in ud[n]:
            values[d.variable] = join(values.get(d.variable, BOTTOM), _def_value(cfg, d.site))
        mapping = {v: _literal(c.value, cfg.var_types.get(v))
                   for v, c in values.items() if isinstance(c, Const)}
        if mapping:
            nodes[n] = ins.map_exprs(lambda e: A.substitute(e, mapping))
    return cfg.with_changes(nodes=nodes)


# -- dead branches -----------------------------------------------------------


def _without_branch(cfg: Cfg, b: int) -> Optional[Cfg]:
    ins = cfg.nodes[b]
    live = cfg.succ[b][0 if ins.expr.value else 1]
    if live == b:
        return None
    succ = {}
    for n, ss in cfg.succ.items():
        if n != b:
            succ[n] = tuple(live if s == b else s for s in ss)
    nodes = {n: i for n, i in cfg.nodes.items() if n != b}
    candidate = Cfg(nodes, succ, cfg.entry, cfg.exit, cfg.var_types)
    keep = candidate.reachable_from(cfg.entry)
    if cfg.exit not in keep:
        return None
    candidate = candidate.pruned()
    if candidate.reaching_exit() != set(candidate.nodes):
        return None
    return candidate


def eliminate_dead_branches(cfg: Cfg) -> Cfg:
    """Splice out branches on literal conditions.

    An elimination that would leave some node without a path to exit (for
    instance ``while (true)`` without a break) is skipped.
    """
    current = cfg
    for b in sorted(cfg.nodes):
        if b not in current.nodes:
            continue
        ins = current.nodes[b]
        if ins.kind is Kind.BRANCH and isinstance(ins.expr, A.BoolLit):
            nxt = _without_branch(current, b)
            if nxt is not None:
                current = nxt
    return current


# -- driver ------------------------------------------------------------------


@dataclass
class OptimizationReport:
    enabled: bool
    rounds: int = 0
    changes: dict[str, int] = field(default_factory=lambda: {"fold": 0, "propagate": 0, "eliminate": 0})
    time_ms: float = 0.0
    cap_exceeded: bool = False
    nodes_before: int = 0
    nodes_after: int = 0


def _changed(a: Cfg, b: Cfg) -> int:
    if set(a.nodes) != set(b.nodes):
        return len(set(a.nodes) ^ set(b.nodes)) or 1
    return sum(1 for n in a.nodes if a.nodes[n] != b.nodes[n] or a.succ[n] != b.succ[n])


def optimize_fixpoint(cfg: Cfg, enabled: bool = True,
                      max_rounds: int = MAX_ROUNDS) -> tuple[Cfg, OptimizationReport]:
    report = OptimizationReport(enabled, nodes_before=len(cfg), nodes_after=len(cfg))
    if not enabled:
        return cfg, report
    start = time.perf_counter()
    current = cfg
    while True:
        if report.rounds >= max_rounds:
            report.cap_exceeded = True
            log.warning("optimizer did not reach a fixpoint in %d rounds", max_rounds)
            break
        report.rounds += 1
        folded = fold_constants(current)
        propagated = propagate_constants(folded, build_ud_chains(folded))
        eliminated = eliminate_dead_branches(propagated)
        counts = (_changed(current, folded), _changed(folded, propagated),
                  _changed(propagated, eliminated))
        for key, c in zip(("fold", "propagate", "eliminate"), counts):
            report.changes[key] += c
        current = eliminated
        if not any(counts):
            break
    report.time_ms = (time.perf_counter() - start) * 1000
    report.nodes_after = len(current)
    return current, report
