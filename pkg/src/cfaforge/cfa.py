"""Control flow automata: locations with operation-labelled edges."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .cfg import Cfg, Kind
from .frontend import ast as A

ASSIGN = "assign"
ASSUME = "assume"
HAVOC = "havoc"


@dataclass(frozen=True)
class Operation:
    kind: str
    var: Optional[str] = None
    expr: Optional[A.Expr] = None

    def __str__(self) -> str:
        if self.kind == ASSIGN:
            return f"{self.var} := {self.expr}"
        if self.kind == HAVOC:
            return f"havoc({self.var})"
        return f"assume({self.expr})"


SKIP = Operation(ASSUME, expr=A.BoolLit(True, A.BOOL))


def assign(var: str, expr: A.Expr) -> Operation:
    return Operation(ASSIGN, var, expr)


def assume(expr: A.Expr) -> Operation:
    return Operation(ASSUME, expr=expr)


def havoc(var: str) -> Operation:
    return Operation(HAVOC, var)


@dataclass(frozen=True)
class Edge:
    src: int
    op: Operation
    dst: int
    node: Optional[int] = None  # originating CFG instruction
    phi: Optional[int] = None  # abstracted branch id when the edge stems from a PHI node

    def __str__(self) -> str:
        return f"{self.src} --[{self.op}]--> {self.dst}"


@dataclass
class Cfa:
    locations: list[int]
    edges: list[Edge]
    initial: int
    error: int
    final: int
    var_types: dict[str, str] = field(default_factory=dict)
    _out: dict[int, list[Edge]] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._out = {loc: [] for loc in self.locations}
        for e in self.edges:
            self._out[e.src].append(e)

    def out(self, loc: int) -> list[Edge]:
        return self._out[loc]

    @property
    def num_locations(self) -> int:
        return len(self.locations)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def dump(self) -> str:
        lines = [f"# initial {self.initial}, error {self.error}, final {self.final}"]
        for e in sorted(self.edges, key=lambda e: (e.src, e.dst, str(e.op))):
            lines.append(str(e))
        return "\n".join(lines)


def phi_var(pred_id: int) -> str:
    return f"__phi{pred_id}"


CHOICE = "choice"
HAVOC_BOOL = "havoc"


def cfg_to_cfa(cfg: Cfg, phi_encoding: str = CHOICE) -> Cfa:
    """Lower a CFG: instructions move onto edges, skip nodes disappear.

    The location ``loc(n)`` is the program point just before instruction
    ``n``; the initial location is separate and left through one skip edge.

    An abstract predicate becomes a nondeterministic choice.  With the
    default ``choice`` encoding both outgoing edges are ``assume(true)``;
    with ``havoc`` a fresh boolean is havocked on an extra edge (costing
    one location) and the two edges assume it and its negation.  Either
    way the edges carry the predicate's node id in ``phi``.
    """
    if phi_encoding not in (CHOICE, HAVOC_BOOL):
        raise ValueError(f"unknown predicate encoding {phi_encoding!r}")
    def resolve(n: int) -> int:
        seen = set()
        while cfg.nodes[n].kind is Kind.SKIP:
            if n in seen:  # pragma: no cover - normalized CFGs have no skip cycles
                break
            seen.add(n)
            n = cfg.succ[n][0]
        return n

    points = [n for n in sorted(cfg.nodes)
              if cfg.nodes[n].kind not in (Kind.SKIP, Kind.ENTRY, Kind.EXIT)]
    loc: dict[int, int] = {}
    initial = 0
    counter = 1
    for n in points:
        loc[n] = counter
        counter += 1
    final = counter
    loc[cfg.exit] = final
    error = counter + 1
    locations = list(range(error + 1))
    edges: list[Edge] = []
    var_types = dict(cfg.var_types)

    def target(n: int) -> int:
        return loc[resolve(n)]

    edges.append(Edge(initial, SKIP, target(cfg.succ[cfg.entry][0]), cfg.entry))
    for n in points:
        ins = cfg.nodes[n]
        src = loc[n]
        k = ins.kind
        if k is Kind.ASSIGN:
            edges.append(Edge(src, assign(ins.var, ins.expr), target(cfg.succ[n][0]), n))
        elif k is Kind.HAVOC:
            edges.append(Edge(src, havoc(ins.var), target(cfg.succ[n][0]), n))
        elif k is Kind.BRANCH:
            t, f = cfg.succ[n]
            edges.append(Edge(src, assume(ins.expr), target(t), n))
            edges.append(Edge(src, assume(A.negate(ins.expr)), target(f), n))
        elif k is Kind.ASSERT:
            edges.append(Edge(src, assume(A.negate(ins.expr)), error, n))
            edges.append(Edge(src, assume(ins.expr), target(cfg.succ[n][0]), n))
        elif k is Kind.PHI and phi_encoding == CHOICE:
            t, f = cfg.succ[n]
            edges.append(Edge(src, SKIP, target(t), n, phi=n))
            edges.append(Edge(src, SKIP, target(f), n, phi=n))
        elif k is Kind.PHI:
            b = phi_var(ins.pred_id)
            var_types[b] = A.BOOL
            mid = len(locations)
            locations.append(mid)
            t, f = cfg.succ[n]
            bv = A.Var(b, A.BOOL)
            edges.append(Edge(src, havoc(b), mid, n, phi=n))
            edges.append(Edge(mid, assume(bv), target(t), n, phi=n))
            edges.append(Edge(mid, assume(A.negate(bv)), target(f), n, phi=n))
        else:
            raise TypeError(f"cannot lower {ins}")
    return Cfa(locations, edges, initial, error, final, var_types)
