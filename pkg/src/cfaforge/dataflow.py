"""Reaching definitions, UD-chains, post-dominance, control dependence, PDGs."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .cfg import BRANCHING, Cfg
from .errors import NoExitPathError


@dataclass(frozen=True, order=True)
class Definition:
    site: int
    variable: str


RdResult = dict[int, frozenset[Definition]]
UdChain = dict[int, frozenset[Definition]]


def _definitions(cfg: Cfg) -> tuple[dict[str, set[Definition]], dict[int, Optional[Definition]]]:
    by_var: dict[str, set[Definition]] = {}
    gen: dict[int, Optional[Definition]] = {}
    for v in sorted(cfg.variables()):
        by_var.setdefault(v, set()).add(Definition(cfg.entry, v))
    for n, ins in cfg.nodes.items():
        v = ins.defines()
        if v is not None:
            d = Definition(n, v)
            by_var.setdefault(v, set()).add(d)
            gen[n] = d
        else:
            gen[n] = None
    return by_var, gen


def reaching_definitions(cfg: Cfg) -> RdResult:
    """IN sets of the forward may-analysis; entry defines every variable."""
    by_var, gen = _definitions(cfg)
    entry_out = frozenset(Definition(cfg.entry, v) for v in by_var)
    inn: dict[int, frozenset[Definition]] = {n: frozenset() for n in cfg.nodes}
    out: dict[int, frozenset[Definition]] = {n: frozenset() for n in cfg.nodes}

    def transfer(n: int, in_set: frozenset[Definition]) -> frozenset[Definition]:
        if n == cfg.entry:
            return entry_out
        d = gen[n]
        if d is None:
            return in_set
        return frozenset(x for x in in_set if x.variable != d.variable) | {d}

    preds = cfg.preds
    work = deque(sorted(cfg.nodes))
    queued = set(work)
    while work:
        n = work.popleft()
        queued.discard(n)
        new_in = frozenset().union(*(out[p] for p in preds[n])) if preds[n] else frozenset()
        inn[n] = new_in
        new_out = transfer(n, new_in)
        if new_out != out[n]:
            out[n] = new_out
            for s in cfg.succ[n]:
                if s not in queued:
                    queued.add(s)
                    work.append(s)
    return inn


def build_ud_chains(cfg: Cfg, rd: Optional[RdResult] = None) -> UdChain:
    if rd is None:
        rd = reaching_definitions(cfg)
    chains = {}
    for n, ins in cfg.nodes.items():
        reads = ins.reads()
        chains[n] = frozenset(d for d in rd[n] if d.variable in reads)
    return chains


@dataclass
class PostDomTree:
    ipdom: dict[int, int]
    exit: int

    def parent(self, n: int) -> Optional[int]:
        p = self.ipdom[n]
        return None if p == n else p

    def ancestors(self, n: int) -> list[int]:
        """``n`` followed by its strict post-dominators, nearest first."""
        chain = [n]
        while self.ipdom[n] != n:
            n = self.ipdom[n]
            chain.append(n)
        return chain

    def postdominates(self, s: int, t: int) -> bool:
        return s in self.ancestors(t)

    def strictly_postdominates(self, s: int, t: int) -> bool:
        return s != t and self.postdominates(s, t)

    def to_dot(self) -> str:
        lines = ["digraph pdt {"]
        for n in sorted(self.ipdom):
            lines.append(f"  n{n};")
            if self.ipdom[n] != n:
                lines.append(f"  n{self.ipdom[n]} -> n{n};")
        lines.append("}")
        return "\n".join(lines)


def post_dominator_tree(cfg: Cfg) -> PostDomTree:
    """Iterative dominator computation on the reversed CFG."""
    preds = cfg.preds
    # reverse postorder of the reversed graph, starting at exit
    order: list[int] = []
    seen = {cfg.exit}
    stack = [(cfg.exit, iter(preds[cfg.exit]))]
    while stack:
        node, it = stack[-1]
        for p in it:
            if p not in seen:
                seen.add(p)
                stack.append((p, iter(preds[p])))
                break
        else:
            stack.pop()
            order.append(node)
    if len(seen) != len(cfg.nodes):
        missing = sorted(set(cfg.nodes) - seen)
        raise NoExitPathError(f"nodes {missing} cannot reach exit")
    rpo = list(reversed(order))
    index = {n: i for i, n in enumerate(rpo)}
    idom: dict[int, Optional[int]] = {n: None for n in rpo}
    idom[cfg.exit] = cfg.exit

    def intersect(a: int, b: int) -> int:
        while a != b:
            while index[a] > index[b]:
                a = idom[a]
            while index[b] > index[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for n in rpo[1:]:
            new = None
            for s in cfg.succ[n]:  # predecessors in the reversed graph
                if idom[s] is not None:
                    new = s if new is None else intersect(s, new)
            if new is not None and idom[n] != new:
                idom[n] = new
                changed = True
    return PostDomTree({n: idom[n] for n in rpo}, cfg.exit)


def control_dependencies(cfg: Cfg, pdt: Optional[PostDomTree] = None) -> set[tuple[int, int]]:
    """(s, t) pairs where t is control dependent on branch s."""
    if pdt is None:
        pdt = post_dominator_tree(cfg)
    deps: set[tuple[int, int]] = set()
    for s in cfg.nodes:
        if cfg.nodes[s].kind not in BRANCHING:
            continue
        stop = pdt.ipdom[s]
        for b in set(cfg.succ[s]):
            t = b
            while t != stop:
                deps.add((s, t))
                if pdt.ipdom[t] == t:
                    break
                t = pdt.ipdom[t]
    return deps


def entry_dependencies(cfg: Cfg, pdt: PostDomTree) -> set[tuple[int, int]]:
    """Nodes controlled by entry under the usual augmented entry->exit edge."""
    deps = set()
    for b in cfg.succ[cfg.entry]:
        t = b
        while t != cfg.exit:
            deps.add((cfg.entry, t))
            t = pdt.ipdom[t]
    return deps


@dataclass
class Pdg:
    nodes: set[int]
    control_edges: set[tuple[int, int]]
    data_edges: set[tuple[int, int]]
    entry: int
    _cpred: dict[int, set[int]] = field(default_factory=dict, repr=False)
    _dpred: dict[int, set[int]] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._cpred = {n: set() for n in self.nodes}
        self._dpred = {n: set() for n in self.nodes}
        for s, t in self.control_edges:
            self._cpred[t].add(s)
        for s, t in self.data_edges:
            self._dpred[t].add(s)

    def control_preds(self, n: int) -> set[int]:
        return self._cpred[n]

    def data_preds(self, n: int) -> set[int]:
        return self._dpred[n]

    def backward_closure(self, starts: Iterable[int], control: bool = True,
                         data: bool = True) -> set[int]:
        seen = set(starts)
        todo = list(seen)
        while todo:
            n = todo.pop()
            nxt: set[int] = set()
            if control:
                nxt |= self._cpred[n]
            if data:
                nxt |= self._dpred[n]
            for m in nxt:
                if m not in seen:
                    seen.add(m)
                    todo.append(m)
        return seen

    def distances_to(self, target: int) -> dict[int, int]:
        """Backward edge distance from ``target`` over both edge kinds."""
        dist = {target: 0}
        q = deque([target])
        while q:
            n = q.popleft()
            for m in sorted(self._cpred[n] | self._dpred[n]):
                if m not in dist:
                    dist[m] = dist[n] + 1
                    q.append(m)
        return dist

    def to_dot(self, cfg: Optional[Cfg] = None) -> str:
        lines = ["digraph pdg {"]
        for n in sorted(self.nodes):
            label = f"{n}: {cfg.nodes[n].label()}" if cfg is not None else str(n)
            label = label.replace('"', '\\"')
            lines.append(f'  n{n} [label="{label}"];')
        for s, t in sorted(self.control_edges):
            lines.append(f"  n{s} -> n{t};")
        for s, t in sorted(self.data_edges):
            lines.append(f"  n{s} -> n{t} [style=dashed];")
        lines.append("}")
        return "\n".join(lines)


def build_pdg(cfg: Cfg) -> Pdg:
    pdt = cached_post_dominators(cfg)
    control = control_dependencies(cfg, pdt) | entry_dependencies(cfg, pdt)
    ud = build_ud_chains(cfg)
    data = {(d.site, n) for n, defs in ud.items() for d in defs}
    return Pdg(set(cfg.nodes), control, data, cfg.entry)


def cached_post_dominators(cfg: Cfg) -> PostDomTree:
    if "pdt" not in cfg.cache:
        cfg.cache["pdt"] = post_dominator_tree(cfg)
    return cfg.cache["pdt"]


def cached_pdg(cfg: Cfg) -> Pdg:
    if "pdg" not in cfg.cache:
        cfg.cache["pdg"] = build_pdg(cfg)
    return cfg.cache["pdg"]
