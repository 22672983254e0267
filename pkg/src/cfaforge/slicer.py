"""Per-assertion slicing: backward, thin and value slices, and refinement.

Thin and value slices replace every branch that still controls a retained
instruction, but is not retained itself, by an abstract predicate (a
``PHI`` node that picks a successor nondeterministically).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .cfg import BRANCHING, Cfg, Instruction, Kind
from .dataflow import Pdg, PostDomTree, cached_pdg, cached_post_dominators
from .errors import InternalError, NoAssertError, UnknownPredicateError

BACKWARD = "backward"
THIN = "thin"
VALUE = "value"
NONE = "none"
STRATEGIES = (BACKWARD, THIN, VALUE)


@dataclass(frozen=True)
class SliceCriterion:
    instruction: int
    variables: frozenset[str]

    def __str__(self) -> str:
        return f"({self.instruction}, {{{', '.join(sorted(self.variables))}}})"


@dataclass
class Slice:
    criterion: SliceCriterion
    retained: frozenset[int]
    abstracted: frozenset[int]
    cfg: Cfg
    kind: str
    refinement_count: int = 0
    extra: tuple[int, ...] = ()  # branches added to the criterion by refinement
    phi_ids: dict[int, int] = field(default_factory=dict)  # branch id -> predicate number

    @property
    def abstracted_branches(self) -> frozenset[int]:
        return self.abstracted


def extract_criteria(cfg: Cfg) -> list[SliceCriterion]:
    """One criterion per assert, in source order."""
    crits = [SliceCriterion(n, cfg.nodes[n].reads()) for n in cfg.asserts()]
    if not crits:
        raise NoAssertError("program contains no assertion")
    return crits


def whole_program(cfg: Cfg) -> Slice:
    """The trivial 'slice' used when slicing is disabled."""
    crit = SliceCriterion(cfg.exit, frozenset())
    return Slice(crit, frozenset(cfg.nodes), frozenset(), cfg, NONE)


# ---------------------------------------------------------------------------
# slice CFG construction
# ---------------------------------------------------------------------------


def slice_cfg(cfg: Cfg, retained: Iterable[int], phis: Iterable[int] = (),
              pdt: Optional[PostDomTree] = None) -> tuple[Cfg, dict[int, int]]:
    """Restrict ``cfg`` to ``retained`` plus abstract predicates for ``phis``.

    Each edge is redirected to the nearest kept node on the post-dominator
    chain of its original target.
    """
    if pdt is None:
        pdt = cached_post_dominators(cfg)
    retained = set(retained) | {cfg.entry, cfg.exit}
    phis = sorted(set(phis) - retained)
    kept = retained | set(phis)
    phi_ids = {b: i for i, b in enumerate(phis, start=1)}

    def target(m: int) -> int:
        while m not in kept:
            m = pdt.ipdom[m]
        return m

    nodes: dict[int, Instruction] = {}
    succ: dict[int, tuple[int, ...]] = {}
    for n in sorted(kept):
        ins = cfg.nodes[n]
        if n in phi_ids:
            ins = Instruction(n, Kind.PHI, pred_id=phi_ids[n], line=ins.line)
        nodes[n] = ins
        succ[n] = tuple(target(m) for m in cfg.succ[n])
    out = Cfg(nodes, succ, cfg.entry, cfg.exit, cfg.var_types)
    keep = out.reachable_from(out.entry)
    if keep != set(nodes):
        out = out.pruned()
    return out, phi_ids


def _assemble(cfg: Cfg, pdg: Pdg, criterion: SliceCriterion, retained: set[int],
              kind: str, extra: tuple[int, ...] = (), count: int = 0) -> Slice:
    retained = set(retained) | {cfg.entry, cfg.exit, criterion.instruction} | set(extra)
    if kind == BACKWARD:
        phis: set[int] = set()
    else:
        controlling = pdg.backward_closure(retained, control=True, data=False)
        phis = {b for b in controlling - retained if cfg.nodes[b].kind in BRANCHING}
    out, phi_ids = slice_cfg(cfg, retained, phis)
    # nodes dropped as unreachable are no longer part of the slice
    retained &= set(out.nodes)
    phis &= set(out.nodes)
    return Slice(criterion, frozenset(retained), frozenset(phis), out, kind, count,
                 extra, {b: i for b, i in phi_ids.items() if b in phis})


# ---------------------------------------------------------------------------
# the three slicers
# ---------------------------------------------------------------------------


def _starts(criterion: SliceCriterion, extra: Sequence[int]) -> list[int]:
    return [criterion.instruction, *extra]


def backward_slice(pdg: Pdg, cfg: Cfg, criterion: SliceCriterion,
                   extra: Sequence[int] = ()) -> Slice:
    retained = pdg.backward_closure(_starts(criterion, extra), control=True, data=True)
    return _assemble(cfg, pdg, criterion, retained, BACKWARD, tuple(extra))


def thin_slice(pdg: Pdg, cfg: Cfg, criterion: SliceCriterion,
               extra: Sequence[int] = (), base: Iterable[int] = ()) -> Slice:
    starts = set(_starts(criterion, extra)) | set(base)
    retained = pdg.backward_closure(starts, control=False, data=True)
    return _assemble(cfg, pdg, criterion, retained, THIN, tuple(extra))


def first_impact_sets(cfg: Cfg, branch: int, gamma: int, vi: set[int],
                      pdt: PostDomTree, reaches_gamma: set[int]) -> list[set]:
    """For each successor of ``branch``, the possible first value-impacting
    nodes on paths that end at the first visit of ``gamma``.

    Paths that get to ``gamma`` or to the branch's immediate post-dominator
    before meeting a value-impacting node contribute the marker ``END``:
    beyond the post-dominator both successors share the same futures.
    """
    stop = pdt.ipdom[branch]
    result = []
    for t in cfg.succ[branch]:
        found: set = set()
        seen: set[int] = set()
        todo = [t]
        while todo:
            n = todo.pop()
            if n in seen:
                continue
            seen.add(n)
            if n == gamma or n == stop:
                if n in reaches_gamma:
                    found.add(END)
                continue
            if n in vi:
                if n in reaches_gamma:
                    found.add(n)
                continue
            todo.extend(cfg.succ[n])
        result.append(found)
    return result


END = "END"


def condition3(first_sets: list[set]) -> bool:
    """Some path pair disagrees on the first value-impacting node."""
    if len(first_sets) != 2:
        return False
    a, b = first_sets
    return bool(a) and bool(b) and not (len(a) == 1 and a == b)


def _reaching(cfg: Cfg, gamma: int) -> set[int]:
    seen = {gamma}
    todo = [gamma]
    preds = cfg.preds
    while todo:
        n = todo.pop()
        for p in preds[n]:
            if p not in seen:
                seen.add(p)
                todo.append(p)
    return seen


def value_impacting(pdg: Pdg, cfg: Cfg, gammas: Sequence[int], base: Iterable[int] = ()) -> set[int]:
    """Least-fixpoint iteration of the three value-impact conditions."""
    pdt = cached_post_dominators(cfg)
    seeds: set[int] = set(base)
    for g in gammas:
        seeds |= pdg.data_preds(g)
    vi = pdg.backward_closure(seeds, control=False, data=True)
    reach = {g: _reaching(cfg, g) for g in gammas}
    branches = [n for n in sorted(cfg.nodes) if cfg.nodes[n].kind in BRANCHING]
    changed = True
    while changed:
        changed = False
        for s in branches:
            if s in vi or s in gammas:
                continue
            for g in gammas:
                if condition3(first_impact_sets(cfg, s, g, vi, pdt, reach[g])):
                    vi |= pdg.backward_closure({s}, control=False, data=True)
                    changed = True
                    break
    return vi


def value_slice(pdg: Pdg, cfg: Cfg, criterion: SliceCriterion,
                extra: Sequence[int] = (), base: Iterable[int] = ()) -> Slice:
    gammas = _starts(criterion, extra)
    vi = value_impacting(pdg, cfg, gammas, base)
    retained = pdg.backward_closure(vi | set(gammas), control=False, data=True)
    return _assemble(cfg, pdg, criterion, retained, VALUE, tuple(extra))


def make_slice(kind: str, cfg: Cfg, criterion: SliceCriterion, pdg: Optional[Pdg] = None) -> Slice:
    pdg = pdg or cached_pdg(cfg)
    if kind == BACKWARD:
        return backward_slice(pdg, cfg, criterion)
    if kind == THIN:
        return thin_slice(pdg, cfg, criterion)
    if kind == VALUE:
        return value_slice(pdg, cfg, criterion)
    raise ValueError(f"unknown slicer {kind!r}")


def refine_slice(slice_: Slice, pdg: Pdg, cfg: Cfg, predicate: int,
                 strategy: str = VALUE) -> Slice:
    """Add the abstracted branch ``predicate`` to the criterion and re-slice.

    ``predicate`` is the branch's instruction id.  The result keeps every
    instruction of the input slice.
    """
    if predicate not in slice_.abstracted:
        raise UnknownPredicateError(f"{predicate} is not an abstract predicate of this slice")
    extra = slice_.extra + (predicate,)
    if strategy == VALUE:
        fresh = value_slice(pdg, cfg, slice_.criterion, extra, base=slice_.retained)
    elif strategy == THIN:
        fresh = thin_slice(pdg, cfg, slice_.criterion, extra, base=slice_.retained)
    else:
        raise ValueError(f"unknown refinement strategy {strategy!r}")
    retained = pdg.backward_closure(set(fresh.retained) | set(slice_.retained),
                                    control=False, data=True)
    out = _assemble(cfg, pdg, slice_.criterion, retained, slice_.kind, extra,
                    slice_.refinement_count + 1)
    if not out.retained >= slice_.retained:
        raise InternalError("refinement lost instructions")
    return out


def nearest_predicate(slice_: Slice, pdg: Pdg, candidates: Optional[Iterable[int]] = None) -> int:
    """The abstracted branch closest to the criterion in the PDG; ties by id."""
    pool = set(slice_.abstracted if candidates is None else candidates) & set(slice_.abstracted)
    if not pool:
        raise UnknownPredicateError("slice has no abstract predicates")
    dist = pdg.distances_to(slice_.criterion.instruction)
    return min(pool, key=lambda b: (dist.get(b, float("inf")), b))


def fully_refine(slice_: Slice, pdg: Pdg, cfg: Cfg, strategy: str = VALUE) -> Slice:
    while slice_.abstracted:
        slice_ = refine_slice(slice_, pdg, cfg, nearest_predicate(slice_, pdg), strategy)
    return slice_
