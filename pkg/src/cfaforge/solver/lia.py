"""Conjunctions of linear integer constraints.

Equalities with a unit coefficient are eliminated by substitution, the
remaining inequalities by Fourier-Motzkin with gcd tightening (sound for
integers).  A model is read back by substitution in reverse elimination
order; when the rational shadow has no integer point, a bounded
branch-and-bound search takes over.  Disequalities are split lazily.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

from .formula import Atom

SAT = "sat"
UNSAT = "unsat"
UNKNOWN = "unknown"

WINDOW = 2 ** 20
MAX_CONSTRAINTS = 4000
DEFAULT_BUDGET = 400

Coeffs = dict[str, int]
Ineq = tuple[tuple[tuple[str, int], ...], int]  # sum <= b


class _Unsat(Exception):
    pass


class _GiveUp(Exception):
    pass


def _norm_ineq(coeffs: Coeffs, b: int) -> Optional[Ineq]:
    """gcd-tightened inequality; None if trivially true; raises if false."""
    items = tuple(sorted((v, c) for v, c in coeffs.items() if c))
    if not items:
        if 0 <= b:
            return None
        raise _Unsat
    g = 0
    for _, c in items:
        g = math.gcd(g, c)
    if g > 1:
        items = tuple((v, c // g) for v, c in items)
        b = b // g
    return items, b


def _substitute(coeffs: Coeffs, const: int, var: str, expr: Coeffs, expr_const: int) -> tuple[Coeffs, int]:
    """Replace ``var`` by ``expr + expr_const`` in ``coeffs . x`` (moving constants to the right)."""
    c = coeffs.get(var, 0)
    if not c:
        return coeffs, const
    out = {v: k for v, k in coeffs.items() if v != var}
    for v, k in expr.items():
        out[v] = out.get(v, 0) + c * k
    return out, const - c * expr_const


class _Budget:
    def __init__(self, steps: int):
        self.steps = steps

    def spend(self) -> None:
        self.steps -= 1
        if self.steps < 0:
            raise _GiveUp


def check(literals: list[tuple[Atom, bool]], budget: int = DEFAULT_BUDGET) -> tuple[str, Optional[dict[str, int]]]:
    """Decide a conjunction of (atom, polarity) literals over the integers."""
    eqs: list[tuple[Coeffs, int]] = []
    ineqs: list[tuple[Coeffs, int]] = []
    diseqs: list[tuple[Coeffs, int]] = []
    variables: set[str] = set()
    for atom, pol in literals:
        d = dict(atom.coeffs)
        variables |= d.keys()
        if atom.op == "<=":
            if pol:
                ineqs.append((d, atom.rhs))
            else:
                ineqs.append(({v: -c for v, c in d.items()}, -atom.rhs - 1))
        elif pol:
            eqs.append((d, atom.rhs))
        else:
            diseqs.append((d, atom.rhs))
    try:
        model = _solve(eqs, ineqs, diseqs, _Budget(budget))
    except _Unsat:
        return UNSAT, None
    except _GiveUp:
        return UNKNOWN, None
    if model is None:
        return UNKNOWN, None
    full = {v: model.get(v, 0) for v in variables}
    for atom, pol in literals:  # defensive self-check
        if atom.holds(full) != pol:
            return UNKNOWN, None
    return SAT, full


def _solve(eqs, ineqs, diseqs, budget: _Budget) -> Optional[dict[str, int]]:
    budget.spend()
    eqs = [(dict(c), b) for c, b in eqs]
    ineqs = [(dict(c), b) for c, b in ineqs]
    diseqs = [(dict(c), b) for c, b in diseqs]
    substitutions: list[tuple[str, Coeffs, int]] = []  # var = expr + const
    # 1. equalities
    while eqs:
        coeffs, b = eqs.pop()
        coeffs = {v: c for v, c in coeffs.items() if c}
        if not coeffs:
            if b != 0:
                raise _Unsat
            continue
        g = 0
        for c in coeffs.values():
            g = math.gcd(g, c)
        if b % g:
            raise _Unsat
        unit = next((v for v in sorted(coeffs) if abs(coeffs[v]) == 1), None)
        if unit is None:
            ineqs.append((coeffs, b))
            ineqs.append(({v: -c for v, c in coeffs.items()}, -b))
            continue
        cu = coeffs[unit]
        # unit = (b - sum others) / cu
        expr = {v: -c * cu for v, c in coeffs.items() if v != unit}
        const = b * cu
        substitutions.append((unit, expr, const))
        eqs = [_substitute(c, k, unit, expr, const) for c, k in eqs]
        ineqs = [_substitute(c, k, unit, expr, const) for c, k in ineqs]
        diseqs = [_substitute(c, k, unit, expr, const) for c, k in diseqs]
    # 2. inequalities
    system = []
    for c, b in ineqs:
        n = _norm_ineq(c, b)
        if n is not None:
            system.append(n)
    live_diseqs = []
    for c, b in diseqs:
        c = {v: k for v, k in c.items() if k}
        if not c:
            if b == 0:
                raise _Unsat
            continue
        live_diseqs.append((c, b))
    model = _integer_model(system, budget)
    if model is None:
        return None
    # 3. disequalities, split lazily
    for c, b in live_diseqs:
        if sum(k * model.get(v, 0) for v, k in c.items()) == b:
            rest_eq = []
            rest_ineq = [(dict(cc), bb) for cc, bb in system]
            below = _try(rest_eq, rest_ineq + [(c, b - 1)], live_diseqs, budget)
            if below is not None and below is not _UNK:
                return _close(below, substitutions)
            above = _try(rest_eq, rest_ineq + [({v: -k for v, k in c.items()}, -b - 1)],
                         live_diseqs, budget)
            if above is not None and above is not _UNK:
                return _close(above, substitutions)
            if below is _UNK or above is _UNK:
                return None
            raise _Unsat
    return _close(model, substitutions)


_UNK = object()


def _try(eqs, ineqs, diseqs, budget):
    try:
        m = _solve(eqs, ineqs, diseqs, budget)
    except _Unsat:
        return None
    return _UNK if m is None else m


def _close(model: dict[str, int], substitutions) -> dict[str, int]:
    model = dict(model)
    for var, expr, const in reversed(substitutions):
        model[var] = const + sum(c * model.get(v, 0) for v, c in expr.items())
        for v in expr:
            model.setdefault(v, 0)
    return model


# ---------------------------------------------------------------------------
# Fourier-Motzkin
# ---------------------------------------------------------------------------


def _eliminate(system: list[Ineq], var: str) -> list[Ineq]:
    lower, upper, rest = [], [], []
    for items, b in system:
        c = dict(items).get(var, 0)
        if c > 0:
            upper.append((items, b, c))
        elif c < 0:
            lower.append((items, b, -c))
        else:
            rest.append((items, b))
    out = {}
    for items, b in rest:
        out[items] = min(b, out.get(items, b))
    for ui, ub, uc in upper:
        for li, lb, lc in lower:
            d: dict[str, int] = {}
            for v, c in ui:
                d[v] = d.get(v, 0) + lc * c
            for v, c in li:
                d[v] = d.get(v, 0) + uc * c
            n = _norm_ineq(d, lc * ub + uc * lb)
            if n is not None:
                items, b = n
                out[items] = min(b, out.get(items, b))
        if len(out) > MAX_CONSTRAINTS:
            raise _GiveUp
    return list(out.items())


def _choose(system: list[Ineq]) -> str:
    counts: dict[str, list[int]] = {}
    for items, _ in system:
        for v, c in items:
            counts.setdefault(v, [0, 0])[0 if c > 0 else 1] += 1
    return min(sorted(counts), key=lambda v: counts[v][0] * counts[v][1] - counts[v][0] - counts[v][1])


def _project(system: list[Ineq]) -> list[tuple[str, list[Ineq]]]:
    """Eliminate every variable; returns the stages for back-substitution."""
    stages = []
    current = system
    while True:
        vars_left = {v for items, _ in current for v, _ in items}
        if not vars_left:
            break
        var = _choose(current)
        stages.append((var, current))
        current = _eliminate(current, var)
    for items, b in current:
        if not items and b < 0:
            raise _Unsat
    return stages


def _bounds(system: list[Ineq], var: str, model: dict) -> tuple[Optional[Fraction], Optional[Fraction]]:
    lo = hi = None
    for items, b in system:
        d = dict(items)
        c = d.get(var, 0)
        if not c:
            continue
        # variables that vanished during projection are unconstrained below: use 0
        rest = sum(k * model.setdefault(v, 0) for v, k in items if v != var)
        bound = Fraction(b - rest, c)
        if c > 0:
            hi = bound if hi is None else min(hi, bound)
        else:
            lo = bound if lo is None else max(lo, bound)
    return lo, hi


def _pick(lo: Optional[Fraction], hi: Optional[Fraction]) -> Optional[int]:
    ilo = None if lo is None else math.ceil(lo)
    ihi = None if hi is None else math.floor(hi)
    if ilo is not None and ihi is not None and ilo > ihi:
        return None
    if ilo is not None and ilo > 0:
        return ilo
    if ihi is not None and ihi < 0:
        return ihi
    return 0


def _integer_model(system: list[Ineq], budget: _Budget) -> Optional[dict[str, int]]:
    stages = _project(system)
    model: dict[str, int] = {}
    for var, stage in reversed(stages):
        lo, hi = _bounds(stage, var, model)
        v = _pick(lo, hi)
        if v is None:
            return _branch_and_bound(system, budget)
        model[var] = v
    return model


def _branch_and_bound(system: list[Ineq], budget: _Budget) -> Optional[dict[str, int]]:
    variables = sorted({v for items, _ in system for v, _ in items})
    boxed = list(system)
    for v in variables:
        boxed.append((((v, 1),), WINDOW))
        boxed.append((((v, -1),), WINDOW))
    try:
        found = _bb(boxed, budget)
    except _Unsat:
        found = None
    if found is not None:
        return found
    # exhausted inside the window: unsat only if the window did not matter
    for v in variables:
        for items in (((v, 1),), ((v, -1),)):
            probe = system + [(tuple((x, -c) for x, c in items), -WINDOW - 1)]
            try:
                _project(probe)
            except _Unsat:
                continue
            return None  # solutions may exist outside the window
    raise _Unsat


def _bb(system: list[Ineq], budget: _Budget) -> Optional[dict[str, int]]:
    budget.spend()
    stages = _project(system)
    model: dict[str, int] = {}
    for var, stage in reversed(stages):
        lo, hi = _bounds(stage, var, model)
        v = _pick(lo, hi)
        if v is None:
            split = lo if lo is not None else hi
            for extra in ((((var, 1),), math.floor(split)), (((var, -1),), -math.ceil(split))):
                try:
                    found = _bb(system + [extra], budget)
                except _Unsat:
                    continue
                if found is not None:
                    return found
            raise _Unsat
        model[var] = v
    return model
