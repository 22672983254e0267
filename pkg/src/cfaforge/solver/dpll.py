"""DPLL over a Tseitin encoding, with lazy theory checks."""

from __future__ import annotations

from typing import Optional

from . import lia
from .formula import Atom, BAnd, BAtom, BConst, BNot, BOr, BVar, Node

Clause = tuple[int, ...]


class Cnf:
    """Tseitin clauses; positive ints are variables, negatives their negation."""

    def __init__(self) -> None:
        self.clauses: list[Clause] = []
        self.count = 0
        self.atoms: dict[int, Atom] = {}
        self.bools: dict[int, str] = {}
        self._atom_ids: dict[Atom, int] = {}
        self._bool_ids: dict[str, int] = {}
        self._memo: dict[Node, int] = {}

    def fresh(self) -> int:
        self.count += 1
        return self.count

    def literal(self, n: Node) -> int:
        if n in self._memo:
            return self._memo[n]
        if isinstance(n, BAtom):
            if n.atom not in self._atom_ids:
                v = self.fresh()
                self._atom_ids[n.atom] = v
                self.atoms[v] = n.atom
            lit = self._atom_ids[n.atom]
        elif isinstance(n, BVar):
            if n.name not in self._bool_ids:
                v = self.fresh()
                self._bool_ids[n.name] = v
                self.bools[v] = n.name
            lit = self._bool_ids[n.name]
        elif isinstance(n, BNot):
            lit = -self.literal(n.arg)
        elif isinstance(n, BConst):
            v = self.fresh()
            self.clauses.append((v,) if n.value else (-v,))
            lit = v
        elif isinstance(n, BAnd):
            kids = [self.literal(a) for a in n.args]
            lit = self.fresh()
            for k in kids:
                self.clauses.append((-lit, k))
            self.clauses.append((lit,) + tuple(-k for k in kids))
        elif isinstance(n, BOr):
            kids = [self.literal(a) for a in n.args]
            lit = self.fresh()
            for k in kids:
                self.clauses.append((lit, -k))
            self.clauses.append((-lit,) + tuple(kids))
        else:
            raise TypeError(n)
        self._memo[n] = lit
        return lit

    def lookup(self, n: Node) -> Optional[int]:
        return self._memo.get(n)

    def assert_root(self, n: Node) -> None:
        if isinstance(n, BAnd):
            for a in n.args:
                self.assert_root(a)
        else:
            self.clauses.append((self.literal(n),))


def sat(clauses: list[Clause], nvars: int) -> Optional[dict[int, bool]]:
    """Plain DPLL with unit propagation; returns a total assignment or None."""
    assign: dict[int, bool] = {}
    trail: list[tuple[int, bool]] = []  # (var, is_decision)
    watch: dict[int, list[int]] = {}
    for i, cl in enumerate(clauses):
        for lit in cl:
            watch.setdefault(-lit, []).append(i)

    def value(lit: int) -> Optional[bool]:
        v = assign.get(abs(lit))
        if v is None:
            return None
        return v if lit > 0 else not v

    def propagate(queue: list[int]) -> bool:
        while queue:
            lit = queue.pop()
            for ci in watch.get(lit, ()):
                unassigned = None
                n_un = 0
                satisfied = False
                for l in clauses[ci]:
                    val = value(l)
                    if val is True:
                        satisfied = True
                        break
                    if val is None:
                        n_un += 1
                        unassigned = l
                        if n_un > 1:
                            break
                if satisfied or n_un > 1:
                    continue
                if n_un == 0:
                    return False
                assign[abs(unassigned)] = unassigned > 0
                trail.append((abs(unassigned), False))
                queue.append(unassigned)
        return True

    # initial units
    queue = []
    for cl in clauses:
        if not cl:
            return None
        if len(cl) == 1:
            val = value(cl[0])
            if val is False:
                return None
            if val is None:
                assign[abs(cl[0])] = cl[0] > 0
                trail.append((abs(cl[0]), False))
                queue.append(cl[0])
    if not propagate(queue):
        return None
    base = len(trail)
    while True:
        var = next((v for v in range(1, nvars + 1) if v not in assign), None)
        if var is None:
            return dict(assign)
        assign[var] = True
        trail.append((var, True))
        ok = propagate([var])
        while not ok:
            # backtrack to the last decision that has not been flipped
            while len(trail) > base:
                v, decision = trail.pop()
                val = assign.pop(v)
                if decision and val:
                    assign[v] = False
                    trail.append((v, False))  # flipped: no longer a decision
                    ok = propagate([-v])
                    break
            else:
                return None


def dpll_t(root: Node, budget: int = lia.DEFAULT_BUDGET, max_rounds: int = 2000
           ) -> tuple[str, Optional[dict[str, int]], Optional[dict[str, bool]]]:
    """Decide ``root``; returns (status, int model, bool model)."""
    if isinstance(root, BConst):
        return (lia.SAT, {}, {}) if root.value else (lia.UNSAT, None, None)
    cnf = Cnf()
    cnf.assert_root(root)
    clauses = list(cnf.clauses)
    saw_unknown = False
    for _ in range(max_rounds):
        assignment = sat(clauses, cnf.count)
        if assignment is None:
            return (lia.UNKNOWN if saw_unknown else lia.UNSAT), None, None
        lits = sorted(_justify(cnf, root, assignment))
        status, model = lia.check([(cnf.atoms[v], val) for v, val in lits], budget)
        if status == lia.SAT:
            bools = {name: assignment[v] for v, name in cnf.bools.items()}
            return lia.SAT, model, bools
        if status == lia.UNKNOWN:
            saw_unknown = True
            core = lits
        else:
            core = _minimize(cnf, lits, budget)
        blocking = tuple(-v if val else v for v, val in core)
        if not blocking:
            return (lia.UNKNOWN if saw_unknown else lia.UNSAT), None, None
        clauses.append(blocking)
    return lia.UNKNOWN, None, None


def _justify(cnf: Cnf, root: Node, assignment: dict[int, bool]) -> set[tuple[int, bool]]:
    """Theory literals that suffice to make ``root`` true under ``assignment``.

    Atoms outside a satisfied disjunct are left out of the theory check, so
    models are found on smaller systems and blocking clauses stay general.
    """
    out: set[tuple[int, bool]] = set()

    def value(n: Node) -> bool:
        if isinstance(n, BConst):
            return n.value
        lit = cnf.lookup(n)
        if lit is not None:
            return assignment[abs(lit)] == (lit > 0)
        # the root conjunction is asserted child by child and has no variable
        if isinstance(n, BNot):
            return not value(n.arg)
        if isinstance(n, BAnd):
            return all(value(a) for a in n.args)
        return any(value(a) for a in n.args)

    todo = [root]
    while todo:
        n = todo.pop()
        if isinstance(n, BAtom):
            v = cnf.lookup(n)
            out.add((v, assignment[v]))
        elif isinstance(n, BNot):
            todo.append(n.arg)
        elif isinstance(n, (BAnd, BOr)):
            want_all = value(n) == isinstance(n, BAnd)
            if want_all:
                todo.extend(n.args)
            else:
                # one child with the deciding value explains the node
                decisive = value(n)
                todo.append(next(a for a in n.args if value(a) == decisive))
    return out


def _minimize(cnf: Cnf, lits: list[tuple[int, bool]], budget: int) -> list[tuple[int, bool]]:
    """Shrink an unsat set of theory literals by deleting ever smaller chunks."""
    def unsat(trial: list[tuple[int, bool]]) -> bool:
        return lia.check([(cnf.atoms[v], val) for v, val in trial], budget)[0] == lia.UNSAT

    core = list(lits)
    chunk = max(1, len(core) // 2)
    while True:
        i = 0
        while i < len(core):
            trial = core[:i] + core[i + chunk:]
            if unsat(trial):
                core = trial
            else:
                i += chunk
        if chunk == 1:
            return core
        chunk = max(1, chunk // 2)
