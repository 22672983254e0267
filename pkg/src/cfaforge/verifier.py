"""CEGAR over control flow automata with Cartesian predicate abstraction.

Refinement mines predicates from weakest preconditions computed backwards
along the infeasible prefix of a spurious counterexample.  Symbolic
reasoning uses mathematical integers; a counterexample the solver accepts
is additionally replayed with 32-bit wrap-around before being reported.
"""

from __future__ import annotations

import itertools
import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .cfa import ASSIGN, ASSUME, HAVOC, Cfa, Edge, Operation
from .errors import RefinementStuck, ResourceLimit
from .frontend import ast as A
from .optimizer import fold_expr
from .semantics import DivisionByZero, eval_expr, to_type
from .solver import SAT, UNSAT, Solver
from .solver.formula import BAtom, BNot, Encoder

BFS = "bfs"
DFS = "dfs"

TRUE = A.BoolLit(True, A.BOOL)
FALSE = A.BoolLit(False, A.BOOL)


@dataclass
class Limits:
    timeout_s: float = 180.0
    max_arg_nodes: int = 1_000_000
    max_iterations: int = 200


# ---------------------------------------------------------------------------
# expressions helpers
# ---------------------------------------------------------------------------


def simplify(e: A.Expr) -> A.Expr:
    """Constant folding plus boolean absorption."""
    e = fold_expr(e)
    if isinstance(e, A.Unary) and e.op == "!":
        inner = simplify(e.operand)
        return A.negate(inner)
    if isinstance(e, A.Binary) and e.op in A.LOGIC_OPS:
        left, right = simplify(e.left), simplify(e.right)
        absorbing = e.op == "||"  # true absorbs ||, false absorbs &&
        for a, b in ((left, right), (right, left)):
            if isinstance(a, A.BoolLit):
                return A.BoolLit(absorbing, A.BOOL) if a.value == absorbing else b
        if left == right:
            return left
        return A.Binary(e.op, left, right, A.BOOL)
    if isinstance(e, A.Binary) and (e.op in A.REL_OPS or e.op in A.EQ_OPS) and e.left.ty != A.BOOL:
        return _normalize_cmp(e)
    return e


_MIRROR = {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "==": "==", "!=": "!="}


def _normalize_cmp(e: A.Binary) -> A.Expr:
    """Rewrite a linear comparison as ``sum(c*x) op k`` with a positive leading coefficient."""
    enc = Encoder()
    try:
        d = enc.lin(e.left) - enc.lin(e.right)
    except TypeError:
        return e
    if enc.approximate or enc.side:
        return e
    coeffs, k, op = d.as_dict(), -d.const, e.op
    if not coeffs:
        return A.BoolLit(eval_expr(A.Binary(op, A.IntLit(0, A.INT), A.IntLit(k, A.INT), A.BOOL), {}), A.BOOL)
    if coeffs[min(coeffs)] < 0:
        coeffs = {v: -c for v, c in coeffs.items()}
        k, op = -k, _MIRROR[op]
    g = 0
    for c in coeffs.values():
        g = math.gcd(g, c)
    if g > 1:
        if k % g == 0:
            coeffs = {v: c // g for v, c in coeffs.items()}
            k //= g
        elif op in A.EQ_OPS:
            return A.BoolLit(op == "!=", A.BOOL)
    return A.Binary(op, _lin_expr(coeffs, None), A.IntLit(k, A.INT), A.BOOL)


def atoms(e: A.Expr) -> list[A.Expr]:
    """Maximal subformulas without boolean connectives."""
    if isinstance(e, A.Unary) and e.op == "!":
        return atoms(e.operand)
    if isinstance(e, A.Binary) and e.op in A.LOGIC_OPS:
        return atoms(e.left) + atoms(e.right)
    if isinstance(e, A.BoolLit):
        return []
    return [e]


def predicate_key(p: A.Expr):
    """Key identifying a predicate up to negation and linear rewriting."""
    enc = Encoder()
    try:
        node = enc.node(p)
    except TypeError:
        return ("expr", str(p))
    if enc.approximate or enc.side:
        return ("expr", str(p))
    if isinstance(node, BNot):
        node = node.arg
    if isinstance(node, BAtom):
        return ("atom", node.atom)
    return ("node", node)


def _mk_or(a: A.Expr, b: A.Expr) -> A.Expr:
    return simplify(A.Binary("||", a, b, A.BOOL))


def _mk_and(a: A.Expr, b: A.Expr) -> A.Expr:
    return simplify(A.Binary("&&", a, b, A.BOOL))


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------


@dataclass
class Precision:
    predicates: list[A.Expr] = field(default_factory=list)
    keys: set = field(default_factory=set)

    def add(self, p: A.Expr) -> bool:
        p = simplify(p)
        if isinstance(p, A.BoolLit):
            return False
        k = predicate_key(p)
        if k in self.keys:
            return False
        self.keys.add(k)
        self.predicates.append(p)
        return True

    def __len__(self) -> int:
        return len(self.predicates)


State = tuple  # per-predicate True / False / None (unknown)


@dataclass
class ArgNode:
    id: int
    location: int
    state: State
    parent: Optional["ArgNode"] = None
    edge: Optional[Edge] = None
    covered_by: Optional["ArgNode"] = None

    def path(self) -> list[Edge]:
        out = []
        n = self
        while n.edge is not None:
            out.append(n.edge)
            n = n.parent
        return out[::-1]


@dataclass
class Counterexample:
    edges: list[Edge]
    feasible: Optional[bool] = None
    failure_index: Optional[int] = None
    model: Optional[dict] = None
    havoc_values: dict = field(default_factory=dict)  # (cfg node, visit) -> value
    initial_values: dict = field(default_factory=dict)  # variable -> value

    @property
    def path(self) -> list[tuple[int, Operation]]:
        return [(e.src, e.op) for e in self.edges]

    @property
    def ops(self) -> list[Operation]:
        return [e.op for e in self.edges]

    def phi_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.phi is not None]


@dataclass
class Verdict:
    safe: Optional[bool]
    arg_size: int = 0
    cumulative_arg_size: int = 0
    iterations: int = 0
    time_ms: float = 0.0
    witness: Optional[Counterexample] = None
    predicates: list[A.Expr] = field(default_factory=list)
    reason: str = ""


# ---------------------------------------------------------------------------
# abstraction
# ---------------------------------------------------------------------------


class Abstraction:
    def __init__(self, precision: Precision, solver: Solver):
        self.preds = precision.predicates
        self.solver = solver
        self.pred_vars = [A.variables(p) for p in self.preds]
        self.fresh = itertools.count()

    def _context(self, state: State, seed_vars: set[str]) -> list[A.Expr]:
        """Known state literals connected to ``seed_vars`` through shared variables."""
        known = [(i, v) for i, v in enumerate(state) if v is not None]
        vars_ = set(seed_vars)
        chosen: set[int] = set()
        changed = True
        while changed:
            changed = False
            for i, _ in known:
                if i not in chosen and self.pred_vars[i] & vars_:
                    chosen.add(i)
                    vars_ |= self.pred_vars[i]
                    changed = True
        return [self.preds[i] if state[i] else A.negate(self.preds[i]) for i in sorted(chosen)]

    def _unsat(self, formulas: list[A.Expr]) -> bool:
        fs = [simplify(f) for f in formulas]
        if any(f == FALSE for f in fs):
            return True
        fs = [f for f in fs if f != TRUE]
        if not fs:
            return False
        return self.solver.check(fs).status == UNSAT

    def _decide(self, ctx: list[A.Expr], p: A.Expr) -> Optional[bool]:
        p = simplify(p)
        if isinstance(p, A.BoolLit):
            return p.value
        if self._unsat(ctx + [A.negate(p)]):
            return True
        if self._unsat(ctx + [p]):
            return False
        return None

    def post(self, state: State, op: Operation) -> Optional[State]:
        if op.kind == ASSUME:
            c = simplify(op.expr)
            if c == TRUE:
                return state
            cvars = set(A.variables(c))
            ctx = self._context(state, cvars)
            if self._unsat(ctx + [c]):
                return None
            out = list(state)
            for i, v in enumerate(state):
                if v is None and self.pred_vars[i] & (cvars | set().union(*map(A.variables, ctx))):
                    out[i] = self._decide(self._context(state, cvars | self.pred_vars[i]) + [c], self.preds[i])
            return tuple(out)
        x = op.var
        out = list(state)
        for i, p in enumerate(self.preds):
            if x not in self.pred_vars[i]:
                continue
            if op.kind == ASSIGN:
                p2 = A.substitute(p, {x: op.expr})
            else:
                p2 = A.substitute(p, {x: A.Var(f"{x}#h{next(self.fresh)}", p_type(p, x))})
            out[i] = self._decide(self._context(state, set(A.variables(p2))), p2)
        return tuple(out)


def p_type(p: A.Expr, name: str) -> Optional[str]:
    for n in A.walk(p):
        if isinstance(n, A.Var) and n.name == name:
            return n.ty
    return None


def abstract_post(state: State, op: Operation, precision: Precision,
                  solver: Optional[Solver] = None) -> Optional[State]:
    """Cartesian successor of ``state``; None stands for the empty state."""
    return Abstraction(precision, solver or Solver()).post(state, op)


def _subsumes(general: State, specific: State) -> bool:
    return all(g is None or g == s for g, s in zip(general, specific))


@dataclass
class Exploration:
    arg_size: int
    counterexample: Optional[list[Edge]]
    nodes: list[ArgNode] = field(default_factory=list)


def explore(cfa: Cfa, precision: Precision, search: str = BFS, solver: Optional[Solver] = None,
            max_nodes: int = 1_000_000, deadline: Optional[float] = None,
            keep_nodes: bool = False) -> Exploration:
    """Build the ARG; stop at the first node on the error location."""
    solver = solver or Solver()
    absn = Abstraction(precision, solver)
    root = ArgNode(0, cfa.initial, tuple(None for _ in precision.predicates))
    ids = itertools.count(1)
    reached: dict[int, list[ArgNode]] = {cfa.initial: [root]}
    work: deque[ArgNode] = deque([root])
    size = 1
    all_nodes = [root] if keep_nodes else []
    while work:
        node = work.popleft() if search == BFS else work.pop()
        if node.covered_by is not None:
            continue
        for edge in cfa.out(node.location):
            if deadline is not None and time.monotonic() > deadline:
                raise ResourceLimit("timeout")
            succ = absn.post(node.state, edge.op)
            if succ is None:
                continue
            child = ArgNode(next(ids), edge.dst, succ, node, edge)
            size += 1
            if size > max_nodes:
                raise ResourceLimit("ARG node limit reached")
            if keep_nodes:
                all_nodes.append(child)
            if edge.dst == cfa.error:
                return Exploration(size, child.path(), all_nodes)
            same = reached.setdefault(edge.dst, [])
            cover = next((m for m in same if m.covered_by is None and _subsumes(m.state, succ)), None)
            if cover is not None:
                child.covered_by = cover
                continue
            # the new node may make older, more specific ones redundant
            for m in same:
                if m.covered_by is None and _subsumes(succ, m.state):
                    m.covered_by = child
            same.append(child)
            work.append(child)
    return Exploration(size, None, all_nodes)


# ---------------------------------------------------------------------------
# feasibility
# ---------------------------------------------------------------------------


def _ssa_name(var: str, k: int) -> str:
    return f"{var}#{k}"


def path_formula(ops: Sequence[Operation], types: dict[str, str]) -> tuple[list[A.Expr], list[dict[str, int]]]:
    """One conjunct per operation, plus the variable versions before each."""
    version: dict[str, int] = {}
    conj: list[A.Expr] = []
    snapshots = []

    def cur(name: str) -> A.Expr:
        return A.Var(_ssa_name(name, version.get(name, 0)), types.get(name, A.INT))

    def rename(e: A.Expr) -> A.Expr:
        return A.substitute(e, {v: cur(v) for v in A.variables(e)})

    for op in ops:
        snapshots.append(dict(version))
        if op.kind == ASSUME:
            conj.append(rename(op.expr))
        elif op.kind == ASSIGN:
            rhs = rename(op.expr)
            version[op.var] = version.get(op.var, 0) + 1
            conj.append(A.Binary("==", cur(op.var), rhs, A.BOOL))
        else:
            version[op.var] = version.get(op.var, 0) + 1
            conj.append(TRUE)
    snapshots.append(dict(version))
    return conj, snapshots


def _replay(edges: Sequence[Edge], model: dict, types: dict[str, str]) -> Optional[tuple[dict, dict]]:
    """Run the path concretely with wrap-around; None if it diverges."""
    version: dict[str, int] = {}
    env: dict = {}
    initial: dict = {}
    havocs: dict = {}
    visits: dict[int, int] = {}

    def value_of(name: str, k: int):
        ty = types.get(name, A.INT)
        return to_type(model.get(_ssa_name(name, k), 0), ty)

    class Env(dict):
        def __missing__(self, name):
            v = value_of(name, 0)
            initial[name] = v
            self[name] = v
            return v

    env = Env()
    for e in edges:
        op = e.op
        if e.node is not None:
            visit = visits.get(e.node, 0)
        try:
            if op.kind == ASSUME:
                if not eval_expr(op.expr, env):
                    return None
            elif op.kind == ASSIGN:
                env[op.var] = eval_expr(op.expr, env)
                version[op.var] = version.get(op.var, 0) + 1
            else:
                version[op.var] = version.get(op.var, 0) + 1
                val = value_of(op.var, version[op.var])
                env[op.var] = val
                if e.node is not None:
                    havocs[(e.node, visit)] = int(val)
        except DivisionByZero:
            return None
        if e.node is not None and _ends_instruction(e):
            visits[e.node] = visit + 1
    return initial, havocs


def _ends_instruction(e: Edge) -> bool:
    """Whether traversing ``e`` completes its CFG instruction (PHI takes two edges)."""
    return not (e.phi is not None and e.op.kind == HAVOC)


def check_feasibility(edges: Sequence[Edge], cfa_or_types, solver: Optional[Solver] = None) -> Counterexample:
    """Solve the SSA path formula; find the shortest infeasible prefix."""
    solver = solver or Solver()
    types = cfa_or_types.var_types if isinstance(cfa_or_types, Cfa) else dict(cfa_or_types)
    edges = list(edges)
    conj, _ = path_formula([e.op for e in edges], types)
    verdict = solver.check(conj)
    cex = Counterexample(edges)
    if verdict.status == SAT:
        replay = _replay(edges, verdict.model, types)
        if replay is None:
            cex.feasible = None  # feasible over the integers, not with 32-bit wrap-around
            return cex
        cex.feasible = True
        cex.model = verdict.model
        cex.initial_values, cex.havoc_values = replay
        return cex
    if verdict.status != UNSAT:
        return cex
    lo, hi = 0, len(conj)  # prefix of length lo is sat, of length hi unsat
    while hi - lo > 1:
        mid = (lo + hi) // 2
        st = solver.check(conj[:mid]).status
        if st == UNSAT:
            hi = mid
        elif st == SAT:
            lo = mid
        else:
            return cex
    cex.feasible = False
    cex.failure_index = hi
    return cex


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------


MAX_CUBES = 64


def _nnf(e: A.Expr, positive: bool = True) -> A.Expr:
    if isinstance(e, A.Unary) and e.op == "!":
        return _nnf(e.operand, not positive)
    if isinstance(e, A.Binary) and e.op in A.LOGIC_OPS:
        op = e.op if positive else ("||" if e.op == "&&" else "&&")
        return A.Binary(op, _nnf(e.left, positive), _nnf(e.right, positive), A.BOOL)
    return e if positive else A.negate(e)


def _dnf(e: A.Expr) -> Optional[list[list[A.Expr]]]:
    if isinstance(e, A.Binary) and e.op == "||":
        a, b = _dnf(e.left), _dnf(e.right)
        if a is None or b is None or len(a) + len(b) > MAX_CUBES:
            return None
        return a + b
    if isinstance(e, A.Binary) and e.op == "&&":
        a, b = _dnf(e.left), _dnf(e.right)
        if a is None or b is None or len(a) * len(b) > MAX_CUBES:
            return None
        return [x + y for x in a for y in b]
    if isinstance(e, A.BoolLit):
        return [[]] if e.value else []
    return [[e]]


def _lin_expr(coeffs: dict[str, int], types) -> A.Expr:
    expr: Optional[A.Expr] = None
    for v in sorted(coeffs):
        c = coeffs[v]
        term: A.Expr = A.Var(v, A.INT)
        if abs(c) != 1:
            term = A.Binary("*", A.IntLit(abs(c), A.INT), term, A.INT)
        if expr is None:
            expr = term if c > 0 else A.Unary("-", term, A.INT)
        else:
            expr = A.Binary("+" if c > 0 else "-", expr, term, A.INT)
    return expr if expr is not None else A.IntLit(0, A.INT)


def _exists_cube(cube: list[A.Expr], x: str) -> Optional[list[A.Expr]]:
    """Project ``x`` out of a conjunction of literals (rational shadow)."""
    keep, lower, upper = [], [], []
    enc = Encoder()
    eqs = []
    for lit in cube:
        if x not in A.variables(lit):
            keep.append(lit)
            continue
        if not isinstance(lit, A.Binary) or lit.op not in A.REL_OPS | A.EQ_OPS:
            return None
        try:
            d = enc.lin(lit.left) - enc.lin(lit.right)
        except TypeError:
            return None
        if enc.approximate or enc.side:
            return None
        coeffs, const = d.as_dict(), d.const
        c = coeffs.get(x, 0)
        if c == 0:
            keep.append(lit)
            continue
        op = lit.op
        if op == "!=":
            continue  # dropping a disequality only weakens the cube
        if op == "==":
            eqs.append((coeffs, const))
            continue
        if op in (">", ">="):
            coeffs = {v: -k for v, k in coeffs.items()}
            const = -const
            op = "<" if op == ">" else "<="
        if op == "<":
            const += 1  # sum + const < 0  <=>  sum + const + 1 <= 0
        c = coeffs[x]
        (upper if c > 0 else lower).append((coeffs, const))
    if eqs:
        coeffs, const = eqs[0]
        c = coeffs[x]
        rest_eqs = eqs[1:]
        out = list(keep)
        for group, is_eq in ((rest_eqs, True), (lower + upper, False)):
            for oc, ok in group:
                k = oc.get(x, 0)
                # c*other - k*eq eliminates x; keep direction for inequalities
                m1, m2 = abs(c), (k if c > 0 else -k)
                comb = {v: m1 * oc.get(v, 0) - m2 * coeffs.get(v, 0) for v in set(oc) | set(coeffs)}
                comb.pop(x, None)
                cst = m1 * ok - m2 * const
                out.append(_lin_cmp(comb, cst, "==" if is_eq else "<="))
        return out
    out = list(keep)
    for uc, uk in upper:
        for lc, lk in lower:
            a, b = uc[x], -lc[x]
            comb = {v: b * uc.get(v, 0) + a * lc.get(v, 0) for v in set(uc) | set(lc)}
            comb.pop(x, None)
            out.append(_lin_cmp(comb, b * uk + a * lk, "<="))
    return out


def _lin_cmp(coeffs: dict[str, int], const: int, op: str) -> A.Expr:
    """``sum(coeffs) + const op 0`` as an expression with the constant moved right."""
    coeffs = {v: c for v, c in coeffs.items() if c}
    return simplify(A.Binary(op, _lin_expr(coeffs, None), A.IntLit(-const, A.INT), A.BOOL))


def forall(x: str, ty: Optional[str], q: A.Expr) -> Optional[A.Expr]:
    if x not in A.variables(q):
        return q
    if ty == A.BOOL:
        t = A.substitute(q, {x: TRUE})
        f = A.substitute(q, {x: FALSE})
        return _mk_and(t, f)
    cubes = _dnf(_nnf(simplify(A.negate(q))))
    if cubes is None:
        return None
    disj: A.Expr = FALSE
    for cube in cubes:
        projected = _exists_cube(cube, x)
        if projected is None:
            return None
        conj: A.Expr = TRUE
        for lit in projected:
            conj = _mk_and(conj, lit)
        disj = _mk_or(disj, conj)
    return simplify(A.negate(disj))


def derive_predicates(cex: Counterexample, types: dict[str, str], precision: Optional[Precision] = None,
                      solver: Optional[Solver] = None) -> list[A.Expr]:
    """Predicates mined from weakest preconditions along the infeasible prefix."""
    if cex.failure_index is None:
        raise ValueError("counterexample is not known to be infeasible")
    solver = solver or Solver()
    ops = cex.ops[:cex.failure_index]
    conj, _ = path_formula(ops, types)
    core = solver.check(conj, want_core=True).core or conj
    in_core = [c in core for c in conj]
    q: A.Expr = FALSE
    found: list[A.Expr] = []
    for i in range(len(ops) - 1, -1, -1):
        op = ops[i]
        if op.kind == ASSUME:
            if not in_core[i]:
                continue
            q = _mk_or(simplify(A.negate(op.expr)), q)
        elif op.kind == ASSIGN:
            q = simplify(A.substitute(q, {op.var: op.expr}))
        else:
            nq = forall(op.var, types.get(op.var), q)
            if nq is None:
                break
            q = nq
        if isinstance(q, A.BoolLit):
            continue
        found.extend(atoms(q))
    scratch = Precision(list(precision.predicates), set(precision.keys)) if precision else Precision()
    new = [p for p in found if scratch.add(p)]
    if not new:
        raise RefinementStuck("no new predicates from the spurious counterexample")
    return new


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def check_cfa(cfa: Cfa, search: str = BFS, limits: Optional[Limits] = None,
              solver: Optional[Solver] = None, precision: Optional[Precision] = None) -> Verdict:
    limits = limits or Limits()
    solver = solver or Solver()
    precision = precision or Precision()
    start = time.monotonic()
    deadline = start + limits.timeout_s
    verdict = Verdict(None)

    def done(safe, reason="", witness=None) -> Verdict:
        verdict.safe = safe
        verdict.reason = reason
        verdict.witness = witness
        verdict.time_ms = (time.monotonic() - start) * 1000
        verdict.predicates = list(precision.predicates)
        return verdict

    for it in range(1, limits.max_iterations + 1):
        verdict.iterations = it
        try:
            result = explore(cfa, precision, search, solver, limits.max_arg_nodes, deadline)
        except ResourceLimit as exc:
            return done(None, str(exc))
        verdict.arg_size = result.arg_size
        verdict.cumulative_arg_size += result.arg_size
        if result.counterexample is None:
            return done(True, "fixpoint")
        cex = check_feasibility(result.counterexample, cfa, solver)
        if cex.feasible:
            return done(False, "feasible counterexample", cex)
        if cex.feasible is None:
            return done(None, "counterexample feasibility unknown", cex)
        try:
            new = derive_predicates(cex, cfa.var_types, precision, solver)
        except RefinementStuck as exc:
            return done(None, str(exc), cex)
        for p in new:
            precision.add(p)
        if time.monotonic() > deadline:
            return done(None, "timeout")
    return done(None, "iteration limit")
