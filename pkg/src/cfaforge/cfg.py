"""Control flow graphs, call graphs and function inlining.

A CFG node is one atomic instruction.  Branch-like nodes (``BRANCH`` and
the abstract predicate ``PHI``) have exactly two successors stored as
``(true_target, false_target)``; every other node has at most one.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional

from .errors import (
    InternalError, MissingMainError, RecursiveCallError, UnsupportedFeatureError,
)
from .frontend import ast as A
from .frontend.parser import find_call_cycle


class Kind(enum.Enum):
    ENTRY = "entry"
    EXIT = "exit"
    ASSIGN = "assign"
    BRANCH = "branch"
    ASSERT = "assert"
    HAVOC = "havoc"
    SKIP = "skip"
    PHI = "abstract-predicate"
    CALL = "call"  # only before inlining


BRANCHING = (Kind.BRANCH, Kind.PHI)


@dataclass(frozen=True)
class Instruction:
    id: int
    kind: Kind
    var: Optional[str] = None
    expr: Optional[A.Expr] = None
    # values a havoc depends on (arguments of an extern call), or call arguments
    args: tuple[A.Expr, ...] = ()
    callee: Optional[str] = None
    pred_id: Optional[int] = None
    line: int = field(default=0, compare=False)

    def reads(self) -> frozenset[str]:
        out: set[str] = set()
        if self.expr is not None:
            out |= A.variables(self.expr)
        for a in self.args:
            out |= A.variables(a)
        return frozenset(out)

    def defines(self) -> Optional[str]:
        if self.kind in (Kind.ASSIGN, Kind.HAVOC, Kind.CALL):
            return self.var
        return None

    def exprs(self) -> list[A.Expr]:
        return ([self.expr] if self.expr is not None else []) + list(self.args)

    def map_exprs(self, fn) -> "Instruction":
        expr = fn(self.expr) if self.expr is not None else None
        args = tuple(fn(a) for a in self.args)
        if expr is self.expr and all(x is y for x, y in zip(args, self.args)):
            return self
        return replace(self, expr=expr, args=args)

    def label(self) -> str:
        k = self.kind
        if k is Kind.ENTRY:
            return "entry"
        if k is Kind.EXIT:
            return "exit"
        if k is Kind.ASSIGN:
            return f"{self.var} = {self.expr}"
        if k is Kind.BRANCH:
            return f"branch({self.expr})"
        if k is Kind.ASSERT:
            return f"assert({self.expr})"
        if k is Kind.HAVOC:
            deps = f" <- {', '.join(map(str, self.args))}" if self.args else ""
            return f"havoc({self.var}){deps}"
        if k is Kind.SKIP:
            return "skip"
        if k is Kind.PHI:
            return f"phi{self.pred_id}"
        call = f"{self.callee}({', '.join(map(str, self.args))})"
        return f"{self.var} = {call}" if self.var else call

    def __str__(self) -> str:
        return self.label()


class Cfg:
    """An immutable-by-convention control flow graph.

    ``succ[n]`` is a tuple of successor ids; for branch-like nodes it is
    ``(true_target, false_target)``.  Transformations build new graphs.
    """

    def __init__(self, nodes: dict[int, Instruction], succ: dict[int, tuple[int, ...]],
                 entry: int, exit: int, var_types: Optional[dict[str, str]] = None):
        self.nodes = nodes
        self.succ = succ
        self.entry = entry
        self.exit = exit
        self.var_types = dict(var_types or {})
        self._preds: Optional[dict[int, tuple[int, ...]]] = None
        self.cache: dict[str, object] = {}  # derived analyses, keyed by name

    # -- queries -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cfg):
            return NotImplemented
        return (self.entry == other.entry and self.exit == other.exit
                and self.nodes == other.nodes and self.succ == other.succ)

    def __hash__(self) -> int:  # pragma: no cover - graphs are not used as keys
        return hash((self.entry, self.exit, len(self.nodes)))

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.nodes))

    def __getitem__(self, nid: int) -> Instruction:
        return self.nodes[nid]

    @property
    def preds(self) -> dict[int, tuple[int, ...]]:
        if self._preds is None:
            p: dict[int, list[int]] = {n: [] for n in self.nodes}
            for n in sorted(self.nodes):
                for s in self.succ[n]:
                    if n not in p[s]:
                        p[s].append(n)
            self._preds = {n: tuple(v) for n, v in p.items()}
        return self._preds

    def edges(self) -> list[tuple[int, int, Optional[bool]]]:
        out = []
        for n in sorted(self.nodes):
            ss = self.succ[n]
            if self.nodes[n].kind in BRANCHING:
                out.append((n, ss[0], True))
                out.append((n, ss[1], False))
            else:
                out.extend((n, s, None) for s in ss)
        return out

    def variables(self) -> set[str]:
        out: set[str] = set()
        for ins in self.nodes.values():
            out |= ins.reads()
            if ins.defines():
                out.add(ins.defines())
        return out

    def asserts(self) -> list[int]:
        return [n for n in sorted(self.nodes) if self.nodes[n].kind is Kind.ASSERT]

    def reachable_from(self, start: int) -> set[int]:
        seen = {start}
        todo = [start]
        while todo:
            n = todo.pop()
            for s in self.succ[n]:
                if s not in seen:
                    seen.add(s)
                    todo.append(s)
        return seen

    def reaching_exit(self) -> set[int]:
        seen = {self.exit}
        todo = [self.exit]
        preds = self.preds
        while todo:
            n = todo.pop()
            for p in preds[n]:
                if p not in seen:
                    seen.add(p)
                    todo.append(p)
        return seen

    def check(self) -> None:
        """Raise ``InternalError`` if a structural invariant is violated."""
        if self.entry not in self.nodes or self.exit not in self.nodes:
            raise InternalError("entry/exit missing")
        if self.preds[self.entry]:
            raise InternalError("entry has predecessors")
        if self.succ[self.exit]:
            raise InternalError("exit has successors")
        for n, ins in self.nodes.items():
            ss = self.succ[n]
            if ins.kind in BRANCHING:
                if len(ss) != 2:
                    raise InternalError(f"branch {n} needs two successors")
            elif n != self.exit and len(ss) != 1:
                raise InternalError(f"node {n} ({ins}) has {len(ss)} successors")
            for s in ss:
                if s not in self.nodes:
                    raise InternalError(f"edge {n}->{s} leaves the graph")
        if self.reachable_from(self.entry) != set(self.nodes):
            raise InternalError("unreachable nodes present")
        if self.reaching_exit() != set(self.nodes):
            raise InternalError("nodes that cannot reach exit present")

    # -- construction helpers ------------------------------------------------

    def with_changes(self, nodes: Optional[dict[int, Instruction]] = None,
                     succ: Optional[dict[int, tuple[int, ...]]] = None) -> "Cfg":
        return Cfg(dict(self.nodes if nodes is None else nodes),
                   dict(self.succ if succ is None else succ),
                   self.entry, self.exit, self.var_types)

    def pruned(self) -> "Cfg":
        """Drop nodes not reachable from entry."""
        keep = self.reachable_from(self.entry)
        if self.exit not in keep:
            raise InternalError("exit became unreachable")
        return Cfg({n: i for n, i in self.nodes.items() if n in keep},
                   {n: s for n, s in self.succ.items() if n in keep},
                   self.entry, self.exit, self.var_types)

    def to_dot(self, name: str = "cfg") -> str:
        lines = [f"digraph {name} {{"]
        for n in sorted(self.nodes):
            label = self.nodes[n].label().replace('"', '\\"')
            lines.append(f'  n{n} [label="{n}: {label}"];')
        for a, b, lab in self.edges():
            attr = f' [label="{"T" if lab else "F"}"]' if lab is not None else ""
            lines.append(f"  n{a} -> n{b}{attr};")
        lines.append("}")
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"Cfg({len(self.nodes)} nodes, entry={self.entry}, exit={self.exit})"


# ---------------------------------------------------------------------------
# AST -> CFG
# ---------------------------------------------------------------------------


_EXIT_KEY = 10**9


class _Builder:
    """Lowers one function body.  Nodes are created in source order and
    finally renumbered by their sort key."""

    def __init__(self, program: A.Program, fn: A.FunctionDecl):
        self.program = program
        self.fn = fn
        self.nodes: dict[int, Instruction] = {}
        self.out: dict[int, dict[Optional[bool], int]] = {}
        self.placeholders: set[int] = set()
        self.counter = itertools.count()
        self.tmp = itertools.count()
        self.var_types: dict[str, str] = {p.name: p.type for p in fn.params}
        self.labels: dict[str, int] = {}
        self.dangling: list[tuple[int, Optional[bool]]] = []
        self.loops: list[tuple[int, list]] = []  # (continue target, break list)
        self.breaks: list[list] = []
        self.ret_var = f"{fn.name}.ret" if fn.ret_type != A.VOID and fn.name != "main" else None
        if self.ret_var:
            self.var_types[self.ret_var] = fn.ret_type
        self.entry = self.make(Kind.ENTRY)
        self.exit = self.make(Kind.EXIT, key=_EXIT_KEY)
        self.dangling = [(self.entry, None)]

    # node creation ---------------------------------------------------------

    def make(self, kind: Kind, key: Optional[int] = None, **kw) -> int:
        nid = next(self.counter) if key is None else key
        self.nodes[nid] = Instruction(nid, kind, **kw)
        self.out[nid] = {}
        return nid

    def placeholder(self) -> int:
        nid = self.make(Kind.SKIP)
        self.placeholders.add(nid)
        return nid

    def link(self, src: int, label: Optional[bool], dst: int) -> None:
        if label in self.out[src]:
            raise InternalError(f"edge {src}/{label} linked twice")
        self.out[src][label] = dst

    def attach(self, nid: int) -> None:
        for src, label in self.dangling:
            self.link(src, label, nid)
        self.dangling = [(nid, None)]

    def emit(self, kind: Kind, line: int, **kw) -> int:
        nid = self.make(kind, line=line, **kw)
        self.attach(nid)
        return nid

    def jump(self, target: int) -> None:
        for src, label in self.dangling:
            self.link(src, label, target)
        self.dangling = []

    # expressions -----------------------------------------------------------

    def fresh_tmp(self, ty: str) -> str:
        name = f"__t{next(self.tmp)}"
        self.var_types[name] = ty
        return name

    def hoist(self, e: A.Expr, line: int) -> A.Expr:
        """Emit call instructions for calls inside ``e``; return the rest."""
        if not A.has_call(e):
            return e
        if isinstance(e, A.Call):
            args = tuple(self.hoist(a, line) for a in e.args)
            if e.ty == A.VOID:
                raise InternalError("void call used as value")
            tmp = self.fresh_tmp(e.ty)
            self.emit(Kind.CALL, line, var=tmp, callee=e.name, args=args)
            return A.Var(tmp, e.ty)
        if isinstance(e, A.Unary):
            return A.Unary(e.op, self.hoist(e.operand, line), e.ty)
        if isinstance(e, A.Binary):
            if e.op in A.LOGIC_OPS and A.has_call(e.right):
                return self.hoist_short_circuit(e, line)
            left = self.hoist(e.left, line)
            right = self.hoist(e.right, line)
            return A.Binary(e.op, left, right, e.ty)
        return e

    def hoist_short_circuit(self, e: A.Binary, line: int) -> A.Expr:
        tmp = self.fresh_tmp(A.BOOL)
        var = A.Var(tmp, A.BOOL)
        self.emit(Kind.ASSIGN, line, var=tmp, expr=self.hoist(e.left, line))
        b = self.emit(Kind.BRANCH, line, expr=var)
        evaluate_right = e.op == "&&"
        self.dangling = [(b, evaluate_right)]
        self.emit(Kind.ASSIGN, line, var=tmp, expr=self.hoist(e.right, line))
        join = self.make(Kind.SKIP, line=line)
        self.jump(join)
        self.link(b, not evaluate_right, join)
        self.dangling = [(join, None)]
        return var

    def assign_from(self, target: Optional[str], value: A.Expr, line: int) -> None:
        if isinstance(value, A.Call):
            args = tuple(self.hoist(a, line) for a in value.args)
            self.emit(Kind.CALL, line, var=target, callee=value.name, args=args)
        else:
            self.emit(Kind.ASSIGN, line, var=target, expr=self.hoist(value, line))

    # statements ------------------------------------------------------------

    def build(self) -> Cfg:
        if self.fn.name == "main":
            for g in self.program.globals:
                self.var_types[g.name] = g.type
                init = g.init if g.init is not None else (
                    A.IntLit(0) if g.type == A.INT else A.BoolLit(False))
                self.emit(Kind.ASSIGN, g.line, var=g.name, expr=init)
        else:
            for g in self.program.globals:
                self.var_types[g.name] = g.type
        assert self.fn.body is not None
        self.stmt(self.fn.body)
        self.jump(self.exit)
        return self.finish()

    def label_node(self, label: str) -> int:
        if label not in self.labels:
            self.labels[label] = self.placeholder()
        return self.labels[label]

    def stmt(self, s: A.Stmt) -> None:
        line = getattr(s, "line", 0)
        if isinstance(s, A.VarDecl):
            self.var_types[s.name] = s.type
            if s.init is None:
                self.emit(Kind.HAVOC, line, var=s.name)
            else:
                self.assign_from(s.name, s.init, line)
        elif isinstance(s, A.Assign):
            self.assign_from(s.target, s.value, line)
        elif isinstance(s, A.ExprStmt):
            args = tuple(self.hoist(a, line) for a in s.call.args)
            self.emit(Kind.CALL, line, var=None, callee=s.call.name, args=args)
        elif isinstance(s, A.Block):
            for x in s.stmts:
                self.stmt(x)
        elif isinstance(s, A.If):
            cond = self.hoist(s.cond, line)
            b = self.emit(Kind.BRANCH, line, expr=cond)
            self.dangling = [(b, True)]
            self.stmt(s.then)
            then_end = self.dangling
            self.dangling = [(b, False)]
            if s.orelse is not None:
                self.stmt(s.orelse)
            ends = then_end + self.dangling
            self.dangling = ends
            if ends:
                self.emit(Kind.SKIP, line)
        elif isinstance(s, A.While):
            head = self.placeholder()
            self.attach(head)
            cond = self.hoist(s.cond, line)
            b = self.emit(Kind.BRANCH, line, expr=cond)
            breaks: list = []
            self.loops.append((head, breaks))
            self.breaks.append(breaks)
            self.dangling = [(b, True)]
            self.stmt(s.body)
            self.jump(head)
            self.loops.pop()
            self.breaks.pop()
            self.dangling = [(b, False)] + breaks
        elif isinstance(s, A.DoWhile):
            start = self.placeholder()
            self.attach(start)
            cond_start = self.placeholder()
            breaks = []
            self.loops.append((cond_start, breaks))
            self.breaks.append(breaks)
            self.stmt(s.body)
            self.loops.pop()
            self.breaks.pop()
            self.attach(cond_start)
            cond = self.hoist(s.cond, line)
            b = self.emit(Kind.BRANCH, line, expr=cond)
            self.link(b, True, start)
            self.dangling = [(b, False)] + breaks
        elif isinstance(s, A.Switch):
            self.switch(s, line)
        elif isinstance(s, A.Break):
            self.breaks[-1].extend(self.dangling)
            self.dangling = []
        elif isinstance(s, A.Continue):
            self.jump(self.loops[-1][0])
        elif isinstance(s, A.Goto):
            self.jump(self.label_node(s.label))
        elif isinstance(s, A.Labeled):
            self.attach(self.label_node(s.label))
            self.stmt(s.stmt)
        elif isinstance(s, A.Return):
            if s.value is not None:
                if self.ret_var is None:
                    self.hoist(s.value, line)  # keep side effects of calls
                else:
                    self.assign_from(self.ret_var, s.value, line)
            self.jump(self.exit)
        elif isinstance(s, A.Assert):
            self.emit(Kind.ASSERT, line, expr=self.hoist(s.cond, line))
        elif isinstance(s, A.Empty):
            pass
        else:
            raise InternalError(f"cannot lower {s!r}")

    def switch(self, s: A.Switch, line: int) -> None:
        subject = self.hoist(s.subject, line)
        if not isinstance(subject, (A.Var, A.IntLit)):
            tmp = self.fresh_tmp(A.INT)
            self.emit(Kind.ASSIGN, line, var=tmp, expr=subject)
            subject = A.Var(tmp, A.INT)
        starts = [self.placeholder() for _ in s.cases]
        default = None
        for c, start in zip(s.cases, starts):
            if c.value is None:
                default = start
                continue
            test = A.Binary("==", subject, A.IntLit(c.value), A.BOOL)
            b = self.emit(Kind.BRANCH, c.line, expr=test)
            self.link(b, True, start)
            self.dangling = [(b, False)]
        breaks: list = []
        if default is not None:
            self.jump(default)
        no_match = self.dangling
        self.breaks.append(breaks)
        self.dangling = []
        for c, start in zip(s.cases, starts):
            self.attach(start)  # fallthrough from the previous case
            for x in c.body:
                self.stmt(x)
        self.breaks.pop()
        self.dangling = self.dangling + no_match + breaks

    # finishing -------------------------------------------------------------

    def finish(self) -> Cfg:
        nodes, succ = _finalize(self.nodes, self.out, self.placeholders, self.entry, self.exit)
        order = sorted(nodes)
        cfg = _renumber(nodes, succ, self.entry, self.exit, {k: (k,) for k in order})
        cfg.var_types.update(self.var_types)
        return cfg


def _finalize(nodes: dict[int, Instruction], out: dict[int, dict], placeholders: set[int],
              entry: int, exit: int) -> tuple[dict[int, Instruction], dict[int, tuple[int, ...]]]:
    """Resolve placeholders, order branch successors and prune dead nodes."""

    def resolve(n: int) -> int:
        seen = set()
        while n in placeholders:
            if n in seen:
                raise UnsupportedFeatureError("control flow cycle without any instruction")
            seen.add(n)
            nxt = out[n].get(None)
            if nxt is None:
                raise InternalError("placeholder without successor")
            n = nxt
        return n

    succ: dict[int, tuple[int, ...]] = {}
    for n, ins in nodes.items():
        if n in placeholders:
            continue
        o = out[n]
        if ins.kind in BRANCHING:
            succ[n] = (resolve(o[True]), resolve(o[False]))
        elif None in o:
            succ[n] = (resolve(o[None]),)
        else:
            succ[n] = ()
    kept = {n: i for n, i in nodes.items() if n not in placeholders}
    # prune unreachable code
    seen = {entry}
    todo = [entry]
    while todo:
        n = todo.pop()
        for s in succ[n]:
            if s not in seen:
                seen.add(s)
                todo.append(s)
    for n in seen:
        if n != exit and not succ[n]:
            raise InternalError(f"node {n} has no successor")
    kept = {n: i for n, i in kept.items() if n in seen}
    succ = {n: s for n, s in succ.items() if n in seen}
    probe = Cfg(kept, succ, entry, exit)
    if exit not in seen or probe.reaching_exit() != set(kept):
        raise UnsupportedFeatureError("control flow that can never reach the end of main",
                                      detail="e.g. a goto loop without exit")
    return kept, succ


def _renumber(nodes: dict[int, Instruction], succ: dict[int, tuple[int, ...]],
              entry: int, exit: int, keys: dict[int, tuple]) -> Cfg:
    order = sorted(nodes, key=lambda n: (n == exit, keys[n]))
    new = {old: i for i, old in enumerate(order)}
    out_nodes = {new[o]: replace(nodes[o], id=new[o]) for o in order}
    out_succ = {new[o]: tuple(new[s] for s in succ[o]) for o in order}
    return Cfg(out_nodes, out_succ, new[entry], new[exit])


def _function(program: A.Program, name: str) -> A.FunctionDecl:
    f = program.function(name)
    if f is None or f.body is None:
        if name == "main":
            raise MissingMainError("program has no main function")
        raise InternalError(f"no body for function {name!r}")
    return f


def build_cfg(ast: A.Program, function: str) -> Cfg:
    """Lower one (type-checked) function to a CFG; calls stay as CALL nodes."""
    return _Builder(ast, _function(ast, function)).build()


# ---------------------------------------------------------------------------
# Call graph and inlining
# ---------------------------------------------------------------------------


@dataclass
class CallGraph:
    nodes: list[str]
    edges: list[tuple[str, str, int]]  # (caller, callee, call-site node id)
    defined: set[str]

    def callees(self, caller: str) -> list[str]:
        return [c for a, c, _ in self.edges if a == caller]

    def bottom_up(self) -> list[str]:
        """Defined functions, callees before callers."""
        order: list[str] = []
        seen: set[str] = set()

        def visit(f: str) -> None:
            if f in seen:
                return
            seen.add(f)
            for c in self.callees(f):
                if c in self.defined:
                    visit(c)
            order.append(f)

        for f in self.nodes:
            if f in self.defined:
                visit(f)
        return order


def build_call_graph(ast: A.Program) -> CallGraph:
    defined = [f.name for f in ast.functions if f.body is not None]
    names = list(dict.fromkeys(f.name for f in ast.functions))
    edges = []
    for fname in defined:
        cfg = build_cfg(ast, fname)
        for n in sorted(cfg.nodes):
            ins = cfg.nodes[n]
            if ins.kind is Kind.CALL:
                edges.append((fname, ins.callee, n))
                if ins.callee not in names:
                    names.append(ins.callee)
    graph = {f: [c for a, c, _ in edges if a == f and c in defined] for f in defined}
    cycle = find_call_cycle(graph)
    if cycle:
        raise RecursiveCallError(cycle)
    return CallGraph(names, edges, set(defined))


def inline_functions(ast: A.Program, call_graph: Optional[CallGraph] = None) -> Cfg:
    """Inline every call into ``main`` and return the whole-program CFG."""
    if ast.function("main") is None or ast.function("main").body is None:
        raise MissingMainError("program has no main function")
    if call_graph is None:
        call_graph = build_call_graph(ast)
    globals_ = {g.name for g in ast.globals}
    done: dict[str, Cfg] = {}
    copies = itertools.count(1)
    for fname in call_graph.bottom_up():
        cfg = build_cfg(ast, fname)
        if any(cfg.nodes[n].kind is Kind.CALL for n in cfg.nodes):
            cfg = _inline_calls(cfg, done, globals_, copies, ast)
        done[fname] = cfg
    return done["main"]


def _inline_calls(cfg: Cfg, done: dict[str, Cfg], globals_: set[str],
                  copies: Iterator[int], ast: A.Program) -> Cfg:
    nodes: dict[int, Instruction] = {}
    out: dict[int, dict] = {}
    keys: dict[int, tuple] = {}
    placeholders: set[int] = set()
    var_types = dict(cfg.var_types)
    ids = itertools.count(max(cfg.nodes) + 1)

    def add(ins: Instruction, key: tuple) -> int:
        nodes[ins.id] = ins
        out[ins.id] = {}
        keys[ins.id] = key
        return ins.id

    for n in sorted(cfg.nodes):
        ins = cfg.nodes[n]
        add(ins, (n,))
        if ins.kind in BRANCHING:
            out[n] = {True: cfg.succ[n][0], False: cfg.succ[n][1]}
        elif cfg.succ[n]:
            out[n] = {None: cfg.succ[n][0]}

    for n in sorted(cfg.nodes):
        ins = cfg.nodes[n]
        if ins.kind is not Kind.CALL:
            continue
        callee = done.get(ins.callee)
        nxt = out[n].get(None)
        if callee is None:
            # body-less extern: the result is an unconstrained value
            if ins.var is None:
                nodes[n] = Instruction(n, Kind.SKIP, line=ins.line)
            else:
                nodes[n] = Instruction(n, Kind.HAVOC, var=ins.var, args=ins.args, line=ins.line)
            continue
        decl = ast.function(ins.callee)
        k = next(copies)
        rename = {v: f"{v}@{ins.callee}{k}" for v in callee.variables() | set(callee.var_types)
                  if v not in globals_}
        for v, ty in callee.var_types.items():
            if v not in globals_:
                var_types[rename[v]] = ty
        sub = {v: A.Var(new, callee.var_types.get(v)) for v, new in rename.items()}
        mapping: dict[int, int] = {}
        for m in sorted(callee.nodes):
            mapping[m] = next(ids)
        # call site becomes the first parameter binding (or a skip)
        chain_start = n
        chain = []
        for i, p in enumerate(decl.params):
            chain.append((rename[p.name], ins.args[i]))
        if chain:
            first_var, first_val = chain[0]
            nodes[n] = Instruction(n, Kind.ASSIGN, var=first_var, expr=first_val, line=ins.line)
        else:
            nodes[n] = Instruction(n, Kind.SKIP, line=ins.line)
            placeholders.add(n)
        out[n] = {}
        prev = chain_start
        for j, (v, val) in enumerate(chain[1:], start=1):
            nid = add(Instruction(next(ids), Kind.ASSIGN, var=v, expr=val, line=ins.line), (n, -1, j))
            out[prev][None] = nid
            prev = nid
        for m in sorted(callee.nodes):
            c_ins = callee.nodes[m]
            new_id = mapping[m]
            if c_ins.kind in (Kind.ENTRY, Kind.EXIT):
                add(Instruction(new_id, Kind.SKIP, line=c_ins.line), (n, m))
                placeholders.add(new_id)
            else:
                renamed = c_ins.map_exprs(lambda e: A.substitute(e, sub))
                var = rename.get(renamed.var, renamed.var) if renamed.var else None
                add(replace(renamed, id=new_id, var=var), (n, m))
            if c_ins.kind in BRANCHING:
                out[new_id] = {True: mapping[callee.succ[m][0]], False: mapping[callee.succ[m][1]]}
            elif callee.succ[m]:
                out[new_id] = {None: mapping[callee.succ[m][0]]}
        out[prev][None] = mapping[callee.entry]
        tail = mapping[callee.exit]
        ret_var = f"{ins.callee}.ret"
        if ins.var is not None:
            nid = add(Instruction(next(ids), Kind.ASSIGN, var=ins.var,
                                  expr=A.Var(rename[ret_var], callee.var_types.get(ret_var)),
                                  line=ins.line), (n, _EXIT_KEY + 1))
            out[tail][None] = nid
            tail = nid
        out[tail][None] = nxt

    kept, succ = _finalize(nodes, out, placeholders, cfg.entry, cfg.exit)
    result = _renumber(kept, succ, cfg.entry, cfg.exit, keys)
    result.var_types.update(var_types)
    return result


def normalize(cfg: Cfg) -> Cfg:
    """Prune unreachable nodes and verify the structural invariants."""
    out = cfg.pruned()
    out.check()
    return out


def nodes_by_line(cfg: Cfg, kinds: Iterable[Kind] = ()) -> dict[int, list[int]]:
    kinds = set(kinds)
    out: dict[int, list[int]] = {}
    for n in sorted(cfg.nodes):
        ins = cfg.nodes[n]
        if kinds and ins.kind not in kinds:
            continue
        out.setdefault(ins.line, []).append(n)
    return out


def bfs_order(cfg: Cfg) -> list[int]:
    seen = [cfg.entry]
    q = deque([cfg.entry])
    marked = {cfg.entry}
    while q:
        n = q.popleft()
        for s in cfg.succ[n]:
            if s not in marked:
                marked.add(s)
                seen.append(s)
                q.append(s)
    return seen
