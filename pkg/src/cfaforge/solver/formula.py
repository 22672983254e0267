"""Translation of boolean program expressions into a linear-integer skeleton.

Integer terms become ``Lin`` (sparse coefficient map plus constant).  Terms
outside linear arithmetic (products of variables, division by a variable)
are replaced by fresh variables; a model is only trusted after the original
expression has been re-evaluated under it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

from ..frontend import ast as A


@dataclass(frozen=True)
class Lin:
    coeffs: tuple[tuple[str, int], ...]  # sorted by variable, no zero entries
    const: int = 0

    @staticmethod
    def of(coeffs: dict[str, int], const: int = 0) -> "Lin":
        return Lin(tuple(sorted((v, c) for v, c in coeffs.items() if c)), const)

    def as_dict(self) -> dict[str, int]:
        return dict(self.coeffs)

    def scale(self, k: int) -> "Lin":
        return Lin.of({v: c * k for v, c in self.coeffs}, self.const * k)

    def __add__(self, other: "Lin") -> "Lin":
        d = self.as_dict()
        for v, c in other.coeffs:
            d[v] = d.get(v, 0) + c
        return Lin.of(d, self.const + other.const)

    def __sub__(self, other: "Lin") -> "Lin":
        return self + other.scale(-1)

    @property
    def is_const(self) -> bool:
        return not self.coeffs


@dataclass(frozen=True)
class Atom:
    """``sum(c*x) <= rhs`` (op ``<=``) or ``sum(c*x) == rhs`` (op ``==``)."""

    coeffs: tuple[tuple[str, int], ...]
    op: str
    rhs: int

    def __str__(self) -> str:
        terms = " + ".join(f"{c}*{v}" for v, c in self.coeffs) or "0"
        return f"{terms} {self.op} {self.rhs}"

    def holds(self, model: dict[str, int]) -> bool:
        lhs = sum(c * model.get(v, 0) for v, c in self.coeffs)
        return lhs <= self.rhs if self.op == "<=" else lhs == self.rhs


# boolean skeleton nodes
@dataclass(frozen=True)
class BConst:
    value: bool


@dataclass(frozen=True)
class BVar:
    name: str


@dataclass(frozen=True)
class BAtom:
    atom: Atom


@dataclass(frozen=True)
class BNot:
    arg: "Node"


@dataclass(frozen=True)
class BAnd:
    args: tuple["Node", ...]


@dataclass(frozen=True)
class BOr:
    args: tuple["Node", ...]


Node = Union[BConst, BVar, BAtom, BNot, BAnd, BOr]
TRUE = BConst(True)
FALSE = BConst(False)


def mk_not(n: Node) -> Node:
    if isinstance(n, BConst):
        return BConst(not n.value)
    if isinstance(n, BNot):
        return n.arg
    return BNot(n)


def mk_and(args) -> Node:
    out = []
    for a in args:
        if a == FALSE:
            return FALSE
        if a == TRUE:
            continue
        out.extend(a.args if isinstance(a, BAnd) else [a])
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else BAnd(tuple(out))


def mk_or(args) -> Node:
    out = []
    for a in args:
        if a == TRUE:
            return TRUE
        if a == FALSE:
            continue
        out.extend(a.args if isinstance(a, BOr) else [a])
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else BOr(tuple(out))


def make_atom(lin: Lin, op: str) -> Node:
    """Canonical node for ``lin op 0`` with op in <, <=, >, >=, ==, !=."""
    if op in (">", ">="):
        lin = lin.scale(-1)
        op = "<" if op == ">" else "<="
    rhs = -lin.const
    if op == "<":
        rhs -= 1
        op = "<="
    negate = False
    if op == "!=":
        op, negate = "==", True
    coeffs = [c for _, c in lin.coeffs]
    if not coeffs:
        truth = 0 <= rhs if op == "<=" else rhs == 0
        return BConst(truth != negate)
    g = 0
    for c in coeffs:
        g = math.gcd(g, c)
    if op == "==":
        if rhs % g:
            return BConst(negate)
        cs = tuple((v, c // g) for v, c in lin.coeffs)
        rhs //= g
        if cs[0][1] < 0:
            cs = tuple((v, -c) for v, c in cs)
            rhs = -rhs
        node: Node = BAtom(Atom(cs, "==", rhs))
    else:
        cs = tuple((v, c // g) for v, c in lin.coeffs)
        rhs = rhs // g  # floor: integer tightening
        if cs[0][1] < 0:
            # sum <= rhs  <=>  not(-sum <= -rhs - 1)
            cs = tuple((v, -c) for v, c in cs)
            node = BNot(BAtom(Atom(cs, "<=", -rhs - 1)))
        else:
            node = BAtom(Atom(cs, "<=", rhs))
    return mk_not(node) if negate else node


@dataclass
class Encoding:
    """Result of encoding: skeleton plus bookkeeping for model validation."""

    root: Node
    int_vars: set[str] = field(default_factory=set)
    bool_vars: set[str] = field(default_factory=set)
    approximate: bool = False  # some term was abstracted by a fresh variable


class Encoder:
    def __init__(self) -> None:
        self.side: list[Node] = []
        self.fresh: dict[str, str] = {}
        self.int_vars: set[str] = set()
        self.bool_vars: set[str] = set()
        self.approximate = False
        self.exact_defs: dict[str, str] = {}

    def _fresh(self, key: str, prefix: str) -> str:
        if key not in self.fresh:
            self.fresh[key] = f"{prefix}{len(self.fresh)}"
            self.int_vars.add(self.fresh[key])
        return self.fresh[key]

    # integer terms ----------------------------------------------------------

    def lin(self, e: A.Expr) -> Lin:
        if isinstance(e, A.IntLit):
            return Lin((), e.value)
        if isinstance(e, A.Var):
            self.int_vars.add(e.name)
            return Lin(((e.name, 1),), 0)
        if isinstance(e, A.Unary) and e.op == "-":
            return self.lin(e.operand).scale(-1)
        if isinstance(e, A.Binary):
            if e.op == "+":
                return self.lin(e.left) + self.lin(e.right)
            if e.op == "-":
                return self.lin(e.left) - self.lin(e.right)
            if e.op == "*":
                left, right = self.lin(e.left), self.lin(e.right)
                if left.is_const:
                    return right.scale(left.const)
                if right.is_const:
                    return left.scale(right.const)
                self.approximate = True
                return Lin(((self._fresh(str(e), "__nl"), 1),), 0)
            if e.op in ("/", "%"):
                num, den = self.lin(e.left), self.lin(e.right)
                if den.is_const and den.const != 0:
                    q, r = self._divmod(str(e.left), num, den.const)
                    return Lin(((q if e.op == "/" else r, 1),), 0)
                self.approximate = True
                return Lin(((self._fresh(str(e), "__nl"), 1),), 0)
        raise TypeError(f"not an integer term: {e!r}")

    def _divmod(self, key: str, num: Lin, c: int) -> tuple[str, str]:
        key = f"{key}|{c}"
        if key in self.exact_defs:
            q = self.exact_defs[key]
            return q, q.replace("__q", "__r")
        q = self._fresh("q:" + key, "__q")
        r = q.replace("__q", "__r")
        self.int_vars.add(r)
        self.exact_defs[key] = q
        qv, rv = Lin(((q, 1),)), Lin(((r, 1),))
        # num == c*q + r, remainder sign follows the dividend (C semantics)
        m = abs(c) - 1
        self.side.append(make_atom(num - qv.scale(c) - rv, "=="))
        nonneg = mk_and([make_atom(num, ">="), make_atom(rv, ">="),
                         make_atom(rv - Lin((), m), "<=")])
        neg = mk_and([make_atom(num, "<"), make_atom(rv, "<="),
                      make_atom(rv + Lin((), m), ">=")])
        self.side.append(mk_or([nonneg, neg]))
        return q, r

    # boolean structure --------------------------------------------------------

    def node(self, e: A.Expr) -> Node:
        if isinstance(e, A.BoolLit):
            return BConst(e.value)
        if isinstance(e, A.Var):
            self.bool_vars.add(e.name)
            return BVar(e.name)
        if isinstance(e, A.Unary) and e.op == "!":
            return mk_not(self.node(e.operand))
        if isinstance(e, A.Binary):
            if e.op == "&&":
                return mk_and([self.node(e.left), self.node(e.right)])
            if e.op == "||":
                return mk_or([self.node(e.left), self.node(e.right)])
            if e.op in A.EQ_OPS and _is_bool(e.left):
                a, b = self.node(e.left), self.node(e.right)
                same = mk_or([mk_and([a, b]), mk_and([mk_not(a), mk_not(b)])])
                return same if e.op == "==" else mk_not(same)
            if e.op in A.REL_OPS or e.op in A.EQ_OPS:
                return make_atom(self.lin(e.left) - self.lin(e.right), e.op)
        raise TypeError(f"not a boolean formula: {e!r}")

    def encode(self, exprs: list[A.Expr]) -> Encoding:
        nodes = [self.node(e) for e in exprs]  # fills self.side as a side effect
        root = mk_and(nodes + self.side)
        return Encoding(root, self.int_vars, self.bool_vars, self.approximate)


def _is_bool(e: A.Expr) -> bool:
    if e.ty is not None:
        return e.ty == A.BOOL
    if isinstance(e, A.BoolLit):
        return True
    if isinstance(e, A.Unary):
        return e.op == "!"
    if isinstance(e, A.Binary):
        return e.op in A.REL_OPS or e.op in A.EQ_OPS or e.op in A.LOGIC_OPS
    return False


def encode(exprs: list[A.Expr]) -> Encoding:
    return Encoder().encode(list(exprs))


def conjuncts(e: A.Expr) -> list[A.Expr]:
    """Flatten top-level conjunctions."""
    if isinstance(e, A.Binary) and e.op == "&&":
        return conjuncts(e.left) + conjuncts(e.right)
    return [e]
