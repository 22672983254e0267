"""Syntax tree for the restricted C dialect.

Expressions are immutable and shared between the AST, the CFG and the
CFA, so everything downstream (folding, substitution, solver encoding)
works on the same node classes.  ``ty`` is filled in by the type checker
and does not take part in equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

INT = "int"
BOOL = "bool"
VOID = "void"


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int
    ty: Optional[str] = field(default=INT, compare=False)

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class BoolLit:
    value: bool
    ty: Optional[str] = field(default=BOOL, compare=False)

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Var:
    name: str
    ty: Optional[str] = field(default=None, compare=False)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "!"
    operand: "Expr"
    ty: Optional[str] = field(default=None, compare=False)

    def __str__(self) -> str:
        inner = _paren(self.operand, PREC_UNARY)
        if inner.startswith(self.op):  # keep "- -x" from lexing as "--x"
            inner = f"({inner})"
        return f"{self.op}{inner}"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    ty: Optional[str] = field(default=None, compare=False)

    def __str__(self) -> str:
        prec = BINARY_PREC[self.op]
        # all binary operators are left associative
        return f"{_paren(self.left, prec)} {self.op} {_paren(self.right, prec + 1)}"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...] = ()
    ty: Optional[str] = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"{self.name}({', '.join(str(a) for a in self.args)})"


Expr = Union[IntLit, BoolLit, Var, Unary, Binary, Call]

BINARY_PREC = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}
PREC_UNARY = 7
ARITH_OPS = frozenset({"+", "-", "*", "/", "%"})
REL_OPS = frozenset({"<", "<=", ">", ">="})
EQ_OPS = frozenset({"==", "!="})
LOGIC_OPS = frozenset({"&&", "||"})


def precedence(e: Expr) -> int:
    if isinstance(e, Binary):
        return BINARY_PREC[e.op]
    if isinstance(e, Unary):
        return PREC_UNARY
    if isinstance(e, IntLit) and e.value < 0:
        return PREC_UNARY
    return 99


def _paren(e: Expr, min_prec: int) -> str:
    s = str(e)
    return f"({s})" if precedence(e) < min_prec else s


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal of an expression tree."""
    yield e
    if isinstance(e, Unary):
        yield from walk(e.operand)
    elif isinstance(e, Binary):
        yield from walk(e.left)
        yield from walk(e.right)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk(a)


def variables(e: Expr) -> frozenset[str]:
    return frozenset(n.name for n in walk(e) if isinstance(n, Var))


def has_call(e: Expr) -> bool:
    return any(isinstance(n, Call) for n in walk(e))


def is_literal(e: Expr) -> bool:
    return isinstance(e, (IntLit, BoolLit))


def substitute(e: Expr, mapping: dict[str, Expr]) -> Expr:
    """Replace variables by expressions (simultaneous substitution)."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Unary):
        inner = substitute(e.operand, mapping)
        return e if inner is e.operand else Unary(e.op, inner, e.ty)
    if isinstance(e, Binary):
        left = substitute(e.left, mapping)
        right = substitute(e.right, mapping)
        if left is e.left and right is e.right:
            return e
        return Binary(e.op, left, right, e.ty)
    if isinstance(e, Call):
        return Call(e.name, tuple(substitute(a, mapping) for a in e.args), e.ty)
    return e


_FLIP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}


def negate(e: Expr) -> Expr:
    """Logical negation; comparisons are flipped rather than wrapped."""
    if isinstance(e, BoolLit):
        return BoolLit(not e.value, BOOL)
    if isinstance(e, Binary) and e.op in _FLIP and not (e.op in EQ_OPS and e.left.ty == BOOL):
        return Binary(_FLIP[e.op], e.left, e.right, BOOL)
    if isinstance(e, Unary) and e.op == "!":
        return e.operand
    return Unary("!", e, BOOL)


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------


@dataclass
class VarDecl:
    type: str
    name: str
    init: Optional[Expr] = None
    line: int = field(default=0, compare=False)


@dataclass
class Assign:
    target: str
    value: Expr
    line: int = field(default=0, compare=False)


@dataclass
class ExprStmt:
    """A bare call statement, ``f(x);``."""

    call: Call
    line: int = field(default=0, compare=False)


@dataclass
class Block:
    stmts: list["Stmt"] = field(default_factory=list)
    line: int = field(default=0, compare=False)


@dataclass
class If:
    cond: Expr
    then: "Stmt"
    orelse: Optional["Stmt"] = None
    line: int = field(default=0, compare=False)


@dataclass
class While:
    cond: Expr
    body: "Stmt"
    line: int = field(default=0, compare=False)


@dataclass
class DoWhile:
    body: "Stmt"
    cond: Expr
    line: int = field(default=0, compare=False)


@dataclass
class Case:
    value: Optional[int]  # None for ``default``
    body: list["Stmt"] = field(default_factory=list)
    line: int = field(default=0, compare=False)


@dataclass
class Switch:
    subject: Expr
    cases: list[Case] = field(default_factory=list)
    line: int = field(default=0, compare=False)


@dataclass
class Break:
    line: int = field(default=0, compare=False)


@dataclass
class Continue:
    line: int = field(default=0, compare=False)


@dataclass
class Goto:
    label: str
    line: int = field(default=0, compare=False)


@dataclass
class Labeled:
    label: str
    stmt: "Stmt"
    line: int = field(default=0, compare=False)


@dataclass
class Return:
    value: Optional[Expr] = None
    line: int = field(default=0, compare=False)


@dataclass
class Assert:
    cond: Expr
    line: int = field(default=0, compare=False)


@dataclass
class Empty:
    line: int = field(default=0, compare=False)


Stmt = Union[
    VarDecl, Assign, ExprStmt, Block, If, While, DoWhile, Switch,
    Break, Continue, Goto, Labeled, Return, Assert, Empty,
]


@dataclass
class Param:
    name: str
    type: str


@dataclass
class FunctionDecl:
    name: str
    params: list[Param]
    ret_type: str
    body: Optional[Block]  # None for extern / prototype-only functions
    line: int = field(default=0, compare=False)

    @property
    def is_extern(self) -> bool:
        return self.body is None


@dataclass
class Program:
    globals: list[VarDecl] = field(default_factory=list)
    functions: list[FunctionDecl] = field(default_factory=list)

    def function(self, name: str) -> Optional[FunctionDecl]:
        """Return the definition of ``name`` if any, else its declaration."""
        found = None
        for f in self.functions:
            if f.name == name:
                if f.body is not None:
                    return f
                found = f
        return found


# alias for the root node
Ast = Program


def iter_stmts(stmt: Stmt) -> Iterator[Stmt]:
    """Pre-order traversal over a statement tree."""
    yield stmt
    if isinstance(stmt, Block):
        for s in stmt.stmts:
            yield from iter_stmts(s)
    elif isinstance(stmt, If):
        yield from iter_stmts(stmt.then)
        if stmt.orelse is not None:
            yield from iter_stmts(stmt.orelse)
    elif isinstance(stmt, (While, DoWhile)):
        yield from iter_stmts(stmt.body)
    elif isinstance(stmt, Switch):
        for c in stmt.cases:
            for s in c.body:
                yield from iter_stmts(s)
    elif isinstance(stmt, Labeled):
        yield from iter_stmts(stmt.stmt)


def stmt_exprs(stmt: Stmt) -> list[Expr]:
    """Expressions directly owned by a statement (not nested statements)."""
    if isinstance(stmt, VarDecl):
        return [stmt.init] if stmt.init is not None else []
    if isinstance(stmt, Assign):
        return [stmt.value]
    if isinstance(stmt, ExprStmt):
        return [stmt.call]
    if isinstance(stmt, (If, While, DoWhile)):
        return [stmt.cond]
    if isinstance(stmt, Switch):
        return [stmt.subject]
    if isinstance(stmt, Return):
        return [stmt.value] if stmt.value is not None else []
    if isinstance(stmt, Assert):
        return [stmt.cond]
    return []
