"""Name resolution and type checking.

The checker returns a fresh program in which

* every expression carries ``ty`` (``int`` or ``bool``),
* integer conditions are rewritten to ``c != 0`` (C truthiness),
* block-scoped locals that shadow another name are renamed ``name.k`` so
  that variable names are unique within a function.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

from ..errors import TypeCheckError
from . import ast as A

NONDET_PREFIX = "__VERIFIER_nondet_"


def typecheck(program: A.Program) -> A.Program:
    return _Checker(program).run()


def as_condition(e: A.Expr) -> A.Expr:
    """Coerce a typed expression to bool the way C conditions do."""
    if e.ty == A.BOOL:
        return e
    if isinstance(e, A.IntLit):
        return A.BoolLit(e.value != 0)
    return A.Binary("!=", e, A.IntLit(0), A.BOOL)


class _Scope:
    def __init__(self, parent: Optional["_Scope"] = None):
        self.parent = parent
        self.names: dict[str, tuple[str, str]] = {}  # source name -> (unique name, type)

    def lookup(self, name: str) -> Optional[tuple[str, str]]:
        s: Optional[_Scope] = self
        while s is not None:
            if name in s.names:
                return s.names[name]
            s = s.parent
        return None


class _Checker:
    def __init__(self, program: A.Program):
        self.program = program
        self.signatures: dict[str, A.FunctionDecl] = {}
        for f in program.functions:
            prev = self.signatures.get(f.name)
            if prev is not None:
                if prev.body is not None and f.body is not None:
                    raise TypeCheckError(f"function {f.name!r} defined twice", f.line)
                if [p.type for p in prev.params] != [p.type for p in f.params] or prev.ret_type != f.ret_type:
                    raise TypeCheckError(f"conflicting declarations of {f.name!r}", f.line)
                if f.body is None:
                    continue
            self.signatures[f.name] = f
        self.globals = _Scope()
        self.used: set[str] = set()
        self.fn: Optional[A.FunctionDecl] = None
        self.loop_depth = 0
        self.switch_depth = 0

    def run(self) -> A.Program:
        out = A.Program()
        for g in self.program.globals:
            if g.name in self.globals.names:
                raise TypeCheckError(f"global {g.name!r} declared twice", g.line)
            if g.name in self.signatures:
                raise TypeCheckError(f"{g.name!r} is both a variable and a function", g.line)
            init = None
            if g.init is not None:
                init = self.expr(g.init, self.globals)
                if A.has_call(init):
                    raise TypeCheckError("function call in global initializer", g.line)
                init = self.coerce(init, g.type, g.line, f"initializer of {g.name!r}")
            self.globals.names[g.name] = (g.name, g.type)
            out.globals.append(A.VarDecl(g.type, g.name, init, g.line))
        for f in self.program.functions:
            out.functions.append(self.function(f))
        return out

    # -- helpers -----------------------------------------------------------

    def fresh(self, name: str) -> str:
        if name not in self.used and self.globals.lookup(name) is None:
            self.used.add(name)
            return name
        k = 1
        while f"{name}.{k}" in self.used:
            k += 1
        unique = f"{name}.{k}"
        self.used.add(unique)
        return unique

    def coerce(self, e: A.Expr, ty: str, line: int, what: str) -> A.Expr:
        if e.ty == ty:
            return e
        if ty == A.BOOL and isinstance(e, A.IntLit) and e.value in (0, 1):
            return A.BoolLit(bool(e.value))
        raise TypeCheckError(f"{what}: expected {ty}, got {e.ty} in '{e}'", line)

    # -- functions and statements -------------------------------------------

    def function(self, f: A.FunctionDecl) -> A.FunctionDecl:
        if f.body is None:
            return A.FunctionDecl(f.name, list(f.params), f.ret_type, None, f.line)
        self.fn = f
        self.used = set()
        scope = _Scope(self.globals)
        params = []
        for p in f.params:
            if p.name in scope.names:
                raise TypeCheckError(f"duplicate parameter {p.name!r}", f.line)
            unique = self.fresh(p.name)
            scope.names[p.name] = (unique, p.type)
            params.append(A.Param(unique, p.type))
        labels = [s.label for s in A.iter_stmts(f.body) if isinstance(s, A.Labeled)]
        if len(labels) != len(set(labels)):
            raise TypeCheckError(f"duplicate label in {f.name!r}", f.line)
        self.labels = set(labels)
        body = self.block(f.body, scope)
        self.fn = None
        return A.FunctionDecl(f.name, params, f.ret_type, body, f.line)

    def block(self, b: A.Block, parent: _Scope) -> A.Block:
        scope = _Scope(parent)
        return A.Block([self.stmt(s, scope) for s in b.stmts], b.line)

    def body(self, s: A.Stmt, scope: _Scope) -> A.Stmt:
        # a sub-statement that is not a block still gets its own scope
        return self.block(s, scope) if isinstance(s, A.Block) else self.stmt(s, _Scope(scope))

    def stmt(self, s: A.Stmt, scope: _Scope) -> A.Stmt:
        if isinstance(s, A.VarDecl):
            if s.name in scope.names:
                raise TypeCheckError(f"redeclaration of {s.name!r}", s.line)
            if s.name in self.signatures:
                raise TypeCheckError(f"{s.name!r} is both a variable and a function", s.line)
            init = None
            if s.init is not None:
                init = self.coerce(self.expr(s.init, scope), s.type, s.line, f"initializer of {s.name!r}")
            unique = self.fresh(s.name)
            scope.names[s.name] = (unique, s.type)
            return A.VarDecl(s.type, unique, init, s.line)
        if isinstance(s, A.Assign):
            found = scope.lookup(s.target)
            if found is None:
                raise TypeCheckError(f"assignment to undeclared variable {s.target!r}", s.line)
            unique, ty = found
            value = self.coerce(self.expr(s.value, scope), ty, s.line, f"assignment to {s.target!r}")
            return A.Assign(unique, value, s.line)
        if isinstance(s, A.ExprStmt):
            call = self.call(s.call, scope, s.line, as_statement=True)
            return A.ExprStmt(call, s.line)
        if isinstance(s, A.Block):
            return self.block(s, scope)
        if isinstance(s, A.If):
            cond = self.condition(s.cond, scope, s.line)
            then = self.body(s.then, scope)
            orelse = self.body(s.orelse, scope) if s.orelse is not None else None
            return A.If(cond, then, orelse, s.line)
        if isinstance(s, A.While):
            cond = self.condition(s.cond, scope, s.line)
            self.loop_depth += 1
            body = self.body(s.body, scope)
            self.loop_depth -= 1
            return A.While(cond, body, s.line)
        if isinstance(s, A.DoWhile):
            self.loop_depth += 1
            body = self.body(s.body, scope)
            self.loop_depth -= 1
            return A.DoWhile(body, self.condition(s.cond, scope, s.line), s.line)
        if isinstance(s, A.Switch):
            subject = self.expr(s.subject, scope)
            if subject.ty != A.INT:
                raise TypeCheckError(f"switch on {subject.ty} expression '{subject}'", s.line)
            self.switch_depth += 1
            inner = _Scope(scope)  # all cases share the switch body scope
            cases = [A.Case(c.value, [self.stmt(x, inner) for x in c.body], c.line) for c in s.cases]
            self.switch_depth -= 1
            return A.Switch(subject, cases, s.line)
        if isinstance(s, A.Break):
            if self.loop_depth == 0 and self.switch_depth == 0:
                raise TypeCheckError("break outside loop or switch", s.line)
            return A.Break(s.line)
        if isinstance(s, A.Continue):
            if self.loop_depth == 0:
                raise TypeCheckError("continue outside loop", s.line)
            return A.Continue(s.line)
        if isinstance(s, A.Goto):
            if s.label not in self.labels:
                raise TypeCheckError(f"goto to undefined label {s.label!r}", s.line)
            return A.Goto(s.label, s.line)
        if isinstance(s, A.Labeled):
            return A.Labeled(s.label, self.stmt(s.stmt, scope), s.line)
        if isinstance(s, A.Return):
            assert self.fn is not None
            if s.value is None:
                if self.fn.ret_type != A.VOID:
                    raise TypeCheckError(f"return without value in {self.fn.name!r}", s.line)
                return A.Return(None, s.line)
            if self.fn.ret_type == A.VOID:
                raise TypeCheckError(f"return with value in void function {self.fn.name!r}", s.line)
            value = self.coerce(self.expr(s.value, scope), self.fn.ret_type, s.line, "return value")
            return A.Return(value, s.line)
        if isinstance(s, A.Assert):
            return A.Assert(self.condition(s.cond, scope, s.line), s.line)
        if isinstance(s, A.Empty):
            return A.Empty(s.line)
        raise TypeCheckError(f"unknown statement {s!r}")

    # -- expressions ---------------------------------------------------------

    def condition(self, e: A.Expr, scope: _Scope, line: int) -> A.Expr:
        return as_condition(self.expr(e, scope, line))

    def expr(self, e: A.Expr, scope: _Scope, line: int = 0) -> A.Expr:
        if isinstance(e, A.IntLit):
            return A.IntLit(e.value)
        if isinstance(e, A.BoolLit):
            return A.BoolLit(e.value)
        if isinstance(e, A.Var):
            found = scope.lookup(e.name)
            if found is None:
                raise TypeCheckError(f"undeclared variable {e.name!r}", line)
            return A.Var(found[0], found[1])
        if isinstance(e, A.Unary):
            inner = self.expr(e.operand, scope, line)
            if e.op == "-":
                if inner.ty != A.INT:
                    raise TypeCheckError(f"unary '-': expected int, got {inner.ty} in '{e}'", line)
                return A.Unary("-", inner, A.INT)
            return A.Unary("!", as_condition(inner), A.BOOL)
        if isinstance(e, A.Binary):
            left = self.expr(e.left, scope, line)
            right = self.expr(e.right, scope, line)
            op = e.op
            if op in A.ARITH_OPS or op in A.REL_OPS:
                if left.ty != A.INT or right.ty != A.INT:
                    raise TypeCheckError(
                        f"operator '{op}': expected int operands, got {left.ty} and {right.ty} in '{e}'", line)
                return A.Binary(op, left, right, A.INT if op in A.ARITH_OPS else A.BOOL)
            if op in A.EQ_OPS:
                if left.ty != right.ty:
                    raise TypeCheckError(
                        f"operator '{op}': mismatched operands {left.ty} and {right.ty} in '{e}'", line)
                return A.Binary(op, left, right, A.BOOL)
            if op in A.LOGIC_OPS:
                return A.Binary(op, as_condition(left), as_condition(right), A.BOOL)
            raise TypeCheckError(f"unknown operator {op!r}", line)
        if isinstance(e, A.Call):
            return self.call(e, scope, line)
        raise TypeCheckError(f"unknown expression {e!r}", line)

    def call(self, c: A.Call, scope: _Scope, line: int, as_statement: bool = False) -> A.Call:
        sig = self.signatures.get(c.name)
        args = tuple(self.expr(a, scope, line) for a in c.args)
        if sig is None:
            if c.name.startswith(NONDET_PREFIX):
                ty = A.BOOL if c.name.endswith("bool") else A.INT
                # implicit extern declaration for benchmark-style nondet functions
                self.signatures[c.name] = A.FunctionDecl(c.name, [], ty, None)
                if args:
                    raise TypeCheckError(f"{c.name} takes no arguments", line)
                return A.Call(c.name, (), ty)
            raise TypeCheckError(f"call to undeclared function {c.name!r}", line)
        if len(args) != len(sig.params):
            raise TypeCheckError(
                f"{c.name!r} expects {len(sig.params)} arguments, got {len(args)}", line)
        coerced = tuple(self.coerce(a, p.type, line, f"argument {p.name!r} of {c.name!r}")
                        for a, p in zip(args, sig.params))
        if sig.ret_type == A.VOID and not as_statement:
            raise TypeCheckError(f"void function {c.name!r} used as a value", line)
        return A.Call(c.name, coerced, sig.ret_type)


def annotate(e: A.Expr, env: dict[str, str]) -> A.Expr:
    """Type-annotate an expression given variable types (for tests and tools)."""
    if isinstance(e, A.Var):
        return replace(e, ty=env[e.name])
    if isinstance(e, A.Unary):
        inner = annotate(e.operand, env)
        return A.Unary(e.op, inner, A.INT if e.op == "-" else A.BOOL)
    if isinstance(e, A.Binary):
        left, right = annotate(e.left, env), annotate(e.right, env)
        return A.Binary(e.op, left, right, A.INT if e.op in A.ARITH_OPS else A.BOOL)
    return e
