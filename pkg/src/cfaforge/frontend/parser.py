"""Recursive-descent parser for the restricted C dialect."""

from __future__ import annotations

from typing import Optional

from ..errors import ParseError, RecursiveCallError, UnsupportedFeatureError
from . import ast as A
from .lexer import INT_MAX, Token, TokenKind, tokenize

TYPE_NAMES = {"int": A.INT, "bool": A.BOOL, "_Bool": A.BOOL, "void": A.VOID}
UNSUPPORTED_TYPES = {
    "float": "floating-point types", "double": "floating-point types",
    "char": "char and strings", "long": "integer types other than int",
    "short": "integer types other than int", "unsigned": "integer types other than int",
    "signed": "integer types other than int", "struct": "structs", "union": "structs",
    "enum": "enums", "typedef": "typedefs",
}
BITWISE = {"&", "|", "^", "~", "<<", ">>"}
COMPOUND = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%"}
# functions whose call means "error reached" in benchmark-style sources
ERROR_FUNCTIONS = {"reach_error", "__VERIFIER_error"}


def parse(tokens: list[Token]) -> A.Program:
    """Build a ``Program`` from a token list produced by :func:`tokenize`."""
    program = _Parser(tokens).program()
    check_no_recursion(program)
    return program


def parse_source(source: str) -> A.Program:
    return parse(tokenize(source))


def call_map(program: A.Program) -> dict[str, list[str]]:
    """Callees (with bodies) per defined function, in call-site order."""
    defined = {f.name for f in program.functions if f.body is not None}
    out: dict[str, list[str]] = {}
    for f in program.functions:
        if f.body is None:
            continue
        callees: list[str] = []
        for stmt in A.iter_stmts(f.body):
            for e in A.stmt_exprs(stmt):
                for node in A.walk(e):
                    if isinstance(node, A.Call) and node.name in defined:
                        callees.append(node.name)
        out[f.name] = callees
    return out


def find_call_cycle(graph: dict[str, list[str]]) -> Optional[list[str]]:
    color: dict[str, int] = {}
    stack: list[str] = []

    def visit(u: str) -> Optional[list[str]]:
        color[u] = 1
        stack.append(u)
        for v in graph.get(u, []):
            if color.get(v) == 1:
                return stack[stack.index(v):]
            if v not in color:
                found = visit(v)
                if found:
                    return found
        stack.pop()
        color[u] = 2
        return None

    for name in sorted(graph):
        if name not in color:
            cycle = visit(name)
            if cycle:
                return cycle
    return None


def check_no_recursion(program: A.Program) -> None:
    cycle = find_call_cycle(call_map(program))
    if cycle:
        raise RecursiveCallError(cycle)


class _Parser:
    def __init__(self, tokens: list[Token]):
        last = tokens[-1] if tokens else None
        eof_line = last.line if last else 1
        eof_col = last.column + len(last.text) if last else 1
        self.toks = list(tokens) + [Token(TokenKind.EOF, "", eof_line, eof_col)]
        self.pos = 0
        self._anon = 0

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind not in (TokenKind.IDENT, TokenKind.INT, TokenKind.EOF) and t.text in texts

    def next(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def error(self, expected: str) -> ParseError:
        t = self.tok
        got = "end of input" if t.kind is TokenKind.EOF else repr(t.text)
        return ParseError(f"expected {expected}, got {got}", t.line, t.column)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(repr(text))
        return self.next()

    def ident(self) -> Token:
        if self.tok.kind is not TokenKind.IDENT:
            raise self.error("identifier")
        return self.next()

    def unsupported(self, feature: str, tok: Optional[Token] = None) -> UnsupportedFeatureError:
        tok = tok or self.tok
        return UnsupportedFeatureError(feature, tok.line, tok.column)

    # -- types and declarations --------------------------------------------

    def at_type(self) -> bool:
        t = self.tok
        return t.kind is TokenKind.KEYWORD and (t.text in TYPE_NAMES or t.text in UNSUPPORTED_TYPES
                                                or t.text in ("static", "const"))

    def type_name(self) -> str:
        t = self.tok
        if t.kind is TokenKind.KEYWORD and t.text in UNSUPPORTED_TYPES:
            raise self.unsupported(UNSUPPORTED_TYPES[t.text])
        if t.kind is TokenKind.KEYWORD and t.text in ("static", "const"):
            raise self.unsupported("storage and type qualifiers")
        if t.kind is not TokenKind.KEYWORD or t.text not in TYPE_NAMES:
            raise self.error("type")
        self.next()
        if self.at("*"):
            raise self.unsupported("pointers")
        return TYPE_NAMES[t.text]

    def check_declarator_suffix(self) -> None:
        if self.at("["):
            raise self.unsupported("arrays")

    def program(self) -> A.Program:
        prog = A.Program()
        while self.tok.kind is not TokenKind.EOF:
            start = self.tok
            is_extern = False
            if self.at("extern"):
                self.next()
                is_extern = True
            ty = self.type_name()
            name = self.ident()
            self.check_declarator_suffix()
            if self.at("("):
                prog.functions.append(self.function_rest(ty, name, is_extern))
            else:
                if is_extern:
                    raise self.unsupported("extern variables", start)
                if ty == A.VOID:
                    raise ParseError("variable declared void", name.line, name.column)
                prog.globals.extend(self.declarators_rest(ty, name))
        return prog

    def function_rest(self, ret: str, name: Token, is_extern: bool) -> A.FunctionDecl:
        self.expect("(")
        params: list[A.Param] = []
        if self.at("void") and self.peek().text == ")":
            self.next()
        elif not self.at(")"):
            while True:
                ty = self.type_name()
                if ty == A.VOID:
                    raise ParseError("parameter declared void", self.tok.line, self.tok.column)
                if self.tok.kind is TokenKind.IDENT:
                    pname = self.next().text
                else:
                    pname = f"_arg{len(params)}"
                self.check_declarator_suffix()
                params.append(A.Param(pname, ty))
                if not self.at(","):
                    break
                self.next()
        self.expect(")")
        if self.at(";"):
            self.next()
            return A.FunctionDecl(name.text, params, ret, None, name.line)
        if is_extern:
            raise ParseError("extern function with a body", name.line, name.column)
        body = self.block()
        return A.FunctionDecl(name.text, params, ret, body, name.line)

    def declarators_rest(self, ty: str, first: Token) -> list[A.VarDecl]:
        decls = []
        name = first
        while True:
            init = None
            if self.at("="):
                self.next()
                init = self.expr()
            decls.append(A.VarDecl(ty, name.text, init, name.line))
            if not self.at(","):
                break
            self.next()
            if self.at("*"):
                raise self.unsupported("pointers")
            name = self.ident()
            self.check_declarator_suffix()
        self.expect(";")
        return decls

    # -- statements --------------------------------------------------------

    def block(self) -> A.Block:
        start = self.expect("{")
        stmts: list[A.Stmt] = []
        while not self.at("}"):
            if self.tok.kind is TokenKind.EOF:
                raise self.error("'}'")
            stmts.extend(self.statement_list_item())
        self.next()
        return A.Block(stmts, start.line)

    def statement_list_item(self) -> list[A.Stmt]:
        if self.at_type():
            ty = self.type_name()
            if ty == A.VOID:
                raise ParseError("variable declared void", self.tok.line, self.tok.column)
            name = self.ident()
            self.check_declarator_suffix()
            if self.at("("):
                raise self.unsupported("nested function declarations", name)
            return list(self.declarators_rest(ty, name))
        return [self.statement()]

    def statement(self) -> A.Stmt:
        t = self.tok
        line = t.line
        if t.kind is TokenKind.KEYWORD:
            kw = t.text
            if kw == "if":
                self.next()
                cond = self.paren_expr()
                then = self.statement()
                orelse = None
                if self.at("else"):
                    self.next()
                    orelse = self.statement()
                return A.If(cond, then, orelse, line)
            if kw == "while":
                self.next()
                cond = self.paren_expr()
                return A.While(cond, self.statement(), line)
            if kw == "do":
                self.next()
                body = self.statement()
                self.expect("while")
                cond = self.paren_expr()
                self.expect(";")
                return A.DoWhile(body, cond, line)
            if kw == "switch":
                return self.switch()
            if kw == "break":
                self.next()
                self.expect(";")
                return A.Break(line)
            if kw == "continue":
                self.next()
                self.expect(";")
                return A.Continue(line)
            if kw == "goto":
                self.next()
                label = self.ident().text
                self.expect(";")
                return A.Goto(label, line)
            if kw == "return":
                self.next()
                value = None if self.at(";") else self.expr()
                self.expect(";")
                return A.Return(value, line)
            if kw == "for":
                raise self.unsupported("for loops")
            if kw in ("case", "default"):
                raise ParseError(f"'{kw}' outside of switch", t.line, t.column)
            if self.at_type():
                raise ParseError("declaration not allowed here", t.line, t.column)
        if self.at("{"):
            return self.block()
        if self.at(";"):
            self.next()
            return A.Empty(line)
        if self.at("++", "--"):
            op = self.next().text
            name = self.ident()
            self.expect(";")
            return self.increment(name, op)
        if t.kind is TokenKind.IDENT:
            return self.ident_statement()
        raise self.error("statement")

    def increment(self, name: Token, op: str) -> A.Assign:
        arith = "+" if op == "++" else "-"
        return A.Assign(name.text, A.Binary(arith, A.Var(name.text), A.IntLit(1)), name.line)

    def ident_statement(self) -> A.Stmt:
        name = self.next()
        line = name.line
        if self.at(":"):
            self.next()
            if self.at("}"):
                # label at end of block
                return A.Labeled(name.text, A.Empty(line), line)
            return A.Labeled(name.text, self.statement(), line)
        if self.at("("):
            if name.text == "assert":
                self.next()
                cond = self.expr()
                self.expect(")")
                self.expect(";")
                return A.Assert(cond, line)
            call = self.call_rest(name)
            self.expect(";")
            if name.text in ERROR_FUNCTIONS:
                return A.Assert(A.BoolLit(False), line)
            return A.ExprStmt(call, line)
        if self.at("["):
            raise self.unsupported("arrays")
        if self.at(".", "->"):
            raise self.unsupported("structs")
        if self.at("="):
            self.next()
            value = self.expr()
            self.expect(";")
            return A.Assign(name.text, value, line)
        if self.tok.text in COMPOUND and self.tok.kind is TokenKind.OP:
            op = COMPOUND[self.next().text]
            value = self.expr()
            self.expect(";")
            return A.Assign(name.text, A.Binary(op, A.Var(name.text), value), line)
        if self.at("++", "--"):
            op = self.next().text
            self.expect(";")
            return self.increment(name, op)
        raise self.error("'=', '(' or ':' after identifier")

    def switch(self) -> A.Switch:
        line = self.next().line
        subject = self.paren_expr()
        self.expect("{")
        cases: list[A.Case] = []
        while not self.at("}"):
            t = self.tok
            if self.at("case"):
                self.next()
                negative = False
                if self.at("-"):
                    self.next()
                    negative = True
                if self.tok.kind is not TokenKind.INT:
                    raise self.error("integer case label")
                value = int(self.next().text)
                value = -value if negative else value
                self._check_range(value, t)
                self.expect(":")
                cases.append(A.Case(value, [], t.line))
            elif self.at("default"):
                self.next()
                self.expect(":")
                cases.append(A.Case(None, [], t.line))
            elif self.tok.kind is TokenKind.EOF:
                raise self.error("'}'")
            else:
                if not cases:
                    raise self.error("'case' or 'default'")
                cases[-1].body.extend(self.statement_list_item())
        self.next()
        seen: set[Optional[int]] = set()
        for c in cases:
            if c.value in seen:
                raise ParseError(f"duplicate case label {c.value}", c.line)
            seen.add(c.value)
        return A.Switch(subject, cases, line)

    # -- expressions -------------------------------------------------------

    def paren_expr(self) -> A.Expr:
        self.expect("(")
        e = self.expr()
        self.expect(")")
        return e

    def expr(self, min_prec: int = 1) -> A.Expr:
        left = self.unary()
        while True:
            t = self.tok
            if t.kind is TokenKind.OP and t.text in BITWISE:
                raise self.unsupported("bitwise operators")
            if t.kind is TokenKind.OP and t.text == "?":
                raise self.unsupported("conditional operator")
            if t.kind is TokenKind.OP and t.text == "=":
                raise self.unsupported("assignment inside expressions")
            if t.kind is not TokenKind.OP or t.text not in A.BINARY_PREC:
                return left
            prec = A.BINARY_PREC[t.text]
            if prec < min_prec:
                return left
            self.next()
            right = self.expr(prec + 1)
            left = A.Binary(t.text, left, right)

    def unary(self) -> A.Expr:
        t = self.tok
        if self.at("-"):
            self.next()
            if self.tok.kind is TokenKind.INT:
                lit = self.next()
                return A.IntLit(-int(lit.text))
            return A.Unary("-", self.unary())
        if self.at("!"):
            self.next()
            return A.Unary("!", self.unary())
        if self.at("+"):
            self.next()
            return self.unary()
        if self.at("&", "*"):
            raise self.unsupported("pointers")
        if self.at("~"):
            raise self.unsupported("bitwise operators")
        if self.at("++", "--"):
            raise self.unsupported("increment inside expressions")
        return self.postfix(self.primary())

    def postfix(self, e: A.Expr) -> A.Expr:
        if self.at("["):
            raise self.unsupported("arrays")
        if self.at(".", "->"):
            raise self.unsupported("structs")
        if self.at("++", "--"):
            raise self.unsupported("increment inside expressions")
        return e

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind is TokenKind.INT:
            self.next()
            value = int(t.text)
            self._check_range(value, t)
            return A.IntLit(value)
        if t.kind is TokenKind.KEYWORD and t.text in ("true", "false"):
            self.next()
            return A.BoolLit(t.text == "true")
        if t.kind is TokenKind.IDENT:
            self.next()
            if self.at("("):
                if t.text == "assert":
                    raise ParseError("assert used as an expression", t.line, t.column)
                return self.call_rest(t)
            return A.Var(t.text)
        if self.at("("):
            self.next()
            if self.at_type():
                raise self.unsupported("casts")
            e = self.expr()
            self.expect(")")
            return e
        raise self.error("expression")

    def call_rest(self, name: Token) -> A.Call:
        self.expect("(")
        args: list[A.Expr] = []
        if not self.at(")"):
            while True:
                args.append(self.expr())
                if not self.at(","):
                    break
                self.next()
        self.expect(")")
        return A.Call(name.text, tuple(args))

    @staticmethod
    def _check_range(value: int, tok: Token) -> None:
        if value > INT_MAX:
            raise ParseError(f"integer literal {value} overflows int", tok.line, tok.column)
