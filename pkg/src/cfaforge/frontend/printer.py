from __future__ import annotations

from . import ast as A

INDENT = "    "


def print_program(program: A.Program) -> str:
    """Render a program back to dialect source text."""
    lines: list[str] = []
    for g in program.globals:
        lines.append(_decl(g))
    for f in program.functions:
        params = ", ".join(f"{p.type} {p.name}" for p in f.params) or "void"
        head = f"{f.ret_type} {f.name}({params})"
        if f.body is None:
            lines.append(f"extern {head};")
        else:
            lines.append(head + " {")
            for s in f.body.stmts:
                _stmt(s, 1, lines)
            lines.append("}")
    return "\n".join(lines) + "\n"


def print_stmt(stmt: A.Stmt) -> str:
    lines: list[str] = []
    _stmt(stmt, 0, lines)
    return "\n".join(lines)


def _decl(d: A.VarDecl) -> str:
    if d.init is None:
        return f"{d.type} {d.name};"
    return f"{d.type} {d.name} = {d.init};"


def _stmt(s: A.Stmt, depth: int, out: list[str]) -> None:
    pad = INDENT * depth
    if isinstance(s, A.VarDecl):
        out.append(pad + _decl(s))
    elif isinstance(s, A.Assign):
        out.append(f"{pad}{s.target} = {s.value};")
    elif isinstance(s, A.ExprStmt):
        out.append(f"{pad}{s.call};")
    elif isinstance(s, A.Block):
        out.append(pad + "{")
        for x in s.stmts:
            _stmt(x, depth + 1, out)
        out.append(pad + "}")
    elif isinstance(s, A.If):
        out.append(f"{pad}if ({s.cond})")
        _sub(s.then, depth, out, before_else=s.orelse is not None)
        if s.orelse is not None:
            out.append(pad + "else")
            _sub(s.orelse, depth, out)
    elif isinstance(s, A.While):
        out.append(f"{pad}while ({s.cond})")
        _sub(s.body, depth, out)
    elif isinstance(s, A.DoWhile):
        out.append(pad + "do")
        _sub(s.body, depth, out)
        out.append(f"{pad}while ({s.cond});")
    elif isinstance(s, A.Switch):
        out.append(f"{pad}switch ({s.subject}) {{")
        for c in s.cases:
            out.append(pad + ("default:" if c.value is None else f"case {c.value}:"))
            for x in c.body:
                _stmt(x, depth + 1, out)
        out.append(pad + "}")
    elif isinstance(s, A.Break):
        out.append(pad + "break;")
    elif isinstance(s, A.Continue):
        out.append(pad + "continue;")
    elif isinstance(s, A.Goto):
        out.append(f"{pad}goto {s.label};")
    elif isinstance(s, A.Labeled):
        out.append(f"{pad}{s.label}:")
        _stmt(s.stmt, depth, out)
    elif isinstance(s, A.Return):
        out.append(pad + ("return;" if s.value is None else f"return {s.value};"))
    elif isinstance(s, A.Assert):
        out.append(f"{pad}assert({s.cond});")
    elif isinstance(s, A.Empty):
        out.append(pad + ";")
    else:
        raise TypeError(f"cannot print {s!r}")


def _sub(s: A.Stmt, depth: int, out: list[str], before_else: bool = False) -> None:
    if isinstance(s, A.Block):
        _stmt(s, depth, out)
    elif before_else and _open_if(s):
        # an else-less nested if would capture the following else
        _stmt(A.Block([s]), depth, out)
    else:
        _stmt(s, depth + 1, out)


def _open_if(s: A.Stmt) -> bool:
    while True:
        if isinstance(s, A.Labeled):
            s = s.stmt
        elif isinstance(s, A.If):
            if s.orelse is None:
                return True
            s = s.orelse
        elif isinstance(s, A.While):
            s = s.body
        else:
            return False
