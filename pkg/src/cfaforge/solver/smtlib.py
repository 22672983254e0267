"""SMT-LIB (QF_LIA) serialization and an external-process backend."""

from __future__ import annotations

import os
import shlex
import subprocess
from typing import Optional, Sequence, Union

from ..errors import ExternalSolverError
from .formula import Atom, BAnd, BAtom, BConst, BNot, BOr, BVar, Encoding, Node

ENV_VAR = "CFAFORGE_SOLVER"


def _sym(name: str) -> str:
    return f"|{name}|"


def _num(k: int) -> str:
    return str(k) if k >= 0 else f"(- {-k})"


def _atom(a: Atom) -> str:
    terms = [f"(* {_num(c)} {_sym(v)})" if c != 1 else _sym(v) for v, c in a.coeffs]
    lhs = terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"
    op = "<=" if a.op == "<=" else "="
    return f"({op} {lhs} {_num(a.rhs)})"


def _node(n: Node) -> str:
    if isinstance(n, BConst):
        return "true" if n.value else "false"
    if isinstance(n, BVar):
        return _sym(n.name)
    if isinstance(n, BAtom):
        return _atom(n.atom)
    if isinstance(n, BNot):
        return f"(not {_node(n.arg)})"
    if isinstance(n, BAnd):
        return f"(and {' '.join(_node(a) for a in n.args)})"
    if isinstance(n, BOr):
        return f"(or {' '.join(_node(a) for a in n.args)})"
    raise TypeError(n)


def to_smtlib(enc: Encoding) -> str:
    lines = ["(set-logic QF_LIA)"]
    for v in sorted(enc.int_vars):
        lines.append(f"(declare-fun {_sym(v)} () Int)")
    for v in sorted(enc.bool_vars):
        lines.append(f"(declare-fun {_sym(v)} () Bool)")
    lines.append(f"(assert {_node(enc.root)})")
    lines.append("(check-sat)")
    names = sorted(enc.int_vars | enc.bool_vars)
    if names:
        lines.append(f"(get-value ({' '.join(_sym(v) for v in names)}))")
    lines.append("(exit)")
    return "\n".join(lines) + "\n"


def parse_sexprs(text: str) -> list:
    """Tiny s-expression reader for solver replies."""
    tokens: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append(ch)
            i += 1
        elif ch == "|":
            j = text.index("|", i + 1)
            tokens.append(text[i + 1:j])
            i = j + 1
        elif ch == '"':
            j = text.index('"', i + 1)
            tokens.append(text[i:j + 1])
            i = j + 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            tokens.append(text[i:j])
            i = j
    out: list = []
    stack: list[list] = [out]
    for t in tokens:
        if t == "(":
            stack.append([])
        elif t == ")":
            if len(stack) == 1:
                raise ExternalSolverError("unbalanced solver output")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(t)
    if len(stack) != 1:
        raise ExternalSolverError("unbalanced solver output")
    return out


def _value(v) -> Union[int, bool]:
    if v == "true":
        return True
    if v == "false":
        return False
    if isinstance(v, list) and len(v) == 2 and v[0] == "-":
        return -int(v[1])
    return int(v)


def resolve_command(endpoint: Union[str, Sequence[str], None]) -> Optional[list[str]]:
    if endpoint is None:
        endpoint = os.environ.get(ENV_VAR)
    if not endpoint:
        return None
    return shlex.split(endpoint) if isinstance(endpoint, str) else list(endpoint)


def run_external(enc: Encoding, endpoint: Union[str, Sequence[str]],
                 timeout: float = 30.0) -> tuple[str, Optional[dict]]:
    cmd = resolve_command(endpoint)
    if not cmd:
        raise ExternalSolverError("no solver command configured")
    script = to_smtlib(enc)
    try:
        proc = subprocess.run(cmd, input=script, capture_output=True, text=True, timeout=timeout)
    except (OSError, ValueError) as exc:
        raise ExternalSolverError(f"cannot run {cmd[0]!r}: {exc}") from exc
    except subprocess.TimeoutExpired as exc:
        raise ExternalSolverError("external solver timed out") from exc
    try:
        replies = parse_sexprs(proc.stdout)
    except ValueError as exc:
        raise ExternalSolverError(f"unreadable solver output: {exc}") from exc
    if not replies or replies[0] not in ("sat", "unsat", "unknown"):
        raise ExternalSolverError(f"unexpected solver output: {proc.stdout[:200]!r} {proc.stderr[:200]!r}")
    status = replies[0]
    if status != "sat":
        return status, None
    model: dict = {}
    if len(replies) > 1 and isinstance(replies[1], list):
        for pair in replies[1]:
            if isinstance(pair, list) and len(pair) == 2 and isinstance(pair[0], str):
                try:
                    model[pair[0]] = _value(pair[1])
                except (TypeError, ValueError) as exc:
                    raise ExternalSolverError(f"bad model value {pair!r}") from exc
    return status, model
