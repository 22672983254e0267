"""Lexer, parser, type checker and printer for the restricted C dialect."""

from . import ast
from .lexer import Token, TokenKind, tokenize
from .parser import parse, parse_source
from .printer import print_program
from .typecheck import typecheck


def load_program(source: str) -> ast.Program:
    """Tokenize, parse and type check ``source``."""
    return typecheck(parse(tokenize(source)))


__all__ = [
    "ast", "Token", "TokenKind", "tokenize", "parse", "parse_source",
    "print_program", "typecheck", "load_program",
]
