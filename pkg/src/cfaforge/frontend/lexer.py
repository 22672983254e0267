from __future__ import annotations

import enum
from dataclasses import dataclass

from ..errors import LexError

INT_MAX = 2**31 - 1


class TokenKind(enum.Enum):
    KEYWORD = "keyword"
    IDENT = "identifier"
    INT = "integer-literal"
    OP = "operator"
    PUNCT = "punctuation"
    EOF = "eof"


KEYWORDS = frozenset({
    "int", "bool", "_Bool", "void", "extern", "if", "else", "while", "do",
    "switch", "case", "default", "break", "continue", "goto", "return",
    "true", "false",
    # recognised only so the parser can reject them with a clear message
    "float", "double", "char", "long", "short", "unsigned", "signed",
    "struct", "union", "enum", "typedef", "for", "static", "const",
})

# longest match first
OPERATORS = (
    "&&", "||", "==", "!=", "<=", ">=", "++", "--", "+=", "-=", "*=", "/=",
    "%=", "->", "<<", ">>",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "&", "|", "^", "~", "?", ".",
)
PUNCTUATION = frozenset("(){};,:[]")


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    column: int

    def __repr__(self) -> str:
        return f"{self.kind.name}({self.text!r}@{self.line}:{self.column})"


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens; comments and whitespace are dropped.

    The returned list does not include an end-of-file marker.
    """
    tokens: list[Token] = []
    i = 0
    line, col = 1, 1
    n = len(source)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for ch in source[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = source[i]
        if ch in " \t\r\n\f\v":
            advance(1)
            continue
        if source.startswith("//", i):
            end = source.find("\n", i)
            advance((n if end < 0 else end) - i)
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise LexError("unterminated comment", line, col)
            advance(end + 2 - i)
            continue
        start_line, start_col = line, col
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, text, start_line, start_col))
            advance(j - i)
            continue
        if ch.isdigit():
            j = i + 1
            while j < n and source[j].isdigit():
                j += 1
            if j < n and (source[j].isalpha() or source[j] == "_"):
                raise LexError(f"malformed number {source[i:j + 1]!r}", start_line, start_col)
            text = source[i:j]
            # INT_MAX + 1 is allowed so that -2147483648 can be written
            if int(text) > INT_MAX + 1:
                raise LexError(f"integer literal {text} out of range", start_line, start_col)
            tokens.append(Token(TokenKind.INT, text, start_line, start_col))
            advance(j - i)
            continue
        if ch in PUNCTUATION:
            tokens.append(Token(TokenKind.PUNCT, ch, start_line, start_col))
            advance(1)
            continue
        for op in OPERATORS:
            if source.startswith(op, i):
                tokens.append(Token(TokenKind.OP, op, start_line, start_col))
                advance(len(op))
                break
        else:
            raise LexError(f"unexpected character {ch!r}", start_line, start_col)
    return tokens
