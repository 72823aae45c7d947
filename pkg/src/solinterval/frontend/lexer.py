"""Tokenizer for the MiniSol language subset."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENTIFIER = "identifier"
    INTEGER = "integer-literal"
    STRING = "string-literal"
    OPERATOR = "operator"
    PUNCT = "punctuation"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int
    column: int

    def __repr__(self) -> str:
        return f"{self.kind.name.lower()}({self.lexeme})@{self.line}:{self.column}"


class LexError(Exception):
    def __init__(self, line: int, column: int, char: str):
        super().__init__(f"line {line}, column {column}: unexpected character {char!r}")
        self.line = line
        self.column = column
        self.char = char


_SIZED = {f"uint{b}" for b in range(8, 257, 8)} | {f"int{b}" for b in range(8, 257, 8)}

KEYWORDS = frozenset({
    "contract", "function", "returns", "return", "if", "else", "while", "for",
    "uint", "int", "bool", "address", "mapping", "struct", "string", "true", "false",
    "pragma", "public", "private", "internal", "external", "pure", "view", "payable",
    "memory", "storage", "calldata", "constant",
}) | _SIZED

# longest first so that maximal munch works with a simple prefix scan
OPERATORS = (
    "==", "!=", "<=", ">=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "++", "--", "=>",
    "=", "<", ">", "+", "-", "*", "/", "%", "!", "^", "~",
)
PUNCT = "(){}[];,."


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def advance(count: int) -> None:
        nonlocal i, line, col
        for _ in range(count):
            if source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                advance(1)
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise LexError(line, col, "/")
            advance(end + 2 - i)
            continue

        start_line, start_col = line, col
        if ch.isalpha() or ch == "_" or ch == "$":
            j = i
            while j < n and (source[j].isalnum() or source[j] in "_$"):
                j += 1
            word = source[i:j]
            kind = TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENTIFIER
            tokens.append(Token(kind, word, start_line, start_col))
            advance(j - i)
            continue
        if ch.isdigit():
            j = i
            if source.startswith(("0x", "0X"), i):
                j += 2
                while j < n and source[j] in "0123456789abcdefABCDEF":
                    j += 1
            else:
                while j < n and source[j].isdigit():
                    j += 1
            tokens.append(Token(TokenKind.INTEGER, source[i:j], start_line, start_col))
            advance(j - i)
            continue
        if ch in "\"'":
            j = i + 1
            while j < n and source[j] != ch:
                if source[j] == "\\":
                    j += 1
                if j < n and source[j] == "\n":
                    raise LexError(start_line, start_col, ch)
                j += 1
            if j >= n:
                raise LexError(start_line, start_col, ch)
            tokens.append(Token(TokenKind.STRING, source[i:j + 1], start_line, start_col))
            advance(j + 1 - i)
            continue
        for op in OPERATORS:
            if source.startswith(op, i):
                tokens.append(Token(TokenKind.OPERATOR, op, start_line, start_col))
                advance(len(op))
                break
        else:
            if ch in PUNCT:
                tokens.append(Token(TokenKind.PUNCT, ch, start_line, start_col))
                advance(1)
            else:
                raise LexError(line, col, ch)
    return tokens
