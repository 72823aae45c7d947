from . import ast
from .checker import BUILTIN_VARS, TypeCheckError, check_types
from .lexer import LexError, Token, TokenKind, tokenize
from .parser import ParseError, parse_contract, parse_source
from .printer import pretty_print

__all__ = [
    "ast", "BUILTIN_VARS", "TypeCheckError", "check_types", "LexError", "Token",
    "TokenKind", "tokenize", "ParseError", "parse_contract", "parse_source", "pretty_print",
]
