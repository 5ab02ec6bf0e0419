"""Front end for the supported synthesizable Verilog subset."""

from verikit.front.nodes import (
    Ast,
    ModuleDecl,
    PortDecl,
    SourceSpan,
    SourceUnit,
)
from verikit.front.lexer import LexError, Token, tokenize
from verikit.front.parser import ParseDiagnostic, ParseError, parse_source, resolve_top
from verikit.front.printer import print_ast

__all__ = [
    "Ast",
    "LexError",
    "ModuleDecl",
    "ParseDiagnostic",
    "ParseError",
    "PortDecl",
    "SourceSpan",
    "SourceUnit",
    "Token",
    "parse_source",
    "print_ast",
    "resolve_top",
    "tokenize",
]
