"""Tokenizer for the Verilog subset.

Comments (// and /* */) are stripped. Anything the subset cannot express
raises LexError with the offending span so the parser can surface a located
diagnostic instead of crashing on arbitrary byte input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from verikit.front.nodes import SourceSpan

KEYWORDS = frozenset(
    """
    module endmodule input output inout wire reg logic parameter localparam
    assign always begin end if else case casez casex endcase default
    posedge negedge signed integer real initial generate endgenerate genvar
    for while repeat forever task endtask function endfunction
    """.split()
)

# Keywords recognized but outside the subset; naming them yields better
# "unsupported construct" diagnostics than a generic syntax error.
UNSUPPORTED_KEYWORDS = frozenset(
    """
    signed integer real initial generate endgenerate genvar for while repeat
    forever task endtask function endfunction casex
    """.split()
)

_OPERATORS = [
    "<<<", ">>>", "===", "!==",
    "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "~&", "~|", "~^", "^~",
    "+:", "-:",
    "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "=",
    "?", ":", ",", ";", "(", ")", "[", "]", "{", "}", "@", "#", ".",
]

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<based>(?:\d[\d_]*)?'\s*[sS]?[bodhBODH][0-9a-fA-FxXzZ_?]+)
  | (?P<num>\d[\d_]*)
  | (?P<id>[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<op>%s)
  | (?P<tick>`[A-Za-z_]*)
  | (?P<bad>.)
    """
    % "|".join(re.escape(op) for op in _OPERATORS),
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "id" | "num" | "based" | "op" | "kw" | "eof"
    text: str
    start: int
    end: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.start, self.end)


class LexError(Exception):
    def __init__(self, message: str, span: SourceSpan, unsupported: bool = False):
        super().__init__(message)
        self.message = message
        self.span = span
        self.unsupported = unsupported


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:  # only possible on unterminated /* comment
            raise LexError("unterminated block comment", SourceSpan(pos, n))
        kind = m.lastgroup
        s, e = m.start(), m.end()
        pos = e
        if kind in ("ws", "line_comment", "block_comment"):
            continue
        if kind == "tick":
            raise LexError(
                f"compiler directive {m.group()!r} is not supported",
                SourceSpan(s, e),
                unsupported=True,
            )
        if kind == "bad":
            raise LexError(f"unexpected character {m.group()!r}", SourceSpan(s, e))
        if kind == "id":
            word = m.group()
            if word in KEYWORDS:
                tokens.append(Token("kw", word, s, e))
            else:
                tokens.append(Token("id", word, s, e))
        else:
            tokens.append(Token(kind, m.group(), s, e))
    tokens.append(Token("eof", "", n, n if n > 0 else 1))
    return tokens


def parse_number_literal(text: str, span: SourceSpan) -> tuple[int, int | None, int, int, str]:
    """Decode a literal into (value, width, xmask, zmask, base).

    Unsized decimals report width None; sized/based literals are truncated
    or zero-extended to their declared size like standard Verilog.
    """
    raw = text.replace("_", "").replace(" ", "")
    if "'" not in raw:
        return int(raw), None, 0, 0, "d"
    size_str, rest = raw.split("'", 1)
    if rest and rest[0] in "sS":
        raise LexError("signed literals are not supported", span, unsupported=True)
    base_char = rest[0].lower()
    digits = rest[1:]
    if not digits:
        raise LexError(f"malformed literal {text!r}", span)
    base_bits = {"b": 1, "o": 3, "h": 4, "d": 0}[base_char]
    value = 0
    xmask = 0
    zmask = 0
    if base_char == "d":
        if any(c in "xXzZ?" for c in digits):
            raise LexError(f"x/z digits need a binary/octal/hex base: {text!r}", span)
        value = int(digits, 10)
    else:
        radix = 1 << base_bits
        for c in digits:
            value <<= base_bits
            xmask <<= base_bits
            zmask <<= base_bits
            if c in "xX":
                xmask |= radix - 1
            elif c in "zZ?":
                zmask |= radix - 1
            else:
                value |= int(c, radix)
    if size_str:
        width = int(size_str)
        if width <= 0:
            raise LexError(f"zero-width literal {text!r}", span)
        mask = (1 << width) - 1
        # Per-standard: an x/z leading digit extends to the full width.
        if base_bits and len(digits) * base_bits < width:
            written = len(digits) * base_bits
            lead = (digits[0] if digits else "0")
            ext = mask ^ ((1 << written) - 1)
            if lead in "xX":
                xmask |= ext
            elif lead in "zZ?":
                zmask |= ext
        value &= mask
        xmask &= mask
        zmask &= mask
        value &= ~(xmask | zmask)
        return value, width, xmask, zmask, base_char
    return value, None, xmask, zmask, base_char
