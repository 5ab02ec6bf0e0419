"""Rouge-L similarity over token sequences.

Code is tokenized with the Verilog lexer so formatting differences do not
inflate similarity; natural language splits on whitespace.
"""

from __future__ import annotations

from verikit.front.lexer import LexError, tokenize

__all__ = ["lcs_length", "rouge_l", "tokenize_code", "tokenize_text"]


def tokenize_code(source: str) -> list[str]:
    """Lexer token texts; falls back to whitespace splitting when the text
    is not lexable Verilog (malformed candidates still need a score)."""
    try:
        return [t.text for t in tokenize(source) if t.kind != "eof"]
    except LexError:
        return source.split()


def tokenize_text(text: str) -> list[str]:
    return text.split()


def lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    if len(b) > len(a):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        append = cur.append
        for j, y in enumerate(b, 1):
            if x == y:
                append(prev[j - 1] + 1)
            else:
                pj = prev[j]
                cj = cur[j - 1]
                append(pj if pj >= cj else cj)
        prev = cur
    return prev[-1]


def rouge_l(a: list[str], b: list[str]) -> float:
    """LCS F-measure 2PR/(P+R) with P = LCS/|a| and R = LCS/|b|.

    Both empty compares as identical (1.0); one-sided empty is 0.0.
    """
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    lcs = lcs_length(a, b)
    if lcs == 0:
        return 0.0
    p = lcs / len(a)
    r = lcs / len(b)
    return 2.0 * p * r / (p + r)
