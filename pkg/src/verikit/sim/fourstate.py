"""Four-state bit-vector primitives.

A value is a pair of ints (v, x): bit i is X when x has bit i set, else it
carries v's bit. Canonical form keeps v & x == 0. Z is not represented
dynamically; statically undriven bits are tracked by the model and rendered
as 'z' only for display.

Propagation rules: dominant operands win (0&X=0, 1|X=1), everything else
with an X operand is X; arithmetic and comparisons go all-X when any input
bit is X; division or modulo by zero is all-X.
"""

from __future__ import annotations

__all__ = [
    "add",
    "band",
    "bnot",
    "bool3",
    "bor",
    "bxor",
    "div",
    "eq",
    "le",
    "lt",
    "fmt_bits",
    "mem_commit",
    "mem_read",
    "mod",
    "mul",
    "mux",
    "ne",
    "redand",
    "redor",
    "redxor",
    "bitsel",
    "vsplice",
    "shl",
    "shr",
    "sub",
    "match",
]


def band(av, ax, bv, bx):
    rx = (ax | bx) & (av | ax) & (bv | bx)
    return av & bv, rx


def bor(av, ax, bv, bx):
    rv = av | bv
    return rv, (ax | bx) & ~rv


def bxor(av, ax, bv, bx):
    rx = ax | bx
    return (av ^ bv) & ~rx, rx


def bnot(av, ax, mask):
    return ~av & mask & ~ax, ax


def add(av, ax, bv, bx, mask):
    if ax | bx:
        return 0, mask
    return (av + bv) & mask, 0


def sub(av, ax, bv, bx, mask):
    if ax | bx:
        return 0, mask
    return (av - bv) & mask, 0


def mul(av, ax, bv, bx, mask):
    if ax | bx:
        return 0, mask
    return (av * bv) & mask, 0


def div(av, ax, bv, bx, mask):
    if ax | bx or bv == 0:
        return 0, mask
    return (av // bv) & mask, 0


def mod(av, ax, bv, bx, mask):
    if ax | bx or bv == 0:
        return 0, mask
    return (av % bv) & mask, 0


def shl(av, ax, bv, bx, mask):
    if bx:
        return 0, mask
    if bv >= mask.bit_length():  # huge amounts shift everything out
        return 0, 0
    return (av << bv) & mask, (ax << bv) & mask


def shr(av, ax, bv, bx, mask):
    if bx:
        return 0, mask
    return av >> bv, ax >> bv


def eq(av, ax, bv, bx):
    if ax | bx:
        return 0, 1
    return int(av == bv), 0


def ne(av, ax, bv, bx):
    if ax | bx:
        return 0, 1
    return int(av != bv), 0


def lt(av, ax, bv, bx):
    if ax | bx:
        return 0, 1
    return int(av < bv), 0


def le(av, ax, bv, bx):
    if ax | bx:
        return 0, 1
    return int(av <= bv), 0


def bool3(v, x):
    """Truth value of a vector: 1 if any definite 1 bit, 0 if all-zero
    defined, X otherwise."""
    if v:
        return 1, 0
    if x:
        return 0, 1
    return 0, 0


def redand(v, x, mask):
    if (~v & ~x) & mask:
        return 0, 0
    if x:
        return 0, 1
    return 1, 0


def redor(v, x):
    if v:
        return 1, 0
    if x:
        return 0, 1
    return 0, 0


def redxor(v, x):
    if x:
        return 0, 1
    return bin(v).count("1") & 1, 0


def mux(cv, cx, av, ax, bv, bx, mask):
    if cx:
        agree = ~(ax | bx) & ~(av ^ bv)
        return av & agree, mask & ~agree
    if cv:
        return av, ax
    return bv, bx


def bitsel(bv, bx, iv, ix, lsb, descending, width):
    if ix:
        return 0, 1
    off = (iv - lsb) if descending else (lsb - iv)
    if off < 0 or off >= width:
        return 0, 1
    return (bv >> off) & 1, (bx >> off) & 1


def vsplice(basev, basex, iv, ix, valv, valx, lsb, descending, width, mask):
    if ix:
        return 0, mask
    off = (iv - lsb) if descending else (lsb - iv)
    if off < 0 or off >= width:
        return basev, basex
    bit = 1 << off
    return (basev & ~bit) | ((valv & 1) << off), (basex & ~bit) | ((valx & 1) << off)


def match(sv, sx, val, care):
    """Case-item match: definite mismatch beats unknowns, X in the selector
    over cared bits makes the match unknown."""
    if (sv ^ val) & ~sx & care:
        return 0, 0
    if sx & care:
        return 0, 1
    return 1, 0


def mem_read(mv, mx, av, ax, min_addr, depth, mask):
    if ax:
        return 0, mask
    idx = av - min_addr
    if idx < 0 or idx >= depth:
        return 0, mask
    return mv[idx], mx[idx]


def mem_commit(mv, mx, gv, gx, av, ax, dv, dx, min_addr, depth, mask):
    """Apply one guarded memory write in commit order.

    An unknown guard merges old and new word contents; an unknown address
    means any single word may have been written, so every word merges with
    the data.
    """
    if not gv and not gx:
        return
    if ax:
        for i in range(depth):
            ov, ox = mv[i], mx[i]
            agree = ~(ox | dx) & ~(ov ^ dv)
            mv[i] = ov & agree
            mx[i] = mask & ~agree
        return
    idx = av - min_addr
    if idx < 0 or idx >= depth:
        return
    if gx:
        ov, ox = mv[idx], mx[idx]
        agree = ~(ox | dx) & ~(ov ^ dv)
        mv[idx] = ov & agree
        mx[idx] = mask & ~agree
    else:
        mv[idx] = dv
        mx[idx] = dx


def fmt_bits(v, x, width, zmask=0):
    """Render as a Verilog-style binary string, e.g. 4'b10xz."""
    bits = []
    for i in range(width - 1, -1, -1):
        if (zmask >> i) & 1:
            bits.append("z")
        elif (x >> i) & 1:
            bits.append("x")
        else:
            bits.append(str((v >> i) & 1))
    return f"{width}'b{''.join(bits)}"
