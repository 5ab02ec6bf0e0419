"""Width-annotated dataflow IR.

Elaboration lowers every driver (continuous assigns, combinational and
edge-triggered always blocks) into one expression DAG per driven signal,
using mux nodes to encode branch merging. Nodes are shared aggressively so
code generation can reuse temporaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Node ops:
#   const(v, x)                      literal bits
#   read(slot)                       current value of a signal
#   memread(mem, addr)               word fetch, attrs=(min_addr, depth)
#   and/or/xor(a, b)                 bitwise
#   not(a)
#   add/sub/mul/div/mod(a, b)
#   shl/shr(a, b)                    b self-determined
#   eq/ne/lt/le(a, b)                width-1 results
#   land/lor(a, b), lnot(a)          on 1-bit truth values
#   bool(a)                          vector -> 1-bit truth
#   redand/redor/redxor(a)
#   mux(c, a, b)                     c 1-bit; X condition merges a and b
#   concat(parts...)                 parts LSB-last (Verilog order)
#   resize(a)                        zero-extend or truncate to .width
#   slice(a)                         attrs=(offset,), constant part-select
#   splice(base, val)                attrs=(offset,), constant-range update
#   bitsel(a, idx)                   attrs=(lsb, descending)
#   vsplice(base, idx, val)          attrs=(lsb, descending)
#   match(sel)                       attrs=(value, care) case-item compare


@dataclass(eq=False)
class Node:
    op: str
    width: int
    args: tuple = ()
    attrs: tuple = ()

    def __repr__(self):
        return f"<{self.op}:{self.width} {self.attrs}>"


def const(v: int, x: int, width: int) -> Node:
    mask = (1 << width) - 1
    v &= mask
    x &= mask
    return Node("const", width, (), (v & ~x, x))


CONST_X1 = const(0, 1, 1)


def xconst(width: int) -> Node:
    return const(0, (1 << width) - 1, width)


def read(slot: int, width: int) -> Node:
    return Node("read", width, (), (slot,))


def resize(a: Node, width: int) -> Node:
    if a.width == width:
        return a
    if a.op == "const":
        v, x = a.attrs
        return const(v, x, width)
    return Node("resize", width, (a,))


def mux(c: Node, a: Node, b: Node) -> Node:
    assert c.width == 1 and a.width == b.width
    if c.op == "const":
        cv, cx = c.attrs
        if not cx:
            return a if cv else b
    if a is b:
        return a
    return Node("mux", a.width, (c, a, b))


def collect_read_slots(node: Node, acc: set[int], seen: set[int] | None = None):
    """All signal slots read anywhere in the DAG under node."""
    if seen is None:
        seen = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if n.op == "read":
            acc.add(n.attrs[0])
        stack.extend(n.args)


def collect_mem_reads(node: Node, acc: set[int], seen: set[int] | None = None):
    if seen is None:
        seen = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if n.op == "memread":
            acc.add(n.attrs[0])
        stack.extend(n.args)
