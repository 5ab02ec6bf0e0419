"""Compile elaborated dataflow into plain Python step functions.

Each model gets one combinational-settle function plus one function per
(signal, edge) event. Expressions become straight-line statements over
(value, xmask) int pairs; node temporaries are shared across the whole
function via DAG memoization.
"""

from __future__ import annotations

from verikit.sim import fourstate as fs
from verikit.sim.elaborate import ElabResult, MemWrite, SeqBlock
from verikit.sim.ir import Node

_HELPERS = {
    "_add": fs.add,
    "_sub": fs.sub,
    "_mul": fs.mul,
    "_div": fs.div,
    "_mod": fs.mod,
    "_shl": fs.shl,
    "_shr": fs.shr,
    "_eq": fs.eq,
    "_ne": fs.ne,
    "_lt": fs.lt,
    "_le": fs.le,
    "_bool3": fs.bool3,
    "_redand": fs.redand,
    "_redor": fs.redor,
    "_redxor": fs.redxor,
    "_bitsel": fs.bitsel,
    "_vsplice": fs.vsplice,
    "_match": fs.match,
    "_memread": fs.mem_read,
    "_memcommit": fs.mem_commit,
}


class _Emitter:
    def __init__(self):
        self.lines: list[str] = []
        self.memo: dict[int, tuple[str, str]] = {}
        self.n = 0

    def temp(self) -> tuple[str, str]:
        self.n += 1
        return f"t{self.n}v", f"t{self.n}x"

    def emit(self, node: Node) -> tuple[str, str]:
        got = self.memo.get(id(node))
        if got is not None:
            return got
        res = self._emit(node)
        self.memo[id(node)] = res
        return res

    def _emit(self, node: Node) -> tuple[str, str]:
        op = node.op
        w = node.width
        mask = (1 << w) - 1
        L = self.lines.append

        if op == "const":
            v, x = node.attrs
            return str(v), str(x)
        if op == "read":
            slot = node.attrs[0]
            tv, tx = self.temp()
            L(f"{tv} = s[{2 * slot}]; {tx} = s[{2 * slot + 1}]")
            return tv, tx
        if op == "resize":
            av, ax = self.emit(node.args[0])
            if node.args[0].width <= w:
                return av, ax  # values are canonical non-negative: zext is free
            tv, tx = self.temp()
            L(f"{tv} = {av} & {mask}; {tx} = {ax} & {mask}")
            return tv, tx
        if op in ("and", "or", "xor"):
            av, ax = self.emit(node.args[0])
            bv, bx = self.emit(node.args[1])
            tv, tx = self.temp()
            if op == "and":
                L(f"{tv} = {av} & {bv}; {tx} = ({ax} | {bx}) & ({av} | {ax}) & ({bv} | {bx})")
            elif op == "or":
                L(f"{tv} = {av} | {bv}; {tx} = ({ax} | {bx}) & ~{tv}")
            else:
                L(f"{tx} = {ax} | {bx}; {tv} = ({av} ^ {bv}) & ~{tx}")
            return tv, tx
        if op == "not":
            av, ax = self.emit(node.args[0])
            tv, tx = self.temp()
            L(f"{tv} = ~{av} & {mask} & ~{ax}; {tx} = {ax}")
            return tv, tx
        if op in ("land", "lor"):
            av, ax = self.emit(node.args[0])
            bv, bx = self.emit(node.args[1])
            tv, tx = self.temp()
            if op == "land":
                L(f"{tv} = {av} & {bv}; {tx} = ({ax} | {bx}) & ({av} | {ax}) & ({bv} | {bx})")
            else:
                L(f"{tv} = {av} | {bv}; {tx} = ({ax} | {bx}) & ~{tv}")
            return tv, tx
        if op == "lnot":
            av, ax = self.emit(node.args[0])
            tv, tx = self.temp()
            L(f"{tv} = ({av} ^ 1) & ~{ax}; {tx} = {ax}")
            return tv, tx
        if op in ("add", "sub", "mul", "div", "mod", "shl", "shr"):
            av, ax = self.emit(node.args[0])
            bv, bx = self.emit(node.args[1])
            tv, tx = self.temp()
            L(f"{tv}, {tx} = _{op}({av}, {ax}, {bv}, {bx}, {mask})")
            return tv, tx
        if op in ("eq", "ne", "lt", "le"):
            av, ax = self.emit(node.args[0])
            bv, bx = self.emit(node.args[1])
            tv, tx = self.temp()
            L(f"{tv}, {tx} = _{op}({av}, {ax}, {bv}, {bx})")
            return tv, tx
        if op == "bool":
            av, ax = self.emit(node.args[0])
            tv, tx = self.temp()
            L(f"{tv}, {tx} = _bool3({av}, {ax})")
            return tv, tx
        if op in ("redand", "redor", "redxor"):
            a = node.args[0]
            av, ax = self.emit(a)
            tv, tx = self.temp()
            amask = (1 << a.width) - 1
            if op == "redand":
                L(f"{tv}, {tx} = _redand({av}, {ax}, {amask})")
            else:
                L(f"{tv}, {tx} = _{op}({av}, {ax})")
            return tv, tx
        if op == "mux":
            cv, cx = self.emit(node.args[0])
            av, ax = self.emit(node.args[1])
            bv, bx = self.emit(node.args[2])
            tv, tx = self.temp()
            ag = f"ag{self.n}"
            L(f"if {cx}:")
            L(f"    {ag} = ~({ax} | {bx}) & ~({av} ^ {bv})")
            L(f"    {tv} = {av} & {ag}; {tx} = {mask} & ~{ag}")
            L(f"elif {cv}:")
            L(f"    {tv} = {av}; {tx} = {ax}")
            L("else:")
            L(f"    {tv} = {bv}; {tx} = {bx}")
            return tv, tx
        if op == "concat":
            parts = [self.emit(p) for p in node.args]
            widths = [p.width for p in node.args]
            tv, tx = self.temp()
            vterms = []
            xterms = []
            off = w
            for (pv, px), pw in zip(parts, widths):
                off -= pw
                vterms.append(f"({pv} << {off})" if off else pv)
                xterms.append(f"({px} << {off})" if off else px)
            L(f"{tv} = {' | '.join(vterms)}")
            L(f"{tx} = {' | '.join(xterms)}")
            return tv, tx
        if op == "slice":
            av, ax = self.emit(node.args[0])
            (off,) = node.attrs
            tv, tx = self.temp()
            if off:
                L(f"{tv} = ({av} >> {off}) & {mask}; {tx} = ({ax} >> {off}) & {mask}")
            else:
                L(f"{tv} = {av} & {mask}; {tx} = {ax} & {mask}")
            return tv, tx
        if op == "splice":
            bv, bx = self.emit(node.args[0])
            vv, vx = self.emit(node.args[1])
            (off,) = node.attrs
            vw = node.args[1].width
            m = ((1 << vw) - 1) << off
            tv, tx = self.temp()
            L(f"{tv} = ({bv} & {~m & mask}) | (({vv} << {off}) & {m})")
            L(f"{tx} = ({bx} & {~m & mask}) | (({vx} << {off}) & {m})")
            return tv, tx
        if op == "vsplice":
            bv, bx = self.emit(node.args[0])
            iv, ix = self.emit(node.args[1])
            vv, vx = self.emit(node.args[2])
            lsb, desc = node.attrs
            tv, tx = self.temp()
            L(f"{tv}, {tx} = _vsplice({bv}, {bx}, {iv}, {ix}, {vv}, {vx}, "
              f"{lsb}, {desc}, {w}, {mask})")
            return tv, tx
        if op == "bitsel":
            av, ax = self.emit(node.args[0])
            iv, ix = self.emit(node.args[1])
            lsb, desc = node.attrs
            aw = node.args[0].width
            tv, tx = self.temp()
            L(f"{tv}, {tx} = _bitsel({av}, {ax}, {iv}, {ix}, {lsb}, {desc}, {aw})")
            return tv, tx
        if op == "match":
            sv, sx = self.emit(node.args[0])
            value, care = node.attrs
            tv, tx = self.temp()
            L(f"{tv}, {tx} = _match({sv}, {sx}, {value}, {care})")
            return tv, tx
        if op == "memread":
            av, ax = self.emit(node.args[0])
            mem_idx, min_addr, depth = node.attrs
            tv, tx = self.temp()
            L(f"{tv}, {tx} = _memread(mv[{mem_idx}], mx[{mem_idx}], {av}, {ax}, "
              f"{min_addr}, {depth}, {mask})")
            return tv, tx
        raise AssertionError(f"unhandled IR op {op!r}")


def _compile(src: str, name: str):
    g = dict(_HELPERS)
    code = compile(src, f"<verikit:{name}>", "exec")
    exec(code, g)
    return g[name]


def compile_comb(res: ElabResult):
    em = _Emitter()
    for slot, node in res.comb_plan:
        v, x = em.emit(node)
        em.lines.append(f"s[{2 * slot}] = {v}; s[{2 * slot + 1}] = {x}")
    body = "\n    ".join(em.lines) if em.lines else "pass"
    helper_args = ", ".join(f"{h}={h}" for h in _HELPERS)
    src = f"def comb_step(s, mv, mx, {helper_args}):\n    {body}\n"
    return _compile(src, "comb_step"), src


def compile_event(res: ElabResult, blocks: list[SeqBlock], name: str):
    """One function firing all blocks triggered by a given event: every
    next-value is computed against pre-commit state, then committed."""
    em = _Emitter()
    computed: list[tuple[int, str, str]] = []
    mems: list[tuple[MemWrite, tuple[str, str], tuple[str, str], tuple[str, str]]] = []
    for blk in blocks:
        for slot, node in blk.updates:
            v, x = em.emit(node)
            computed.append((slot, v, x))
        for wr in blk.mem_writes:
            g = em.emit(wr.guard)
            a = em.emit(wr.addr)
            d = em.emit(wr.data)
            mems.append((wr, g, a, d))
    for slot, v, x in computed:
        em.lines.append(f"s[{2 * slot}] = {v}; s[{2 * slot + 1}] = {x}")
    for wr, (gv, gx), (av, ax), (dv, dx) in mems:
        mem = res.memories[wr.mem]
        mask = (1 << mem.width) - 1
        em.lines.append(
            f"_memcommit(mv[{wr.mem}], mx[{wr.mem}], {gv}, {gx}, {av}, {ax}, "
            f"{dv}, {dx}, {mem.min_addr}, {mem.depth}, {mask})"
        )
    body = "\n    ".join(em.lines) if em.lines else "pass"
    helper_args = ", ".join(f"{h}={h}" for h in _HELPERS)
    src = f"def {name}(s, mv, mx, {helper_args}):\n    {body}\n"
    return _compile(src, name), src
