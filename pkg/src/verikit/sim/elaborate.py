"""Elaboration: flatten a parsed design into an executable dataflow model.

Steps: flatten module instances, allocate signal slots, lower every always
block to per-target next-value expressions (branches become mux merges so X
conditions propagate pessimistically), compose continuous-assign drivers,
topologically sort the combinational graph, and hand the result to codegen.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from verikit.front.nodes import (
    AlwaysBlock,
    Assign,
    Ast,
    Binary,
    Case,
    Concat,
    ContinuousAssign,
    Expr,
    Ident,
    If,
    Index,
    Instance,
    ModuleDecl,
    NetDecl,
    Number,
    ParamDecl,
    PartSelect,
    Repl,
    SensItem,
    Stmt,
    Ternary,
    Unary,
)
from verikit.sim import ir
from verikit.sim.ir import Node

DEFAULT_MAX_WIDTH = 1024
MAX_MEM_WORDS = 1 << 16
MAX_MEM_BITS = 1 << 20


class ElaborationError(Exception):
    pass


@dataclass
class Signal:
    name: str
    slot: int
    width: int
    msb: int
    lsb: int
    is_input: bool = False
    is_output: bool = False
    is_reg_decl: bool = False
    is_state: bool = False  # assigned in an edge-triggered block
    static_z: int = 0  # statically undriven bits (wires only)

    @property
    def descending(self) -> bool:
        return self.msb >= self.lsb

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1


@dataclass
class Memory:
    name: str
    index: int
    width: int
    depth: int
    min_addr: int


@dataclass
class MemWrite:
    mem: int
    guard: Node
    addr: Node
    data: Node


@dataclass
class SeqBlock:
    triggers: list[tuple[int, str]]  # (slot, "pos"|"neg")
    updates: list[tuple[int, Node]]  # register slot -> next-value expr
    mem_writes: list[MemWrite]


@dataclass
class FlatDesign:
    """Everything elaboration needs after instance flattening."""

    name: str
    ports: list  # top-level PortDecl, declaration order
    nets: list[tuple[str, NetDecl]]  # (flat name, decl)
    assigns: list[tuple[Expr, Expr, str]]  # lhs, rhs, name prefix for errors
    always: list[tuple[AlwaysBlock, str]]
    renames: dict[str, str] = field(default_factory=dict)


def _flatten(
    ast: Ast,
    module: ModuleDecl,
    prefix: str,
    stack: tuple[str, ...],
    out: FlatDesign,
):
    if module.name in stack:
        raise ElaborationError(
            f"recursive instantiation of '{module.name}' ({' -> '.join(stack)})"
        )
    ren = {}
    for p in module.ports:
        ren[p.name] = prefix + p.name
    for item in module.items:
        if isinstance(item, NetDecl):
            ren[item.name] = prefix + item.name
    params = {p.name: p.value for p in module.params}

    def rn(e: Expr) -> Expr:
        return _rename_expr(e, ren, params)

    for item in module.items:
        if isinstance(item, NetDecl):
            out.nets.append((prefix + item.name, item))
            if item.init is not None:
                out.assigns.append(
                    (Ident(span=item.span, name=prefix + item.name), rn(item.init), prefix)
                )
        elif isinstance(item, ContinuousAssign):
            out.assigns.append((rn(item.lhs), rn(item.rhs), prefix))
        elif isinstance(item, AlwaysBlock):
            sens = None
            if item.sensitivity is not None:
                sens = [SensItem(edge=s.edge, signal=ren.get(s.signal, s.signal))
                        for s in item.sensitivity]
            blk = AlwaysBlock(span=item.span, sensitivity=sens,
                              body=[_rename_stmt(s, ren, params) for s in item.body])
            out.always.append((blk, prefix))
        elif isinstance(item, Instance):
            child = ast.module(item.module_name)
            if child is None:
                raise ElaborationError(f"instance of undeclared module '{item.module_name}'")
            if item.param_overrides:
                raise ElaborationError(
                    f"parameter overrides on instance '{item.inst_name}' are not supported"
                )
            child_prefix = f"{prefix}{item.inst_name}__"
            # declare one net per child port, then connect
            conns: dict[str, Expr | None] = {}
            if item.connections and item.connections[0][0] is None:
                if any(n is not None for n, _ in item.connections):
                    raise ElaborationError(
                        f"instance '{item.inst_name}' mixes positional and named connections"
                    )
                if len(item.connections) > len(child.ports):
                    raise ElaborationError(
                        f"instance '{item.inst_name}' has more connections than ports"
                    )
                for port, (_, expr) in zip(child.ports, item.connections):
                    conns[port.name] = expr
            else:
                port_names = {p.name for p in child.ports}
                for n, expr in item.connections:
                    if n is None or n not in port_names:
                        raise ElaborationError(
                            f"instance '{item.inst_name}': unknown port '{n}'"
                        )
                    if n in conns:
                        raise ElaborationError(
                            f"instance '{item.inst_name}': port '{n}' connected twice"
                        )
                    conns[n] = expr
            for port in child.ports:
                if port.direction == "inout":
                    raise ElaborationError(
                        f"inout port '{port.name}' on instance '{item.inst_name}'"
                    )
                net_name = child_prefix + port.name
                decl = NetDecl(span=item.span, name=net_name, kind="wire",
                               msb=port.msb, lsb=port.lsb)
                out.nets.append((net_name, decl))
                expr = conns.get(port.name)
                if expr is None:
                    continue  # unconnected port: input floats, output dangles
                if port.direction == "input":
                    out.assigns.append((Ident(span=item.span, name=net_name), rn(expr), prefix))
                else:
                    lhs = rn(expr)
                    _require_lvalue(lhs, item.inst_name)
                    out.assigns.append((lhs, Ident(span=item.span, name=net_name), prefix))
            _flatten(ast, child, child_prefix, stack + (module.name,), out)
        elif isinstance(item, ParamDecl):
            pass
        else:
            raise ElaborationError(f"unsupported item {type(item).__name__}")


def _require_lvalue(e: Expr, inst: str):
    if isinstance(e, Ident):
        return
    if isinstance(e, (Index, PartSelect)):
        _require_lvalue(e.base, inst)
        return
    if isinstance(e, Concat):
        for p in e.parts:
            _require_lvalue(p, inst)
        return
    raise ElaborationError(
        f"output connection on instance '{inst}' must be assignable"
    )


def _rename_expr(e: Expr, ren: dict[str, str], params: dict[str, int]) -> Expr:
    if isinstance(e, Ident):
        if e.name in params:
            v = params[e.name]
            if v < 0:
                raise ElaborationError(
                    f"parameter '{e.name}' is negative; unsigned contexts only"
                )
            return Number(span=e.span, value=v, width=None)
        return Ident(span=e.span, name=ren.get(e.name, e.name))
    if isinstance(e, Number):
        return e
    if isinstance(e, Unary):
        return Unary(span=e.span, op=e.op, operand=_rename_expr(e.operand, ren, params))
    if isinstance(e, Binary):
        return Binary(span=e.span, op=e.op, left=_rename_expr(e.left, ren, params),
                      right=_rename_expr(e.right, ren, params))
    if isinstance(e, Ternary):
        return Ternary(span=e.span, cond=_rename_expr(e.cond, ren, params),
                       then=_rename_expr(e.then, ren, params),
                       other=_rename_expr(e.other, ren, params))
    if isinstance(e, Concat):
        return Concat(span=e.span, parts=[_rename_expr(p, ren, params) for p in e.parts])
    if isinstance(e, Repl):
        return Repl(span=e.span, count=_rename_expr(e.count, ren, params),
                    part=_rename_expr(e.part, ren, params))
    if isinstance(e, Index):
        return Index(span=e.span, base=_rename_expr(e.base, ren, params),
                     index=_rename_expr(e.index, ren, params))
    if isinstance(e, PartSelect):
        return PartSelect(span=e.span, base=_rename_expr(e.base, ren, params),
                          msb=_rename_expr(e.msb, ren, params),
                          lsb=_rename_expr(e.lsb, ren, params))
    raise ElaborationError(f"unsupported expression {type(e).__name__}")


def _rename_stmt(s: Stmt, ren: dict[str, str], params: dict[str, int]) -> Stmt:
    if isinstance(s, Assign):
        return Assign(span=s.span, lhs=_rename_expr(s.lhs, ren, params),
                      rhs=_rename_expr(s.rhs, ren, params), blocking=s.blocking)
    if isinstance(s, If):
        return If(span=s.span, cond=_rename_expr(s.cond, ren, params),
                  then_body=[_rename_stmt(t, ren, params) for t in s.then_body],
                  else_body=[_rename_stmt(t, ren, params) for t in s.else_body])
    if isinstance(s, Case):
        from verikit.front.nodes import CaseArm

        return Case(
            span=s.span,
            kind=s.kind,
            selector=_rename_expr(s.selector, ren, params),
            arms=[CaseArm(labels=[_rename_expr(l, ren, params) for l in a.labels],
                          body=[_rename_stmt(t, ren, params) for t in a.body])
                  for a in s.arms],
            default=None if s.default is None else
            [_rename_stmt(t, ren, params) for t in s.default],
        )
    raise ElaborationError(f"unsupported statement {type(s).__name__}")


# ---------------------------------------------------------------------------
# Expression lowering
# ---------------------------------------------------------------------------


class _Lowerer:
    def __init__(self, signals: dict[str, Signal], memories: dict[str, Memory],
                 params: dict[str, int], max_width: int = DEFAULT_MAX_WIDTH):
        self.signals = signals
        self.memories = memories
        self.params = params
        self.max_width = max_width

    def natural_width(self, e: Expr) -> int:
        if isinstance(e, Ident):
            if e.name in self.params:
                return 32
            sig = self.signals.get(e.name)
            if sig is None:
                if e.name in self.memories:
                    raise ElaborationError(
                        f"memory '{e.name}' used without an index"
                    )
                raise ElaborationError(f"unknown identifier '{e.name}'")
            return sig.width
        if isinstance(e, Number):
            return e.width if e.width is not None else 32
        if isinstance(e, Unary):
            if e.op in ("~", "-", "+"):
                return self.natural_width(e.operand)
            return 1  # reductions and !
        if isinstance(e, Binary):
            if e.op in ("+", "-", "*", "/", "%", "&", "|", "^", "^~", "~^"):
                return max(self.natural_width(e.left), self.natural_width(e.right))
            if e.op in ("<<", ">>", ">>>"):
                return self.natural_width(e.left)
            return 1  # comparisons and logical ops
        if isinstance(e, Ternary):
            return max(self.natural_width(e.then), self.natural_width(e.other))
        if isinstance(e, Concat):
            return sum(self.natural_width(p) for p in e.parts)
        if isinstance(e, Repl):
            return self._const(e.count) * self.natural_width(e.part)
        if isinstance(e, Index):
            if isinstance(e.base, Ident) and e.base.name in self.memories:
                return self.memories[e.base.name].width
            return 1
        if isinstance(e, PartSelect):
            return abs(self._const(e.msb) - self._const(e.lsb)) + 1
        raise ElaborationError(f"unsupported expression {type(e).__name__}")

    def _const(self, e: Expr) -> int:
        if isinstance(e, Number):
            if e.xmask or e.zmask:
                raise ElaborationError("x/z bits in a constant context")
            return e.value
        if isinstance(e, Ident) and e.name in self.params:
            return self.params[e.name]
        if isinstance(e, Unary) and e.op == "-":
            return -self._const(e.operand)
        if isinstance(e, Binary) and e.op in ("+", "-", "*", "/", "%", "<<", ">>"):
            a, b = self._const(e.left), self._const(e.right)
            return {
                "+": a + b, "-": a - b, "*": a * b,
                "<<": a << b, ">>": a >> b,
                "/": a // b if b else 0, "%": a % b if b else 0,
            }[e.op]
        raise ElaborationError("part-select bounds and replication counts must be constant")

    def lower(self, e: Expr, width: int, env: dict[str, Node] | None = None) -> Node:
        """Lower ``e`` in a context of ``width`` bits.

        ``env`` overrides signal reads with in-flight procedural values.
        """
        if width > self.max_width:
            raise ElaborationError(
                f"expression is {width} bits wide, above the "
                f"{self.max_width}-bit limit"
            )
        if isinstance(e, Ident):
            if e.name in self.params:
                return ir.const(self.params[e.name], 0, width)
            node = self._read(e.name, env)
            return ir.resize(node, width)
        if isinstance(e, Number):
            w = e.width if e.width is not None else 32
            return ir.resize(ir.const(e.value, e.xmask | e.zmask, w), width)
        if isinstance(e, Unary):
            if e.op in ("~",):
                return Node("not", width, (self.lower(e.operand, width, env),))
            if e.op == "-":
                zero = ir.const(0, 0, width)
                return Node("sub", width, (zero, self.lower(e.operand, width, env)))
            if e.op == "+":
                return self.lower(e.operand, width, env)
            if e.op == "!":
                inner = self._bool(e.operand, env)
                return ir.resize(Node("lnot", 1, (inner,)), width)
            opn = {"&": "redand", "|": "redor", "^": "redxor",
                   "~&": "redand", "~|": "redor", "~^": "redxor", "^~": "redxor"}[e.op]
            operand = self.lower(e.operand, self.natural_width(e.operand), env)
            node = Node(opn, 1, (operand,))
            if e.op.startswith("~") or e.op == "^~":
                node = Node("lnot", 1, (node,))
            return ir.resize(node, width)
        if isinstance(e, Binary):
            op = e.op
            if op in ("+", "-", "*", "/", "%"):
                name = {"+": "add", "-": "sub", "*": "mul", "/": "div", "%": "mod"}[op]
                return Node(name, width,
                            (self.lower(e.left, width, env), self.lower(e.right, width, env)))
            if op in ("&", "|", "^", "~^", "^~"):
                name = {"&": "and", "|": "or", "^": "xor", "~^": "xnor", "^~": "xnor"}[op]
                a = self.lower(e.left, width, env)
                b = self.lower(e.right, width, env)
                if name == "xnor":
                    return Node("not", width, (Node("xor", width, (a, b)),))
                return Node(name, width, (a, b))
            if op in ("<<", ">>", ">>>"):
                a = self.lower(e.left, width, env)
                b = self.lower(e.right, self.natural_width(e.right), env)
                return Node("shl" if op == "<<" else "shr", width, (a, b))
            if op in ("==", "!=", "<", "<=", ">", ">="):
                inner = max(self.natural_width(e.left), self.natural_width(e.right))
                a = self.lower(e.left, inner, env)
                b = self.lower(e.right, inner, env)
                if op == "==":
                    node = Node("eq", 1, (a, b))
                elif op == "!=":
                    node = Node("ne", 1, (a, b))
                elif op == "<":
                    node = Node("lt", 1, (a, b))
                elif op == "<=":
                    node = Node("le", 1, (a, b))
                elif op == ">":
                    node = Node("lt", 1, (b, a))
                else:
                    node = Node("le", 1, (b, a))
                return ir.resize(node, width)
            if op in ("&&", "||"):
                a = self._bool(e.left, env)
                b = self._bool(e.right, env)
                return ir.resize(Node("land" if op == "&&" else "lor", 1, (a, b)), width)
            raise ElaborationError(f"unsupported operator '{op}'")
        if isinstance(e, Ternary):
            c = self._bool(e.cond, env)
            a = self.lower(e.then, width, env)
            b = self.lower(e.other, width, env)
            return ir.mux(c, a, b)
        if isinstance(e, Concat):
            parts = [self.lower(p, self.natural_width(p), env) for p in e.parts]
            total = sum(p.width for p in parts)
            return ir.resize(Node("concat", total, tuple(parts)), width)
        if isinstance(e, Repl):
            n = self._const(e.count)
            if n <= 0:
                raise ElaborationError("replication count must be positive")
            part = self.lower(e.part, self.natural_width(e.part), env)
            return ir.resize(Node("concat", n * part.width, tuple([part] * n)), width)
        if isinstance(e, Index):
            return ir.resize(self._lower_index(e, env), width)
        if isinstance(e, PartSelect):
            return ir.resize(self._lower_partsel(e, env), width)
        raise ElaborationError(f"unsupported expression {type(e).__name__}")

    def _read(self, name: str, env: dict[str, Node] | None) -> Node:
        if env is not None and name in env:
            return env[name]
        sig = self.signals.get(name)
        if sig is None:
            if name in self.memories:
                raise ElaborationError(f"memory '{name}' used without an index")
            raise ElaborationError(f"unknown identifier '{name}'")
        return ir.read(sig.slot, sig.width)

    def _bool(self, e: Expr, env: dict[str, Node] | None) -> Node:
        node = self.lower(e, self.natural_width(e), env)
        if node.width == 1:
            return node
        return Node("bool", 1, (node,))

    def _lower_index(self, e: Index, env: dict[str, Node] | None) -> Node:
        if isinstance(e.base, Ident) and e.base.name in self.memories:
            mem = self.memories[e.base.name]
            addr = self.lower(e.index, self.natural_width(e.index), env)
            return Node("memread", mem.width, (addr,), (mem.index, mem.min_addr, mem.depth))
        base_w = self.natural_width(e.base)
        base = self.lower(e.base, base_w, env)
        lsb, desc = self._base_range(e.base)
        if isinstance(e.index, Number) or (
            isinstance(e.index, Ident) and e.index.name in self.params
        ):
            idx = self._const(e.index)
            off = (idx - lsb) if desc else (lsb - idx)
            if off < 0 or off >= base_w:
                return ir.CONST_X1
            return Node("slice", 1, (base,), (off,))
        idx = self.lower(e.index, self.natural_width(e.index), env)
        return Node("bitsel", 1, (base, idx), (lsb, desc))

    def _lower_partsel(self, e: PartSelect, env: dict[str, Node] | None) -> Node:
        base_w = self.natural_width(e.base)
        base = self.lower(e.base, base_w, env)
        lsb, desc = self._base_range(e.base)
        m, l = self._const(e.msb), self._const(e.lsb)
        w = abs(m - l) + 1
        if desc:
            if m < l:
                raise ElaborationError(f"part-select [{m}:{l}] against a descending range")
            off = l - lsb
        else:
            if m > l:
                raise ElaborationError(f"part-select [{m}:{l}] against an ascending range")
            off = lsb - l
        if off < 0 or off + w > base_w:
            return ir.xconst(w)
        return Node("slice", w, (base,), (off,))

    def _base_range(self, base: Expr) -> tuple[int, bool]:
        """(lsb index, descending) of an indexable base."""
        if isinstance(base, Ident):
            sig = self.signals.get(base.name)
            if sig is not None:
                return sig.lsb, sig.descending
        if isinstance(base, Index) and isinstance(base.base, Ident) \
                and base.base.name in self.memories:
            return 0, True  # memory words index [width-1:0]
        raise ElaborationError("bit/part-select base must be a declared vector")


# ---------------------------------------------------------------------------
# Procedural block conversion
# ---------------------------------------------------------------------------

_TRUE = ir.const(1, 0, 1)


def _land(a: Node, b: Node) -> Node:
    if a is _TRUE:
        return b
    if b is _TRUE:
        return a
    return Node("land", 1, (a, b))


def _lnot(a: Node) -> Node:
    return Node("lnot", 1, (a,))


class _BlockConverter:
    """Turn statement lists into per-target value expressions.

    ``env`` tracks blocking views, ``nba`` pending non-blocking commits.
    Branches are lowered to mux merges so an unknown condition yields the
    agreement of both paths instead of silently taking one.
    """

    def __init__(self, low: _Lowerer, in_edge_block: bool):
        self.low = low
        self.in_edge_block = in_edge_block
        self.mem_writes: list[MemWrite] = []

    def run(self, stmts: list[Stmt]) -> tuple[dict[str, Node], dict[str, Node]]:
        env: dict[str, Node] = {}
        nba: dict[str, Node] = {}
        self._stmts(stmts, env, nba, _TRUE)
        return env, nba

    def _cur(self, table: dict[str, Node], name: str) -> Node:
        node = table.get(name)
        if node is not None:
            return node
        sig = self.low.signals.get(name)
        if sig is None:
            raise ElaborationError(f"assignment to unknown identifier '{name}'")
        return ir.read(sig.slot, sig.width)

    def _stmts(self, stmts: list[Stmt], env, nba, guard: Node):
        for s in stmts:
            if isinstance(s, Assign):
                self._assign(s, env, nba, guard)
            elif isinstance(s, If):
                cond = self.low._bool(s.cond, env)
                env_t, nba_t = dict(env), dict(nba)
                env_e, nba_e = dict(env), dict(nba)
                self._stmts(s.then_body, env_t, nba_t, _land(guard, cond))
                self._stmts(s.else_body, env_e, nba_e, _land(guard, _lnot(cond)))
                self._merge(cond, env, env_t, env_e)
                self._merge(cond, nba, nba_t, nba_e, hold_reads=True)
            elif isinstance(s, Case):
                self._case(s, env, nba, guard)
            else:
                raise ElaborationError(f"unsupported statement {type(s).__name__}")

    def _merge(self, cond: Node, out, table_t, table_e, hold_reads: bool = False):
        keys = set(table_t) | set(table_e)
        for k in keys:
            a = table_t.get(k)
            b = table_e.get(k)
            if a is None:
                a = self._cur(out, k) if not hold_reads else self._hold(out, k)
            if b is None:
                b = self._cur(out, k) if not hold_reads else self._hold(out, k)
            out[k] = ir.mux(cond, a, b)

    def _hold(self, table, name):
        # for NBA tables a missing entry means "register keeps its value"
        node = table.get(name)
        if node is not None:
            return node
        sig = self.low.signals[name]
        return ir.read(sig.slot, sig.width)

    def _case(self, s: Case, env, nba, guard: Node):
        sel_w = self.low.natural_width(s.selector)
        for arm in s.arms:
            for lab in arm.labels:
                sel_w = max(sel_w, self.low.natural_width(lab))
        sel = self.low.lower(s.selector, sel_w, env)
        mask = (1 << sel_w) - 1

        matches: list[Node] = []
        bodies: list[list[Stmt]] = []
        for arm in s.arms:
            ms: list[Node] = []
            for lab in arm.labels:
                ms.append(self._label_match(lab, sel, sel_w, mask, s.kind, env))
            m = ms[0]
            for extra in ms[1:]:
                m = Node("lor", 1, (m, extra))
            matches.append(m)
            bodies.append(arm.body)

        default_body = s.default if s.default is not None else []

        # values: evaluate each arm in isolation, fold into a priority chain
        arm_tables = []
        notprev = _TRUE
        for m, body in zip(matches, bodies):
            env_a, nba_a = dict(env), dict(nba)
            self._stmts(body, env_a, nba_a, _land(guard, _land(notprev, m)))
            arm_tables.append((m, env_a, nba_a))
            notprev = _land(notprev, _lnot(m))
        env_d, nba_d = dict(env), dict(nba)
        self._stmts(default_body, env_d, nba_d, _land(guard, notprev))

        acc_env, acc_nba = env_d, nba_d
        for m, env_a, nba_a in reversed(arm_tables):
            merged_env = dict(env)
            self._merge_into(m, merged_env, env_a, acc_env, env, hold_reads=False)
            merged_nba = dict(nba)
            self._merge_into(m, merged_nba, nba_a, acc_nba, nba, hold_reads=True)
            acc_env, acc_nba = merged_env, merged_nba
        env.clear()
        env.update(acc_env)
        nba.clear()
        nba.update(acc_nba)

    def _merge_into(self, cond, out, table_t, table_e, base, hold_reads):
        keys = set(table_t) | set(table_e)
        for k in keys:
            a = table_t.get(k)
            b = table_e.get(k)
            if a is None:
                a = base.get(k) or self._fallback(k, base, hold_reads)
            if b is None:
                b = base.get(k) or self._fallback(k, base, hold_reads)
            out[k] = ir.mux(cond, a, b)
        for k, vnode in base.items():
            if k not in out:
                out[k] = vnode

    def _fallback(self, name, base, hold_reads):
        sig = self.low.signals.get(name)
        if sig is None:
            raise ElaborationError(f"assignment to unknown identifier '{name}'")
        return ir.read(sig.slot, sig.width)

    def _label_match(self, lab: Expr, sel: Node, sel_w: int, mask: int,
                     kind: str, env) -> Node:
        if isinstance(lab, Number):
            care = mask
            value = lab.value & mask
            if kind == "casez":
                care &= ~lab.zmask
            elif lab.zmask:
                return ir.const(0, 0, 1)  # z bits never match a defined selector
            if lab.xmask & care:
                return ir.const(0, 0, 1)  # x bits cannot match a defined selector
            return Node("match", 1, (sel,), (value & care, care))
        if isinstance(lab, Ident) and lab.name in self.low.params:
            value = self.low.params[lab.name] & mask
            return Node("match", 1, (sel,), (value, mask))
        other = self.low.lower(lab, sel_w, env)
        return Node("eq", 1, (sel, other))

    # -- assignment targets --------------------------------------------------

    def _assign(self, s: Assign, env, nba, guard: Node):
        blocking = s.blocking
        if not blocking and not self.in_edge_block:
            raise ElaborationError(
                "non-blocking assignment outside an edge-triggered block"
            )
        table = env if blocking else nba
        self._store(s.lhs, s.rhs, table, env, guard, toplevel=True)

    def _store(self, lhs: Expr, rhs: Expr, table, env, guard, toplevel: bool,
               value: Node | None = None):
        if isinstance(lhs, Concat):
            total = sum(self.low.natural_width(p) for p in lhs.parts)
            if value is None:
                ctx = max(total, self.low.natural_width(rhs))
                value = ir.resize(self.low.lower(rhs, ctx, env), total)
            off = total
            for part in lhs.parts:
                w = self.low.natural_width(part)
                off -= w
                piece = Node("slice", w, (value,), (off,)) if (off or w != total) else value
                self._store(part, rhs, table, env, guard, False, value=piece)
            return
        if isinstance(lhs, Ident):
            name = lhs.name
            sig = self.low.signals.get(name)
            if sig is None:
                if name in self.low.memories:
                    raise ElaborationError(
                        f"memory '{name}' must be written one word at a time"
                    )
                raise ElaborationError(f"assignment to unknown identifier '{name}'")
            w = sig.width
            if value is None:
                ctx = max(w, self.low.natural_width(rhs))
                value = ir.resize(self.low.lower(rhs, ctx, env), w)
            else:
                value = ir.resize(value, w)
            table[name] = value
            return
        if isinstance(lhs, Index):
            base = lhs.base
            if isinstance(base, Ident) and base.name in self.low.memories:
                mem = self.low.memories[base.name]
                if value is None:
                    ctx = max(mem.width, self.low.natural_width(rhs))
                    value = ir.resize(self.low.lower(rhs, ctx, env), mem.width)
                else:
                    value = ir.resize(value, mem.width)
                addr = self.low.lower(lhs.index, self.low.natural_width(lhs.index), env)
                self.mem_writes.append(MemWrite(mem.index, guard, addr, value))
                return
            if not isinstance(base, Ident):
                raise ElaborationError("bit-select assignment base must be a vector")
            name = base.name
            sig = self.low.signals.get(name)
            if sig is None:
                raise ElaborationError(f"assignment to unknown identifier '{name}'")
            if value is None:
                ctx = max(1, self.low.natural_width(rhs))
                value = ir.resize(self.low.lower(rhs, ctx, env), 1)
            else:
                value = ir.resize(value, 1)
            cur = self._cur(table, name)
            if isinstance(lhs.index, Number) or (
                isinstance(lhs.index, Ident) and lhs.index.name in self.low.params
            ):
                idx = self.low._const(lhs.index)
                off = (idx - sig.lsb) if sig.descending else (sig.lsb - idx)
                if off < 0 or off >= sig.width:
                    raise ElaborationError(
                        f"bit index {idx} outside '{name}' range [{sig.msb}:{sig.lsb}]"
                    )
                table[name] = Node("splice", sig.width, (cur, value), (off,))
            else:
                idx = self.low.lower(lhs.index, self.low.natural_width(lhs.index), env)
                table[name] = Node("vsplice", sig.width, (cur, idx, value),
                                   (sig.lsb, sig.descending))
            return
        if isinstance(lhs, PartSelect):
            if not isinstance(lhs.base, Ident):
                raise ElaborationError("part-select assignment base must be a vector")
            name = lhs.base.name
            sig = self.low.signals.get(name)
            if sig is None:
                raise ElaborationError(f"assignment to unknown identifier '{name}'")
            m, l = self.low._const(lhs.msb), self.low._const(lhs.lsb)
            w = abs(m - l) + 1
            if sig.descending:
                if m < l:
                    raise ElaborationError(f"backwards part-select on '{name}'")
                off = l - sig.lsb
            else:
                if m > l:
                    raise ElaborationError(f"backwards part-select on '{name}'")
                off = sig.lsb - l
            if off < 0 or off + w > sig.width:
                raise ElaborationError(
                    f"part-select [{m}:{l}] outside '{name}' range [{sig.msb}:{sig.lsb}]"
                )
            if value is None:
                ctx = max(w, self.low.natural_width(rhs))
                value = ir.resize(self.low.lower(rhs, ctx, env), w)
            else:
                value = ir.resize(value, w)
            cur = self._cur(table, name)
            table[name] = Node("splice", sig.width, (cur, value), (off,))
            return
        raise ElaborationError(f"unsupported assignment target {type(lhs).__name__}")


# ---------------------------------------------------------------------------
# Model assembly
# ---------------------------------------------------------------------------


@dataclass
class ElabResult:
    name: str
    signals: list[Signal]
    by_name: dict[str, Signal]
    memories: list[Memory]
    comb_plan: list[tuple[int, Node]]  # topological order
    seq_blocks: list[SeqBlock]
    input_slots: list[int]
    output_slots: list[int]


def build_design(ast_or_module, top: str | None = None,
                 max_width: int = DEFAULT_MAX_WIDTH) -> ElabResult:
    from verikit.front.parser import resolve_top

    if isinstance(ast_or_module, ModuleDecl):
        ast = Ast(modules=[ast_or_module])
        top_mod = ast_or_module
    else:
        ast = ast_or_module
        top_mod = resolve_top(ast, top)

    flat = FlatDesign(name=top_mod.name, ports=list(top_mod.ports), nets=[],
                      assigns=[], always=[])
    _flatten(ast, top_mod, "", (), flat)

    signals: dict[str, Signal] = {}
    memories: dict[str, Memory] = {}
    order: list[Signal] = []

    def add_signal(name, msb, lsb, *, is_input=False, is_output=False, is_reg=False):
        width = abs(msb - lsb) + 1
        if width > max_width:
            raise ElaborationError(
                f"'{name}' is {width} bits wide, above the {max_width}-bit limit"
            )
        if name in signals or name in memories:
            raise ElaborationError(f"duplicate signal '{name}'")
        sig = Signal(name=name, slot=len(order), width=width, msb=msb, lsb=lsb,
                     is_input=is_input, is_output=is_output, is_reg_decl=is_reg)
        signals[name] = sig
        order.append(sig)
        return sig

    for p in flat.ports:
        if p.direction == "inout":
            raise ElaborationError(f"inout port '{p.name}' is not supported")
        add_signal(p.name, p.msb, p.lsb, is_input=(p.direction == "input"),
                   is_output=(p.direction == "output"), is_reg=p.is_reg)
    for name, decl in flat.nets:
        if decl.array is not None:
            lo, hi = decl.array
            depth = abs(hi - lo) + 1
            if depth > MAX_MEM_WORDS:
                raise ElaborationError(f"memory '{name}' deeper than {MAX_MEM_WORDS} words")
            if decl.width > max_width:
                raise ElaborationError(f"memory '{name}' words wider than {max_width} bits")
            if decl.width * depth > MAX_MEM_BITS:
                raise ElaborationError(
                    f"memory '{name}' holds {decl.width * depth} bits, above the "
                    f"{MAX_MEM_BITS}-bit limit"
                )
            if name in signals or name in memories:
                raise ElaborationError(f"duplicate signal '{name}'")
            memories[name] = Memory(name=name, index=len(memories), width=decl.width,
                                    depth=depth, min_addr=min(lo, hi))
        else:
            add_signal(name, decl.msb, decl.lsb, is_reg=(decl.kind == "reg"))

    low = _Lowerer(signals, memories, params={}, max_width=max_width)

    # driver bookkeeping: slot -> ("assign" | block id)
    driver_of: dict[int, str] = {}
    assign_pieces: dict[int, list[tuple[int, int, Node]]] = {}

    def claim(slot: int, owner: str, span_owner: str):
        sig = order[slot]
        if sig.is_input:
            raise ElaborationError(f"input '{sig.name}' cannot be driven")
        prev = driver_of.get(slot)
        if prev is not None and (prev != owner or not owner.startswith("assign")):
            raise ElaborationError(f"'{sig.name}' has multiple drivers")
        driver_of[slot] = owner

    def add_piece(slot: int, off: int, w: int, node: Node):
        pieces = assign_pieces.setdefault(slot, [])
        for o, pw, _ in pieces:
            if not (off + w <= o or o + pw <= off):
                raise ElaborationError(
                    f"overlapping continuous drivers on '{order[slot].name}'"
                )
        pieces.append((off, w, node))

    def lower_assign_target(lhs: Expr, rhs_node_for: Node | None, rhs: Expr):
        """Continuous assignment decomposition."""
        if isinstance(lhs, Concat):
            total = 0
            widths = []
            for part in lhs.parts:
                w = low.natural_width(part)
                widths.append(w)
                total += w
            ctx = max(total, low.natural_width(rhs))
            value = ir.resize(low.lower(rhs, ctx), total)
            off = total
            for part, w in zip(lhs.parts, widths):
                off -= w
                piece = Node("slice", w, (value,), (off,))
                lower_assign_target_piece(part, piece)
            return
        w = low.natural_width(lhs)
        ctx = max(w, low.natural_width(rhs))
        value = ir.resize(low.lower(rhs, ctx), w)
        lower_assign_target_piece(lhs, value)

    def lower_assign_target_piece(lhs: Expr, value: Node):
        if isinstance(lhs, Ident):
            sig = signals.get(lhs.name)
            if sig is None:
                raise ElaborationError(f"continuous assign to unknown '{lhs.name}'")
            if sig.is_reg_decl:
                raise ElaborationError(
                    f"continuous assign to '{lhs.name}', which is declared reg"
                )
            claim(sig.slot, "assign", lhs.name)
            add_piece(sig.slot, 0, sig.width, ir.resize(value, sig.width))
            return
        if isinstance(lhs, PartSelect) and isinstance(lhs.base, Ident):
            sig = signals.get(lhs.base.name)
            if sig is None:
                raise ElaborationError(f"continuous assign to unknown '{lhs.base.name}'")
            if sig.is_reg_decl:
                raise ElaborationError(
                    f"continuous assign to '{lhs.base.name}', which is declared reg"
                )
            m, l = low._const(lhs.msb), low._const(lhs.lsb)
            w = abs(m - l) + 1
            off = (l - sig.lsb) if sig.descending else (sig.lsb - l)
            if off < 0 or off + w > sig.width:
                raise ElaborationError(
                    f"part-select [{m}:{l}] outside '{sig.name}'"
                )
            claim(sig.slot, "assign", sig.name)
            add_piece(sig.slot, off, w, ir.resize(value, w))
            return
        if isinstance(lhs, Index) and isinstance(lhs.base, Ident):
            sig = signals.get(lhs.base.name)
            if sig is None:
                raise ElaborationError(f"continuous assign to unknown '{lhs.base.name}'")
            if sig.is_reg_decl:
                raise ElaborationError(
                    f"continuous assign to '{lhs.base.name}', which is declared reg"
                )
            idx = low._const(lhs.index)
            off = (idx - sig.lsb) if sig.descending else (sig.lsb - idx)
            if off < 0 or off >= sig.width:
                raise ElaborationError(f"bit index {idx} outside '{sig.name}'")
            claim(sig.slot, "assign", sig.name)
            add_piece(sig.slot, off, 1, ir.resize(value, 1))
            return
        raise ElaborationError("unsupported continuous assignment target")

    for lhs, rhs, _prefix in flat.assigns:
        lower_assign_target(lhs, None, rhs)

    comb_defs: dict[int, Node] = {}
    seq_blocks: list[SeqBlock] = []
    seq_owner: dict[int, int] = {}

    for bi, (blk, _prefix) in enumerate(flat.always):
        if blk.is_edge_triggered:
            conv = _BlockConverter(low, in_edge_block=True)
            env, nba = conv.run(blk.body)
            both = set(env) & set(nba)
            if both:
                raise ElaborationError(
                    f"mixed blocking and non-blocking assignment to {sorted(both)}"
                )
            triggers = []
            for s in blk.edge_items():
                sig = signals.get(s.signal)
                if sig is None:
                    raise ElaborationError(f"unknown edge signal '{s.signal}'")
                if sig.width != 1:
                    raise ElaborationError(
                        f"edge event on '{s.signal}', which is {sig.width} bits wide"
                    )
                triggers.append((sig.slot, "pos" if s.edge == "posedge" else "neg"))
            updates = []
            for name, node in list(nba.items()) + list(env.items()):
                sig = signals.get(name)
                if sig is None:
                    raise ElaborationError(f"assignment to unknown '{name}'")
                if not sig.is_reg_decl:
                    raise ElaborationError(
                        f"'{name}' is assigned in an edge-triggered block "
                        "but not declared reg"
                    )
                if sig.slot in seq_owner or sig.slot in driver_of:
                    raise ElaborationError(f"'{name}' has multiple drivers")
                seq_owner[sig.slot] = bi
                sig.is_state = True
                updates.append((sig.slot, ir.resize(node, sig.width)))
            seq_blocks.append(SeqBlock(triggers=triggers, updates=updates,
                                       mem_writes=conv.mem_writes))
        else:
            conv = _BlockConverter(low, in_edge_block=False)
            env, nba = conv.run(blk.body)
            if nba:
                raise ElaborationError(
                    "non-blocking assignment in a combinational block"
                )
            if conv.mem_writes:
                raise ElaborationError(
                    "memory writes are only supported in edge-triggered blocks"
                )
            for name, node in env.items():
                sig = signals.get(name)
                if sig is None:
                    raise ElaborationError(f"assignment to unknown '{name}'")
                if not sig.is_reg_decl:
                    raise ElaborationError(
                        f"'{name}' is assigned procedurally but not declared reg"
                    )
                claim(sig.slot, f"always{bi}", name)
                if sig.slot in seq_owner:
                    raise ElaborationError(f"'{name}' has multiple drivers")
                comb_defs[sig.slot] = ir.resize(node, sig.width)

    # registers cannot also have continuous/comb drivers
    for slot in seq_owner:
        if slot in driver_of:
            raise ElaborationError(f"'{order[slot].name}' has multiple drivers")

    # compose partial continuous drivers into full-width definitions
    for slot, pieces in assign_pieces.items():
        sig = order[slot]
        pieces.sort()
        covered = 0
        for off, w, _ in pieces:
            covered |= ((1 << w) - 1) << off
        full = (1 << sig.width) - 1
        if len(pieces) == 1 and pieces[0][0] == 0 and pieces[0][1] == sig.width:
            comb_defs[slot] = pieces[0][2]
        else:
            parts_lsb_first: list[Node] = []
            pos = 0
            for off, w, node in pieces:
                if off > pos:
                    parts_lsb_first.append(ir.xconst(off - pos))
                parts_lsb_first.append(node)
                pos = off + w
            if pos < sig.width:
                parts_lsb_first.append(ir.xconst(sig.width - pos))
            comb_defs[slot] = Node("concat", sig.width, tuple(reversed(parts_lsb_first)))
        sig.static_z = full & ~covered

    # wires never driven at all stay Z
    for sig in order:
        if sig.is_input or sig.is_state:
            continue
        if sig.slot not in comb_defs:
            sig.static_z = sig.mask

    # topological order over combinational definitions
    dep_of: dict[int, set[int]] = {}
    for slot, node in comb_defs.items():
        reads: set[int] = set()
        ir.collect_read_slots(node, reads)
        dep_of[slot] = {r for r in reads if r in comb_defs}
    ready = [s for s, deps in dep_of.items() if not deps]
    remaining = {s: set(deps) for s, deps in dep_of.items() if deps}
    users: dict[int, list[int]] = {}
    for s, deps in remaining.items():
        for d in deps:
            users.setdefault(d, []).append(s)
    plan: list[tuple[int, Node]] = []
    ready.sort()
    while ready:
        s = ready.pop()
        plan.append((s, comb_defs[s]))
        for u in users.get(s, ()):  # noqa: B909
            deps = remaining.get(u)
            if deps is None:
                continue
            deps.discard(s)
            if not deps:
                del remaining[u]
                ready.append(u)
    if remaining:
        names = sorted(order[s].name for s in remaining)
        raise ElaborationError(f"combinational loop involving {names}")

    return ElabResult(
        name=flat.name,
        signals=order,
        by_name=signals,
        memories=list(memories.values()),
        comb_plan=plan,
        seq_blocks=seq_blocks,
        input_slots=[s.slot for s in order if s.is_input],
        output_slots=[s.slot for s in order if s.is_output],
    )
