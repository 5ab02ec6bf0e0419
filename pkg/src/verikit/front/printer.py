"""Canonical pretty-printer.

print_ast produces text that reparses to a structurally equal Ast. Output is
always ANSI port style with one item per line; parenthesization is explicit
wherever precedence could bite, so the round-trip property is easy to keep.
"""

from __future__ import annotations

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
    PortDecl,
    Repl,
    Stmt,
    Ternary,
    Unary,
)

__all__ = ["print_ast", "print_expr"]


def print_expr(e: Expr) -> str:
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Number):
        return _format_number(e)
    if isinstance(e, Unary):
        return f"{e.op}({print_expr(e.operand)})"
    if isinstance(e, Binary):
        return f"({print_expr(e.left)} {e.op} {print_expr(e.right)})"
    if isinstance(e, Ternary):
        return f"({print_expr(e.cond)} ? {print_expr(e.then)} : {print_expr(e.other)})"
    if isinstance(e, Concat):
        return "{" + ", ".join(print_expr(p) for p in e.parts) + "}"
    if isinstance(e, Repl):
        return "{" + print_expr(e.count) + "{" + print_expr(e.part) + "}}"
    if isinstance(e, Index):
        return f"{print_expr(e.base)}[{print_expr(e.index)}]"
    if isinstance(e, PartSelect):
        return f"{print_expr(e.base)}[{print_expr(e.msb)}:{print_expr(e.lsb)}]"
    raise TypeError(f"cannot print {type(e).__name__}")


def _format_number(n: Number) -> str:
    if n.width is None:
        if n.xmask or n.zmask:
            raise ValueError("unsized literal with x/z bits cannot be printed")
        return str(n.value)
    if not n.xmask and not n.zmask and n.base == "d":
        return f"{n.width}'d{n.value}"
    # binary keeps x/z bit patterns exact
    bits = []
    for i in range(n.width - 1, -1, -1):
        if (n.xmask >> i) & 1:
            bits.append("x")
        elif (n.zmask >> i) & 1:
            bits.append("z")
        else:
            bits.append(str((n.value >> i) & 1))
    return f"{n.width}'b{''.join(bits)}"


def _range(msb: int, lsb: int, always: bool = False) -> str:
    if msb == 0 and lsb == 0 and not always:
        return ""
    return f"[{msb}:{lsb}] "


def _print_stmt(s: Stmt, indent: int, out: list[str]):
    pad = "    " * indent
    if isinstance(s, Assign):
        op = "=" if s.blocking else "<="
        out.append(f"{pad}{print_expr(s.lhs)} {op} {print_expr(s.rhs)};")
    elif isinstance(s, If):
        out.append(f"{pad}if ({print_expr(s.cond)}) begin")
        for t in s.then_body:
            _print_stmt(t, indent + 1, out)
        if s.else_body:
            out.append(f"{pad}end else begin")
            for t in s.else_body:
                _print_stmt(t, indent + 1, out)
        out.append(f"{pad}end")
    elif isinstance(s, Case):
        out.append(f"{pad}{s.kind} ({print_expr(s.selector)})")
        for arm in s.arms:
            labels = ", ".join(print_expr(l) for l in arm.labels)
            out.append(f"{pad}    {labels}: begin")
            for t in arm.body:
                _print_stmt(t, indent + 2, out)
            out.append(f"{pad}    end")
        if s.default is not None:
            out.append(f"{pad}    default: begin")
            for t in s.default:
                _print_stmt(t, indent + 2, out)
            out.append(f"{pad}    end")
        out.append(f"{pad}endcase")
    else:
        raise TypeError(f"cannot print statement {type(s).__name__}")


def _print_module(m: ModuleDecl, out: list[str]):
    header_params = [p for p in m.params if not p.local]
    locals_ = [p for p in m.params if p.local]
    if header_params:
        plist = ", ".join(f"parameter {p.name} = {p.value}" for p in header_params)
        out.append(f"module {m.name} #({plist}) (")
    else:
        out.append(f"module {m.name} (")
    for i, p in enumerate(m.ports):
        reg = "reg " if p.is_reg else ""
        comma = "," if i + 1 < len(m.ports) else ""
        out.append(f"    {p.direction} {reg}{_range(p.msb, p.lsb)}{p.name}{comma}")
    out.append(");")
    for p in locals_:
        out.append(f"    localparam {p.name} = {p.value};")
    for item in m.items:
        if isinstance(item, NetDecl):
            arr = f" [{item.array[0]}:{item.array[1]}]" if item.array else ""
            init = f" = {print_expr(item.init)}" if item.init is not None else ""
            out.append(f"    {item.kind} {_range(item.msb, item.lsb)}{item.name}{arr}{init};")
        elif isinstance(item, ContinuousAssign):
            out.append(f"    assign {print_expr(item.lhs)} = {print_expr(item.rhs)};")
        elif isinstance(item, AlwaysBlock):
            if item.sensitivity is None:
                sens = "*"
            else:
                parts = []
                for s in item.sensitivity:
                    parts.append(s.signal if s.edge == "level" else f"{s.edge} {s.signal}")
                sens = " or ".join(parts)
            out.append(f"    always @({sens}) begin")
            for st in item.body:
                _print_stmt(st, 2, out)
            out.append("    end")
        elif isinstance(item, Instance):
            if item.param_overrides:
                ov = ", ".join(
                    f".{n}({print_expr(e)})" if n else print_expr(e)
                    for n, e in item.param_overrides
                )
                head = f"    {item.module_name} #({ov}) {item.inst_name} ("
            else:
                head = f"    {item.module_name} {item.inst_name} ("
            conns = ", ".join(
                (f".{n}({print_expr(e) if e is not None else ''})" if n else print_expr(e))
                for n, e in item.connections
            )
            out.append(head + conns + ");")
        elif isinstance(item, ParamDecl):  # body parameters already hoisted
            out.append(f"    parameter {item.name} = {item.value};")
        else:
            raise TypeError(f"cannot print item {type(item).__name__}")
    out.append("endmodule")


def print_ast(ast: Ast | ModuleDecl) -> str:
    out: list[str] = []
    if isinstance(ast, ModuleDecl):
        _print_module(ast, out)
    else:
        for i, m in enumerate(ast.modules):
            if i:
                out.append("")
            _print_module(m, out)
    return "\n".join(out) + "\n"
