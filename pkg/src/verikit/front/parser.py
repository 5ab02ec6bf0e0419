"""Recursive-descent parser for the Verilog subset.

Grammar highlights:
  - ANSI and non-ANSI port styles, header parameter lists
  - wire/reg/logic vectors, single-dimension reg arrays (memories)
  - parameter/localparam with constant integer expressions
  - assign, always @(*) / @(edge list), if/else, case/casez with default
  - blocking and non-blocking assignments, concat LHS, part/bit selects
  - module instantiation with named or positional connections

Out-of-subset constructs raise ParseError with an ``unsupported`` diagnostic
naming the construct; malformed input raises with an ``error`` diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

from verikit.front.lexer import (
    UNSUPPORTED_KEYWORDS,
    LexError,
    Token,
    parse_number_literal,
    tokenize,
)
from verikit.front.nodes import (
    AlwaysBlock,
    Assign,
    Ast,
    Binary,
    Case,
    CaseArm,
    Concat,
    ContinuousAssign,
    Expr,
    Ident,
    If,
    Index,
    Instance,
    Item,
    ModuleDecl,
    NetDecl,
    Number,
    ParamDecl,
    PartSelect,
    PortDecl,
    Repl,
    SensItem,
    SourceSpan,
    SourceUnit,
    Stmt,
    Ternary,
    Unary,
)

__all__ = ["ParseDiagnostic", "ParseError", "parse_source", "resolve_top"]


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" | "unsupported"
    message: str
    span: SourceSpan

    def __post_init__(self):
        if self.span.end <= self.span.start:
            object.__setattr__(self, "span", SourceSpan(self.span.start, self.span.start + 1))


class ParseError(Exception):
    """Carries one or more diagnostics; str() shows the first."""

    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = diagnostics
        first = diagnostics[0]
        super().__init__(f"{first.severity}: {first.message} @ {first.span.start}")


def _err(message: str, span: SourceSpan) -> ParseError:
    return ParseError([ParseDiagnostic("error", message, span)])


def _unsupported(message: str, span: SourceSpan) -> ParseError:
    return ParseError([ParseDiagnostic("unsupported", message, span)])


# Binary operator precedence, weakest first.
_BINARY_LEVELS = [
    ["||"],
    ["&&"],
    ["|"],
    ["^", "^~", "~^"],
    ["&"],
    ["==", "!="],
    ["<", "<=", ">", ">="],
    ["<<", ">>", ">>>"],
    ["+", "-"],
    ["*", "/", "%"],
]

_UNARY_OPS = {"~", "!", "-", "+", "&", "|", "^", "~&", "~|", "~^", "^~"}


class _Parser:
    def __init__(self, tokens: list[Token], text: str):
        self.toks = tokens
        self.text = text
        self.pos = 0
        # parameter name -> folded value for the module being parsed; ranges
        # and localparams may reference previously declared parameters
        self.param_env: dict[str, int] = {}

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.toks) - 1)
        return self.toks[i]

    def next(self) -> Token:
        t = self.peek()
        if t.kind != "eof":
            self.pos += 1
        return t

    def at_kw(self, *words: str) -> bool:
        t = self.peek()
        return t.kind == "kw" and t.text in words

    def at_op(self, *ops: str) -> bool:
        t = self.peek()
        return t.kind == "op" and t.text in ops

    def eat_kw(self, word: str) -> Token:
        t = self.peek()
        if t.kind != "kw" or t.text != word:
            raise _err(f"expected '{word}', got {t.text!r}", t.span)
        return self.next()

    def eat_op(self, op: str) -> Token:
        t = self.peek()
        if t.kind != "op" or t.text != op:
            raise _err(f"expected '{op}', got {t.text or '<eof>'!r}", t.span)
        return self.next()

    def eat_id(self) -> Token:
        t = self.peek()
        if t.kind != "id":
            if t.kind == "kw" and t.text in UNSUPPORTED_KEYWORDS:
                raise _unsupported(f"'{t.text}' is outside the supported subset", t.span)
            raise _err(f"expected identifier, got {t.text or '<eof>'!r}", t.span)
        return self.next()

    def reject_unsupported_kw(self):
        t = self.peek()
        if t.kind == "kw" and t.text in UNSUPPORTED_KEYWORDS:
            raise _unsupported(f"'{t.text}' is outside the supported subset", t.span)

    # -- expressions --------------------------------------------------------

    def parse_expr(self) -> Expr:
        cond = self.parse_binary(0)
        if self.at_op("?"):
            self.next()
            then = self.parse_expr()
            self.eat_op(":")
            other = self.parse_expr()
            return Ternary(
                span=SourceSpan(cond.span.start, other.span.end),
                cond=cond,
                then=then,
                other=other,
            )
        return cond

    def parse_binary(self, level: int) -> Expr:
        if level >= len(_BINARY_LEVELS):
            return self.parse_unary()
        ops = _BINARY_LEVELS[level]
        left = self.parse_binary(level + 1)
        while self.at_op(*ops):
            op = self.next().text
            right = self.parse_binary(level + 1)
            left = Binary(
                span=SourceSpan(left.span.start, right.span.end),
                op=op,
                left=left,
                right=right,
            )
        return left

    def parse_unary(self) -> Expr:
        t = self.peek()
        if t.kind == "op" and t.text in _UNARY_OPS:
            self.next()
            operand = self.parse_unary()
            return Unary(span=SourceSpan(t.start, operand.span.end), op=t.text, operand=operand)
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        base = self.parse_primary()
        while self.at_op("["):
            lb = self.next()
            first = self.parse_expr()
            if self.at_op(":"):
                self.next()
                second = self.parse_expr()
                rb = self.eat_op("]")
                base = PartSelect(
                    span=SourceSpan(base.span.start, rb.end), base=base, msb=first, lsb=second
                )
            elif self.at_op("+:", "-:"):
                raise _unsupported("indexed part-selects (+: / -:) are not supported", lb.span)
            else:
                rb = self.eat_op("]")
                base = Index(span=SourceSpan(base.span.start, rb.end), base=base, index=first)
        return base

    def parse_primary(self) -> Expr:
        t = self.peek()
        if t.kind == "id":
            self.next()
            return Ident(span=t.span, name=t.text)
        if t.kind in ("num", "based"):
            self.next()
            if t.kind == "num" and self.peek().kind == "based":
                # size written separately from base: "8 'hFF"
                b = self.next()
                merged = Token("based", t.text + b.text, t.start, b.end)
                t = merged
            try:
                value, width, xmask, zmask, base = parse_number_literal(t.text, t.span)
            except LexError as e:
                raise ParseError(
                    [ParseDiagnostic("unsupported" if e.unsupported else "error", e.message, e.span)]
                )
            return Number(span=SourceSpan(t.start, t.end), value=value, width=width,
                          xmask=xmask, zmask=zmask, base=base)
        if t.kind == "op" and t.text == "(":
            self.next()
            inner = self.parse_expr()
            self.eat_op(")")
            return inner
        if t.kind == "op" and t.text == "{":
            return self.parse_concat()
        if t.kind == "kw" and t.text in UNSUPPORTED_KEYWORDS:
            raise _unsupported(f"'{t.text}' is outside the supported subset", t.span)
        raise _err(f"expected expression, got {t.text or '<eof>'!r}", t.span)

    def parse_concat(self) -> Expr:
        lb = self.eat_op("{")
        first = self.parse_expr()
        if self.at_op("{"):
            # replication {N{expr}}
            self.next()
            part = self.parse_expr()
            self.eat_op("}")
            rb = self.eat_op("}")
            return Repl(span=SourceSpan(lb.start, rb.end), count=first, part=part)
        parts = [first]
        while self.at_op(","):
            self.next()
            parts.append(self.parse_expr())
        rb = self.eat_op("}")
        return Concat(span=SourceSpan(lb.start, rb.end), parts=parts)

    def parse_const_int(self, what: str) -> int:
        """Constant integer expression over literals and earlier parameters."""
        expr = self.parse_expr()
        return _fold_const(expr, what, self.param_env)

    # -- statements ----------------------------------------------------------

    def parse_stmt(self) -> list[Stmt]:
        t = self.peek()
        if t.kind == "kw" and t.text == "begin":
            self.next()
            body: list[Stmt] = []
            while not self.at_kw("end"):
                if self.peek().kind == "eof":
                    raise _err("unterminated begin/end block", t.span)
                body.extend(self.parse_stmt())
            self.eat_kw("end")
            return body
        if t.kind == "kw" and t.text == "if":
            return [self.parse_if()]
        if t.kind == "kw" and t.text in ("case", "casez"):
            return [self.parse_case()]
        if t.kind == "kw" and t.text == "casex":
            raise _unsupported("'casex' is outside the supported subset", t.span)
        if t.kind == "op" and t.text == ";":
            self.next()  # empty statement
            return []
        self.reject_unsupported_kw()
        if t.kind == "kw":
            raise _err(f"unexpected '{t.text}' in statement position", t.span)
        return [self.parse_assignment_stmt()]

    def parse_if(self) -> Stmt:
        kw = self.eat_kw("if")
        self.eat_op("(")
        cond = self.parse_expr()
        self.eat_op(")")
        then_body = self.parse_stmt()
        else_body: list[Stmt] = []
        end = then_body[-1].span.end if then_body else kw.end
        if self.at_kw("else"):
            self.next()
            else_body = self.parse_stmt()
            if else_body:
                end = else_body[-1].span.end
        return If(span=SourceSpan(kw.start, end), cond=cond,
                  then_body=then_body, else_body=else_body)

    def parse_case(self) -> Stmt:
        kw = self.next()  # case | casez
        kind = kw.text
        self.eat_op("(")
        selector = self.parse_expr()
        self.eat_op(")")
        arms: list[CaseArm] = []
        default: list[Stmt] | None = None
        while not self.at_kw("endcase"):
            if self.peek().kind == "eof":
                raise _err("unterminated case statement", kw.span)
            if self.at_kw("default"):
                self.next()
                if self.at_op(":"):
                    self.next()
                default = self.parse_stmt()
                continue
            labels = [self.parse_expr()]
            while self.at_op(","):
                self.next()
                labels.append(self.parse_expr())
            self.eat_op(":")
            body = self.parse_stmt()
            arms.append(CaseArm(labels=labels, body=body))
        end = self.eat_kw("endcase")
        return Case(span=SourceSpan(kw.start, end.end), kind=kind,
                    selector=selector, arms=arms, default=default)

    def parse_assignment_stmt(self) -> Stmt:
        lhs = self.parse_lvalue()
        t = self.peek()
        if self.at_op("="):
            self.next()
            blocking = True
        elif self.at_op("<="):
            self.next()
            blocking = False
        elif self.at_op("^", "|", "&", "+", "-") and self.peek(1).kind == "op" and self.peek(1).text == "=":
            # compound assignment like ^= : desugar to lhs = lhs OP rhs
            op = self.next().text
            self.next()
            rhs = self.parse_expr()
            semi = self.eat_op(";")
            full = Binary(span=rhs.span, op=op, left=lhs, right=rhs)
            return Assign(span=SourceSpan(lhs.span.start, semi.end), lhs=lhs, rhs=full, blocking=True)
        else:
            raise _err(f"expected '=' or '<=', got {t.text or '<eof>'!r}", t.span)
        if self.at_op("#"):
            raise _unsupported("delays (#) are not supported", self.peek().span)
        rhs = self.parse_expr()
        semi = self.eat_op(";")
        return Assign(span=SourceSpan(lhs.span.start, semi.end), lhs=lhs, rhs=rhs, blocking=blocking)

    def parse_lvalue(self) -> Expr:
        t = self.peek()
        if t.kind == "op" and t.text == "{":
            lb = self.next()
            parts = [self.parse_lvalue()]
            while self.at_op(","):
                self.next()
                parts.append(self.parse_lvalue())
            rb = self.eat_op("}")
            return Concat(span=SourceSpan(lb.start, rb.end), parts=parts)
        name = self.eat_id()
        base: Expr = Ident(span=name.span, name=name.text)
        while self.at_op("["):
            self.next()
            first = self.parse_expr()
            if self.at_op(":"):
                self.next()
                second = self.parse_expr()
                rb = self.eat_op("]")
                base = PartSelect(span=SourceSpan(base.span.start, rb.end),
                                  base=base, msb=first, lsb=second)
            else:
                rb = self.eat_op("]")
                base = Index(span=SourceSpan(base.span.start, rb.end), base=base, index=first)
        return base

    # -- module items --------------------------------------------------------

    def parse_range(self) -> tuple[int, int]:
        self.eat_op("[")
        msb = self.parse_const_int("range bound")
        self.eat_op(":")
        lsb = self.parse_const_int("range bound")
        self.eat_op("]")
        return msb, lsb

    def parse_module(self) -> ModuleDecl:
        kw = self.eat_kw("module")
        name = self.eat_id()
        self.param_env = {}
        params: list[ParamDecl] = []
        ports: list[PortDecl] = []
        header_names: list[Token] | None = None

        if self.at_op("#"):
            self.next()
            self.eat_op("(")
            params.extend(self.parse_param_group(local=False, header=True))
            self.eat_op(")")

        if self.at_op("("):
            self.next()
            if self.at_op(")"):
                self.next()
            elif self.at_kw("input", "output", "inout"):
                ports = self.parse_ansi_ports()
            else:
                header_names = [self.eat_id()]
                while self.at_op(","):
                    self.next()
                    header_names.append(self.eat_id())
                self.eat_op(")")
        self.eat_op(";")

        items: list[Item] = []
        port_map: dict[str, PortDecl] = {p.name: p for p in ports}
        while not self.at_kw("endmodule"):
            t = self.peek()
            if t.kind == "eof":
                raise _err("missing 'endmodule'", kw.span)
            got = self.parse_item(params)
            for it in got:
                if isinstance(it, PortDecl):
                    if header_names is None:
                        raise _err(
                            f"port '{it.name}' declared in the body of an ANSI-style module",
                            it.span,
                        )
                    if it.name in port_map:
                        raise _err(f"duplicate port declaration '{it.name}'", it.span)
                    port_map[it.name] = it
                elif isinstance(it, ParamDecl):
                    params.append(it)
                else:
                    items.append(it)
        end = self.eat_kw("endmodule")

        if header_names is not None:
            ordered: list[PortDecl] = []
            for tok in header_names:
                decl = port_map.pop(tok.text, None)
                if decl is None:
                    raise _err(f"header port '{tok.text}' has no direction declaration", tok.span)
                ordered.append(decl)
            if port_map:
                leftover = next(iter(port_map.values()))
                raise _err(
                    f"'{leftover.name}' declared as a port but missing from the header",
                    leftover.span,
                )
            ports = ordered

        seen: set[str] = set()
        for p in ports:
            if p.name in seen:
                raise _err(f"duplicate port name '{p.name}'", p.span)
            seen.add(p.name)

        # "output [3:0] q; reg [3:0] q;" style: fold the reg decl into the port
        by_name = {p.name: p for p in ports}
        kept_items: list[Item] = []
        for it in items:
            if isinstance(it, NetDecl) and it.name in by_name and it.array is None:
                port = by_name[it.name]
                if it.width != port.width:
                    raise _err(
                        f"'{it.name}' redeclared with width {it.width}, "
                        f"port is {port.width} bits",
                        it.span,
                    )
                if it.kind == "reg":
                    port.is_reg = True
                if it.init is not None:
                    kept_items.append(
                        ContinuousAssign(span=it.span, lhs=Ident(span=it.span, name=it.name),
                                         rhs=it.init)
                    )
                continue
            kept_items.append(it)
        items = kept_items

        return ModuleDecl(
            name=name.text,
            ports=ports,
            params=params,
            items=items,
            span=SourceSpan(kw.start, end.end),
        )

    def parse_ansi_ports(self) -> list[PortDecl]:
        ports: list[PortDecl] = []
        direction = None
        is_reg = False
        msb = lsb = 0
        while True:
            t = self.peek()
            if self.at_kw("input", "output", "inout"):
                direction = self.next().text
                is_reg = False
                msb = lsb = 0
                if self.at_kw("reg", "logic"):
                    self.next()
                    is_reg = True
                elif self.at_kw("wire"):
                    self.next()
                self.reject_unsupported_kw()
                if self.at_op("["):
                    msb, lsb = self.parse_range()
            elif direction is None:
                raise _err(f"expected port direction, got {t.text!r}", t.span)
            name = self.eat_id()
            ports.append(
                PortDecl(span=name.span, name=name.text, direction=direction,
                         msb=msb, lsb=lsb, is_reg=is_reg)
            )
            if self.at_op(","):
                self.next()
                continue
            self.eat_op(")")
            return ports

    def parse_param_group(self, local: bool, header: bool) -> list[ParamDecl]:
        out: list[ParamDecl] = []
        self.eat_kw("localparam" if local else "parameter")
        while True:
            if self.at_op("["):
                self.parse_range()  # parameter range is irrelevant for folding
            name = self.eat_id()
            self.eat_op("=")
            value = self.parse_const_int(f"parameter {name.text}")
            self.param_env[name.text] = value
            out.append(ParamDecl(span=name.span, name=name.text, value=value, local=local))
            if self.at_op(","):
                nxt = self.peek(1)
                if header and nxt.kind == "kw" and nxt.text == "parameter":
                    self.next()
                    self.eat_kw("parameter")
                    continue
                self.next()
                continue
            break
        return out

    def parse_item(self, params: list[ParamDecl]) -> list[Item]:
        t = self.peek()
        if t.kind == "kw" and t.text in UNSUPPORTED_KEYWORDS:
            raise _unsupported(f"'{t.text}' is outside the supported subset", t.span)
        if self.at_kw("input", "output", "inout"):
            return self.parse_port_item()
        if self.at_kw("wire", "reg", "logic"):
            return self.parse_net_item()
        if self.at_kw("parameter"):
            decls = self.parse_param_group(local=False, header=False)
            self.eat_op(";")
            return list(decls)
        if self.at_kw("localparam"):
            decls = self.parse_param_group(local=True, header=False)
            self.eat_op(";")
            return list(decls)
        if self.at_kw("assign"):
            return self.parse_continuous_assign()
        if self.at_kw("always"):
            return [self.parse_always()]
        if t.kind == "id":
            return [self.parse_instance()]
        raise _err(f"unexpected {t.text or '<eof>'!r} at module level", t.span)

    def parse_port_item(self) -> list[Item]:
        direction = self.next().text
        is_reg = False
        if self.at_kw("reg", "logic"):
            self.next()
            is_reg = True
        elif self.at_kw("wire"):
            self.next()
        self.reject_unsupported_kw()
        msb = lsb = 0
        if self.at_op("["):
            msb, lsb = self.parse_range()
        out: list[Item] = []
        while True:
            name = self.eat_id()
            out.append(PortDecl(span=name.span, name=name.text, direction=direction,
                                msb=msb, lsb=lsb, is_reg=is_reg))
            if self.at_op(","):
                self.next()
                continue
            self.eat_op(";")
            return out

    def parse_net_item(self) -> list[Item]:
        kind_tok = self.next()
        kind = "reg" if kind_tok.text in ("reg", "logic") else "wire"
        self.reject_unsupported_kw()
        msb = lsb = 0
        if self.at_op("["):
            msb, lsb = self.parse_range()
        out: list[Item] = []
        while True:
            name = self.eat_id()
            array = None
            init = None
            if self.at_op("["):
                if kind != "reg":
                    raise _unsupported("wire arrays are not supported", self.peek().span)
                array = self.parse_range()
            if self.at_op("="):
                if kind != "wire":
                    raise _unsupported(
                        "declaration initializers are only supported on wires", self.peek().span
                    )
                self.next()
                init = self.parse_expr()
            out.append(NetDecl(span=name.span, name=name.text, kind=kind,
                               msb=msb, lsb=lsb, array=array, init=init))
            if self.at_op(","):
                self.next()
                continue
            self.eat_op(";")
            return out

    def parse_continuous_assign(self) -> list[Item]:
        kw = self.eat_kw("assign")
        if self.at_op("#"):
            raise _unsupported("delays (#) are not supported", self.peek().span)
        pairs = []
        while True:
            lhs = self.parse_lvalue()
            self.eat_op("=")
            rhs = self.parse_expr()
            pairs.append((lhs, rhs))
            if self.at_op(","):
                self.next()
                continue
            break
        semi = self.eat_op(";")
        return [
            ContinuousAssign(span=SourceSpan(kw.start, semi.end), lhs=lhs, rhs=rhs)
            for lhs, rhs in pairs
        ]

    def parse_always(self) -> Item:
        kw = self.eat_kw("always")
        self.eat_op("@")
        sensitivity: list[SensItem] | None
        if self.at_op("*"):
            self.next()
            sensitivity = None
        else:
            self.eat_op("(")
            if self.at_op("*"):
                self.next()
                sensitivity = None
                self.eat_op(")")
            else:
                sensitivity = []
                while True:
                    edge = "level"
                    if self.at_kw("posedge"):
                        self.next()
                        edge = "posedge"
                    elif self.at_kw("negedge"):
                        self.next()
                        edge = "negedge"
                    sig = self.eat_id()
                    sensitivity.append(SensItem(edge=edge, signal=sig.text))
                    if self.peek().kind == "id" and self.peek().text == "or":
                        self.next()
                        continue
                    if self.at_op(","):
                        self.next()
                        continue
                    break
                self.eat_op(")")
        body = self.parse_stmt()
        end = body[-1].span.end if body else kw.end
        blk = AlwaysBlock(span=SourceSpan(kw.start, end), sensitivity=sensitivity, body=body)
        if sensitivity is not None:
            edges = [s for s in sensitivity if s.edge != "level"]
            levels = [s for s in sensitivity if s.edge == "level"]
            if edges and levels:
                raise _unsupported(
                    "mixed edge and level sensitivity in one always block", blk.span
                )
        return blk

    def parse_instance(self) -> Item:
        mod = self.eat_id()
        param_overrides: list[tuple[str | None, Expr]] = []
        if self.at_op("#"):
            self.next()
            self.eat_op("(")
            param_overrides = self.parse_connection_list()
            self.eat_op(")")
        inst = self.eat_id()
        self.eat_op("(")
        connections: list[tuple[str | None, Expr | None]] = []
        if not self.at_op(")"):
            connections = self.parse_connection_list(allow_empty=True)
        self.eat_op(")")
        semi = self.eat_op(";")
        return Instance(span=SourceSpan(mod.start, semi.end), module_name=mod.text,
                        inst_name=inst.text, param_overrides=param_overrides,
                        connections=connections)

    def parse_connection_list(self, allow_empty: bool = False):
        out = []
        while True:
            if self.at_op("."):
                self.next()
                name = self.eat_id()
                self.eat_op("(")
                if allow_empty and self.at_op(")"):
                    expr = None
                else:
                    expr = self.parse_expr()
                self.eat_op(")")
                out.append((name.text, expr))
            else:
                out.append((None, self.parse_expr()))
            if self.at_op(","):
                self.next()
                continue
            return out

    # -- top level -----------------------------------------------------------

    def parse_unit(self, origin: str) -> Ast:
        modules: list[ModuleDecl] = []
        while self.peek().kind != "eof":
            self.reject_unsupported_kw()
            if not self.at_kw("module"):
                t = self.peek()
                raise _err(f"expected 'module', got {t.text!r}", t.span)
            modules.append(self.parse_module())
        if not modules:
            raise _err("no module declarations found", SourceSpan(0, max(1, len(self.text))))
        return Ast(modules=modules, origin=origin)


def _fold_const(expr: Expr, what: str, env: dict[str, int]) -> int:
    if isinstance(expr, Number):
        if expr.xmask or expr.zmask:
            raise _err(f"{what} must be a defined constant", expr.span)
        return expr.value
    if isinstance(expr, Unary) and expr.op in ("-", "+"):
        v = _fold_const(expr.operand, what, env)
        return -v if expr.op == "-" else v
    if isinstance(expr, Binary) and expr.op in ("+", "-", "*", "/", "%", "<<", ">>"):
        a = _fold_const(expr.left, what, env)
        b = _fold_const(expr.right, what, env)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        if expr.op == "<<":
            return a << b
        if expr.op == ">>":
            return a >> b
        if b == 0:
            raise _err(f"division by zero in {what}", expr.span)
        return a // b if expr.op == "/" else a % b
    if isinstance(expr, Ident):
        if expr.name in env:
            return env[expr.name]
        raise _err(
            f"{what} references '{expr.name}', which is not a previously "
            "declared parameter",
            expr.span,
        )
    raise _err(f"{what} must be a constant integer expression", expr.span)


def parse_source(src: SourceUnit | str, origin: str = "<string>") -> Ast:
    """Parse Verilog text into an Ast.

    Raises ParseError carrying located diagnostics; out-of-subset constructs
    get severity "unsupported", malformed input gets "error".
    """
    if isinstance(src, str):
        src = SourceUnit(text=src, origin=origin)
    try:
        tokens = tokenize(src.text)
    except LexError as e:
        sev = "unsupported" if e.unsupported else "error"
        raise ParseError([ParseDiagnostic(sev, e.message, e.span)])
    parser = _Parser(tokens, src.text)
    ast = parser.parse_unit(src.origin)
    _check_references(ast)
    return ast


def _check_references(ast: Ast):
    """Every identifier must resolve to a port, net, parameter, or module."""
    module_names = {m.name for m in ast.modules}
    for mod in ast.modules:
        declared: set[str] = {p.name for p in mod.ports}
        declared.update(p.name for p in mod.params)
        for item in mod.items:
            if isinstance(item, NetDecl):
                if item.name in declared:
                    raise _err(f"duplicate declaration of '{item.name}'", item.span)
                declared.add(item.name)
        for item in mod.items:
            if isinstance(item, ContinuousAssign):
                _check_expr(item.lhs, declared, mod.name)
                _check_expr(item.rhs, declared, mod.name)
            elif isinstance(item, AlwaysBlock):
                for s in item.sensitivity or []:
                    if s.signal not in declared:
                        raise _err(
                            f"undeclared signal '{s.signal}' in sensitivity list", item.span
                        )
                _check_stmts(item.body, declared, mod.name)
            elif isinstance(item, Instance):
                if item.module_name not in module_names:
                    raise _unsupported(
                        f"instance of undeclared module '{item.module_name}'", item.span
                    )
                for _, expr in item.connections:
                    if expr is not None:
                        _check_expr(expr, declared, mod.name)


def _check_stmts(stmts: list[Stmt], declared: set[str], mod: str):
    for s in stmts:
        if isinstance(s, Assign):
            _check_expr(s.lhs, declared, mod)
            _check_expr(s.rhs, declared, mod)
        elif isinstance(s, If):
            _check_expr(s.cond, declared, mod)
            _check_stmts(s.then_body, declared, mod)
            _check_stmts(s.else_body, declared, mod)
        elif isinstance(s, Case):
            _check_expr(s.selector, declared, mod)
            for arm in s.arms:
                for label in arm.labels:
                    _check_expr(label, declared, mod)
                _check_stmts(arm.body, declared, mod)
            if s.default is not None:
                _check_stmts(s.default, declared, mod)


def _check_expr(expr: Expr, declared: set[str], mod: str):
    if isinstance(expr, Ident):
        if expr.name not in declared:
            raise _err(f"undeclared identifier '{expr.name}' in module '{mod}'", expr.span)
    elif isinstance(expr, Number):
        pass
    elif isinstance(expr, Unary):
        _check_expr(expr.operand, declared, mod)
    elif isinstance(expr, Binary):
        _check_expr(expr.left, declared, mod)
        _check_expr(expr.right, declared, mod)
    elif isinstance(expr, Ternary):
        _check_expr(expr.cond, declared, mod)
        _check_expr(expr.then, declared, mod)
        _check_expr(expr.other, declared, mod)
    elif isinstance(expr, Concat):
        for p in expr.parts:
            _check_expr(p, declared, mod)
    elif isinstance(expr, Repl):
        _check_expr(expr.count, declared, mod)
        _check_expr(expr.part, declared, mod)
    elif isinstance(expr, Index):
        _check_expr(expr.base, declared, mod)
        _check_expr(expr.index, declared, mod)
    elif isinstance(expr, PartSelect):
        _check_expr(expr.base, declared, mod)
        _check_expr(expr.msb, declared, mod)
        _check_expr(expr.lsb, declared, mod)


def resolve_top(ast: Ast, hint: str | None = None) -> ModuleDecl:
    """Pick the module to treat as the design top.

    Preference order: explicit hint, a module named ``top_module``, then the
    single module when there is exactly one. Anything else is ambiguous.
    """
    if hint is not None:
        m = ast.module(hint)
        if m is None:
            raise ValueError(f"no module named '{hint}' (have: {[x.name for x in ast.modules]})")
        return m
    m = ast.module("top_module")
    if m is not None:
        return m
    if len(ast.modules) == 1:
        return ast.modules[0]
    raise ValueError(
        "ambiguous top module: "
        f"{[x.name for x in ast.modules]} (no hint, none named 'top_module')"
    )
