"""AST node definitions for the supported Verilog subset.

Nodes compare structurally: two trees are equal when every field except
source spans matches. Spans locate nodes in the original text for
diagnostics and mutation targeting.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class SourceSpan:
    """Half-open [start, end) offset range into the source text."""

    start: int = 0
    end: int = 0

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"backwards span [{self.start}, {self.end})")


NO_SPAN = SourceSpan(0, 0)


@dataclass(frozen=True)
class SourceUnit:
    """A piece of Verilog text plus a label saying where it came from."""

    text: str
    origin: str = "<string>"

    def __post_init__(self):
        if not self.text:
            raise ValueError("empty source text")


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Expr:
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass
class Ident(Expr):
    name: str = ""


@dataclass
class Number(Expr):
    """Integer literal.

    ``value``/``xmask``/``zmask`` describe the bit pattern: a bit is X when
    set in xmask, Z when set in zmask, otherwise it carries value's bit.
    ``width`` is None for unsized decimals (context gives them 32 bits).
    ``base`` remembers the written radix so printing round-trips faithfully.
    """

    value: int = 0
    width: int | None = None
    xmask: int = 0
    zmask: int = 0
    base: str = field(default="d", compare=False)  # radix as written; formatting only


@dataclass
class Unary(Expr):
    op: str = ""
    operand: Expr = None  # type: ignore[assignment]


@dataclass
class Binary(Expr):
    op: str = ""
    left: Expr = None  # type: ignore[assignment]
    right: Expr = None  # type: ignore[assignment]


@dataclass
class Ternary(Expr):
    cond: Expr = None  # type: ignore[assignment]
    then: Expr = None  # type: ignore[assignment]
    other: Expr = None  # type: ignore[assignment]


@dataclass
class Concat(Expr):
    parts: list[Expr] = field(default_factory=list)


@dataclass
class Repl(Expr):
    count: Expr = None  # type: ignore[assignment]
    part: Expr = None  # type: ignore[assignment]


@dataclass
class Index(Expr):
    """Single index: bit-select of a vector or word-select of a memory."""

    base: Expr = None  # type: ignore[assignment]
    index: Expr = None  # type: ignore[assignment]


@dataclass
class PartSelect(Expr):
    base: Expr = None  # type: ignore[assignment]
    msb: Expr = None  # type: ignore[assignment]
    lsb: Expr = None  # type: ignore[assignment]


# ---------------------------------------------------------------------------
# Statements (procedural)
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Stmt:
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass
class Assign(Stmt):
    """Procedural assignment; blocking when ``blocking`` else non-blocking."""

    lhs: Expr = None  # type: ignore[assignment]
    rhs: Expr = None  # type: ignore[assignment]
    blocking: bool = True


@dataclass
class If(Stmt):
    cond: Expr = None  # type: ignore[assignment]
    then_body: list[Stmt] = field(default_factory=list)
    else_body: list[Stmt] = field(default_factory=list)


@dataclass
class CaseArm:
    labels: list[Expr]
    body: list[Stmt]


@dataclass
class Case(Stmt):
    kind: str = "case"  # "case" | "casez"
    selector: Expr = None  # type: ignore[assignment]
    arms: list[CaseArm] = field(default_factory=list)
    default: list[Stmt] | None = None


# ---------------------------------------------------------------------------
# Module items
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Item:
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass
class PortDecl(Item):
    name: str = ""
    direction: str = "input"  # input | output | inout
    msb: int = 0
    lsb: int = 0
    is_reg: bool = False

    @property
    def width(self) -> int:
        return abs(self.msb - self.lsb) + 1


@dataclass
class NetDecl(Item):
    """wire/reg declaration; ``array`` gives (msb, lsb) for memories."""

    name: str = ""
    kind: str = "wire"  # wire | reg
    msb: int = 0
    lsb: int = 0
    array: tuple[int, int] | None = None
    init: Expr | None = None  # wire w = expr; sugar for an assign

    @property
    def width(self) -> int:
        return abs(self.msb - self.lsb) + 1


@dataclass
class ParamDecl(Item):
    name: str = ""
    value: int = 0
    local: bool = False


@dataclass
class ContinuousAssign(Item):
    lhs: Expr = None  # type: ignore[assignment]
    rhs: Expr = None  # type: ignore[assignment]


@dataclass
class SensItem:
    """Sensitivity entry: ``edge`` is "posedge", "negedge", or "level"."""

    edge: str
    signal: str


@dataclass
class AlwaysBlock(Item):
    sensitivity: list[SensItem] | None = None  # None means @(*)
    body: list[Stmt] = field(default_factory=list)

    def edge_items(self) -> list[SensItem]:
        if self.sensitivity is None:
            return []
        return [s for s in self.sensitivity if s.edge != "level"]

    @property
    def is_edge_triggered(self) -> bool:
        return bool(self.edge_items())


@dataclass
class Instance(Item):
    module_name: str = ""
    inst_name: str = ""
    param_overrides: list[tuple[str | None, Expr]] = field(default_factory=list)
    connections: list[tuple[str | None, Expr | None]] = field(default_factory=list)


@dataclass(eq=False)
class ModuleDecl:
    name: str
    ports: list[PortDecl]
    params: list[ParamDecl]
    items: list[Item]
    span: SourceSpan = field(default=NO_SPAN)

    def __eq__(self, other):
        if not isinstance(other, ModuleDecl):
            return NotImplemented
        return (
            self.name == other.name
            and self.ports == other.ports
            and self.params == other.params
            and self.items == other.items
        )


@dataclass(eq=False)
class Ast:
    modules: list[ModuleDecl]
    origin: str = "<string>"

    def __eq__(self, other):
        if not isinstance(other, Ast):
            return NotImplemented
        return self.modules == other.modules

    def module(self, name: str) -> ModuleDecl | None:
        for m in self.modules:
            if m.name == name:
                return m
        return None
