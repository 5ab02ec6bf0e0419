"""Circuit-structure analysis: interface extraction, clock and reset
classification, and combinational/sequential classification.

Clock/reset rules, applied in order:
  (a) a 1-bit input named in an edge event whose value is never read in the
      block body is a clock (edge polarity from the event keyword);
  (b) a 1-bit input named in an edge event and tested by the outermost
      conditional is an asynchronous reset, active_low when the test is a
      negation (!s, ~s, s == 0), active_high otherwise;
  (c) a 1-bit input tested by the outermost conditional of a clock-edge-only
      block, whose guarded branch assigns only constants, is a synchronous
      reset with polarity from the test;
  (d) name heuristics break remaining ties; anything still ambiguous is
      treated as plain data and reported as a warning.
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
    Expr,
    Ident,
    If,
    Index,
    ModuleDecl,
    Number,
    PartSelect,
    Repl,
    Stmt,
    Ternary,
    Unary,
)

__all__ = [
    "AnalysisError",
    "CircuitAnalysis",
    "CircuitClass",
    "ClockSpec",
    "ModuleInterface",
    "PortInfo",
    "ResetSpec",
    "analyze",
    "classify_circuit",
    "extract_interface",
    "infer_clocks_and_resets",
]


class AnalysisError(Exception):
    pass


@dataclass(frozen=True)
class PortInfo:
    name: str
    direction: str  # "input" | "output"
    msb: int
    lsb: int

    @property
    def width(self) -> int:
        return abs(self.msb - self.lsb) + 1


@dataclass(frozen=True)
class ModuleInterface:
    name: str
    ports: tuple[PortInfo, ...]

    @property
    def inputs(self) -> list[PortInfo]:
        return [p for p in self.ports if p.direction == "input"]

    @property
    def outputs(self) -> list[PortInfo]:
        return [p for p in self.ports if p.direction == "output"]

    def port(self, name: str) -> PortInfo | None:
        for p in self.ports:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class ClockSpec:
    signal: str
    edge: str  # "rising" | "falling"


@dataclass(frozen=True)
class ResetSpec:
    signal: str
    synchrony: str  # "synchronous" | "asynchronous"
    polarity: str  # "active_high" | "active_low"

    @property
    def active_level(self) -> int:
        return 1 if self.polarity == "active_high" else 0

    @property
    def inactive_level(self) -> int:
        return 1 - self.active_level


@dataclass(frozen=True)
class CircuitClass:
    kind: str  # "combinational" | "sequential"


@dataclass
class CircuitAnalysis:
    interface: ModuleInterface
    clocks: list[ClockSpec]
    resets: list[ResetSpec]
    circuit_class: CircuitClass
    warnings: list[str] = field(default_factory=list)


def extract_interface(module: ModuleDecl) -> ModuleInterface:
    seen: set[str] = set()
    ports: list[PortInfo] = []
    for p in module.ports:
        if p.direction == "inout":
            raise AnalysisError(f"inout port '{p.name}' is not supported")
        if p.name in seen:
            raise AnalysisError(f"duplicate port name '{p.name}'")
        seen.add(p.name)
        ports.append(PortInfo(name=p.name, direction=p.direction, msb=p.msb, lsb=p.lsb))
    if not any(p.direction == "output" for p in ports):
        raise AnalysisError(f"module '{module.name}' has no outputs")
    return ModuleInterface(name=module.name, ports=tuple(ports))


def _flat_always(
    design: Ast | ModuleDecl, top: str | None
) -> tuple[list[AlwaysBlock], dict[str, str]]:
    """Edge analysis runs on the flattened design so clocks passed down into
    child instances are still attributed to top-level inputs.

    Returns the flat always blocks plus an alias map following identity
    assigns (instance port hookup wires) back toward their sources.
    """
    from verikit.sim.elaborate import FlatDesign, _flatten

    if isinstance(design, ModuleDecl):
        ast = Ast(modules=[design])
        top_mod = design
    else:
        from verikit.front.parser import resolve_top

        ast = design
        top_mod = resolve_top(ast, top)
    flat = FlatDesign(name=top_mod.name, ports=list(top_mod.ports), nets=[],
                      assigns=[], always=[])
    _flatten(ast, top_mod, "", (), flat)
    alias: dict[str, str] = {}
    for lhs, rhs, _prefix in flat.assigns:
        if isinstance(lhs, Ident) and isinstance(rhs, Ident):
            alias[lhs.name] = rhs.name
    return [blk for blk, _ in flat.always], alias


def _canonical(name: str, alias: dict[str, str]) -> str:
    seen = set()
    while name in alias and name not in seen:
        seen.add(name)
        name = alias[name]
    return name


def classify_circuit(design: Ast | ModuleDecl, top: str | None = None) -> CircuitClass:
    blocks, _alias = _flat_always(design, top)
    seq = any(b.is_edge_triggered for b in blocks)
    return CircuitClass(kind="sequential" if seq else "combinational")


# ---------------------------------------------------------------------------
# Read sets and guard atoms
# ---------------------------------------------------------------------------


def _reads_of_expr(e: Expr, acc: set[str]):
    if isinstance(e, Ident):
        acc.add(e.name)
    elif isinstance(e, Number):
        pass
    elif isinstance(e, Unary):
        _reads_of_expr(e.operand, acc)
    elif isinstance(e, Binary):
        _reads_of_expr(e.left, acc)
        _reads_of_expr(e.right, acc)
    elif isinstance(e, Ternary):
        _reads_of_expr(e.cond, acc)
        _reads_of_expr(e.then, acc)
        _reads_of_expr(e.other, acc)
    elif isinstance(e, Concat):
        for p in e.parts:
            _reads_of_expr(p, acc)
    elif isinstance(e, Repl):
        _reads_of_expr(e.count, acc)
        _reads_of_expr(e.part, acc)
    elif isinstance(e, Index):
        _reads_of_expr(e.base, acc)
        _reads_of_expr(e.index, acc)
    elif isinstance(e, PartSelect):
        _reads_of_expr(e.base, acc)
        _reads_of_expr(e.msb, acc)
        _reads_of_expr(e.lsb, acc)


def _reads_of_stmt(s: Stmt, acc: set[str], include_lhs_selects: bool = True):
    if isinstance(s, Assign):
        _reads_of_expr(s.rhs, acc)
        if include_lhs_selects and isinstance(s.lhs, (Index, PartSelect)):
            sub: set[str] = set()
            _reads_of_expr(s.lhs, sub)
            if isinstance(s.lhs, Index) and isinstance(s.lhs.base, Ident):
                sub.discard(s.lhs.base.name)
            acc |= sub
    elif isinstance(s, If):
        _reads_of_expr(s.cond, acc)
        for t in s.then_body:
            _reads_of_stmt(t, acc)
        for t in s.else_body:
            _reads_of_stmt(t, acc)
    elif isinstance(s, Case):
        _reads_of_expr(s.selector, acc)
        for arm in s.arms:
            for lab in arm.labels:
                _reads_of_expr(lab, acc)
            for t in arm.body:
                _reads_of_stmt(t, acc)
        for t in s.default or []:
            _reads_of_stmt(t, acc)


def _guard_atoms(cond: Expr, out: dict[str, str]):
    """Collect signals whose assertion alone forces the condition true.

    Only top-level disjuncts qualify: in ``reset || q == 10`` the reset atom
    forces the guarded branch, while in ``trigger && count == 0`` it does
    not, so the latter never looks like a reset test."""

    def note(name: str, polarity: str):
        prev = out.get(name)
        out[name] = polarity if prev in (None, polarity) else "ambiguous"

    if isinstance(cond, Ident):
        note(cond.name, "active_high")
        return
    if isinstance(cond, Unary) and cond.op in ("!", "~") \
            and isinstance(cond.operand, Ident):
        note(cond.operand.name, "active_low")
        return
    if isinstance(cond, Binary):
        if cond.op in ("==", "!="):
            ident, num = None, None
            if isinstance(cond.left, Ident) and isinstance(cond.right, Number):
                ident, num = cond.left, cond.right
            elif isinstance(cond.right, Ident) and isinstance(cond.left, Number):
                ident, num = cond.right, cond.left
            if ident is not None:
                truthy = (num.value != 0)
                high = truthy if cond.op == "==" else not truthy
                note(ident.name, "active_high" if high else "active_low")
            return
        if cond.op == "||":
            _guard_atoms(cond.left, out)
            _guard_atoms(cond.right, out)
            return
    # conjunctions and anything more complex are not forcing tests


def _constant_only_assigns(stmts: list[Stmt]) -> bool:
    """True when every assignment in the statement list has a constant RHS
    (nested structure allowed, any non-constant RHS disqualifies)."""
    if not stmts:
        return False
    for s in stmts:
        if isinstance(s, Assign):
            reads: set[str] = set()
            _reads_of_expr(s.rhs, reads)
            if reads:
                return False
        elif isinstance(s, If):
            return False
        elif isinstance(s, Case):
            return False
        else:
            return False
    return True


_RESET_NAME_KEYS = ("rst", "reset", "aclr", "clr")


def _name_says_clock(name: str) -> bool:
    low = name.lower()
    return "clk" in low or "clock" in low


def _name_says_reset(name: str) -> bool:
    low = name.lower()
    return any(k in low for k in _RESET_NAME_KEYS)


def _name_says_active_low(name: str) -> bool:
    low = name.lower()
    return low.endswith("_n") or low.endswith("n_i") or low.endswith("resetn") \
        or low.endswith("rstn")


def infer_clocks_and_resets(
    design: Ast | ModuleDecl,
    iface: ModuleInterface,
    top: str | None = None,
) -> tuple[list[ClockSpec], list[ResetSpec], list[str]]:
    """Classify 1-bit inputs into clocks and resets.

    Returns (clocks, resets, warnings). Multi-clock designs are rejected:
    a wrong verdict downstream is worse than a refusal here.
    """
    all_blocks, alias = _flat_always(design, top)
    blocks = [b for b in all_blocks if b.is_edge_triggered]
    one_bit_inputs = {p.name for p in iface.inputs if p.width == 1}
    input_names = {p.name for p in iface.inputs}

    clock_edges: dict[str, set[str]] = {}
    async_resets: dict[str, str] = {}  # name -> polarity
    sync_resets: dict[str, str] = {}
    warnings: list[str] = []
    undecided_edge_signals: set[str] = set()

    for blk in blocks:
        body_reads_raw: set[str] = set()
        for s in blk.body:
            _reads_of_stmt(s, body_reads_raw)
        body_reads = {_canonical(n, alias) for n in body_reads_raw}
        top_guards: dict[str, str] = {}
        guarded_branch_constant: dict[str, bool] = {}
        for s in blk.body:
            # walk an if/else-if cascade: each level's test guards its own
            # then-branch, which is the standard priority-reset idiom
            node = s
            while isinstance(node, If):
                atoms: dict[str, str] = {}
                _guard_atoms(node.cond, atoms)
                const_then = _constant_only_assigns(node.then_body)
                for raw_name, pol in atoms.items():
                    name = _canonical(raw_name, alias)
                    if name in top_guards and top_guards[name] != pol:
                        top_guards[name] = "ambiguous"
                    else:
                        top_guards[name] = pol
                    guarded_branch_constant[name] = const_then
                if len(node.else_body) == 1 and isinstance(node.else_body[0], If):
                    node = node.else_body[0]
                else:
                    break

        edge_signal_names = set()
        for item in blk.edge_items():
            name = _canonical(item.signal, alias)
            edge_signal_names.add(name)
            if name not in input_names:
                raise AnalysisError(
                    f"edge event on '{name}', which is not a top-level input "
                    "(derived clocks are not supported)"
                )
            if name not in one_bit_inputs:
                raise AnalysisError(f"edge signal '{name}' is wider than 1 bit")
            if name not in body_reads:
                # rule (a): clock
                clock_edges.setdefault(name, set()).add(
                    "rising" if item.edge == "posedge" else "falling"
                )
                continue
            pol = top_guards.get(name)
            if pol in ("active_high", "active_low"):
                # rule (b): async reset
                prev = async_resets.get(name)
                if prev is not None and prev != pol:
                    raise AnalysisError(
                        f"'{name}' classified with conflicting reset polarities"
                    )
                async_resets[name] = pol
                continue
            undecided_edge_signals.add(name)

        # rule (c): sync resets in clock-edge-only blocks
        if edge_signal_names and edge_signal_names <= set(clock_edges):
            for name, pol in top_guards.items():
                if name in one_bit_inputs and name not in clock_edges \
                        and pol in ("active_high", "active_low") \
                        and guarded_branch_constant.get(name):
                    prev = sync_resets.get(name)
                    if prev is not None and prev != pol:
                        raise AnalysisError(
                            f"'{name}' classified with conflicting reset polarities"
                        )
                    sync_resets[name] = pol

    # rule (d): name heuristics for leftover edge-listed signals
    for name in sorted(undecided_edge_signals):
        if name in async_resets or name in clock_edges:
            continue
        if _name_says_clock(name) and not _name_says_reset(name):
            warnings.append(
                f"'{name}' is read inside its block but named like a clock; "
                "treating it as a clock by name heuristic"
            )
            edges = set()
            for blk in blocks:
                for item in blk.edge_items():
                    if item.signal == name:
                        edges.add("rising" if item.edge == "posedge" else "falling")
            clock_edges[name] = edges
        elif _name_says_reset(name):
            pol = "active_low" if _name_says_active_low(name) else "active_high"
            warnings.append(
                f"'{name}' classified as an asynchronous reset by name heuristic"
            )
            async_resets[name] = pol
        else:
            warnings.append(
                f"'{name}' has an edge event but no recognizable clock or reset "
                "pattern; treating it as a data input"
            )

    overlap = set(async_resets) & set(clock_edges)
    if overlap:
        raise AnalysisError(f"signals classified as both clock and reset: {sorted(overlap)}")
    for name in list(sync_resets):
        if name in clock_edges or name in async_resets:
            del sync_resets[name]

    if len(clock_edges) > 1:
        raise AnalysisError(
            f"multiple clocks {sorted(clock_edges)}: multi-clock designs are rejected"
        )
    if not clock_edges and blocks:
        raise AnalysisError("edge-triggered logic with no identifiable clock")

    clocks = [
        ClockSpec(signal=name, edge=edge)
        for name in sorted(clock_edges)
        for edge in sorted(clock_edges[name])
    ]
    resets = [
        ResetSpec(signal=n, synchrony="asynchronous", polarity=p)
        for n, p in sorted(async_resets.items())
    ] + [
        ResetSpec(signal=n, synchrony="synchronous", polarity=p)
        for n, p in sorted(sync_resets.items())
    ]
    return clocks, resets, warnings


def analyze(design: Ast | ModuleDecl, top: str | None = None) -> CircuitAnalysis:
    """Full structural analysis of the resolved top module."""
    if isinstance(design, ModuleDecl):
        module = design
    else:
        from verikit.front.parser import resolve_top

        module = resolve_top(design, top)
    iface = extract_interface(module)
    cls = classify_circuit(design, top)
    if cls.kind == "sequential":
        clocks, resets, warnings = infer_clocks_and_resets(design, iface, top)
    else:
        clocks, resets, warnings = [], [], []
    return CircuitAnalysis(interface=iface, clocks=clocks, resets=resets,
                           circuit_class=cls, warnings=warnings)
