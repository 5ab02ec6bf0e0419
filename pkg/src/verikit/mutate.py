"""Rule-based error injection and the fuzzing campaign harness.

Mutants are single-site edits of the golden AST that keep the interface
identical: operator swaps, negation toggles, constant nudges, reset polarity
flips, clock edge flips, condition negation, part-select window shifts, and
blocking/non-blocking swaps. Each mutant's ground truth comes from an
oracle whose stimulus budget strictly dominates the checker's, so a checker
kill can never contradict an oracle equivalence.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from verikit.analysis import analyze
from verikit.equiv import (
    CheckConfig,
    EquivalenceReport,
    TestPlan,
    derive_rng,
    plan_tests,
    run_equivalence,
)
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
    ModuleDecl,
    Number,
    PartSelect,
    Repl,
    SourceSpan,
    Stmt,
    Ternary,
    Unary,
)
from verikit.front.parser import ParseError, parse_source, resolve_top
from verikit.front.printer import print_ast
from verikit.sim import ElaborationError, elaborate

__all__ = [
    "CampaignReport",
    "Mutant",
    "MutationOp",
    "generate_mutants",
    "merge_campaigns",
    "oracle_kill_check",
    "run_campaign",
]

_BINOP_SWAP = {"&": "|", "|": "&", "+": "-", "-": "+",
               "==": "!=", "!=": "==", "<": "<=", "<=": "<"}

ORACLE_BUDGET_FACTOR = 5  # total oracle toggles = factor * M * N
ORACLE_SEEDS = 8


@dataclass(frozen=True)
class MutationOp:
    kind: str
    detail: str = ""


@dataclass
class Mutant:
    id: str
    op: MutationOp
    span: SourceSpan
    source: str


@dataclass
class _Site:
    op: MutationOp
    span: SourceSpan
    apply: object  # () -> None
    undo: object  # () -> None


class _SiteCollector:
    def __init__(self, module: ModuleDecl, reset_names: set[str]):
        self.module = module
        self.reset_names = reset_names
        self.sites: list[_Site] = []
        self.vector_ranges: dict[str, tuple[int, int]] = {}
        for p in module.ports:
            self.vector_ranges[p.name] = (p.msb, p.lsb)
        from verikit.front.nodes import NetDecl

        for item in module.items:
            if isinstance(item, NetDecl) and item.array is None:
                self.vector_ranges[item.name] = (item.msb, item.lsb)

    def add(self, kind, detail, span, apply, undo):
        self.sites.append(_Site(MutationOp(kind, detail), span, apply, undo))

    # -- walkers -------------------------------------------------------------

    def collect(self):
        for item in self.module.items:
            if isinstance(item, ContinuousAssign):
                self._rhs_negate_site(item, "rhs", item.rhs)
                self._expr(item.rhs, lambda v, it=item: setattr(it, "rhs", v),
                           in_cond=False)
            elif isinstance(item, AlwaysBlock):
                self._always(item)
        return self.sites

    def _rhs_negate_site(self, holder, attr, rhs: Expr):
        self.add(
            "unary_negation_toggle", "~rhs", rhs.span,
            lambda h=holder, a=attr, e=rhs: setattr(
                h, a, Unary(span=e.span, op="~", operand=e)
            ),
            lambda h=holder, a=attr, e=rhs: setattr(h, a, e),
        )

    def _always(self, blk: AlwaysBlock):
        if blk.sensitivity is not None:
            for s in blk.sensitivity:
                if s.edge in ("posedge", "negedge"):
                    other = "negedge" if s.edge == "posedge" else "posedge"
                    self.add(
                        "edge_flip", f"{s.edge}->{other} {s.signal}", blk.span,
                        lambda s=s, o=other: setattr(s, "edge", o),
                        lambda s=s, e=s.edge: setattr(s, "edge", e),
                    )
        in_edge = blk.is_edge_triggered
        self._stmts(blk.body, in_edge)

    def _stmts(self, stmts: list[Stmt], in_edge: bool):
        for s in stmts:
            if isinstance(s, Assign):
                if in_edge:
                    self.add(
                        "assignment_style_swap",
                        "<=->=" if not s.blocking else "=-><=",
                        s.span,
                        lambda s=s: setattr(s, "blocking", not s.blocking),
                        lambda s=s, b=s.blocking: setattr(s, "blocking", b),
                    )
                self._rhs_negate_site(s, "rhs", s.rhs)
                self._expr(s.rhs, lambda v, s=s: setattr(s, "rhs", v), in_cond=False)
            elif isinstance(s, If):
                self._condition(s, "cond", s.cond, in_edge)
                self._stmts(s.then_body, in_edge)
                self._stmts(s.else_body, in_edge)
            elif isinstance(s, Case):
                self._expr(s.selector, lambda v, s=s: setattr(s, "selector", v),
                           in_cond=False)
                for arm in s.arms:
                    for i, lab in enumerate(arm.labels):
                        self._expr(lab, lambda v, a=arm, i=i: a.labels.__setitem__(i, v),
                                   in_cond=False, label=True)
                    self._stmts(arm.body, in_edge)
                if s.default is not None:
                    self._stmts(s.default, in_edge)

    def _condition(self, holder, attr, cond: Expr, in_edge: bool):
        self.add(
            "condition_negate", "", cond.span,
            lambda h=holder, a=attr, c=cond: setattr(
                h, a, Unary(span=c.span, op="!", operand=c)
            ),
            lambda h=holder, a=attr, c=cond: setattr(h, a, c),
        )
        if in_edge:
            self._reset_flip_sites(holder, attr, cond)
        self._expr(cond, lambda v, h=holder, a=attr: setattr(h, a, v), in_cond=True)

    def _reset_flip_sites(self, holder, attr, cond: Expr):
        """Flip the polarity of reset atoms inside an if condition."""

        def visit(node: Expr, setter):
            if isinstance(node, Ident) and node.name in self.reset_names:
                self.add(
                    "reset_polarity_flip", node.name, node.span,
                    lambda n=node, st=setter: st(Unary(span=n.span, op="!", operand=n)),
                    lambda n=node, st=setter: st(n),
                )
                return
            if isinstance(node, Unary) and node.op in ("!", "~") \
                    and isinstance(node.operand, Ident) \
                    and node.operand.name in self.reset_names:
                self.add(
                    "reset_polarity_flip", node.operand.name, node.span,
                    lambda n=node, st=setter: st(n.operand),
                    lambda n=node, st=setter: st(n),
                )
                return
            if isinstance(node, Binary) and node.op in ("&&", "||"):
                visit(node.left, lambda v, n=node: setattr(n, "left", v))
                visit(node.right, lambda v, n=node: setattr(n, "right", v))

        visit(cond, lambda v, h=holder, a=attr: setattr(h, a, v))

    def _expr(self, e: Expr, setter, in_cond: bool, label: bool = False):
        if isinstance(e, Binary):
            if e.op in _BINOP_SWAP:
                other = _BINOP_SWAP[e.op]
                self.add(
                    "binary_op_swap", f"{e.op}->{other}", e.span,
                    lambda n=e, o=other: setattr(n, "op", o),
                    lambda n=e, o=e.op: setattr(n, "op", o),
                )
            if e.op in ("&", "|", "^", "&&", "||") and isinstance(e.left, Ident):
                self.add(
                    "unary_negation_toggle", f"~{e.left.name}", e.left.span,
                    lambda n=e: setattr(n, "left", Unary(span=n.left.span, op="~",
                                                         operand=n.left)),
                    lambda n=e, old=e.left: setattr(n, "left", old),
                )
            self._expr(e.left, lambda v, n=e: setattr(n, "left", v), in_cond)
            self._expr(e.right, lambda v, n=e: setattr(n, "right", v), in_cond)
        elif isinstance(e, Unary):
            if e.op in ("!", "~"):
                self.add(
                    "unary_negation_toggle", f"drop {e.op}", e.span,
                    lambda st=setter, n=e: st(n.operand),
                    lambda st=setter, n=e: st(n),
                )
            self._expr(e.operand, lambda v, n=e: setattr(n, "operand", v), in_cond)
        elif isinstance(e, Number):
            if e.xmask or e.zmask:
                return
            mask = (1 << e.width) - 1 if e.width is not None else None
            up = (e.value + 1) & mask if mask is not None else e.value + 1
            self.add(
                "constant_perturb", "+1", e.span,
                lambda n=e, v=up: setattr(n, "value", v),
                lambda n=e, v=e.value: setattr(n, "value", v),
            )
            if e.value > 0:
                down = (e.value - 1) & mask if mask is not None else e.value - 1
                self.add(
                    "constant_perturb", "-1", e.span,
                    lambda n=e, v=down: setattr(n, "value", v),
                    lambda n=e, v=e.value: setattr(n, "value", v),
                )
        elif isinstance(e, Ternary):
            self._condition(e, "cond", e.cond, in_edge=False)
            self._expr(e.then, lambda v, n=e: setattr(n, "then", v), in_cond)
            self._expr(e.other, lambda v, n=e: setattr(n, "other", v), in_cond)
        elif isinstance(e, Concat):
            for i, p in enumerate(e.parts):
                self._expr(p, lambda v, n=e, i=i: n.parts.__setitem__(i, v), in_cond)
        elif isinstance(e, Repl):
            self._expr(e.part, lambda v, n=e: setattr(n, "part", v), in_cond)
        elif isinstance(e, Index):
            self._expr(e.index, lambda v, n=e: setattr(n, "index", v), in_cond)
        elif isinstance(e, PartSelect):
            self._partselect_sites(e)

    def _partselect_sites(self, e: PartSelect):
        if not (isinstance(e.base, Ident) and isinstance(e.msb, Number)
                and isinstance(e.lsb, Number)):
            return
        rng = self.vector_ranges.get(e.base.name)
        if rng is None:
            return
        dm, dl = rng
        lo, hi = min(dm, dl), max(dm, dl)
        m, l = e.msb.value, e.lsb.value
        for delta, tag in ((1, "+1"), (-1, "-1")):
            nm, nl = m + delta, l + delta
            if lo <= nm <= hi and lo <= nl <= hi:
                self.add(
                    "index_shift", tag, e.span,
                    lambda n=e, a=nm, b=nl: (setattr(n.msb, "value", a),
                                             setattr(n.lsb, "value", b)),
                    lambda n=e, a=m, b=l: (setattr(n.msb, "value", a),
                                           setattr(n.lsb, "value", b)),
                )


def generate_mutants(ast: Ast, seed: int, count: int,
                     top: str | None = None) -> list[Mutant]:
    """Up to ``count`` distinct, reparsing, interface-preserving single-site
    mutants, fully determined by (ast, seed, count)."""
    module = resolve_top(ast, top)
    try:
        resets = {r.signal for r in analyze(ast, top).resets}
    except Exception:
        resets = set()
    baseline = print_ast(ast)
    golden_iface = _iface_of_source(baseline, top)

    # helper modules are fair game too: mutating them changes top behavior
    # through the instance without touching the top interface
    sites = []
    for mod in ast.modules:
        sites.extend(_SiteCollector(mod, resets if mod is module else set()).collect())
    rng = random.Random(derive_rng(seed, 0, 0).getrandbits(63))
    order = list(range(len(sites)))
    rng.shuffle(order)

    mutants: list[Mutant] = []
    seen: set[tuple] = set()
    for idx in order:
        if len(mutants) >= count:
            break
        site = sites[idx]
        key = (site.op.kind, site.op.detail, site.span.start, site.span.end)
        if key in seen:
            continue
        seen.add(key)
        site.apply()
        try:
            source = print_ast(ast)
        finally:
            site.undo()
        if source == baseline:
            continue
        try:
            reparsed = parse_source(source)
            elaborate(reparsed, top=module.name if len(ast.modules) > 1 else None)
        except (ParseError, ElaborationError, ValueError):
            continue
        if _iface_of_source(source, module.name if len(ast.modules) > 1 else None) \
                != golden_iface:
            continue
        mid = f"{site.op.kind}:{site.op.detail}@{site.span.start}"
        mutants.append(Mutant(id=mid, op=site.op, span=site.span, source=source))
    return mutants


def _iface_of_source(source: str, top: str | None):
    from verikit.analysis import extract_interface

    ast = parse_source(source)
    return extract_interface(resolve_top(ast, top))


# ---------------------------------------------------------------------------
# Oracle
# ---------------------------------------------------------------------------


def _total_input_bits(model) -> int:
    return sum(model.signals[s].width for s in model.input_slots)


def _state_bits(model) -> int:
    bits = sum(sig.width for sig in model.signals if sig.is_state)
    bits += sum(m.width * m.depth for m in model.memories)
    return bits


def oracle_kill_check(
    golden_source: str,
    mutant_source: str,
    config: CheckConfig | None = None,
    exhaustive_bits: int = 12,
) -> str:
    """Ground-truth label: "differs", "equivalent", or "unknown".

    Combinational designs up to ``exhaustive_bits`` input bits are compared
    on every input pattern. Sequential designs (and wide combinational ones)
    run ORACLE_BUDGET_FACTOR * M * N toggles across ORACLE_SEEDS streams, the
    first stream being the checker's own plan, so the oracle sees everything
    the checker sees. A clean run is "equivalent" only when the budget
    plausibly covers the state space; otherwise "unknown".
    """
    config = config or CheckConfig()
    gast = parse_source(golden_source)
    ganalysis = analyze(gast, top=config.top_hint)
    gmodel = elaborate(gast, top=config.top_hint)
    mast = parse_source(mutant_source)
    mmodel = elaborate(mast, top=config.top_hint)

    if ganalysis.circuit_class.kind == "combinational":
        n_bits = _total_input_bits(gmodel)
        if n_bits <= exhaustive_bits:
            return _exhaustive_compare(gmodel, mmodel, ganalysis)
        label = _budget_compare(gmodel, mmodel, ganalysis, config)
        return label if label == "differs" else "unknown"

    label = _budget_compare(gmodel, mmodel, ganalysis, config)
    if label == "differs":
        return "differs"
    cycles_run = ORACLE_BUDGET_FACTOR * config.m * config.n // 2
    if (1 << min(_state_bits(gmodel), 40)) > cycles_run:
        return "unknown"
    return "equivalent"


def _exhaustive_compare(gmodel, mmodel, ganalysis) -> str:
    inputs = [(gmodel.by_name[p.name], mmodel.by_name[p.name])
              for p in ganalysis.interface.inputs]
    outs = []
    for slot in gmodel.output_slots:
        sig = gmodel.signals[slot]
        csig = mmodel.by_name[sig.name]
        outs.append((2 * slot, 2 * csig.slot, sig.mask ^ sig.static_z))
    widths = [g.width for g, _ in inputs]
    total = sum(widths)
    gstate, cstate = gmodel.new_state(), mmodel.new_state()
    gs, cs = gstate.s, cstate.s
    for pattern in range(1 << total):
        off = 0
        for (gsig, csig), w in zip(inputs, widths):
            val = (pattern >> off) & ((1 << w) - 1)
            off += w
            gs[2 * gsig.slot] = val
            gs[2 * gsig.slot + 1] = 0
            cs[2 * csig.slot] = val
            cs[2 * csig.slot + 1] = 0
        gmodel.comb_fn(gs, gstate.mv, gstate.mx)
        mmodel.comb_fn(cs, cstate.mv, cstate.mx)
        for gi, ci, dyn in outs:
            if gs[gi + 1] & dyn:
                continue  # golden undefined here: no ground truth
            if cs[ci] != gs[gi] or cs[ci + 1] != gs[gi + 1]:
                return "differs"
    return "equivalent"


def _budget_compare(gmodel, mmodel, ganalysis, config: CheckConfig) -> str:
    """First stream replays the checker's exact plan; the rest extend the
    budget to ORACLE_BUDGET_FACTOR * M * N total toggles."""
    stage_count = 2 if ganalysis.circuit_class.kind == "sequential" else 1
    base_toggles = stage_count * config.m * config.n
    target = ORACLE_BUDGET_FACTOR * config.m * config.n
    extra_each = max(
        1, -(-(target - base_toggles) // ((ORACLE_SEEDS - 1) * stage_count * config.n))
    )
    runs = [(config.seed, config.m)]
    for k in range(1, ORACLE_SEEDS):
        runs.append((derive_rng(config.seed, 7777, k).getrandbits(63), extra_each))
    for run_seed, m in runs:
        cfg = CheckConfig(m=m, n=config.n, seed=run_seed, early_exit=True,
                          top_hint=config.top_hint)
        plan = plan_tests(ganalysis.interface, ganalysis.clocks, ganalysis.resets,
                          ganalysis.circuit_class, cfg)
        report = run_equivalence(gmodel, mmodel, plan, iface=ganalysis.interface)
        if report.mismatches:
            return "differs"
    return "clean"


# ---------------------------------------------------------------------------
# Campaign
# ---------------------------------------------------------------------------


@dataclass
class CampaignReport:
    design: str
    generated: int = 0
    killable: int = 0
    killed: int = 0
    false_kills: int = 0
    survived_killable: int = 0
    oracle_equivalent: int = 0
    unknown: int = 0
    per_mutant: list[dict] = field(default_factory=list)

    @property
    def detection_rate(self) -> float:
        return self.killed / self.killable if self.killable else 0.0

    @property
    def false_kill_rate(self) -> float:
        return self.false_kills / self.oracle_equivalent if self.oracle_equivalent else 0.0

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "generated": self.generated,
            "killable": self.killable,
            "killed": self.killed,
            "false_kills": self.false_kills,
            "survived_killable": self.survived_killable,
            "oracle_equivalent": self.oracle_equivalent,
            "unknown": self.unknown,
            "detection_rate": self.detection_rate,
            "false_kill_rate": self.false_kill_rate,
            "per_mutant": self.per_mutant,
        }


def run_campaign(
    golden_source: str,
    config: CheckConfig | None = None,
    seed: int = 0,
    count: int = 20,
    design_name: str = "design",
) -> CampaignReport:
    """Generate mutants, kill-check each one, and account for detection."""
    config = config or CheckConfig()
    ast = parse_source(golden_source)
    mutants = generate_mutants(ast, seed=seed, count=count, top=config.top_hint)
    golden_canonical = print_ast(ast)

    gast = parse_source(golden_canonical)
    ganalysis = analyze(gast, top=config.top_hint)
    gmodel = elaborate(gast, top=config.top_hint)
    checker_cfg = CheckConfig(m=config.m, n=config.n, seed=config.seed,
                              early_exit=True, top_hint=config.top_hint)
    plan = plan_tests(ganalysis.interface, ganalysis.clocks, ganalysis.resets,
                      ganalysis.circuit_class, checker_cfg)

    report = CampaignReport(design=design_name, generated=len(mutants))
    for mut in mutants:
        mmodel = elaborate(parse_source(mut.source), top=config.top_hint)
        check = run_equivalence(gmodel, mmodel, plan, iface=ganalysis.interface)
        killed = check.mismatches > 0
        label = oracle_kill_check(golden_canonical, mut.source, config)
        entry = {"id": mut.id, "oracle": label, "checker": check.verdict,
                 "epsilon": check.epsilon}
        report.per_mutant.append(entry)
        if label == "differs":
            report.killable += 1
            if killed:
                report.killed += 1
            else:
                report.survived_killable += 1
        elif label == "equivalent":
            report.oracle_equivalent += 1
            if killed:
                report.false_kills += 1
        else:
            report.unknown += 1
    return report


def merge_campaigns(reports: list[CampaignReport]) -> CampaignReport:
    total = CampaignReport(design="aggregate")
    for r in reports:
        total.generated += r.generated
        total.killable += r.killable
        total.killed += r.killed
        total.false_kills += r.false_kills
        total.survived_killable += r.survived_killable
        total.oracle_equivalent += r.oracle_equivalent
        total.unknown += r.unknown
    return total
