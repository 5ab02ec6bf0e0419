"""Simulation-based equivalence checking.

Golden and candidate run in lock-step on byte-identical stimulus streams.
Combinational designs get M sequences of N random vectors; sequential
designs get a deterministic-reset stage followed by a random-reset stage,
each M sequences of N clock toggles, with one output comparison per toggle
(or per vector). The verdict carries the error rate
epsilon = mismatches / assessments * 100.

Determinism contract: the stream for (seed, stage, sequence) is derived
independently of worker scheduling. Per stimulus application the draw order
is: reset-machine decisions first (random-reset stages only), then one
getrandbits(width) per non-clock, non-reset input in declaration order.

Comparison policy per toggle: if any golden output bit is dynamically X the
toggle is skipped and tallied in undefined_skips; otherwise all outputs must
match bit-exactly, including statically undriven (Z) bits, and a candidate X
against a defined golden bit is a mismatch.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from verikit.analysis import (
    AnalysisError,
    CircuitAnalysis,
    CircuitClass,
    ClockSpec,
    ModuleInterface,
    ResetSpec,
    analyze,
)
from verikit.front.nodes import Ast
from verikit.front.parser import ParseError, parse_source
from verikit.sim import ElaborationError, ExecutableModel, elaborate
from verikit.sim.fourstate import fmt_bits

__all__ = [
    "CheckConfig",
    "EquivalenceReport",
    "InterfaceMismatch",
    "StimulusStage",
    "TestPlan",
    "check_sources",
    "compare_interfaces",
    "derive_rng",
    "enumerate_reset_scenarios",
    "plan_tests",
    "run_equivalence",
]

DEFAULT_M = 100
DEFAULT_N = 1000
DEFAULT_SEED = 0x5EED_0001
RESET_HOLD_CYCLES = 2
RANDOM_RESET_FLIP_P = 0.1

_M64 = (1 << 64) - 1


def _splitmix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _M64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _M64
    return z ^ (z >> 31)


def derive_rng(seed: int, stage: int, sequence: int) -> random.Random:
    """Independent RNG stream per (seed, stage, sequence)."""
    x = seed & _M64
    for part in (stage, sequence):
        x = _splitmix((x + 0x9E3779B97F4A7C15 + part) & _M64)
    return random.Random(x)


@dataclass
class CheckConfig:
    m: int = DEFAULT_M
    n: int = DEFAULT_N
    seed: int = DEFAULT_SEED
    early_exit: bool = False
    top_hint: str | None = None


@dataclass(frozen=True)
class StimulusStage:
    kind: str  # "pure_random" | "deterministic_reset" | "random_reset"
    exercised: str | None = None  # the reset being driven, if any
    inactive_levels: tuple[tuple[str, int], ...] = ()  # pinned resets

    def label(self) -> str:
        if self.exercised:
            return f"{self.kind}({self.exercised})"
        return self.kind


@dataclass
class TestPlan:
    __test__ = False  # keep pytest from collecting this as a test class

    m: int
    n: int
    seed: int
    circuit_kind: str
    stages: list[StimulusStage]
    clock: str | None = None
    clock_start_level: int = 0
    resets: list[ResetSpec] = field(default_factory=list)
    early_exit: bool = False
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("M must be at least 1")
        if self.circuit_kind == "sequential":
            if self.n < 2 or self.n % 2:
                raise ValueError("N must be even and at least 2 for sequential plans")
        elif self.n < 1:
            raise ValueError("N must be at least 1")
        if not self.stages:
            raise ValueError("a plan needs at least one stage")

    @property
    def nominal_comparisons(self) -> int:
        return len(self.stages) * self.m * self.n


@dataclass
class InterfaceMismatch:
    problems: list[str]

    def __str__(self):
        return "; ".join(self.problems)


@dataclass
class EquivalenceReport:
    verdict: str  # equivalent | non_equivalent | interface_mismatch | unsupported
    epsilon: float
    assessments: int
    mismatches: int
    undefined_skips: int
    first_mismatch: dict | None = None
    detail: str | None = None
    notes: list[str] = field(default_factory=list)
    m: int = 0
    n: int = 0
    seed: int = 0
    stages: list[str] = field(default_factory=list)
    wall_time: float = 0.0

    def canonical_dict(self) -> dict:
        """Everything the seed determines; excludes wall-clock timing."""
        return {
            "verdict": self.verdict,
            "epsilon": self.epsilon,
            "assessments": self.assessments,
            "mismatches": self.mismatches,
            "undefined_skips": self.undefined_skips,
            "first_mismatch": self.first_mismatch,
            "detail": self.detail,
            "notes": list(self.notes),
            "m": self.m,
            "n": self.n,
            "seed": self.seed,
            "stages": list(self.stages),
        }

    def to_dict(self) -> dict:
        d = self.canonical_dict()
        d["wall_time"] = self.wall_time
        return d


def enumerate_reset_scenarios(resets: list[ResetSpec]) -> list[str | None]:
    """Non-conflicting reset scenarios: at most one reset asserted at a time,
    so each reset gets its own exercise scenario."""
    if not resets:
        return [None]
    if len(resets) == 1:
        return [resets[0].signal]
    return [r.signal for r in resets]


def plan_tests(
    iface: ModuleInterface,
    clocks: list[ClockSpec],
    resets: list[ResetSpec],
    circuit_class: CircuitClass,
    config: CheckConfig | None = None,
) -> TestPlan:
    config = config or CheckConfig()
    if circuit_class.kind == "combinational":
        return TestPlan(
            m=config.m, n=config.n, seed=config.seed,
            circuit_kind="combinational",
            stages=[StimulusStage(kind="pure_random")],
            early_exit=config.early_exit,
        )
    if not clocks:
        raise AnalysisError("sequential plan requested without a clock")
    clock = clocks[0].signal
    rising = any(c.edge == "rising" for c in clocks)
    start_level = 0 if rising else 1

    def pinned(except_name: str | None) -> tuple[tuple[str, int], ...]:
        return tuple(
            (r.signal, r.inactive_level) for r in resets if r.signal != except_name
        )

    scenarios = enumerate_reset_scenarios(resets)
    stages: list[StimulusStage] = []
    notes: list[str] = []
    for sc in scenarios:
        stages.append(StimulusStage(kind="deterministic_reset", exercised=sc,
                                    inactive_levels=pinned(sc)))
    if len(resets) >= 2:
        stages.append(StimulusStage(kind="random_reset", exercised=None,
                                    inactive_levels=()))
        notes.append(
            f"{len(resets)} resets: {len(stages)} stages keep M*N toggles per "
            "scenario, so total work grows with the reset count"
        )
    else:
        only = resets[0].signal if resets else None
        stages.append(StimulusStage(kind="random_reset", exercised=only,
                                    inactive_levels=()))
    return TestPlan(
        m=config.m, n=config.n, seed=config.seed,
        circuit_kind="sequential", stages=stages,
        clock=clock, clock_start_level=start_level, resets=list(resets),
        early_exit=config.early_exit, notes=notes,
    )


def compare_interfaces(
    golden: ModuleInterface, candidate: ModuleInterface
) -> InterfaceMismatch | None:
    """Names (case-sensitive), directions, and widths must all line up;
    index bases may differ. Extra candidate ports are a mismatch."""
    problems = []
    cports = {p.name: p for p in candidate.ports}
    for g in golden.ports:
        c = cports.pop(g.name, None)
        if c is None:
            problems.append(f"candidate is missing port '{g.name}'")
            continue
        if c.direction != g.direction:
            problems.append(
                f"port '{g.name}': golden {g.direction}, candidate {c.direction}"
            )
        if c.width != g.width:
            problems.append(
                f"port '{g.name}': golden is {g.width} bits, candidate {c.width}"
            )
    for name in cports:
        problems.append(f"candidate has extra port '{name}'")
    return InterfaceMismatch(problems) if problems else None


# ---------------------------------------------------------------------------
# Lock-step execution
# ---------------------------------------------------------------------------


class _PairDriver:
    """Precomputed plumbing for running one golden/candidate pair."""

    def __init__(self, golden: ExecutableModel, candidate: ExecutableModel,
                 plan: TestPlan, iface: ModuleInterface):
        self.golden = golden
        self.candidate = candidate
        self.plan = plan
        reset_names = {r.signal for r in plan.resets}
        self.data_inputs = [
            p for p in iface.inputs
            if p.name != plan.clock and p.name not in reset_names
        ]
        self.data_widths = [p.width for p in self.data_inputs]
        self.g_data = [2 * golden.by_name[p.name].slot for p in self.data_inputs]
        self.c_data = [2 * candidate.by_name[p.name].slot for p in self.data_inputs]
        self.g_async = [golden.by_name[p.name].slot in golden.async_slots
                        for p in self.data_inputs]
        self.c_async = [candidate.by_name[p.name].slot in candidate.async_slots
                        for p in self.data_inputs]
        self.resets = {r.signal: r for r in plan.resets}
        self.outs = []
        for slot in golden.output_slots:
            sig = golden.signals[slot]
            csig = candidate.by_name[sig.name]
            self.outs.append((2 * slot, 2 * csig.slot, sig.mask ^ sig.static_z))
        if plan.clock is not None:
            self.g_clk = golden.by_name[plan.clock].slot
            self.c_clk = candidate.by_name[plan.clock].slot

    # -- stimulus helpers ---------------------------------------------------

    def _apply_data(self, rng, gstate, cstate):
        gs, cs = gstate.s, cstate.s
        widths = self.data_widths
        g_data, c_data = self.g_data, self.c_data
        for k in range(len(widths)):
            val = rng.getrandbits(widths[k])
            if self.g_async[k]:
                self.golden.set_input(gstate, g_data[k] // 2, val)
            else:
                i = g_data[k]
                gs[i] = val
                gs[i + 1] = 0
            if self.c_async[k]:
                self.candidate.set_input(cstate, c_data[k] // 2, val)
            else:
                i = c_data[k]
                cs[i] = val
                cs[i + 1] = 0

    def _apply_reset(self, name: str, level: int, gstate, cstate):
        self.golden.set_input(gstate, self.golden.by_name[name].slot, level)
        self.candidate.set_input(cstate, self.candidate.by_name[name].slot, level)

    # -- sequence runners -----------------------------------------------------

    def run_comb_sequence(self, stage_idx: int, seq_idx: int, counters, early_exit):
        rng = derive_rng(self.plan.seed, stage_idx, seq_idx)
        g, c = self.golden, self.candidate
        gstate, cstate = g.new_state(), c.new_state()
        gs, cs = gstate.s, cstate.s
        outs = self.outs
        gcomb, ccomb = g.comb_fn, c.comb_fn
        for tick in range(self.plan.n):
            self._apply_data(rng, gstate, cstate)
            gcomb(gs, gstate.mv, gstate.mx)
            ccomb(cs, cstate.mv, cstate.mx)
            skip = False
            ok = True
            for gi, ci, dyn in outs:
                if gs[gi + 1] & dyn:
                    skip = True
                    break
                if cs[ci] != gs[gi] or cs[ci + 1] != gs[gi + 1]:
                    ok = False
            if skip:
                counters.undefined_skips += 1
            else:
                counters.assessments += 1
                if not ok:
                    counters.mismatches += 1
                    if counters.first_mismatch is None:
                        counters.first_mismatch = self._trace(
                            stage_idx, seq_idx, tick, gstate, cstate
                        )
                    if early_exit:
                        return False
        return True

    def run_seq_sequence(self, stage_idx: int, seq_idx: int, counters, early_exit):
        plan = self.plan
        stage = plan.stages[stage_idx]
        rng = derive_rng(plan.seed, stage_idx, seq_idx)
        g, c = self.golden, self.candidate
        gstate, cstate = g.new_state(), c.new_state()
        gs, cs = gstate.s, cstate.s
        outs = self.outs
        gcomb, ccomb = g.comb_fn, c.comb_fn

        # clock initialization is silent: no process fires before cycle 0
        level = plan.clock_start_level
        gi_clk, ci_clk = 2 * self.g_clk, 2 * self.c_clk
        gs[gi_clk], gs[gi_clk + 1] = level, 0
        cs[ci_clk], cs[ci_clk + 1] = level, 0
        gfn_pos = g.event_fns.get((self.g_clk, "pos"))
        gfn_neg = g.event_fns.get((self.g_clk, "neg"))
        cfn_pos = c.event_fns.get((self.c_clk, "pos"))
        cfn_neg = c.event_fns.get((self.c_clk, "neg"))

        reset_machine = _ResetMachine(stage, plan.resets, rng)
        reset_machine.apply_initial(self, gstate, cstate)
        self._apply_data(rng, gstate, cstate)
        gcomb(gs, gstate.mv, gstate.mx)
        ccomb(cs, cstate.mv, cstate.mx)

        active_level = 1 - plan.clock_start_level
        for tick in range(plan.n):
            level = 1 - level
            # clock toggle on both models
            gs[gi_clk] = level
            cs[ci_clk] = level
            if level:
                if gfn_pos is not None:
                    gfn_pos(gs, gstate.mv, gstate.mx)
                if cfn_pos is not None:
                    cfn_pos(cs, cstate.mv, cstate.mx)
            else:
                if gfn_neg is not None:
                    gfn_neg(gs, gstate.mv, gstate.mx)
                if cfn_neg is not None:
                    cfn_neg(cs, cstate.mv, cstate.mx)
            if level != active_level:
                # inactive edge: fresh stimulus for the next cycle
                reset_machine.next_cycle(self, gstate, cstate)
                self._apply_data(rng, gstate, cstate)
            gcomb(gs, gstate.mv, gstate.mx)
            ccomb(cs, cstate.mv, cstate.mx)

            skip = False
            ok = True
            for gi, ci, dyn in outs:
                if gs[gi + 1] & dyn:
                    skip = True
                    break
                if cs[ci] != gs[gi] or cs[ci + 1] != gs[gi + 1]:
                    ok = False
            if skip:
                counters.undefined_skips += 1
            else:
                counters.assessments += 1
                if not ok:
                    counters.mismatches += 1
                    if counters.first_mismatch is None:
                        counters.first_mismatch = self._trace(
                            stage_idx, seq_idx, tick, gstate, cstate
                        )
                    if early_exit:
                        return False
        return True

    def _trace(self, stage_idx, seq_idx, tick, gstate, cstate) -> dict:
        g, c = self.golden, self.candidate
        stim = {}
        for p in self.data_inputs:
            v, x = g.value_of(gstate, p.name)
            stim[p.name] = fmt_bits(v, x, p.width)
        for r in self.plan.resets:
            v, x = g.value_of(gstate, r.signal)
            stim[r.signal] = fmt_bits(v, x, 1)
        return {
            "stage": self.plan.stages[stage_idx].label(),
            "sequence": seq_idx,
            "toggle": tick,
            "stimulus": stim,
            "golden_outputs": {
                g.signals[s].name: g.format_value(gstate, g.signals[s].name)
                for s in g.output_slots
            },
            "candidate_outputs": {
                c.signals[s].name: c.format_value(cstate, c.signals[s].name)
                for s in c.output_slots
            },
        }


class _ResetMachine:
    """Per-sequence reset scheduling.

    deterministic_reset: the exercised reset is active for the first
    RESET_HOLD_CYCLES full cycles, inactive afterwards; other resets stay
    pinned at their inactive levels. random_reset: at most one reset is
    asserted at a time; each cycle the machine flips state with probability
    RANDOM_RESET_FLIP_P (deasserting the active reset or asserting one chosen
    uniformly).
    """

    def __init__(self, stage: StimulusStage, resets: list[ResetSpec], rng):
        self.stage = stage
        self.resets = resets
        self.rng = rng
        self.cycle = 0
        self.active: str | None = None
        if stage.kind == "random_reset":
            self.candidates = (
                [stage.exercised] if stage.exercised
                else [r.signal for r in resets]
            )
        else:
            self.candidates = []

    def _level(self, name: str, asserted: bool) -> int:
        spec = next(r for r in self.resets if r.signal == name)
        return spec.active_level if asserted else spec.inactive_level

    def apply_initial(self, driver: _PairDriver, gstate, cstate):
        stage = self.stage
        if stage.kind == "deterministic_reset":
            for name, level in stage.inactive_levels:
                driver._apply_reset(name, level, gstate, cstate)
            if stage.exercised:
                driver._apply_reset(stage.exercised, self._level(stage.exercised, True),
                                    gstate, cstate)
        elif stage.kind == "random_reset":
            if self.candidates and self.rng.random() < 0.5:
                self.active = self.candidates[
                    self.rng.randrange(len(self.candidates))
                    if len(self.candidates) > 1 else 0
                ]
            for r in self.resets:
                driver._apply_reset(r.signal, self._level(r.signal, r.signal == self.active),
                                    gstate, cstate)

    def next_cycle(self, driver: _PairDriver, gstate, cstate):
        self.cycle += 1
        stage = self.stage
        if stage.kind == "deterministic_reset":
            if stage.exercised and self.cycle == RESET_HOLD_CYCLES:
                driver._apply_reset(stage.exercised,
                                    self._level(stage.exercised, False), gstate, cstate)
        elif stage.kind == "random_reset" and self.candidates:
            if self.rng.random() < RANDOM_RESET_FLIP_P:
                if self.active is not None:
                    driver._apply_reset(self.active, self._level(self.active, False),
                                        gstate, cstate)
                    self.active = None
                else:
                    pick = self.candidates[
                        self.rng.randrange(len(self.candidates))
                        if len(self.candidates) > 1 else 0
                    ]
                    driver._apply_reset(pick, self._level(pick, True), gstate, cstate)
                    self.active = pick


class _Counters:
    __slots__ = ("assessments", "mismatches", "undefined_skips", "first_mismatch")

    def __init__(self):
        self.assessments = 0
        self.mismatches = 0
        self.undefined_skips = 0
        self.first_mismatch = None


def run_equivalence(
    golden: ExecutableModel,
    candidate: ExecutableModel,
    plan: TestPlan,
    iface: ModuleInterface | None = None,
) -> EquivalenceReport:
    """Lock-step comparison under the plan's stimulus schedule.

    Both models must already have matching interfaces; candidate clock and
    reset roles are matched to the golden analysis by port name.
    """
    started = time.monotonic()
    if iface is None:
        from verikit.analysis import extract_interface

        iface = _iface_from_model(golden)
    counters = _Counters()
    driver = _PairDriver(golden, candidate, plan, iface)
    running = True
    for stage_idx in range(len(plan.stages)):
        if not running:
            break
        for seq_idx in range(plan.m):
            if plan.circuit_kind == "combinational":
                running = driver.run_comb_sequence(
                    stage_idx, seq_idx, counters, plan.early_exit
                )
            else:
                running = driver.run_seq_sequence(
                    stage_idx, seq_idx, counters, plan.early_exit
                )
            if not running:
                break
    epsilon = (
        counters.mismatches / counters.assessments * 100.0
        if counters.assessments else 0.0
    )
    verdict = "equivalent" if counters.mismatches == 0 else "non_equivalent"
    return EquivalenceReport(
        verdict=verdict,
        epsilon=epsilon,
        assessments=counters.assessments,
        mismatches=counters.mismatches,
        undefined_skips=counters.undefined_skips,
        first_mismatch=counters.first_mismatch,
        notes=list(plan.notes),
        m=plan.m,
        n=plan.n,
        seed=plan.seed,
        stages=[s.label() for s in plan.stages],
        wall_time=time.monotonic() - started,
    )


def _iface_from_model(model: ExecutableModel) -> ModuleInterface:
    from verikit.analysis import ModuleInterface, PortInfo

    ports = []
    for sig in model.signals:
        if sig.is_input:
            ports.append(PortInfo(name=sig.name, direction="input",
                                  msb=sig.msb, lsb=sig.lsb))
        elif sig.is_output:
            ports.append(PortInfo(name=sig.name, direction="output",
                                  msb=sig.msb, lsb=sig.lsb))
    return ModuleInterface(name=model.name, ports=tuple(ports))


# ---------------------------------------------------------------------------
# Source-level entry point
# ---------------------------------------------------------------------------


def check_sources(
    golden_source: str,
    candidate_source: str,
    config: CheckConfig | None = None,
) -> EquivalenceReport:
    """Parse, analyze, plan, and compare two designs end to end.

    Never raises for design problems: anything the toolkit cannot verify
    comes back as verdict "unsupported" (or "interface_mismatch") with a
    machine-readable detail string.
    """
    started = time.monotonic()
    config = config or CheckConfig()

    def refusal(verdict, detail, plan=None):
        return EquivalenceReport(
            verdict=verdict, epsilon=0.0, assessments=0, mismatches=0,
            undefined_skips=0, detail=detail,
            m=config.m, n=config.n, seed=config.seed,
            stages=[s.label() for s in plan.stages] if plan else [],
            wall_time=time.monotonic() - started,
        )

    try:
        gast = parse_source(golden_source, origin="golden")
        ganalysis = analyze(gast, top=config.top_hint)
        gmodel = elaborate(gast, top=config.top_hint)
    except (ParseError, AnalysisError, ElaborationError, ValueError) as e:
        return refusal("unsupported", f"golden: {e}")
    except RecursionError:
        return refusal("unsupported", "golden: expression nesting too deep")

    try:
        from verikit.front.parser import resolve_top

        cast = parse_source(candidate_source, origin="candidate")
        try:
            ctop = resolve_top(cast, None)
        except ValueError:
            ctop = resolve_top(cast, ganalysis.interface.name)
        cmodel = elaborate(cast, top=ctop.name)
        ciface = _iface_from_model(cmodel)
    except (ParseError, ElaborationError, ValueError) as e:
        return refusal("unsupported", f"candidate: {e}")
    except RecursionError:
        return refusal("unsupported", "candidate: expression nesting too deep")

    mismatch = compare_interfaces(ganalysis.interface, ciface)
    if mismatch is not None:
        return refusal("interface_mismatch", str(mismatch))

    plan = plan_tests(ganalysis.interface, ganalysis.clocks, ganalysis.resets,
                      ganalysis.circuit_class, config)
    report = run_equivalence(gmodel, cmodel, plan, iface=ganalysis.interface)
    report.notes = list(ganalysis.warnings) + report.notes
    report.wall_time = time.monotonic() - started
    return report
