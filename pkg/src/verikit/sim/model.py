"""Executable model: elaboration entry point plus the cycle-level API.

An ExecutableModel is immutable once built and safe to share across
workers; every simulation run owns its own SignalState.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from verikit.front.nodes import Ast, ModuleDecl
from verikit.sim import codegen
from verikit.sim.elaborate import (
    DEFAULT_MAX_WIDTH,
    ElabResult,
    ElaborationError,
    Memory,
    Signal,
)
from verikit.sim.fourstate import fmt_bits

__all__ = [
    "ElaborationError",
    "ExecutableModel",
    "SignalState",
    "StimulusVector",
    "advance",
    "elaborate",
    "reset_state",
]

StimulusVector = Mapping[str, int]


class SignalState:
    """Mutable simulation state: interleaved (value, xmask) per slot plus
    per-memory word arrays."""

    __slots__ = ("s", "mv", "mx")

    def __init__(self, s: list[int], mv: list[list[int]], mx: list[list[int]]):
        self.s = s
        self.mv = mv
        self.mx = mx

    def copy(self) -> "SignalState":
        return SignalState(list(self.s), [list(w) for w in self.mv],
                           [list(w) for w in self.mx])


@dataclass
class ExecutableModel:
    name: str
    signals: list[Signal]
    by_name: dict[str, Signal]
    memories: list[Memory]
    input_slots: list[int]
    output_slots: list[int]
    comb_fn: object
    event_fns: dict[tuple[int, str], object]
    async_slots: frozenset[int]
    n_assignments: int
    source_ir: ElabResult = field(repr=False)

    # -- state ----------------------------------------------------------------

    def new_state(self) -> SignalState:
        s: list[int] = []
        for sig in self.signals:
            s.append(0)
            s.append(sig.mask)
        mv = [[0] * m.depth for m in self.memories]
        mx = [[(1 << m.width) - 1] * m.depth for m in self.memories]
        return SignalState(s, mv, mx)

    def settle(self, state: SignalState):
        self.comb_fn(state.s, state.mv, state.mx)

    # -- introspection ----------------------------------------------------------

    def value_of(self, state: SignalState, name: str) -> tuple[int, int]:
        sig = self.by_name[name]
        return state.s[2 * sig.slot], state.s[2 * sig.slot + 1]

    def format_value(self, state: SignalState, name: str) -> str:
        sig = self.by_name[name]
        v, x = state.s[2 * sig.slot], state.s[2 * sig.slot + 1]
        return fmt_bits(v, x & ~sig.static_z, sig.width, zmask=x & sig.static_z)

    def outputs(self, state: SignalState) -> dict[str, tuple[int, int]]:
        s = state.s
        return {
            self.signals[slot].name: (s[2 * slot], s[2 * slot + 1])
            for slot in self.output_slots
        }

    def set_input(self, state: SignalState, slot: int, value: int):
        """Drive one input and fire any async processes its edges trigger."""
        s = state.s
        i = 2 * slot
        old_v, old_x = s[i], s[i + 1]
        sig = self.signals[slot]
        value &= sig.mask
        s[i], s[i + 1] = value, 0
        if slot in self.async_slots:
            if sig.width == 1 and (old_v != value or old_x):
                edge = "pos" if value else "neg"
                fn = self.event_fns.get((slot, edge))
                if fn is not None:
                    fn(s, state.mv, state.mx)

    def toggle_clock(self, state: SignalState, slot: int, level: int):
        """One clock half-period: set the level, fire matching processes."""
        s = state.s
        i = 2 * slot
        old_v, old_x = s[i], s[i + 1]
        s[i], s[i + 1] = level, 0
        if old_v != level or old_x:
            fn = self.event_fns.get((slot, "pos" if level else "neg"))
            if fn is not None:
                fn(s, state.mv, state.mx)

    def resolve_input_slots(self, stim: StimulusVector) -> list[tuple[int, int]]:
        pairs = []
        for name, value in stim.items():
            sig = self.by_name.get(name)
            if sig is None or not sig.is_input:
                raise KeyError(f"'{name}' is not an input of {self.name}")
            pairs.append((sig.slot, value))
        return pairs


def elaborate(
    design: Ast | ModuleDecl,
    top: str | None = None,
    max_width: int = DEFAULT_MAX_WIDTH,
) -> ExecutableModel:
    """Build an executable model from a parsed design.

    Registers start all-X; parameters are already folded; combinational
    loops, width overflows, and multi-driver nets are rejected here.
    """
    from verikit.sim.elaborate import build_design

    res = build_design(design, top=top, max_width=max_width)
    comb_fn, _ = codegen.compile_comb(res)

    by_event: dict[tuple[int, str], list] = {}
    for blk in res.seq_blocks:
        for trig in blk.triggers:
            by_event.setdefault(trig, []).append(blk)
    event_fns = {}
    for i, (trig, blocks) in enumerate(sorted(by_event.items())):
        fn, _ = codegen.compile_event(res, blocks, f"event_{i}")
        event_fns[trig] = fn

    async_slots = frozenset(slot for slot, _ in by_event)

    return ExecutableModel(
        name=res.name,
        signals=res.signals,
        by_name=res.by_name,
        memories=res.memories,
        input_slots=res.input_slots,
        output_slots=res.output_slots,
        comb_fn=comb_fn,
        event_fns=event_fns,
        async_slots=async_slots,
        n_assignments=len(res.comb_plan) + sum(len(b.updates) for b in res.seq_blocks),
        source_ir=res,
    )


def reset_state(model: ExecutableModel) -> SignalState:
    """Fresh state: registers and memories all-X, undriven nets Z."""
    return model.new_state()


def advance(
    model: ExecutableModel,
    state: SignalState,
    stim: StimulusVector,
    edge: tuple[str, str] | None = None,
) -> tuple[SignalState, dict[str, tuple[int, int]]]:
    """Apply a stimulus vector, optionally fire one clock edge, settle, and
    snapshot the outputs.

    ``edge`` is (clock_name, "pos"|"neg"). The state object is updated in
    place and returned for convenience.
    """
    for slot, value in model.resolve_input_slots(stim):
        model.set_input(state, slot, value)
    model.settle(state)
    if edge is not None:
        clock_name, which = edge
        sig = model.by_name.get(clock_name)
        if sig is None or not sig.is_input:
            raise KeyError(f"'{clock_name}' is not an input of {model.name}")
        model.toggle_clock(state, sig.slot, 1 if which == "pos" else 0)
        model.settle(state)
    return state, model.outputs(state)
