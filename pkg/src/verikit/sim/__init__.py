"""Executable-model simulation core with four-state (0/1/X/Z) logic."""

from verikit.sim.model import (
    ElaborationError,
    ExecutableModel,
    SignalState,
    StimulusVector,
    advance,
    elaborate,
    reset_state,
)

__all__ = [
    "ElaborationError",
    "ExecutableModel",
    "SignalState",
    "StimulusVector",
    "advance",
    "elaborate",
    "reset_state",
]
