"""Thin client for the verikit reward service."""

from verikit_client.client import (
    ClientConfig,
    EquivalenceResult,
    ProtocolError,
    RewardClient,
    RewardResult,
    TransportError,
)

__version__ = "0.1.0"

__all__ = [
    "ClientConfig",
    "EquivalenceResult",
    "ProtocolError",
    "RewardClient",
    "RewardResult",
    "TransportError",
]
