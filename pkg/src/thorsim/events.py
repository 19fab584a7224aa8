"""Address-event types shared by the executives and the file loaders.

Events arrive over an address-event interface: a neuron event broadcasts a
source neuron to the whole array, a synapse event addresses a single
(pre, post) synapse, and a leak event decays every neuron once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class NeuronEvent:
    """Broadcast event: one SOP from ``src_id`` into every neuron."""

    src_id: int


@dataclass(frozen=True)
class SynapseEvent:
    """Addressed event: exactly one SOP onto neuron ``post_id``."""

    pre_id: int
    post_id: int


@dataclass(frozen=True)
class LeakEvent:
    """Decay event: every neuron loses its per-neuron leak amount."""


AerEvent = Union[NeuronEvent, SynapseEvent, LeakEvent]


def event_kind(event: AerEvent) -> str:
    """Short tag used in traces and event files (NEUR / SYN / LEAK)."""
    if isinstance(event, NeuronEvent):
        return "NEUR"
    if isinstance(event, SynapseEvent):
        return "SYN"
    if isinstance(event, LeakEvent):
        return "LEAK"
    raise TypeError(f"unknown event kind: {event!r}")
