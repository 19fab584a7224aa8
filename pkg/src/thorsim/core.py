"""Bit-exact fixed-point neuron dynamics and the online weight-update rule.

Everything here operates on unsigned 8-bit state and 4-bit weights with
saturating arithmetic, mirroring the datapath of the modeled hardware:

* ``lif_integrate`` applies one synaptic operation (SOP): the weight is
  added to the membrane potential; crossing the threshold fires a spike
  and resets the potential to zero.
* ``lif_leak`` applies the per-neuron leak amount (floor at zero) and,
  when online learning is enabled, decays the calcium trace by one.
* ``calcium_update`` bumps the calcium trace when the neuron itself fires.
* ``sdsp_update`` is the spike-driven plasticity rule: on a pre-synaptic
  spike the weight steps up or down depending on the post-synaptic
  membrane potential, gated by a calcium window.

The functions are pure and operate on value types, so they double as the
sequential reference interpreter (:class:`ScalarNetwork`) that the
pipelined executive is required to match bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

from .events import AerEvent, LeakEvent, NeuronEvent, SynapseEvent

U8_MAX = 255
WEIGHT_MAX = 15
V_RESET = 0
STATE_BYTES = 7


def saturating_add(a: int, b: int) -> int:
    """8-bit unsigned saturating add."""
    s = a + b
    return s if s <= U8_MAX else U8_MAX


def _require_u8(name: str, value: int) -> None:
    if not isinstance(value, int) or not 0 <= value <= U8_MAX:
        raise ValueError(f"{name} must be an integer in [0, {U8_MAX}], got {value!r}")


def _require_weight(w: int) -> None:
    if not isinstance(w, int) or not 0 <= w <= WEIGHT_MAX:
        raise ValueError(f"weight must be an integer in [0, {WEIGHT_MAX}], got {w!r}")


@dataclass(frozen=True)
class NeuronState:
    """Per-neuron record, exactly 7 bytes when serialized.

    Byte layout (field order matches serialization order):

        0  v_mem         membrane potential            read/write
        1  leak          decrement per leak event      read-only
        2  v_thresh      firing threshold              read-only
        3  ca_theta_mem  plasticity membrane threshold read-only
        4  ca_level      calcium concentration         read/write
        5  ca_theta_lo   lower calcium bound           read-only
        6  ca_theta_hi   upper calcium bound           read-only

    Bytes 3-6 form the calcium block; it is only touched when online
    learning is enabled.  Only bytes 0 and 4 are ever modified by event
    processing; the remaining bytes are fixed at configuration time.
    """

    v_mem: int
    leak: int
    v_thresh: int
    ca_theta_mem: int
    ca_level: int
    ca_theta_lo: int
    ca_theta_hi: int

    def __post_init__(self) -> None:
        _require_u8("v_mem", self.v_mem)
        _require_u8("leak", self.leak)
        _require_u8("v_thresh", self.v_thresh)
        _require_u8("ca_theta_mem", self.ca_theta_mem)
        _require_u8("ca_level", self.ca_level)
        _require_u8("ca_theta_lo", self.ca_theta_lo)
        _require_u8("ca_theta_hi", self.ca_theta_hi)

    def to_bytes(self) -> bytes:
        return bytes(
            (
                self.v_mem,
                self.leak,
                self.v_thresh,
                self.ca_theta_mem,
                self.ca_level,
                self.ca_theta_lo,
                self.ca_theta_hi,
            )
        )

    @classmethod
    def from_bytes(cls, raw: bytes) -> "NeuronState":
        if len(raw) != STATE_BYTES:
            raise ValueError(f"neuron state is {STATE_BYTES} bytes, got {len(raw)}")
        return cls(*raw)

    def with_v_mem(self, v_mem: int) -> "NeuronState":
        return NeuronState(
            v_mem,
            self.leak,
            self.v_thresh,
            self.ca_theta_mem,
            self.ca_level,
            self.ca_theta_lo,
            self.ca_theta_hi,
        )

    def with_ca_level(self, ca_level: int) -> "NeuronState":
        return NeuronState(
            self.v_mem,
            self.leak,
            self.v_thresh,
            self.ca_theta_mem,
            ca_level,
            self.ca_theta_lo,
            self.ca_theta_hi,
        )


@dataclass(frozen=True)
class SopResult:
    """Outcome of one synaptic operation."""

    new_state: NeuronState
    spiked: bool


@dataclass(frozen=True)
class LifParams:
    """Array geometry: N neurons updated P at a time.

    Both counts must be powers of two with N >= 2P, so the two neuron
    banks each hold at least one P-wide entry.
    """

    n_neurons: int
    parallelism: int
    online_learning: bool = True

    def __post_init__(self) -> None:
        n, p = self.n_neurons, self.parallelism
        if n < 2 or n & (n - 1):
            raise ValueError(f"n_neurons must be a power of two >= 2, got {n}")
        if p < 1 or p & (p - 1):
            raise ValueError(f"parallelism must be a power of two >= 1, got {p}")
        if n < 2 * p:
            raise ValueError(f"n_neurons must be >= 2 * parallelism (got N={n}, P={p})")

    @property
    def n_groups(self) -> int:
        return self.n_neurons // self.parallelism


def lif_integrate(state: NeuronState, weight: int) -> SopResult:
    """Apply one SOP: saturating add, then threshold compare.

    A spike resets the membrane potential to zero.  The calcium trace is
    not touched here; the caller applies :func:`calcium_update` on a spike
    when learning is enabled.
    """
    _require_weight(weight)
    v = saturating_add(state.v_mem, weight)
    if v >= state.v_thresh:
        return SopResult(state.with_v_mem(V_RESET), True)
    return SopResult(state.with_v_mem(v), False)


def lif_leak(state: NeuronState, learning: bool) -> NeuronState:
    """Apply one leak event: v_mem drops by the leak amount, floored at 0.

    With learning enabled the calcium trace also decays by one (floored
    at 0); with learning disabled the calcium block is left untouched.
    """
    v = state.v_mem - state.leak
    if v < 0:
        v = 0
    if not learning:
        return state.with_v_mem(v) if v != state.v_mem else state
    ca = state.ca_level - 1
    if ca < 0:
        ca = 0
    return NeuronState(
        v,
        state.leak,
        state.v_thresh,
        state.ca_theta_mem,
        ca,
        state.ca_theta_lo,
        state.ca_theta_hi,
    )


def calcium_update(state: NeuronState, post_spiked: bool, learning: bool = True) -> NeuronState:
    """Bump the calcium trace by one (saturating) when the neuron fired."""
    if not learning:
        raise ValueError("calcium_update requires online learning to be enabled")
    if not post_spiked:
        return state
    return state.with_ca_level(saturating_add(state.ca_level, 1))


def sdsp_update(w: int, post: NeuronState) -> int:
    """Weight step on a pre-synaptic spike.

    Inside the calcium window [ca_theta_lo, ca_theta_hi) the weight is
    potentiated when the post-synaptic membrane potential is at or above
    ca_theta_mem and depressed when below; outside the window the weight
    is unchanged.  Steps are +/-1 and saturate at the 4-bit bounds.
    """
    _require_weight(w)
    if not post.ca_theta_lo <= post.ca_level < post.ca_theta_hi:
        return w
    if post.v_mem >= post.ca_theta_mem:
        return w + 1 if w < WEIGHT_MAX else WEIGHT_MAX
    return w - 1 if w > 0 else 0


@dataclass
class EventOutcome:
    """Spikes (ascending neuron id) and SOP count produced by one event."""

    spikes: List[int]
    sop_count: int


class ScalarNetwork:
    """Sequential reference interpreter over N neurons and N x N weights.

    Events are applied one neuron at a time, index 0..N-1, with no
    banking, pipelining or parallelism.  This is the ground truth for the
    pipelined executive: after any event sequence the two must hold
    bit-identical neuron states and weights and have emitted the same
    spikes.

    One instance is single-threaded; the per-neuron rules it builds on
    are pure functions.
    """

    def __init__(
        self,
        params: LifParams,
        neurons: Sequence[NeuronState],
        weights: Sequence[Sequence[int]],
    ) -> None:
        n = params.n_neurons
        if len(neurons) != n:
            raise ValueError(f"expected {n} neuron states, got {len(neurons)}")
        if len(weights) != n or any(len(row) != n for row in weights):
            raise ValueError(f"expected a {n}x{n} weight matrix")
        for row in weights:
            for w in row:
                _require_weight(int(w))
        self.params = params
        self.neurons: List[NeuronState] = list(neurons)
        self.weights: List[List[int]] = [[int(w) for w in row] for row in weights]

    def _apply_sop(self, pre: int, post: int) -> bool:
        """One synapse: plasticity from the pre-integration state, then the SOP."""
        learning = self.params.online_learning
        state = self.neurons[post]
        w = self.weights[pre][post]
        if learning:
            self.weights[pre][post] = sdsp_update(w, state)
        result = lif_integrate(state, w)
        new_state = result.new_state
        if learning and result.spiked:
            new_state = calcium_update(new_state, True)
        self.neurons[post] = new_state
        return result.spiked

    def apply_event(self, event: AerEvent) -> EventOutcome:
        """Apply one event's full semantics; returns ordered spikes and SOPs."""
        n = self.params.n_neurons
        if isinstance(event, NeuronEvent):
            if not 0 <= event.src_id < n:
                raise ValueError(f"src_id out of range: {event.src_id} (N={n})")
            spikes = [j for j in range(n) if self._apply_sop(event.src_id, j)]
            return EventOutcome(spikes, n)
        if isinstance(event, SynapseEvent):
            if not 0 <= event.pre_id < n or not 0 <= event.post_id < n:
                raise ValueError(
                    f"synapse ids out of range: ({event.pre_id}, {event.post_id}) (N={n})"
                )
            spiked = self._apply_sop(event.pre_id, event.post_id)
            return EventOutcome([event.post_id] if spiked else [], 1)
        if isinstance(event, LeakEvent):
            learning = self.params.online_learning
            self.neurons = [lif_leak(s, learning) for s in self.neurons]
            return EventOutcome([], 0)
        raise TypeError(f"unknown event kind: {event!r}")


def scalar_reference_step(network: ScalarNetwork, event: AerEvent) -> EventOutcome:
    """Functional entry point for one reference step (mutates ``network``)."""
    return network.apply_event(event)
