"""Equivalence harness: pipelined executive versus the sequential reference.

``ScalarExecutive`` re-implements the run-level policy (input-recurrence
priority, per-group spike vectors, FIFO capacity, per-event output log)
directly on top of the sequential reference interpreter, with no shared
machinery beyond the per-neuron rules.  Running both executives over the
same stream must leave bit-identical neuron states and weights and the
same spike log; the first divergence, if any, is reported by location.

Random networks are drawn deliberately sub-critical (sparse weights,
high thresholds) so recurrent activity stays bounded; a shared
``max_events`` cap truncates both sides identically as a backstop.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import LifParams, NeuronState, ScalarNetwork
from .errors import SchedulerOverflowError
from .events import AerEvent, LeakEvent, NeuronEvent, SynapseEvent
from .io import NetworkConfig, build_simulator
from .memory import MemType
from .pipeline import Simulator, TimingMode


@dataclass
class ScalarRunResult:
    output_spikes: List[Tuple[int, int]] = field(default_factory=list)
    total_sops: int = 0
    total_events: int = 0
    truncated: bool = False


class ScalarExecutive:
    """Run-level driver around :class:`ScalarNetwork`.

    Mirrors the executive's arbitration contract: decoded recurrent
    spikes are served before pending external events, one spike per
    event, vectors decode in FIFO order and ascending within a vector,
    and the vector queue holds at most N/P entries.
    """

    def __init__(self, params: LifParams, neurons, weights) -> None:
        self.net = ScalarNetwork(params, neurons, weights)
        self.params = params
        self.capacity = params.n_groups
        self.queue: deque = deque()  # [offset, remaining_bits]

    def _push_event_spikes(self, spikes: Sequence[int]) -> None:
        p = self.params.parallelism
        vectors: dict = {}
        for neuron_id in spikes:
            group = neuron_id // p
            vectors.setdefault(group, 0)
            vectors[group] |= 1 << (neuron_id % p)
        for group in sorted(vectors):
            if len(self.queue) >= self.capacity:
                raise SchedulerOverflowError(
                    f"reference vector queue overflow (capacity {self.capacity})"
                )
            self.queue.append([group * p, vectors[group]])

    def _decode_one(self) -> int:
        offset, bits = self.queue[0]
        bit = (bits & -bits).bit_length() - 1
        bits &= bits - 1
        if bits:
            self.queue[0][1] = bits
        else:
            self.queue.popleft()
        return offset + bit

    def run(self, events: Sequence[AerEvent], max_events: Optional[int] = None) -> ScalarRunResult:
        pending = deque(events)
        result = ScalarRunResult()
        index = 0
        while True:
            if max_events is not None and index >= max_events:
                result.truncated = bool(pending) or bool(self.queue)
                break
            if self.queue:
                event: AerEvent = NeuronEvent(self._decode_one())
            elif pending:
                event = pending.popleft()
            else:
                break
            outcome = self.net.apply_event(event)
            result.total_sops += outcome.sop_count
            self._push_event_spikes(outcome.spikes)
            result.output_spikes.extend((s, index) for s in outcome.spikes)
            index += 1
        result.total_events = index
        return result


@dataclass
class EquivalenceReport:
    matched: bool
    detail: Optional[str] = None
    thor_fault: Optional[str] = None
    scalar_fault: Optional[str] = None
    events_executed: int = 0
    total_sops: int = 0


def _first_divergence(sim: Simulator, scalar: ScalarExecutive,
                      thor_spikes, scalar_spikes) -> Optional[str]:
    n = sim.params.n_neurons
    for i in range(n):
        a = sim.neuron_mem.peek(i).to_bytes()
        b = scalar.net.neurons[i].to_bytes()
        if a != b:
            byte = next(k for k in range(len(a)) if a[k] != b[k])
            return (
                f"neuron {i} byte {byte}: pipelined={a[byte]} reference={b[byte]}"
            )
    ref_weights = np.array(scalar.net.weights, dtype=np.uint8)
    if not np.array_equal(sim.synapse_mem.weights, ref_weights):
        pre, post = np.argwhere(sim.synapse_mem.weights != ref_weights)[0]
        return (
            f"weight[{pre}][{post}]: pipelined={sim.synapse_mem.weights[pre, post]} "
            f"reference={ref_weights[pre, post]}"
        )
    if sorted(thor_spikes) != sorted(scalar_spikes):
        pipelined = sorted(thor_spikes)
        reference = sorted(scalar_spikes)
        for k in range(max(len(pipelined), len(reference))):
            a = pipelined[k] if k < len(pipelined) else None
            b = reference[k] if k < len(reference) else None
            if a != b:
                return f"output spike #{k}: pipelined={a} reference={b}"
    return None


def run_equivalence(
    config: NetworkConfig,
    events: Sequence[AerEvent],
    max_events: Optional[int] = None,
    inject_fault: bool = False,
) -> EquivalenceReport:
    """Run both executives on one stream and diff the final state."""
    sim = build_simulator(config)
    params = LifParams(config.n, config.p, config.online_learning)
    scalar = ScalarExecutive(params, config.neurons, config.weights.tolist())

    thor_fault = scalar_fault = None
    thor_spikes: List[Tuple[int, int]] = []
    scalar_spikes: List[Tuple[int, int]] = []
    executed = 0
    sops = 0
    try:
        trace = sim.run(events, max_events=max_events)
        thor_spikes = trace.output_spikes
        executed = trace.total_events
        sops = trace.total_sops
    except SchedulerOverflowError as exc:
        thor_fault = str(exc)
    try:
        ref = scalar.run(events, max_events=max_events)
        scalar_spikes = ref.output_spikes
    except SchedulerOverflowError as exc:
        scalar_fault = str(exc)

    if (thor_fault is None) != (scalar_fault is None):
        return EquivalenceReport(
            matched=False,
            detail=f"fault mismatch: pipelined={thor_fault!r} reference={scalar_fault!r}",
            thor_fault=thor_fault,
            scalar_fault=scalar_fault,
        )

    if inject_fault and config.n > 0:
        flipped = sim.neuron_mem.state[0, 0] ^ 0x01
        sim.neuron_mem.state[0, 0] = flipped

    detail = _first_divergence(sim, scalar, thor_spikes, scalar_spikes)
    return EquivalenceReport(
        matched=detail is None,
        detail=detail,
        thor_fault=thor_fault,
        scalar_fault=scalar_fault,
        events_executed=executed,
        total_sops=sops,
    )


# -- random instance generation ------------------------------------------


def random_network(
    rng: random.Random,
    n: int,
    p: int,
    learning: bool,
    mem_type: MemType = MemType.SCM,
) -> NetworkConfig:
    """A sub-critical random array: sparse weights, high-ish thresholds."""
    density = min(1.0, 12.0 / n)
    weights = np.zeros((n, n), dtype=np.uint8)
    for pre in range(n):
        for post in range(n):
            if rng.random() < density:
                weights[pre, post] = rng.randint(1, 15)
    neurons = []
    for _ in range(n):
        lo = rng.randint(0, 5)
        hi = rng.randint(lo + 1, lo + 40)
        neurons.append(
            NeuronState(
                v_mem=rng.randint(0, 60),
                leak=rng.randint(0, 8),
                v_thresh=rng.randint(100, 250),
                ca_theta_mem=rng.randint(50, 200),
                ca_level=rng.randint(0, 10),
                ca_theta_lo=lo,
                ca_theta_hi=hi,
            )
        )
    # Smallest power-of-two bank size that divides 4N^2 and is a multiple
    # of the IO width; one row keeps every (N, P) point valid.
    s = 4 * n * n
    return NetworkConfig(
        n=n,
        p=p,
        s=s,
        mem_type=mem_type,
        online_learning=learning,
        mode=TimingMode.THOR,
        neurons=neurons,
        weights=weights,
    )


def random_events(rng: random.Random, n: int, count: int) -> List[AerEvent]:
    """Mixed stream: broadcasts, addressed synapses, and leaks."""
    events: List[AerEvent] = []
    for _ in range(count):
        roll = rng.random()
        if roll < 0.45:
            events.append(NeuronEvent(rng.randrange(n)))
        elif roll < 0.80:
            events.append(SynapseEvent(rng.randrange(n), rng.randrange(n)))
        else:
            events.append(LeakEvent())
    return events
