"""Cycle-accurate executive: controller, event pipeline, and run loop.

Neuron and leak events run through a P-wide, two-bank interleaved
pipeline.  Each P-group needs a read cycle and a write cycle, but because
consecutive groups live in alternating banks the write of group g
overlaps the read of group g+1, so one group completes per cycle after a
single fill cycle:

    cycle      0     1     2     3    ...   G
    read    g0/B0 g1/B1 g2/B0 g3/B1  ...   -
    write     -   g0/B0 g1/B1 g2/B0  ...  g(G-1)

    core cycles per neuron or leak event = N/P + 1          (G = N/P)

A synapse event touches a single neuron and costs one read plus one
write cycle.  Every event additionally pays a fixed controller/AER
overhead, charged on top of the core cycles.

The executive also supports a baseline timing mode modeling the
time-multiplexed single-neuron-update architecture it improves on: two
cycles per SOP (2N cycles per neuron event) with one synapse-memory word
access per 8 SOPs.  Baseline mode shares the exact event semantics (it
applies the sequential reference rules), only timing and access counts
differ.

The run loop arbitrates between the input scheduler and external events
(on-chip recurrence first), feeds emitted spike vectors to both
schedulers, turns internally decoded spikes into new neuron events, and
drains the output scheduler into the output spike log after every event.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import core
from .core import LifParams, NeuronState
from .errors import SimulationError
from .events import AerEvent, LeakEvent, NeuronEvent, SynapseEvent
from .memory import (
    B_CA,
    B_LEAK,
    B_THETA_HI,
    B_THETA_LO,
    B_THETA_MEM,
    B_THRESH,
    B_VMEM,
    AccessLedger,
    MemGeometry,
    NeuronMemory,
    SynapseMemory,
)
from .scheduler import SchedulerRole, SchedulerUnit, SpikeVector


class TimingMode(str, Enum):
    THOR = "thor"
    BASELINE = "baseline"


@dataclass(frozen=True)
class TimingConfig:
    mode: TimingMode = TimingMode.THOR
    event_overhead_cycles: int = 4
    f_clk: float = 400e6
    synapses_per_word_baseline: int = 8

    def __post_init__(self) -> None:
        if self.event_overhead_cycles < 0:
            raise ValueError("event_overhead_cycles must be >= 0")
        if self.f_clk <= 0:
            raise ValueError("f_clk must be positive")
        if self.synapses_per_word_baseline < 1:
            raise ValueError("synapses_per_word_baseline must be >= 1")


@dataclass
class EventResult:
    """Cycle, SOP and access accounting for one executed event."""

    kind: str
    core_cycles: int
    overhead_cycles: int
    sop_count: int
    spike_vectors: List[SpikeVector]
    ledger_delta: AccessLedger
    # Per-core-cycle (read_bank, write_bank) pairs; None when idle.
    bank_trace: List[Tuple[Optional[int], Optional[int]]] = field(default_factory=list)

    @property
    def total_cycles(self) -> int:
        return self.core_cycles + self.overhead_cycles

    @property
    def spikes_emitted(self) -> int:
        return sum(v.bits.bit_count() for v in self.spike_vectors)


@dataclass
class EventRow:
    index: int
    kind: str
    cycles: int
    sops: int
    spikes_emitted: int


@dataclass
class RunTrace:
    """Accumulated outcome of one run: cycles, SOPs, accesses, spikes."""

    n: int
    p: int
    mode: TimingMode
    learning: bool
    f_clk: float
    rows: List[EventRow] = field(default_factory=list)
    output_spikes: List[Tuple[int, int]] = field(default_factory=list)
    ledger: AccessLedger = field(default_factory=AccessLedger)
    total_cycles: int = 0
    total_sops: int = 0
    truncated: bool = False

    @property
    def total_events(self) -> int:
        return len(self.rows)

    @property
    def throughput_sops(self) -> float:
        """Sustained SOP rate over the whole run at the configured clock."""
        if self.total_cycles == 0:
            return 0.0
        return self.total_sops * self.f_clk / self.total_cycles


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


class Simulator:
    """One core instance: memories, schedulers, and the event executive.

    A simulator is a single logical thread of simulated time; independent
    instances may run concurrently but one instance is never shared.
    """

    def __init__(self, params: LifParams, geometry: MemGeometry, timing: TimingConfig):
        if geometry.n != params.n_neurons or geometry.p != params.parallelism:
            raise SimulationError(
                "geometry does not match array parameters: "
                f"(N={geometry.n}, P={geometry.p}) vs (N={params.n_neurons}, P={params.parallelism})"
            )
        self.params = params
        self.geometry = geometry
        self.timing = timing
        self.ledger = AccessLedger()
        self.neuron_mem = NeuronMemory(params, self.ledger.neuron_mem)
        self.synapse_mem = SynapseMemory(geometry, self.ledger.synapse_mem)
        self.input_scheduler = SchedulerUnit(
            params.n_neurons, params.parallelism, SchedulerRole.INPUT, self.ledger.input_sched
        )
        self.output_scheduler = SchedulerUnit(
            params.n_neurons, params.parallelism, SchedulerRole.OUTPUT, self.ledger.output_sched
        )

    # -- configuration-time loading ------------------------------------

    def init_neurons(self, states: Sequence[NeuronState]) -> None:
        if len(states) != self.params.n_neurons:
            raise ValueError(
                f"expected {self.params.n_neurons} neuron states, got {len(states)}"
            )
        for i, s in enumerate(states):
            self.neuron_mem.load(i, s)

    def init_weights(self, matrix: np.ndarray) -> None:
        self.synapse_mem.load(matrix)

    def neuron_states(self) -> List[NeuronState]:
        """Uncounted snapshot of all neuron states, id-ascending."""
        return [self.neuron_mem.peek(i) for i in range(self.params.n_neurons)]

    # -- event execution -------------------------------------------------

    @property
    def n_groups(self) -> int:
        return self.params.n_groups

    def _check_id(self, name: str, value: int) -> None:
        if not 0 <= value < self.params.n_neurons:
            raise ValueError(f"{name} out of range: {value} (N={self.params.n_neurons})")

    def _emit_spike_vectors(self, spiked: np.ndarray) -> List[SpikeVector]:
        """Group a spike mask into per-group vectors (ascending offsets)."""
        if not spiked.any():
            return []
        p = self.params.parallelism
        grouped = spiked.reshape(self.n_groups, p)
        vectors = []
        for g in np.flatnonzero(grouped.any(axis=1)):
            bits = 0
            for lane in np.flatnonzero(grouped[g]):
                bits |= 1 << int(lane)
            vectors.append(SpikeVector(bits, int(g) * p))
        return vectors

    def _push_vectors(self, vectors: List[SpikeVector]) -> None:
        for vec in vectors:
            self.input_scheduler.push(vec)
            self.output_scheduler.push(vec)

    def _pipeline_bank_trace(self) -> List[Tuple[Optional[int], Optional[int]]]:
        """Read/write bank occupancy per core cycle of a pipelined event."""
        groups = self.n_groups
        trace: List[Tuple[Optional[int], Optional[int]]] = []
        for c in range(groups + 1):
            read_bank = c % 2 if c < groups else None
            write_bank = (c - 1) % 2 if c >= 1 else None
            trace.append((read_bank, write_bank))
        return trace

    def _count_idle(
        self, total_cycles: int, neuron_busy: int, synapse_busy: int
    ) -> None:
        self.ledger.neuron_mem.idle_cycles += total_cycles - neuron_busy
        self.ledger.synapse_mem.idle_cycles += total_cycles - synapse_busy

    def execute(self, event: AerEvent) -> EventResult:
        if self.timing.mode is TimingMode.BASELINE:
            return self._execute_baseline(event)
        if isinstance(event, NeuronEvent):
            return self.execute_neuron_event(event.src_id)
        if isinstance(event, SynapseEvent):
            return self.execute_synapse_event(event.pre_id, event.post_id)
        if isinstance(event, LeakEvent):
            return self.execute_leak_event()
        raise TypeError(f"unknown event kind: {event!r}")

    def _require_thor(self) -> None:
        if self.timing.mode is not TimingMode.THOR:
            raise SimulationError("pipelined event execution requires thor timing mode")

    def execute_neuron_event(self, src_id: int) -> EventResult:
        """Broadcast one SOP from src_id into all N neurons, P per cycle.

        Groups are functionally independent within one event (each neuron
        is touched exactly once), so the datapath is evaluated array-wide
        while cycles and accesses follow the interleaved group schedule.
        """
        self._require_thor()
        self._check_id("src_id", src_id)
        before = self.ledger.copy()
        learning = self.params.online_learning
        groups = self.n_groups

        state = self.neuron_mem.state
        self.neuron_mem.count_group_reads(groups)
        w_row = self.synapse_mem.weights[src_id]
        self.synapse_mem.count_reads(groups)

        v = state[B_VMEM]
        v2 = v.astype(np.uint16) + w_row
        np.minimum(v2, core.U8_MAX, out=v2)
        spiked = v2 >= state[B_THRESH]
        v_new = np.where(spiked, core.V_RESET, v2).astype(np.uint8)

        if learning:
            ca = state[B_CA]
            window = (ca >= state[B_THETA_LO]) & (ca < state[B_THETA_HI])
            potentiate = window & (v >= state[B_THETA_MEM])
            depress = window & (v < state[B_THETA_MEM])
            w16 = w_row.astype(np.int16)
            w_new = np.where(
                potentiate,
                np.minimum(w16 + 1, core.WEIGHT_MAX),
                np.where(depress, np.maximum(w16 - 1, 0), w16),
            ).astype(np.uint8)
            ca_new = np.where(
                spiked, np.minimum(ca.astype(np.uint16) + 1, core.U8_MAX), ca
            ).astype(np.uint8)
            state[B_CA] = ca_new
            self.synapse_mem.weights[src_id] = w_new
            self.synapse_mem.count_writes(groups)
        state[B_VMEM] = v_new
        self.neuron_mem.count_group_writes(groups)

        vectors = self._emit_spike_vectors(spiked)
        self._push_vectors(vectors)

        core_cycles = groups + 1
        total = core_cycles + self.timing.event_overhead_cycles
        # Reads occupy cycles 0..G-1, writes 1..G: the neuron banks are
        # busy every core cycle; the synapse memory only on read cycles
        # plus, with learning, the overlapping write cycles.
        synapse_busy = core_cycles if learning else groups
        self._count_idle(total, core_cycles, synapse_busy)

        return EventResult(
            kind="NEUR",
            core_cycles=core_cycles,
            overhead_cycles=self.timing.event_overhead_cycles,
            sop_count=self.params.n_neurons,
            spike_vectors=vectors,
            ledger_delta=self.ledger.diff(before),
            bank_trace=self._pipeline_bank_trace(),
        )

    def execute_synapse_event(self, pre_id: int, post_id: int) -> EventResult:
        """Apply exactly one SOP to neuron post_id (one read + one write cycle)."""
        self._require_thor()
        self._check_id("pre_id", pre_id)
        self._check_id("post_id", post_id)
        before = self.ledger.copy()
        learning = self.params.online_learning
        p = self.params.parallelism
        group, lane = post_id // p, post_id % p

        self.neuron_mem.count_group_reads(1)
        self.synapse_mem.count_reads(1)
        post_state = self.neuron_mem.peek(post_id)
        w = self.synapse_mem.peek(pre_id, post_id)

        if learning:
            self.synapse_mem.weights[pre_id, post_id] = core.sdsp_update(w, post_state)
            self.synapse_mem.count_writes(1)
        result = core.lif_integrate(post_state, w)
        new_state = result.new_state
        if learning and result.spiked:
            new_state = core.calcium_update(new_state, True)
        self.neuron_mem.state[B_VMEM, post_id] = new_state.v_mem
        if learning:
            self.neuron_mem.state[B_CA, post_id] = new_state.ca_level
        self.neuron_mem.count_group_writes(1)

        vectors = []
        if result.spiked:
            vectors = [SpikeVector(1 << lane, group * p)]
            self._push_vectors(vectors)

        core_cycles = 2
        total = core_cycles + self.timing.event_overhead_cycles
        self._count_idle(total, 2, 2 if learning else 1)
        bank = group % 2
        return EventResult(
            kind="SYN",
            core_cycles=core_cycles,
            overhead_cycles=self.timing.event_overhead_cycles,
            sop_count=1,
            spike_vectors=vectors,
            ledger_delta=self.ledger.diff(before),
            bank_trace=[(bank, None), (None, bank)],
        )

    def execute_leak_event(self) -> EventResult:
        """Decay all N neurons through the same P-wide pipeline; no SOPs."""
        self._require_thor()
        before = self.ledger.copy()
        learning = self.params.online_learning
        groups = self.n_groups

        state = self.neuron_mem.state
        self.neuron_mem.count_group_reads(groups)
        v = state[B_VMEM]
        leak = state[B_LEAK]
        state[B_VMEM] = np.where(v > leak, v - leak, 0)
        if learning:
            ca = state[B_CA]
            state[B_CA] = np.where(ca > 0, ca - 1, 0)
        self.neuron_mem.count_group_writes(groups)

        core_cycles = groups + 1
        total = core_cycles + self.timing.event_overhead_cycles
        self._count_idle(total, core_cycles, 0)
        return EventResult(
            kind="LEAK",
            core_cycles=core_cycles,
            overhead_cycles=self.timing.event_overhead_cycles,
            sop_count=0,
            spike_vectors=[],
            ledger_delta=self.ledger.diff(before),
            bank_trace=self._pipeline_bank_trace(),
        )

    # -- baseline timing mode ---------------------------------------------

    def _baseline_sop(self, pre_id: int, post_id: int) -> bool:
        learning = self.params.online_learning
        post_state = self.neuron_mem.peek(post_id)
        w = self.synapse_mem.peek(pre_id, post_id)
        if learning:
            self.synapse_mem.weights[pre_id, post_id] = core.sdsp_update(w, post_state)
        result = core.lif_integrate(post_state, w)
        new_state = result.new_state
        if learning and result.spiked:
            new_state = core.calcium_update(new_state, True)
        self.neuron_mem.state[B_VMEM, post_id] = new_state.v_mem
        if learning:
            self.neuron_mem.state[B_CA, post_id] = new_state.ca_level
        return result.spiked

    def _execute_baseline(self, event: AerEvent) -> EventResult:
        """Sequential reference semantics with 2-cycles-per-SOP timing.

        The baseline machine reads and writes one full neuron state word
        per SOP and touches the synapse memory once per
        ``synapses_per_word_baseline`` SOPs.
        """
        n = self.params.n_neurons
        learning = self.params.online_learning
        spw = self.timing.synapses_per_word_baseline
        before = self.ledger.copy()

        if isinstance(event, NeuronEvent):
            self._check_id("src_id", event.src_id)
            spiked = np.zeros(n, dtype=bool)
            for j in range(n):
                spiked[j] = self._baseline_sop(event.src_id, j)
            self.ledger.neuron_mem.reads += n
            self.ledger.neuron_mem.writes += n
            word_accesses = _ceil_div(n, spw)
            self.ledger.synapse_mem.reads += word_accesses
            if learning:
                self.ledger.synapse_mem.writes += word_accesses
            vectors = self._emit_spike_vectors(spiked)
            self._push_vectors(vectors)
            core_cycles = 2 * n
            total = core_cycles + self.timing.event_overhead_cycles
            synapse_busy = word_accesses * (2 if learning else 1)
            self._count_idle(total, core_cycles, synapse_busy)
            return EventResult(
                kind="NEUR",
                core_cycles=core_cycles,
                overhead_cycles=self.timing.event_overhead_cycles,
                sop_count=n,
                spike_vectors=vectors,
                ledger_delta=self.ledger.diff(before),
            )

        if isinstance(event, SynapseEvent):
            self._check_id("pre_id", event.pre_id)
            self._check_id("post_id", event.post_id)
            fired = self._baseline_sop(event.pre_id, event.post_id)
            self.ledger.neuron_mem.reads += 1
            self.ledger.neuron_mem.writes += 1
            self.ledger.synapse_mem.reads += 1
            if learning:
                self.ledger.synapse_mem.writes += 1
            vectors = []
            if fired:
                p = self.params.parallelism
                vectors = [SpikeVector(1 << (event.post_id % p), (event.post_id // p) * p)]
                self._push_vectors(vectors)
            core_cycles = 2
            total = core_cycles + self.timing.event_overhead_cycles
            self._count_idle(total, 2, 2 if learning else 1)
            return EventResult(
                kind="SYN",
                core_cycles=core_cycles,
                overhead_cycles=self.timing.event_overhead_cycles,
                sop_count=1,
                spike_vectors=vectors,
                ledger_delta=self.ledger.diff(before),
            )

        if isinstance(event, LeakEvent):
            for j in range(n):
                self.neuron_mem.load(j, core.lif_leak(self.neuron_mem.peek(j), learning))
            self.ledger.neuron_mem.reads += n
            self.ledger.neuron_mem.writes += n
            core_cycles = 2 * n
            total = core_cycles + self.timing.event_overhead_cycles
            self._count_idle(total, core_cycles, 0)
            return EventResult(
                kind="LEAK",
                core_cycles=core_cycles,
                overhead_cycles=self.timing.event_overhead_cycles,
                sop_count=0,
                spike_vectors=[],
                ledger_delta=self.ledger.diff(before),
            )

        raise TypeError(f"unknown event kind: {event!r}")

    # -- run loop -----------------------------------------------------------

    def run(
        self, events: Iterable[AerEvent], max_events: Optional[int] = None
    ) -> RunTrace:
        """Execute an event stream to completion.

        Internally decoded spikes take priority over pending external
        events; spikes generated mid-event are queued, never processed
        within the same event.  The loop ends when external events are
        exhausted and the schedulers have drained.  ``max_events`` is a
        safety valve for runaway recurrent activity: when the executed
        event count reaches it the run stops and the trace is marked
        truncated.
        """
        pending = deque(events)
        ledger_start = self.ledger.copy()
        trace = RunTrace(
            n=self.params.n_neurons,
            p=self.params.parallelism,
            mode=self.timing.mode,
            learning=self.params.online_learning,
            f_clk=self.timing.f_clk,
        )
        index = 0
        while True:
            if max_events is not None and index >= max_events:
                trace.truncated = bool(pending) or not self.input_scheduler.is_empty
                break
            if not self.input_scheduler.is_empty:
                spike_id = self.input_scheduler.decode(trigger=True)
                event: AerEvent = NeuronEvent(spike_id)
            elif pending:
                event = pending.popleft()
            else:
                break
            result = self.execute(event)
            trace.rows.append(
                EventRow(
                    index=index,
                    kind=result.kind,
                    cycles=result.total_cycles,
                    sops=result.sop_count,
                    spikes_emitted=result.spikes_emitted,
                )
            )
            trace.total_cycles += result.total_cycles
            trace.total_sops += result.sop_count
            while True:
                out = self.output_scheduler.decode(trigger=True)
                if out is None:
                    break
                trace.output_spikes.append((out, index))
            index += 1
        trace.ledger = self.ledger.diff(ledger_start)
        return trace

    def baseline_run(
        self, events: Iterable[AerEvent], max_events: Optional[int] = None
    ) -> RunTrace:
        """Run in baseline timing mode (requires a baseline-configured core)."""
        if self.timing.mode is not TimingMode.BASELINE:
            raise SimulationError("baseline_run requires baseline timing mode")
        return self.run(events, max_events=max_events)
