"""Spike schedulers: FIFO of P-bit spike vectors with trigger-gated decode.

Two identical, fully independent units exist in the machine: the input
scheduler feeds decoded spikes back to the controller as new neuron
events, the output scheduler feeds the off-chip event interface.  Each
unit owns a FIFO of N/P spike vectors (enough to absorb every group of
one neuron event) and a status register mirroring the undecoded bits of
the head vector.

The controller-facing behavior is a small FSM:

    IDLE       empty FIFO, nothing to decode
    HOLD_HEAD  head vector loaded into the status register, waiting
    DECODE     one spike id was emitted this cycle

Decoding is explicitly triggered, emits the lowest set status bit first
(ascending neuron id), and pops the head entry once its last bit is
consumed.  All-zero vectors are never enqueued.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Deque, Optional

from .errors import SchedulerOverflowError
from .memory import StructureCounters


@dataclass(frozen=True)
class SpikeVector:
    """P spike flags plus the group's base neuron address."""

    bits: int
    offset: int


class SchedulerRole(str, Enum):
    INPUT = "input"
    OUTPUT = "output"


class FsmState(Enum):
    IDLE = "idle"
    HOLD_HEAD = "hold_head"
    DECODE = "decode"


@dataclass(frozen=True)
class StepOutput:
    """Observable outputs of one FSM cycle."""

    spike_id: Optional[int] = None
    fifo_popped: bool = False


class SchedulerUnit:
    """One scheduler: FIFO of spike vectors plus head-status register."""

    def __init__(
        self,
        n_neurons: int,
        parallelism: int,
        role: SchedulerRole = SchedulerRole.INPUT,
        counters: StructureCounters | None = None,
    ) -> None:
        self.n_neurons = n_neurons
        self.parallelism = parallelism
        self.role = SchedulerRole(role)
        self.capacity = n_neurons // parallelism
        self.counters = counters if counters is not None else StructureCounters()
        self.fifo: Deque[SpikeVector] = deque()
        self.status = 0
        self.fsm_state = FsmState.IDLE

    def __len__(self) -> int:
        return len(self.fifo)

    @property
    def is_empty(self) -> bool:
        return not self.fifo

    def _check_vector(self, vec: SpikeVector) -> None:
        if vec.bits < 0 or vec.bits >> self.parallelism:
            raise ValueError(
                f"spike vector does not fit {self.parallelism} bits: {vec.bits:#x}"
            )
        if vec.offset % self.parallelism or not 0 <= vec.offset < self.n_neurons:
            raise ValueError(
                f"offset must be a multiple of P below N, got {vec.offset}"
            )

    def push(self, vec: SpikeVector) -> None:
        """Enqueue a vector; all-zero vectors are discarded silently."""
        self._check_vector(vec)
        if vec.bits == 0:
            return
        if len(self.fifo) >= self.capacity:
            raise SchedulerOverflowError(
                f"{self.role.value} scheduler FIFO overflow (capacity {self.capacity})"
            )
        was_empty = not self.fifo
        self.fifo.append(vec)
        self.counters.writes += 1
        if was_empty:
            self.status = vec.bits
            self.fsm_state = FsmState.HOLD_HEAD

    def decode(self, trigger: bool) -> Optional[int]:
        """Emit the next spike id, or None without a trigger or work.

        Clears the lowest set status bit; when the status register runs
        out the head vector is popped and the status reloads from the
        next head, if any.
        """
        if not trigger or not self.fifo:
            return None
        bit = (self.status & -self.status).bit_length() - 1
        spike_id = self.fifo[0].offset + bit
        self.status &= self.status - 1
        self.counters.reads += 1
        self.fsm_state = FsmState.DECODE
        if self.status == 0:
            self.fifo.popleft()
            if self.fifo:
                self.status = self.fifo[0].bits
        return spike_id

    def step(self, new_vector: Optional[SpikeVector] = None, trigger: bool = False) -> StepOutput:
        """One FSM cycle: decode against the current head, then accept a push.

        A vector arriving into an empty unit is therefore visible to the
        decoder only from the next cycle on.
        """
        depth_before = len(self.fifo)
        spike_id = self.decode(trigger)
        popped = len(self.fifo) < depth_before
        if new_vector is not None:
            self.push(new_vector)
        if spike_id is not None:
            self.fsm_state = FsmState.DECODE
        elif self.fifo:
            self.fsm_state = FsmState.HOLD_HEAD
        else:
            self.fsm_state = FsmState.IDLE
        return StepOutput(spike_id=spike_id, fifo_popped=popped)
