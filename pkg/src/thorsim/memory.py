"""Dual-bank neuron memory and generalized synapse-memory geometry.

Neuron state is spread over two banks, each built from 7 byte-wide
sub-banks (one per byte of the 7-byte record).  A sub-bank word is P
bytes and each bank holds N/2P entries; neuron ids map to banks by the
parity of their P-wide group, so consecutive groups alternate banks:

    group g = neuron_id // P   ->   bank g % 2, entry g // 2, lane id % P

The synapse memory holds N*N 4-bit weights (4N^2 bits total) addressed as
4P-bit words, one word per (pre neuron, post group).  A configured bank
size of S bits gives 4N^2/S bank rows; SRAM rows are additionally split
into 32-bit wide physical banks (4P/32 of them), SCM rows are a single
bank of free word width.

Every counted access lands in an :class:`AccessLedger`, which the energy
layer later prices.  Write gating during inference is modeled here: only
the membrane-potential byte (and the calcium byte, when learning) is
writable; writes to the other sub-banks are dropped silently and counted
as gated.

Memory instances are single-writer; concurrent read-only access is fine
and instances may move between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Sequence

import numpy as np

from .core import STATE_BYTES, WEIGHT_MAX, LifParams, NeuronState
from .errors import ConfigError

# Byte indices inside the 7-byte record.
B_VMEM = 0
B_LEAK = 1
B_THRESH = 2
B_THETA_MEM = 3
B_CA = 4
B_THETA_LO = 5
B_THETA_HI = 6

CALCIUM_BYTES = (B_THETA_MEM, B_CA, B_THETA_LO, B_THETA_HI)
SRAM_MACRO_BITS = 32


class MemType(str, Enum):
    SRAM = "sram"
    SCM = "scm"


class Phase(str, Enum):
    INIT = "init"
    INFERENCE = "inference"


@dataclass(frozen=True)
class MemGeometry:
    """Derived synapse-memory layout for a given (N, P, S, type)."""

    n: int
    p: int
    s: int
    mem_type: MemType
    bank_rows: int
    banks_per_row: int
    io_width_bits: int

    @property
    def total_bits(self) -> int:
        return 4 * self.n * self.n


def mem_geometry(n: int, p: int, s: int, mem_type: MemType | str) -> MemGeometry:
    """Validate divisibility constraints and derive the memory layout."""
    mem_type = MemType(mem_type)
    # Reuse the array-geometry checks (powers of two, N >= 2P).
    LifParams(n, p)
    total_bits = 4 * n * n
    io_width = 4 * p
    if s <= 0 or total_bits % s != 0:
        raise ConfigError(
            f"bank size S must divide 4*N^2 ({total_bits}), got S={s}"
        )
    if s % io_width != 0:
        raise ConfigError(
            f"bank size S must be a multiple of the IO width 4*P ({io_width}), got S={s}"
        )
    if mem_type is MemType.SRAM:
        if io_width % SRAM_MACRO_BITS != 0:
            raise ConfigError(
                f"SRAM rows are partitioned into {SRAM_MACRO_BITS}-bit banks, so 4*P "
                f"must be a multiple of {SRAM_MACRO_BITS} (got 4*P={io_width})"
            )
        banks_per_row = io_width // SRAM_MACRO_BITS
    else:
        banks_per_row = 1
    return MemGeometry(
        n=n,
        p=p,
        s=s,
        mem_type=mem_type,
        bank_rows=total_bits // s,
        banks_per_row=banks_per_row,
        io_width_bits=io_width,
    )


@dataclass
class StructureCounters:
    """Per-structure access tally; all counters only ever grow."""

    reads: int = 0
    writes: int = 0
    idle_cycles: int = 0
    gated_cycles: int = 0

    def copy(self) -> "StructureCounters":
        return replace(self)

    def diff(self, earlier: "StructureCounters") -> "StructureCounters":
        return StructureCounters(
            self.reads - earlier.reads,
            self.writes - earlier.writes,
            self.idle_cycles - earlier.idle_cycles,
            self.gated_cycles - earlier.gated_cycles,
        )

    def add(self, other: "StructureCounters") -> None:
        self.reads += other.reads
        self.writes += other.writes
        self.idle_cycles += other.idle_cycles
        self.gated_cycles += other.gated_cycles


@dataclass
class AccessLedger:
    """Access counts for the four tracked structures.

    Scheduler pushes count as writes and decodes as reads.
    """

    neuron_mem: StructureCounters = field(default_factory=StructureCounters)
    synapse_mem: StructureCounters = field(default_factory=StructureCounters)
    input_sched: StructureCounters = field(default_factory=StructureCounters)
    output_sched: StructureCounters = field(default_factory=StructureCounters)

    def copy(self) -> "AccessLedger":
        return AccessLedger(
            self.neuron_mem.copy(),
            self.synapse_mem.copy(),
            self.input_sched.copy(),
            self.output_sched.copy(),
        )

    def diff(self, earlier: "AccessLedger") -> "AccessLedger":
        return AccessLedger(
            self.neuron_mem.diff(earlier.neuron_mem),
            self.synapse_mem.diff(earlier.synapse_mem),
            self.input_sched.diff(earlier.input_sched),
            self.output_sched.diff(earlier.output_sched),
        )

    def add(self, other: "AccessLedger") -> None:
        self.neuron_mem.add(other.neuron_mem)
        self.synapse_mem.add(other.synapse_mem)
        self.input_sched.add(other.input_sched)
        self.output_sched.add(other.output_sched)

    def as_dict(self) -> dict:
        return {
            name: vars(getattr(self, name)).copy()
            for name in ("neuron_mem", "synapse_mem", "input_sched", "output_sched")
        }


def neuron_slot(neuron_id: int, p: int) -> tuple[int, int, int]:
    """Map a neuron id to its (bank, entry, lane) triple."""
    group = neuron_id // p
    return group % 2, group // 2, neuron_id % p


def group_of(bank_id: int, entry_addr: int) -> int:
    return 2 * entry_addr + bank_id


class NeuronMemory:
    """Two banks of 7 byte-sub-banks, P bytes per word, N/2P entries each.

    Internally the state lives in one (7, N) array in neuron-id order;
    group g occupies the contiguous lane slice [g*P, (g+1)*P), so bank and
    entry addressing is a pure index mapping.  Reads count 3 sub-banks
    with learning disabled (the calcium sub-banks stay dark) and all 7
    with learning enabled; inference writes land only in the writable
    bytes, the rest are dropped and counted as gated.
    """

    def __init__(self, params: LifParams, counters: StructureCounters | None = None):
        self.params = params
        self.counters = counters if counters is not None else StructureCounters()
        self.state = np.zeros((STATE_BYTES, params.n_neurons), dtype=np.uint8)

    @property
    def n_entries(self) -> int:
        return self.params.n_neurons // (2 * self.params.parallelism)

    @property
    def read_subbanks(self) -> int:
        return 7 if self.params.online_learning else 3

    @property
    def write_subbanks(self) -> int:
        return 2 if self.params.online_learning else 1

    def _check_addr(self, bank_id: int, entry_addr: int) -> int:
        if bank_id not in (0, 1):
            raise ValueError(f"bank_id must be 0 or 1, got {bank_id}")
        if not 0 <= entry_addr < self.n_entries:
            raise ValueError(
                f"entry_addr out of range: {entry_addr} (bank holds {self.n_entries} entries)"
            )
        return group_of(bank_id, entry_addr)

    def count_group_reads(self, n_groups: int) -> None:
        self.counters.reads += n_groups * self.read_subbanks

    def count_group_writes(self, n_groups: int) -> None:
        self.counters.writes += n_groups * self.write_subbanks
        self.counters.gated_cycles += n_groups * (STATE_BYTES - self.write_subbanks)

    def read_block(self, bank_id: int, entry_addr: int) -> np.ndarray:
        """One entry as a (7, P) byte block; counts the sub-bank reads."""
        g = self._check_addr(bank_id, entry_addr)
        p = self.params.parallelism
        self.count_group_reads(1)
        return self.state[:, g * p : (g + 1) * p].copy()

    def read_states(self, bank_id: int, entry_addr: int) -> List[NeuronState]:
        block = self.read_block(bank_id, entry_addr)
        return [NeuronState(*(int(b) for b in block[:, lane])) for lane in range(block.shape[1])]

    def write_block(self, bank_id: int, entry_addr: int, block: np.ndarray, phase: Phase) -> None:
        """Write one entry. Init writes all 7 bytes; inference is gated."""
        g = self._check_addr(bank_id, entry_addr)
        p = self.params.parallelism
        block = np.asarray(block, dtype=np.uint8)
        if block.shape != (STATE_BYTES, p):
            raise ValueError(f"expected block shape {(STATE_BYTES, p)}, got {block.shape}")
        target = self.state[:, g * p : (g + 1) * p]
        if phase is Phase.INIT:
            target[:] = block
            self.counters.writes += STATE_BYTES
            return
        target[B_VMEM] = block[B_VMEM]
        if self.params.online_learning:
            target[B_CA] = block[B_CA]
        self.count_group_writes(1)

    def write_states(
        self, bank_id: int, entry_addr: int, states: Sequence[NeuronState], phase: Phase
    ) -> None:
        p = self.params.parallelism
        if len(states) != p:
            raise ValueError(f"expected {p} states, got {len(states)}")
        block = np.array([list(s.to_bytes()) for s in states], dtype=np.uint8).T
        self.write_block(bank_id, entry_addr, block, phase)

    def load(self, neuron_id: int, state: NeuronState) -> None:
        """Configuration-time write of a single neuron (uncounted)."""
        self.state[:, neuron_id] = np.frombuffer(state.to_bytes(), dtype=np.uint8)

    def peek(self, neuron_id: int) -> NeuronState:
        """Uncounted readback, for diffing and serialization."""
        return NeuronState(*(int(b) for b in self.state[:, neuron_id]))

    def subbank_words(self, bank_id: int, byte_index: int) -> np.ndarray:
        """Physical view of one sub-bank as (entries, P) for memory images."""
        p = self.params.parallelism
        plane = self.state[byte_index].reshape(-1, p)
        return plane[bank_id::2]


def pack_word(weights: Sequence[int]) -> int:
    """Pack P 4-bit weights into one word, ascending post index first."""
    word = 0
    for i, w in enumerate(weights):
        w = int(w)
        if not 0 <= w <= WEIGHT_MAX:
            raise ValueError(f"weight out of range at lane {i}: {w}")
        word |= w << (4 * i)
    return word


def unpack_word(word: int, p: int) -> List[int]:
    if word < 0 or word >> (4 * p):
        raise ValueError(f"word does not fit {4 * p} bits: {word:#x}")
    return [(word >> (4 * i)) & 0xF for i in range(p)]


class SynapseMemory:
    """N x N crossbar of 4-bit weights behind a 4P-bit word interface.

    A logical access touches ``banks_per_row`` physical banks (4P/32 for
    SRAM, 1 for SCM) and the ledger counts physical accesses.
    """

    def __init__(self, geometry: MemGeometry, counters: StructureCounters | None = None):
        self.geometry = geometry
        self.counters = counters if counters is not None else StructureCounters()
        self.weights = np.zeros((geometry.n, geometry.n), dtype=np.uint8)

    @property
    def n_groups(self) -> int:
        return self.geometry.n // self.geometry.p

    def _check_addr(self, pre_id: int, post_group: int) -> None:
        if not 0 <= pre_id < self.geometry.n:
            raise ValueError(f"pre_id out of range: {pre_id} (N={self.geometry.n})")
        if not 0 <= post_group < self.n_groups:
            raise ValueError(
                f"post_group out of range: {post_group} (N/P={self.n_groups})"
            )

    def count_reads(self, n_logical: int) -> None:
        self.counters.reads += n_logical * self.geometry.banks_per_row

    def count_writes(self, n_logical: int) -> None:
        self.counters.writes += n_logical * self.geometry.banks_per_row

    def read_group(self, pre_id: int, post_group: int) -> np.ndarray:
        """Weights pre -> [post_group*P, post_group*P + P) as a (P,) array."""
        self._check_addr(pre_id, post_group)
        p = self.geometry.p
        self.count_reads(1)
        return self.weights[pre_id, post_group * p : (post_group + 1) * p].copy()

    def write_group(self, pre_id: int, post_group: int, values: np.ndarray) -> None:
        self._check_addr(pre_id, post_group)
        p = self.geometry.p
        values = np.asarray(values, dtype=np.uint8)
        if values.shape != (p,):
            raise ValueError(f"expected {p} weights, got shape {values.shape}")
        if (values > WEIGHT_MAX).any():
            raise ValueError("weights must be 4-bit (0..15)")
        self.count_writes(1)
        self.weights[pre_id, post_group * p : (post_group + 1) * p] = values

    def read_word(self, pre_id: int, post_group: int) -> int:
        return pack_word(self.read_group(pre_id, post_group).tolist())

    def write_word(self, pre_id: int, post_group: int, word: int) -> None:
        self.write_group(
            pre_id, post_group, np.array(unpack_word(word, self.geometry.p), dtype=np.uint8)
        )

    def load(self, matrix: np.ndarray) -> None:
        """Configuration-time bulk load (uncounted)."""
        matrix = np.asarray(matrix, dtype=np.uint8)
        n = self.geometry.n
        if matrix.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} weight matrix, got {matrix.shape}")
        if (matrix > WEIGHT_MAX).any():
            raise ValueError("weights must be 4-bit (0..15)")
        self.weights[:] = matrix

    def set_weight(self, pre_id: int, post_id: int, w: int) -> None:
        if not 0 <= w <= WEIGHT_MAX:
            raise ValueError(f"weight out of range: {w}")
        self.weights[pre_id, post_id] = w

    def peek(self, pre_id: int, post_id: int) -> int:
        return int(self.weights[pre_id, post_id])
