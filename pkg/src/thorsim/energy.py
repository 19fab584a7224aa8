"""Analytical energy, area and throughput models over run traces.

The models are first-order and coefficient-driven.  Per-access dynamic
energy follows one closed form per memory type:

    SRAM:  read_c1 * sqrt(size_bits) * word_bits + read_c2
    SCM:   read_c1 * word_bits + read_c2 * log2(size_bits / word_bits)

(the SCM log term prices the entry decoder/mux; fewer entries means a
simpler readout).  Leakage is a per-bit power, charged for every cycle of
a run on the full capacity of each memory.  Writes use the same form
with their own coefficients.

Absolute per-access joules from silicon are NOT reproduced here.  The
shipped ``qualitative_default`` coefficient set is calibrated only to
reproduce orderings: SCM wins small memories and loses large ones, the
synapse memory dominates a neuron event, and the parallelism sweep picks
(P=32, SCM).  Quantitative claims rest on the two closed-form identities
``e_sop`` and ``et_efficiency``, whose inputs are externally measured.

Two headline formulas:

    E_SOP = n_cycles * t_cycle * p_avg / n_sops        [J per SOP]
    ET    = throughput / (E_SOP * area)                [SOP^2 / (mm^2 J s)]
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional, Sequence

from .core import LifParams, NeuronState
from .errors import ConfigError
from .events import NeuronEvent
from .memory import MemGeometry, MemType, mem_geometry
from .pipeline import RunTrace, Simulator, TimingConfig, TimingMode

NEURON_STATE_BITS_PER_NEURON = 56  # 7 bytes


@dataclass(frozen=True)
class MemTypeCoefficients:
    """Per-type access-energy, leakage and area coefficients.

    ``read_c1/read_c2`` (and the write pair) plug into the type's model
    form documented in the module docstring.
    """

    read_c1: float
    read_c2: float
    write_c1: float
    write_c2: float
    leakage_w_per_bit: float
    area_mm2_per_bit: float


@dataclass(frozen=True)
class EnergyCoefficients:
    sram: MemTypeCoefficients
    scm: MemTypeCoefficients
    logic_sop_j: float
    scheduler_op_j: float
    controller_event_j: float
    idle_gated_factor: float
    logic_area_mm2_per_unit: float
    fixed_area_mm2: float

    def __post_init__(self) -> None:
        for mem in (self.sram, self.scm):
            for name, value in asdict(mem).items():
                if value < 0:
                    raise ConfigError(f"memory coefficient {name} must be >= 0, got {value}")
        for name in (
            "logic_sop_j",
            "scheduler_op_j",
            "controller_event_j",
            "idle_gated_factor",
            "logic_area_mm2_per_unit",
            "fixed_area_mm2",
        ):
            if getattr(self, name) < 0:
                raise ConfigError(f"coefficient {name} must be >= 0")

    def for_type(self, mem_type: MemType) -> MemTypeCoefficients:
        return self.sram if MemType(mem_type) is MemType.SRAM else self.scm

    def to_json(self) -> str:
        payload = {
            "sram": asdict(self.sram),
            "scm": asdict(self.scm),
            "logic_sop_j": self.logic_sop_j,
            "scheduler_op_j": self.scheduler_op_j,
            "controller_event_j": self.controller_event_j,
            "idle_gated_factor": self.idle_gated_factor,
            "logic_area_mm2_per_unit": self.logic_area_mm2_per_unit,
            "fixed_area_mm2": self.fixed_area_mm2,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EnergyCoefficients":
        payload = json.loads(text)
        try:
            return cls(
                sram=MemTypeCoefficients(**payload["sram"]),
                scm=MemTypeCoefficients(**payload["scm"]),
                logic_sop_j=payload["logic_sop_j"],
                scheduler_op_j=payload["scheduler_op_j"],
                controller_event_j=payload["controller_event_j"],
                idle_gated_factor=payload["idle_gated_factor"],
                logic_area_mm2_per_unit=payload["logic_area_mm2_per_unit"],
                fixed_area_mm2=payload["fixed_area_mm2"],
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed coefficient file: {exc}") from exc


def qualitative_default() -> EnergyCoefficients:
    """The coefficient set shipped with the repo.

    Calibrated only for orderings (see module docstring), never for
    absolute picojoules.
    """
    return EnergyCoefficients(
        sram=MemTypeCoefficients(
            read_c1=5.0e-17,
            read_c2=5.0e-13,
            write_c1=5.5e-17,
            write_c2=5.5e-13,
            leakage_w_per_bit=1.0e-11,
            area_mm2_per_bit=1.5e-7,
        ),
        scm=MemTypeCoefficients(
            read_c1=2.0e-16,
            read_c2=2.0e-14,
            write_c1=2.2e-16,
            write_c2=2.2e-14,
            leakage_w_per_bit=8.0e-10,
            area_mm2_per_bit=7.0e-7,
        ),
        logic_sop_j=2.0e-15,
        scheduler_op_j=1.0e-14,
        controller_event_j=2.0e-13,
        idle_gated_factor=0.02,
        logic_area_mm2_per_unit=2.0e-3,
        fixed_area_mm2=5.0e-2,
    )


@dataclass(frozen=True)
class AccessEnergy:
    """Energy per access and leakage per cycle for one memory bank."""

    read_j: float
    write_j: float
    leakage_j_per_cycle: float

    @property
    def dynamic_j(self) -> float:
        return self.read_j


def memory_access_energy(
    size_bits: int,
    word_bits: int,
    mem_type: MemType | str,
    f_clk: float,
    coeffs: EnergyCoefficients,
) -> AccessEnergy:
    """Per-access dynamic energy plus per-cycle leakage for one bank."""
    mem_type = MemType(mem_type)
    if size_bits <= 0 or word_bits <= 0 or size_bits < word_bits:
        raise ValueError(
            f"invalid bank shape: size={size_bits} bits, word={word_bits} bits"
        )
    if f_clk <= 0:
        raise ValueError("f_clk must be positive")
    c = coeffs.for_type(mem_type)
    if mem_type is MemType.SRAM:
        read = c.read_c1 * math.sqrt(size_bits) * word_bits + c.read_c2
        write = c.write_c1 * math.sqrt(size_bits) * word_bits + c.write_c2
    else:
        entries = size_bits / word_bits
        read = c.read_c1 * word_bits + c.read_c2 * math.log2(entries) if entries > 1 else c.read_c1 * word_bits
        write = c.write_c1 * word_bits + c.write_c2 * math.log2(entries) if entries > 1 else c.write_c1 * word_bits
    leakage = c.leakage_w_per_bit * size_bits / f_clk
    return AccessEnergy(read_j=read, write_j=write, leakage_j_per_cycle=leakage)


def per_access_total(
    size_bits: int,
    word_bits: int,
    mem_type: MemType | str,
    f_clk: float,
    coeffs: EnergyCoefficients,
) -> float:
    """Read energy plus one cycle of leakage: the crossover comparison axis."""
    access = memory_access_energy(size_bits, word_bits, mem_type, f_clk, coeffs)
    return access.read_j + access.leakage_j_per_cycle


def crossover_size(
    coeffs: EnergyCoefficients,
    word_bits: int = 32,
    f_clk: float = 100e6,
    lo: int = 1 << 10,
    hi: int = 1 << 24,
) -> float:
    """Bank size (bits) where SRAM starts beating SCM per access.

    Bisects the sign change of SCM minus SRAM per-access totals at the
    reference clock.  Raises if no sign change brackets the range.
    """

    def gap(size: float) -> float:
        return per_access_total(size, word_bits, MemType.SCM, f_clk, coeffs) - per_access_total(
            size, word_bits, MemType.SRAM, f_clk, coeffs
        )

    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo >= 0 or g_hi <= 0:
        raise ValueError(
            "no SCM->SRAM crossover in range: "
            f"gap({lo})={g_lo:.3e}, gap({hi})={g_hi:.3e}"
        )
    a, b = float(lo), float(hi)
    for _ in range(200):
        mid = 0.5 * (a + b)
        if gap(mid) < 0:
            a = mid
        else:
            b = mid
        if b - a <= 1.0:
            break
    return 0.5 * (a + b)


def e_sop(n_cycles: float, t_cycle_s: float, p_avg_w: float, n_sops: float) -> float:
    """Energy per synaptic operation: cycles x cycle time x power / SOPs."""
    for name, value in (
        ("n_cycles", n_cycles),
        ("t_cycle_s", t_cycle_s),
        ("p_avg_w", p_avg_w),
        ("n_sops", n_sops),
    ):
        if value <= 0:
            raise ValueError(f"{name} must be positive, got {value}")
    return n_cycles * t_cycle_s * p_avg_w / n_sops


def et_efficiency(throughput_sops: float, e_sop_j: float, area_mm2: float) -> float:
    """Energy-throughput figure of merit: throughput / (E_SOP x area)."""
    for name, value in (
        ("throughput_sops", throughput_sops),
        ("e_sop_j", e_sop_j),
        ("area_mm2", area_mm2),
    ):
        if value <= 0:
            raise ValueError(f"{name} must be positive, got {value}")
    return throughput_sops / (e_sop_j * area_mm2)


def area_model(geometry: MemGeometry, p: int, coeffs: EnergyCoefficients) -> float:
    """Die area: memory bits x per-bit area, P logic units, fixed overhead."""
    synapse_area = geometry.total_bits * coeffs.for_type(geometry.mem_type).area_mm2_per_bit
    neuron_bits = NEURON_STATE_BITS_PER_NEURON * geometry.n
    neuron_area = neuron_bits * coeffs.scm.area_mm2_per_bit
    return synapse_area + neuron_area + p * coeffs.logic_area_mm2_per_unit + coeffs.fixed_area_mm2


@dataclass(frozen=True)
class EnergyReport:
    """Energy totals and breakdown for one run."""

    total_j: float
    components: Dict[str, float]
    dynamic_j: float
    leakage_j: float
    e_sop_j: float
    throughput_sops: float
    area_mm2: float
    et_efficiency: float
    n_sops: int
    n_cycles: int

    def as_dict(self) -> dict:
        return {
            "total_j": self.total_j,
            "components": dict(self.components),
            "dynamic_j": self.dynamic_j,
            "leakage_j": self.leakage_j,
            "e_sop_j": self.e_sop_j,
            "throughput_sops": self.throughput_sops,
            "area_mm2": self.area_mm2,
            "et_efficiency": self.et_efficiency,
            "n_sops": self.n_sops,
            "n_cycles": self.n_cycles,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def _synapse_access_energy(
    geometry: MemGeometry, f_clk: float, coeffs: EnergyCoefficients
) -> AccessEnergy:
    """Energy per counted (physical) synapse-memory access.

    SRAM rows are split into 32-bit physical banks and the ledger counts
    those, so the per-access size is the physical bank's share of a row.
    """
    if geometry.mem_type is MemType.SRAM:
        bank_bits = geometry.s // geometry.banks_per_row
        return memory_access_energy(bank_bits, 32, MemType.SRAM, f_clk, coeffs)
    return memory_access_energy(geometry.s, geometry.io_width_bits, MemType.SCM, f_clk, coeffs)


def _neuron_access_energy(
    geometry: MemGeometry, f_clk: float, coeffs: EnergyCoefficients
) -> AccessEnergy:
    # One sub-bank: N/2P entries of P bytes = 4N bits, P-byte words.
    # The neuron sub-banks are small latch arrays, priced as SCM.
    return memory_access_energy(4 * geometry.n, 8 * geometry.p, MemType.SCM, f_clk, coeffs)


def estimate_run(
    trace: RunTrace,
    geometry: MemGeometry,
    coeffs: EnergyCoefficients,
    f_clk: Optional[float] = None,
) -> EnergyReport:
    """Price a run trace: dynamic accesses plus leakage on all cycles."""
    if trace.n != geometry.n or trace.p != geometry.p:
        raise ValueError(
            f"trace (N={trace.n}, P={trace.p}) does not match "
            f"geometry (N={geometry.n}, P={geometry.p})"
        )
    f = f_clk if f_clk is not None else trace.f_clk
    if f <= 0:
        raise ValueError("f_clk must be positive")

    syn = _synapse_access_energy(geometry, f, coeffs)
    neu = _neuron_access_energy(geometry, f, coeffs)
    led = trace.ledger
    cycles = trace.total_cycles

    syn_leak_per_cycle = coeffs.for_type(geometry.mem_type).leakage_w_per_bit * geometry.total_bits / f
    neu_leak_per_cycle = (
        coeffs.scm.leakage_w_per_bit * NEURON_STATE_BITS_PER_NEURON * geometry.n / f
    )

    neuron_dyn = (
        led.neuron_mem.reads * neu.read_j
        + led.neuron_mem.writes * neu.write_j
        + coeffs.idle_gated_factor
        * neu.read_j
        * (led.neuron_mem.idle_cycles + led.neuron_mem.gated_cycles)
    )
    synapse_dyn = (
        led.synapse_mem.reads * syn.read_j
        + led.synapse_mem.writes * syn.write_j
        + coeffs.idle_gated_factor
        * syn.read_j
        * (led.synapse_mem.idle_cycles + led.synapse_mem.gated_cycles)
    )
    neuron_leak = neu_leak_per_cycle * cycles
    synapse_leak = syn_leak_per_cycle * cycles
    logic = trace.total_sops * coeffs.logic_sop_j
    scheduler = coeffs.scheduler_op_j * (
        led.input_sched.reads
        + led.input_sched.writes
        + led.output_sched.reads
        + led.output_sched.writes
    )
    controller = trace.total_events * coeffs.controller_event_j

    components = {
        "neuron_memory": neuron_dyn + neuron_leak,
        "synapse_memory": synapse_dyn + synapse_leak,
        "logic": logic,
        "schedulers": scheduler,
        "controller": controller,
    }
    total = sum(components.values())
    sops = trace.total_sops
    report_e_sop = total / sops if sops > 0 else 0.0
    throughput = sops * f / cycles if cycles > 0 else 0.0
    area = area_model(geometry, geometry.p, coeffs)
    et = throughput / (report_e_sop * area) if report_e_sop > 0 and area > 0 else 0.0
    return EnergyReport(
        total_j=total,
        components=components,
        dynamic_j=neuron_dyn + synapse_dyn + logic + scheduler + controller,
        leakage_j=neuron_leak + synapse_leak,
        e_sop_j=report_e_sop,
        throughput_sops=throughput,
        area_mm2=area,
        et_efficiency=et,
        n_sops=sops,
        n_cycles=cycles,
    )


@dataclass(frozen=True)
class SweepPoint:
    p: int
    mem_type: MemType
    f_hz: float
    e_sop_j: float
    throughput_sops: float
    area_mm2: float
    et: float


@dataclass(frozen=True)
class SweepWorkload:
    """Saturating neuron-event workload used for design-space points.

    A quiet array (zero weights, maximal thresholds) back-to-back fed
    with neuron events, so every point runs the identical SOP schedule.
    """

    n_neurons: int = 256
    n_events: int = 32
    online_learning: bool = False
    bank_bits: int = 32768
    event_overhead_cycles: int = 4

    def quiet_states(self) -> List[NeuronState]:
        return [NeuronState(0, 0, 255, 0, 0, 0, 0) for _ in range(self.n_neurons)]


def run_sweep_point(
    p: int,
    mem_type: MemType | str,
    f_hz: float,
    workload: SweepWorkload,
    coeffs: EnergyCoefficients,
) -> SweepPoint:
    """Simulate one design point and price it.  Raises on invalid points."""
    geometry = mem_geometry(workload.n_neurons, p, workload.bank_bits, mem_type)
    params = LifParams(workload.n_neurons, p, workload.online_learning)
    timing = TimingConfig(
        mode=TimingMode.THOR,
        event_overhead_cycles=workload.event_overhead_cycles,
        f_clk=f_hz,
    )
    sim = Simulator(params, geometry, timing)
    sim.init_neurons(workload.quiet_states())
    events = [NeuronEvent(i % workload.n_neurons) for i in range(workload.n_events)]
    trace = sim.run(events)
    report = estimate_run(trace, geometry, coeffs, f_hz)
    return SweepPoint(
        p=p,
        mem_type=MemType(mem_type),
        f_hz=f_hz,
        e_sop_j=report.e_sop_j,
        throughput_sops=report.throughput_sops,
        area_mm2=report.area_mm2,
        et=report.et_efficiency,
    )


def dse_sweep(
    p_values: Sequence[int],
    mem_types: Sequence[MemType | str],
    f_values: Sequence[float],
    workload: SweepWorkload,
    coeffs: EnergyCoefficients,
    diagnostics: Optional[List[str]] = None,
) -> List[SweepPoint]:
    """Evaluate the cross product of design points, key-ordered.

    Invalid points (geometry constraint violations) are skipped; each
    skip appends one line to ``diagnostics`` when provided.
    """
    points: List[SweepPoint] = []
    for p in sorted(set(int(v) for v in p_values)):
        for mem_type in sorted(set(MemType(t) for t in mem_types), key=lambda t: t.value):
            for f_hz in sorted(set(float(f) for f in f_values)):
                try:
                    points.append(run_sweep_point(p, mem_type, f_hz, workload, coeffs))
                except (ConfigError, ValueError) as exc:
                    if diagnostics is not None:
                        diagnostics.append(
                            f"skipped point (P={p}, {mem_type.value}, f={f_hz:g} Hz): {exc}"
                        )
    return points


def best_point(points: Iterable[SweepPoint]) -> SweepPoint:
    points = list(points)
    if not points:
        raise ValueError("no valid sweep points")
    return min(points, key=lambda pt: (pt.e_sop_j, pt.p, pt.mem_type.value, pt.f_hz))
