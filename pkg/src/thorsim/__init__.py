"""Cycle-accurate simulator and analytical energy model of a parallel
LIF neuromorphic core with dual-bank interleaved memories, online
plasticity, and multi-threaded spike scheduling."""

from .core import (
    LifParams,
    NeuronState,
    ScalarNetwork,
    SopResult,
    calcium_update,
    lif_integrate,
    lif_leak,
    scalar_reference_step,
    sdsp_update,
)
from .energy import (
    EnergyCoefficients,
    EnergyReport,
    dse_sweep,
    e_sop,
    estimate_run,
    et_efficiency,
    memory_access_energy,
    qualitative_default,
)
from .events import AerEvent, LeakEvent, NeuronEvent, SynapseEvent
from .memory import (
    AccessLedger,
    MemGeometry,
    MemType,
    NeuronMemory,
    Phase,
    SynapseMemory,
    mem_geometry,
)
from .pipeline import RunTrace, Simulator, TimingConfig, TimingMode
from .scheduler import SchedulerRole, SchedulerUnit, SpikeVector

__version__ = "0.1.0"

__all__ = [
    "AccessLedger",
    "AerEvent",
    "EnergyCoefficients",
    "EnergyReport",
    "LeakEvent",
    "LifParams",
    "MemGeometry",
    "MemType",
    "NeuronEvent",
    "NeuronMemory",
    "NeuronState",
    "Phase",
    "RunTrace",
    "ScalarNetwork",
    "SchedulerRole",
    "SchedulerUnit",
    "Simulator",
    "SopResult",
    "SpikeVector",
    "SynapseEvent",
    "SynapseMemory",
    "TimingConfig",
    "TimingMode",
    "calcium_update",
    "dse_sweep",
    "e_sop",
    "estimate_run",
    "et_efficiency",
    "lif_integrate",
    "lif_leak",
    "mem_geometry",
    "memory_access_energy",
    "qualitative_default",
    "scalar_reference_step",
    "sdsp_update",
]
