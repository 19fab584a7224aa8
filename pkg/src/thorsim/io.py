"""File formats standing in for the chip's configuration and event pins.

Everything is line-oriented text, versioned by the magic first line
``THORSIM v1`` followed by a format tag.  Formats:

NETWORK         full array configuration: geometry, timing, per-neuron
                7-byte records, and the weight matrix (dense rows or
                sparse ``pre post w`` triples).
EVENTS          one event per line: ``NEUR <src>`` | ``SYN <pre> <post>``
                | ``LEAK``.  An empty file is an empty stream; the header
                is optional on input.
SPIKES          output spike log, ``SPIKE <neuron_id> <event_index>``.
NEURON_IMAGE /  hex memory images, one line per physical word,
SYNAPSE_IMAGE   address-ascending, behind a 4-line geometry header.

All formats parse with LF or CRLF endings and round-trip bit-exactly on
their canonical form.  Files are always written with LF endings.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import STATE_BYTES, WEIGHT_MAX, LifParams, NeuronState
from .errors import ConfigError, FormatError
from .events import AerEvent, LeakEvent, NeuronEvent, SynapseEvent
from .memory import MemType, mem_geometry, pack_word, unpack_word
from .pipeline import RunTrace, Simulator, TimingConfig, TimingMode

MAGIC = "THORSIM v1"


@dataclass
class NetworkConfig:
    """Everything needed to bring up one simulator instance."""

    n: int
    p: int
    s: int
    mem_type: MemType
    online_learning: bool = True
    mode: TimingMode = TimingMode.THOR
    f_clk: float = 400e6
    event_overhead_cycles: int = 4
    neurons: List[NeuronState] = field(default_factory=list)
    weights: Optional[np.ndarray] = None

    def validate(self) -> None:
        LifParams(self.n, self.p, self.online_learning)
        mem_geometry(self.n, self.p, self.s, self.mem_type)
        if len(self.neurons) != self.n:
            raise ConfigError(f"expected {self.n} neuron records, got {len(self.neurons)}")
        if self.weights is None or self.weights.shape != (self.n, self.n):
            raise ConfigError(f"expected a {self.n}x{self.n} weight matrix")

    def timing(self) -> TimingConfig:
        return TimingConfig(
            mode=self.mode,
            event_overhead_cycles=self.event_overhead_cycles,
            f_clk=self.f_clk,
        )


def build_simulator(config: NetworkConfig) -> Simulator:
    """Instantiate and initialize a simulator from a validated config."""
    config.validate()
    params = LifParams(config.n, config.p, config.online_learning)
    geometry = mem_geometry(config.n, config.p, config.s, config.mem_type)
    sim = Simulator(params, geometry, config.timing())
    sim.init_neurons(config.neurons)
    sim.init_weights(config.weights)
    return sim


def _read_lines(path: str) -> List[str]:
    with open(path, "r", newline=None) as fh:
        return fh.read().splitlines()


def _fail(path: str, lineno: int, message: str) -> None:
    raise FormatError(f"{path}:{lineno}: {message}")


def _expect_header(path: str, lines: List[str], tag: str) -> int:
    if not lines or lines[0].strip() != MAGIC:
        _fail(path, 1, f"expected magic header {MAGIC!r}")
    if len(lines) < 2 or lines[1].strip() != tag:
        _fail(path, 2, f"expected format tag {tag!r}")
    return 2


def _format_float(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


# -- network configuration ---------------------------------------------------


def load_network(path: str) -> NetworkConfig:
    """Parse and validate a NETWORK file; memories come back initialized."""
    lines = _read_lines(path)
    start = _expect_header(path, lines, "NETWORK")

    scalars: Dict[str, str] = {}
    neuron_default: Optional[NeuronState] = None
    neuron_lines: Dict[int, NeuronState] = {}
    sparse_weights: List[Tuple[int, int, int]] = []
    dense_rows: List[List[int]] = []
    weights_format: Optional[str] = None
    in_dense = False

    for lineno0, raw in enumerate(lines[start:], start=start + 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "END":
            break
        fields = line.split()
        key = fields[0].upper()
        try:
            if in_dense:
                dense_rows.append([int(tok) for tok in fields])
                continue
            if key in ("N", "P", "S", "OVERHEAD"):
                scalars[key] = fields[1]
            elif key in ("MEMTYPE", "MODE"):
                scalars[key] = fields[1].lower()
            elif key == "LEARNING":
                scalars[key] = fields[1]
            elif key == "FCLK":
                scalars[key] = fields[1]
            elif key == "NEURON_DEFAULT":
                neuron_default = NeuronState(*(int(tok) for tok in fields[1:]))
            elif key == "NEURON":
                idx = int(fields[1])
                neuron_lines[idx] = NeuronState(*(int(tok) for tok in fields[2:]))
            elif key == "WEIGHT":
                pre, post, w = (int(tok) for tok in fields[1:])
                sparse_weights.append((pre, post, w))
            elif key == "WEIGHTS":
                weights_format = fields[1].lower()
                if weights_format not in ("dense", "sparse"):
                    _fail(path, lineno0, f"unknown weight format {fields[1]!r}")
                in_dense = weights_format == "dense"
            else:
                _fail(path, lineno0, f"unknown directive {fields[0]!r}")
        except FormatError:
            raise
        except (ValueError, TypeError, IndexError) as exc:
            _fail(path, lineno0, f"bad line {line!r}: {exc}")

    for key in ("N", "P", "S", "MEMTYPE"):
        if key not in scalars:
            _fail(path, len(lines), f"missing required {key} directive")
    try:
        n = int(scalars["N"])
        p = int(scalars["P"])
        s = int(scalars["S"])
        mem_type = MemType(scalars["MEMTYPE"])
        learning = scalars.get("LEARNING", "1") not in ("0", "off", "false")
        mode = TimingMode(scalars.get("MODE", "thor"))
        f_clk = float(scalars.get("FCLK", "400000000"))
        overhead = int(scalars.get("OVERHEAD", "4"))
    except ValueError as exc:
        raise FormatError(f"{path}: bad scalar directive: {exc}") from exc

    # Geometry constraints are checked before any state is assembled.
    LifParams(n, p, learning)
    mem_geometry(n, p, s, mem_type)

    default = neuron_default or NeuronState(0, 0, 255, 0, 0, 0, 0)
    neurons = []
    for i in range(n):
        state = neuron_lines.get(i, default)
        neurons.append(state)
    for idx in neuron_lines:
        if not 0 <= idx < n:
            raise FormatError(f"{path}: NEURON id out of range: {idx} (N={n})")

    weights = np.zeros((n, n), dtype=np.uint8)
    if weights_format == "dense":
        if len(dense_rows) != n or any(len(row) != n for row in dense_rows):
            raise FormatError(f"{path}: dense weight block must be {n} rows of {n} values")
        weights[:] = np.array(dense_rows, dtype=np.uint8)
        if (np.array(dense_rows) > WEIGHT_MAX).any():
            raise FormatError(f"{path}: dense weights must be 0..{WEIGHT_MAX}")
    else:
        for pre, post, w in sparse_weights:
            if not (0 <= pre < n and 0 <= post < n):
                raise FormatError(f"{path}: WEIGHT ids out of range: ({pre}, {post}) (N={n})")
            if not 0 <= w <= WEIGHT_MAX:
                raise FormatError(f"{path}: weight out of range: {w}")
            weights[pre, post] = w

    config = NetworkConfig(
        n=n,
        p=p,
        s=s,
        mem_type=mem_type,
        online_learning=learning,
        mode=mode,
        f_clk=f_clk,
        event_overhead_cycles=overhead,
        neurons=neurons,
        weights=weights,
    )
    config.validate()
    return config


def save_network(config: NetworkConfig, path: str) -> None:
    """Write the canonical NETWORK form (explicit neurons, dense weights)."""
    config.validate()
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{MAGIC}\n")
        fh.write("NETWORK\n")
        fh.write(f"N {config.n}\n")
        fh.write(f"P {config.p}\n")
        fh.write(f"S {config.s}\n")
        fh.write(f"MEMTYPE {config.mem_type.value}\n")
        fh.write(f"LEARNING {1 if config.online_learning else 0}\n")
        fh.write(f"MODE {config.mode.value}\n")
        fh.write(f"FCLK {_format_float(config.f_clk)}\n")
        fh.write(f"OVERHEAD {config.event_overhead_cycles}\n")
        for i, state in enumerate(config.neurons):
            fh.write(f"NEURON {i} " + " ".join(str(b) for b in state.to_bytes()) + "\n")
        fh.write("WEIGHTS dense\n")
        for row in config.weights:
            fh.write(" ".join(str(int(w)) for w in row) + "\n")
        fh.write("END\n")


# -- event streams -------------------------------------------------------


def parse_events(path: str, n_neurons: Optional[int] = None) -> List[AerEvent]:
    """Parse an event stream; ids are range-checked when N is known."""
    lines = _read_lines(path)
    events: List[AerEvent] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == MAGIC or line == "EVENTS":
            continue
        fields = line.split()
        kind = fields[0].upper()
        try:
            if kind == "NEUR" and len(fields) == 2:
                event: AerEvent = NeuronEvent(int(fields[1]))
            elif kind == "SYN" and len(fields) == 3:
                event = SynapseEvent(int(fields[1]), int(fields[2]))
            elif kind == "LEAK" and len(fields) == 1:
                event = LeakEvent()
            else:
                _fail(path, lineno, f"malformed event line {line!r}")
        except ValueError as exc:
            _fail(path, lineno, f"malformed event line {line!r}: {exc}")
        if n_neurons is not None:
            ids = []
            if isinstance(event, NeuronEvent):
                ids = [event.src_id]
            elif isinstance(event, SynapseEvent):
                ids = [event.pre_id, event.post_id]
            for i in ids:
                if not 0 <= i < n_neurons:
                    _fail(path, lineno, f"neuron id out of range: {i} (N={n_neurons})")
        events.append(event)
    return events


def write_events(events: Sequence[AerEvent], path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{MAGIC}\n")
        fh.write("EVENTS\n")
        for event in events:
            if isinstance(event, NeuronEvent):
                fh.write(f"NEUR {event.src_id}\n")
            elif isinstance(event, SynapseEvent):
                fh.write(f"SYN {event.pre_id} {event.post_id}\n")
            elif isinstance(event, LeakEvent):
                fh.write("LEAK\n")
            else:
                raise TypeError(f"unknown event kind: {event!r}")


# -- spike logs --------------------------------------------------------------


def write_spike_log(spikes: Sequence[Tuple[int, int]], path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{MAGIC}\n")
        fh.write("SPIKES\n")
        for neuron_id, event_index in spikes:
            fh.write(f"SPIKE {neuron_id} {event_index}\n")


def parse_spike_log(path: str) -> List[Tuple[int, int]]:
    lines = _read_lines(path)
    spikes: List[Tuple[int, int]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line in (MAGIC, "SPIKES") or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 3 or fields[0] != "SPIKE":
            _fail(path, lineno, f"malformed spike line {line!r}")
        try:
            spikes.append((int(fields[1]), int(fields[2])))
        except ValueError as exc:
            _fail(path, lineno, f"malformed spike line {line!r}: {exc}")
    return spikes


# -- run traces ----------------------------------------------------------


def write_trace(trace: RunTrace, path: str) -> None:
    """Per-event CSV rows followed by a key,value summary block."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["event_index", "event_kind", "cycles", "sops", "spikes_emitted"])
        for row in trace.rows:
            writer.writerow([row.index, row.kind, row.cycles, row.sops, row.spikes_emitted])
        writer.writerow([])
        writer.writerow(["summary", "value"])
        writer.writerow(["total_events", trace.total_events])
        writer.writerow(["total_cycles", trace.total_cycles])
        writer.writerow(["total_sops", trace.total_sops])
        writer.writerow(["f_clk_hz", _format_float(trace.f_clk)])
        writer.writerow(["throughput_sops_per_s", repr(trace.throughput_sops)])
        writer.writerow(["mode", trace.mode.value])
        writer.writerow(["truncated", int(trace.truncated)])


def read_trace_rows(path: str) -> Tuple[List[dict], Dict[str, str]]:
    """Read back a trace CSV: per-event dict rows plus the summary map."""
    rows: List[dict] = []
    summary: Dict[str, str] = {}
    with open(path, "r", newline="") as fh:
        in_summary = False
        for record in csv.reader(fh):
            if not record or not any(record):
                in_summary = True
                continue
            if record[0] == "event_index" or record[0] == "summary":
                continue
            if in_summary:
                summary[record[0]] = record[1]
            else:
                rows.append(
                    {
                        "event_index": int(record[0]),
                        "event_kind": record[1],
                        "cycles": int(record[2]),
                        "sops": int(record[3]),
                        "spikes_emitted": int(record[4]),
                    }
                )
    return rows, summary


# -- memory images -------------------------------------------------------


def _write_image_header(fh, tag: str, n: int, p: int, s: int, mem_type: MemType) -> None:
    fh.write(f"{MAGIC}\n{tag}\n")
    fh.write(f"N {n}\nP {p}\nS {s}\nMEMTYPE {mem_type.value}\n")


def _parse_image_header(path: str, lines: List[str], tag: str) -> Tuple[int, int, int, MemType, int]:
    start = _expect_header(path, lines, tag)
    header: Dict[str, str] = {}
    idx = start
    for expected in ("N", "P", "S", "MEMTYPE"):
        if idx >= len(lines):
            _fail(path, idx + 1, f"missing {expected} header line")
        fields = lines[idx].split()
        if len(fields) != 2 or fields[0].upper() != expected:
            _fail(path, idx + 1, f"expected {expected} header line, got {lines[idx]!r}")
        header[expected] = fields[1]
        idx += 1
    try:
        return (
            int(header["N"]),
            int(header["P"]),
            int(header["S"]),
            MemType(header["MEMTYPE"].lower()),
            idx,
        )
    except ValueError as exc:
        raise FormatError(f"{path}: bad image header: {exc}") from exc


def save_neuron_image(sim: Simulator, path: str) -> None:
    """Hex image of the neuron banks: (bank, sub-bank, entry) ascending."""
    p = sim.params.parallelism
    with open(path, "w", newline="\n") as fh:
        _write_image_header(
            fh, "NEURON_IMAGE", sim.params.n_neurons, p, sim.geometry.s, sim.geometry.mem_type
        )
        for bank in (0, 1):
            for byte_index in range(STATE_BYTES):
                for word in sim.neuron_mem.subbank_words(bank, byte_index):
                    fh.write(bytes(word.tolist()).hex() + "\n")


def load_neuron_image(sim: Simulator, path: str) -> None:
    lines = _read_lines(path)
    n, p, _, _, idx = _parse_image_header(path, lines, "NEURON_IMAGE")
    if n != sim.params.n_neurons or p != sim.params.parallelism:
        raise ConfigError(
            f"image geometry (N={n}, P={p}) does not match simulator "
            f"(N={sim.params.n_neurons}, P={sim.params.parallelism})"
        )
    entries = n // (2 * p)
    words = [line.strip() for line in lines[idx:] if line.strip()]
    expected = 2 * STATE_BYTES * entries
    if len(words) != expected:
        raise FormatError(f"{path}: expected {expected} hex words, got {len(words)}")
    pos = 0
    for bank in (0, 1):
        for byte_index in range(STATE_BYTES):
            for entry in range(entries):
                try:
                    data = bytes.fromhex(words[pos])
                except ValueError as exc:
                    raise FormatError(f"{path}: bad hex word at index {pos}: {exc}") from exc
                if len(data) != p:
                    raise FormatError(
                        f"{path}: word {pos} holds {len(data)} bytes, expected {p}"
                    )
                group = 2 * entry + bank
                sim.neuron_mem.state[byte_index, group * p : (group + 1) * p] = list(data)
                pos += 1


def save_synapse_image(sim: Simulator, path: str) -> None:
    """Hex image of the synapse memory, one 4P-bit word per line, pre-major."""
    p = sim.params.parallelism
    n = sim.params.n_neurons
    digits = p  # one hex digit per 4-bit weight
    with open(path, "w", newline="\n") as fh:
        _write_image_header(fh, "SYNAPSE_IMAGE", n, p, sim.geometry.s, sim.geometry.mem_type)
        for pre in range(n):
            row = sim.synapse_mem.weights[pre]
            for group in range(n // p):
                word = pack_word(row[group * p : (group + 1) * p].tolist())
                fh.write(f"{word:0{digits}x}\n")


def load_synapse_image(sim: Simulator, path: str) -> None:
    lines = _read_lines(path)
    n, p, _, _, idx = _parse_image_header(path, lines, "SYNAPSE_IMAGE")
    if n != sim.params.n_neurons or p != sim.params.parallelism:
        raise ConfigError(
            f"image geometry (N={n}, P={p}) does not match simulator "
            f"(N={sim.params.n_neurons}, P={sim.params.parallelism})"
        )
    words = [line.strip() for line in lines[idx:] if line.strip()]
    expected = n * (n // p)
    if len(words) != expected:
        raise FormatError(f"{path}: expected {expected} hex words, got {len(words)}")
    matrix = np.zeros((n, n), dtype=np.uint8)
    pos = 0
    for pre in range(n):
        for group in range(n // p):
            try:
                word = int(words[pos], 16)
            except ValueError as exc:
                raise FormatError(f"{path}: bad hex word at index {pos}: {exc}") from exc
            matrix[pre, group * p : (group + 1) * p] = unpack_word(word, p)
            pos += 1
    sim.synapse_mem.load(matrix)


# -- design-space sweep tables --------------------------------------------


def write_dse_csv(points, best, path: str, diagnostics: Sequence[str] = ()) -> None:
    """Sweep table plus a trailing best-point summary comment."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["p", "mem_type", "f_hz", "e_sop_j", "throughput_sops", "area_mm2", "et"])
        for pt in points:
            writer.writerow(
                [
                    pt.p,
                    pt.mem_type.value,
                    _format_float(pt.f_hz),
                    repr(pt.e_sop_j),
                    repr(pt.throughput_sops),
                    repr(pt.area_mm2),
                    repr(pt.et),
                ]
            )
        if best is not None:
            fh.write(
                f"# best p={best.p} mem_type={best.mem_type.value} "
                f"f_hz={_format_float(best.f_hz)} e_sop_j={best.e_sop_j!r}\n"
            )


def read_dse_csv(path: str) -> List[dict]:
    rows: List[dict] = []
    with open(path, "r", newline="") as fh:
        for record in csv.reader(line for line in fh if not line.startswith("#")):
            if not record or record[0] == "p":
                continue
            rows.append(
                {
                    "p": int(record[0]),
                    "mem_type": record[1],
                    "f_hz": float(record[2]),
                    "e_sop_j": float(record[3]),
                    "throughput_sops": float(record[4]),
                    "area_mm2": float(record[5]),
                    "et": float(record[6]),
                }
            )
    return rows
