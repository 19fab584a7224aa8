"""Command-line frontend: run, validate, dse, and report subcommands.

Exit codes are a stable contract: 0 on success, 1 on runtime or
validation failure, 2 on usage errors.  Diagnostics go to standard
error; data goes to files.  All randomness flows from ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import List, Optional

from . import energy as energy_mod
from . import io as tio
from . import validation
from .errors import ConfigError, FormatError, SchedulerOverflowError, SimulationError
from .memory import MemType
from .pipeline import TimingMode


def _int_list(text: str) -> List[int]:
    values = [tok for tok in text.replace(",", " ").split() if tok]
    if not values:
        raise argparse.ArgumentTypeError("expected a non-empty list of integers")
    try:
        return [int(tok) for tok in values]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _float_list(text: str) -> List[float]:
    values = [tok for tok in text.replace(",", " ").split() if tok]
    if not values:
        raise argparse.ArgumentTypeError("expected a non-empty list of numbers")
    try:
        return [float(tok) for tok in values]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _mem_type_list(text: str) -> List[MemType]:
    values = [tok for tok in text.replace(",", " ").split() if tok]
    if not values:
        raise argparse.ArgumentTypeError("expected a non-empty list of memory types")
    try:
        return [MemType(tok.lower()) for tok in values]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thorsim",
        description="Cycle-accurate neuromorphic core simulator and energy model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate an event stream")
    run_p.add_argument("--config", required=True, help="NETWORK configuration file")
    run_p.add_argument("--events", required=True, help="EVENTS stream file")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--mode", choices=[m.value for m in TimingMode], default=None)
    run_p.add_argument("--frequency-hz", type=float, default=None)
    run_p.add_argument("--seed", type=int, default=0, help="unused by run; retained for parity")
    run_p.add_argument("--coeffs", default=None, help="energy coefficient JSON file")
    run_p.add_argument("--max-events", type=int, default=None)
    run_p.add_argument("--plot", action="store_true", help="also render figures")

    val_p = sub.add_parser("validate", help="diff the pipelined executive against the reference")
    val_p.add_argument("--config", required=True)
    val_p.add_argument("--events", default=None, help="use this stream instead of random events")
    val_p.add_argument("--seed", type=int, default=0)
    val_p.add_argument("--count", type=int, default=1000, help="number of random events")
    val_p.add_argument("--max-events", type=int, default=None)
    val_p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    dse_p = sub.add_parser("dse", help="design-space sweep over (P, memory type, clock)")
    dse_p.add_argument("--config", required=True)
    dse_p.add_argument("--out", required=True, help="output directory")
    dse_p.add_argument("--p-values", type=_int_list, default=[1, 2, 4, 8, 16, 32])
    dse_p.add_argument("--mem-types", type=_mem_type_list, default=[MemType.SRAM, MemType.SCM])
    dse_p.add_argument("--frequencies-hz", type=_float_list, default=[100e6, 400e6])
    dse_p.add_argument("--events-per-point", type=int, default=32)
    dse_p.add_argument("--coeffs", default=None)
    dse_p.add_argument("--learning", action="store_true", help="sweep with online learning on")
    dse_p.add_argument("--seed", type=int, default=0, help="unused by dse; retained for parity")

    rep_p = sub.add_parser("report", help="render figures from existing outputs")
    rep_p.add_argument("--trace", default=None, help="trace CSV from a run")
    rep_p.add_argument("--energy", default=None, help="energy report JSON from a run")
    rep_p.add_argument("--dse", default=None, help="sweep CSV from dse")
    rep_p.add_argument("--out", required=True, help="output directory")

    return parser


def _load_coeffs(path: Optional[str]) -> energy_mod.EnergyCoefficients:
    if path is None:
        return energy_mod.qualitative_default()
    with open(path, "r") as fh:
        return energy_mod.EnergyCoefficients.from_json(fh.read())


def _cmd_run(args: argparse.Namespace) -> int:
    config = tio.load_network(args.config)
    if args.mode is not None:
        config.mode = TimingMode(args.mode)
    if args.frequency_hz is not None:
        config.f_clk = args.frequency_hz
    events = tio.parse_events(args.events, n_neurons=config.n)
    coeffs = _load_coeffs(args.coeffs)

    sim = tio.build_simulator(config)
    trace = sim.run(events, max_events=args.max_events)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tio.write_trace(trace, str(out / "trace.csv"))
    tio.write_spike_log(trace.output_spikes, str(out / "spikes.txt"))
    report = energy_mod.estimate_run(trace, sim.geometry, coeffs)
    (out / "energy.json").write_text(report.to_json() + "\n", newline="\n")

    if args.plot:
        from . import plotting

        rows, _ = tio.read_trace_rows(str(out / "trace.csv"))
        plotting.render_trace_figure(rows, str(out / "trace.png"))
        plotting.render_energy_breakdown_figure(report.as_dict(), str(out / "energy_breakdown.png"))
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    config = tio.load_network(args.config)
    if config.mode is not TimingMode.THOR:
        config.mode = TimingMode.THOR
    if args.events is not None:
        events = tio.parse_events(args.events, n_neurons=config.n)
    else:
        rng = random.Random(args.seed)
        events = validation.random_events(rng, config.n, args.count)
    max_events = args.max_events
    if max_events is None:
        max_events = 5 * max(len(events), 1) + 1000
    report = validation.run_equivalence(
        config, events, max_events=max_events, inject_fault=args.inject_fault
    )
    if report.matched:
        print(
            f"validate: OK ({len(events)} input events, {report.events_executed} executed, "
            f"{report.total_sops} SOPs, bit-exact)",
            file=sys.stderr,
        )
        return 0
    print(f"validate: MISMATCH: {report.detail}", file=sys.stderr)
    return 1


def _cmd_dse(args: argparse.Namespace) -> int:
    config = tio.load_network(args.config)
    coeffs = _load_coeffs(args.coeffs)
    workload = energy_mod.SweepWorkload(
        n_neurons=config.n,
        n_events=args.events_per_point,
        online_learning=args.learning,
        bank_bits=config.s,
        event_overhead_cycles=config.event_overhead_cycles,
    )
    diagnostics: List[str] = []
    points = energy_mod.dse_sweep(
        args.p_values, args.mem_types, args.frequencies_hz, workload, coeffs, diagnostics
    )
    for line in diagnostics:
        print(f"dse: {line}", file=sys.stderr)
    if not points:
        print("dse: no valid sweep points", file=sys.stderr)
        return 1
    best = energy_mod.best_point(points)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tio.write_dse_csv(points, best, str(out / "dse.csv"), diagnostics)

    from . import plotting

    plotting.render_dse_figure(tio.read_dse_csv(str(out / "dse.csv")), str(out / "dse.png"))
    print(
        f"dse: best point P={best.p} {best.mem_type.value} @ {best.f_hz:g} Hz "
        f"({best.e_sop_j:.4g} J/SOP)",
        file=sys.stderr,
    )
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    if args.trace is None and args.energy is None and args.dse is None:
        print("report: nothing to do (pass --trace, --energy and/or --dse)", file=sys.stderr)
        return 2
    from . import plotting

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.trace is not None:
        rows, _ = tio.read_trace_rows(args.trace)
        plotting.render_trace_figure(rows, str(out / "trace.png"))
    if args.energy is not None:
        with open(args.energy) as fh:
            report = json.load(fh)
        plotting.render_energy_breakdown_figure(report, str(out / "energy_breakdown.png"))
    if args.dse is not None:
        plotting.render_dse_figure(tio.read_dse_csv(args.dse), str(out / "dse.png"))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "dse": _cmd_dse,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, FormatError, SimulationError, SchedulerOverflowError) as exc:
        print(f"thorsim {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"thorsim {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"thorsim {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
