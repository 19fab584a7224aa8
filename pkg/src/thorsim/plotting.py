"""Figure rendering for run and sweep reports.

Figures are written next to the delimited outputs they illustrate; all
rendering is headless (Agg) and file-based.
"""

from __future__ import annotations

from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)


def render_dse_figure(rows: Sequence[dict], path: str) -> None:
    """Energy per SOP versus parallelism, one line per (type, clock)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    series: Dict[tuple, List[tuple]] = {}
    for row in rows:
        series.setdefault((row["mem_type"], row["f_hz"]), []).append(
            (row["p"], row["e_sop_j"])
        )
    for (mem_type, f_hz), points in sorted(series.items()):
        points.sort()
        ax.plot(
            [p for p, _ in points],
            [e * 1e12 for _, e in points],
            marker="o",
            label=f"{mem_type.upper()} @ {f_hz / 1e6:g} MHz",
        )
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("parallel neuron updates P")
    ax.set_ylabel("energy per SOP [pJ]")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_energy_breakdown_figure(report: dict, path: str) -> None:
    """Bar chart of the per-component energy split of one run."""
    components = report["components"]
    names = list(components.keys())
    values = [components[k] * 1e12 for k in names]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(range(len(names)), values, color="tab:blue")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels([n.replace("_", "\n") for n in names], fontsize=8)
    ax.set_ylabel("energy [pJ]")
    ax.set_title(f"total {report['total_j'] * 1e12:.3g} pJ over {report['n_cycles']} cycles")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_trace_figure(rows: Sequence[dict], path: str) -> None:
    """Cumulative cycles and SOPs over the event stream."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    cycles = 0
    sops = 0
    xs, cum_cycles, cum_sops = [], [], []
    for row in rows:
        cycles += row["cycles"]
        sops += row["sops"]
        xs.append(row["event_index"])
        cum_cycles.append(cycles)
        cum_sops.append(sops)
    ax.step(xs, cum_cycles, where="post", label="cycles")
    ax.step(xs, cum_sops, where="post", label="SOPs")
    ax.set_xlabel("event index")
    ax.set_ylabel("cumulative count")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
