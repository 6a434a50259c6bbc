"""Render profiles and trajectories to PNG files next to their CSVs.

The delimited files remain the data contract; these figures are the quick
visual report produced by the CLI unless ``--no-plot`` is given.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = ["plot_profiles", "plot_trajectory", "plot_dt_report"]


def plot_profiles(profiles, path, title=None, logx=False, logy=False):
    """One axes with every profile labeled by mover/scenario/time."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for prof in profiles:
        label = f"{prof.scenario} {prof.mover}, t={prof.time:g}"
        ax.plot(prof.x, prof.values, lw=1.2, label=label)
    ax.set_xlabel("x / L")
    ax.set_ylabel("energy density")
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_trajectory(times, series, path, title=None, ylabel="value"):
    """series: dict label -> array."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for label, values in series.items():
        ax.plot(times, values, lw=1.2, label=label)
    ax.set_xlabel("t / L")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_dt_report(report, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for dt, per_t in sorted(report.entries.items()):
        if not per_t:
            continue
        ts = sorted(per_t)
        ax.plot(ts, [per_t[t] for t in ts], "o-",
                label=f"dt={dt:g}" + (" [flagged]" if dt in report.flagged else ""))
    ax.set_yscale("log")
    ax.set_xlabel("t / L")
    ax.set_ylabel("max |<n_j> - |rho_j|^2|")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
