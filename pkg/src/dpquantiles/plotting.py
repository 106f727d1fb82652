"""Figure rendering for sweep and audit reports.

The CSV files are the primary deliverable; these helpers render companion
matplotlib figures next to them when requested by the CLI.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_sweep", "plot_audit"]


def plot_sweep(rows, path) -> None:
    """MSE versus noise/range ratio, one panel per (m, eps) cell.

    Smoothed mechanisms become curves over the ratio axis; the exact
    mechanisms become horizontal reference lines.
    """
    cells = sorted({(r.m, r.eps) for r in rows})
    fig, axes = plt.subplots(1, len(cells), figsize=(5 * len(cells), 4), squeeze=False)
    for ax, (m, eps) in zip(axes[0], cells):
        cell_rows = [r for r in rows if r.m == m and r.eps == eps]
        for family in sorted({r.noise_family for r in cell_rows if r.noise_family != "none"}):
            pts = sorted(
                [(r.noise_ratio, r.mse_mean) for r in cell_rows if r.noise_family == family]
            )
            ax.loglog(*zip(*pts), marker="o", ms=3, label=f"hs ({family})")
        for mech in ("joint_exp", "inverse_sensitivity", "composed_baseline"):
            ref = [r.mse_mean for r in cell_rows if r.mechanism == mech]
            if ref:
                ax.axhline(ref[0], ls="--", lw=1, label=mech)
        ax.set_xlabel("noise / range")
        ax.set_ylabel("MSE")
        ax.set_title(f"m={m}, eps={eps}")
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_audit(records, path) -> None:
    """Effective epsilon versus noise/range ratio with MC error bands."""
    records = sorted(records, key=lambda r: r["noise_ratio"])
    ratios = np.array([r["noise_ratio"] for r in records])
    eff = np.array([r["epsilon_eff"] for r in records])
    err = np.array([r["std_error"] for r in records])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogx(ratios, eff, marker="o", ms=3)
    ax.fill_between(ratios, eff - err, eff + err, alpha=0.3)
    if records:
        ax.axhline(records[0]["eps"], color="k", ls="--", lw=1, label="budget eps")
    ax.set_xlabel("noise / range")
    ax.set_ylabel("effective epsilon")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
