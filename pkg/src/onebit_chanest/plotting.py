"""Rendering of emitted curve tables to PNG files.

The data files stay the primary output; these figures are companions
written next to them.  Metadata that would vary between runs is
stripped so repeated runs with the same seed stay byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_SAVEFIG_KW = {"dpi": 150, "metadata": {"Software": None}}
_COLORS = ("tab:blue", "tab:red", "black")
_MARKERS = ("o", "s", "^")


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, **_SAVEFIG_KW)
    plt.close(fig)
    return path


def render_rnmse_figure(path, curves, title: str) -> Path:
    """Markers for the Monte-Carlo points, lines for the analytic bounds."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for (label, curve), color, marker in zip(curves.items(), _COLORS, _MARKERS):
        alphas = [p.alpha for p in curve.points]
        ax.plot(
            alphas,
            [p.rnmse_bound for p in curve.points],
            color=color,
            linewidth=1.2,
            label=f"{label} bound",
        )
        ax.errorbar(
            alphas,
            [p.rnmse_mc for p in curve.points],
            yerr=[3.0 * p.mc_standard_error for p in curve.points],
            color=color,
            marker=marker,
            linestyle="none",
            markersize=4,
            capsize=2,
            label=f"{label} simulated",
        )
    ax.set_xlabel("threshold offset")
    ax.set_ylabel("RNMSE")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    return _save(fig, path)


def render_loss_figure(path, tables: dict, which: str, title: str) -> Path:
    """One line per ladder SNR for the chosen loss measure.

    ``which`` selects ``quantization`` (both chi measures) or
    ``offset`` (the threshold-estimation penalty).
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for (snr_db, table), color, marker in zip(sorted(tables.items()), _COLORS, _MARKERS):
        if which == "quantization":
            ax.plot(
                table.alphas,
                table.chi_db,
                color=color,
                marker=marker,
                markersize=3,
                label=f"chi ({snr_db:g} dB)",
            )
            ax.plot(
                table.alphas,
                table.chi_star_db,
                color=color,
                linestyle="--",
                marker=marker,
                markersize=3,
                markerfacecolor="none",
                label=f"chi* ({snr_db:g} dB)",
            )
        elif which == "offset":
            ax.plot(
                table.alphas,
                table.upsilon_db,
                color=color,
                marker=marker,
                markersize=3,
                label=f"upsilon ({snr_db:g} dB)",
            )
        else:
            raise ValueError(f"unknown loss figure kind {which!r}")
    ax.set_xlabel("threshold offset")
    ax.set_ylabel("loss [dB]")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    return _save(fig, path)


def render_bounds_figure(path, columns, rows, title: str) -> Path:
    """Lines for each analytic RNMSE bound column against the offset."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    alphas = [r[0] for r in rows]
    for j, name in enumerate(columns[1:], start=1):
        ax.plot(alphas, [r[j] for r in rows], linewidth=1.2, label=name)
    ax.set_xlabel("threshold offset")
    ax.set_ylabel("RNMSE")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)
