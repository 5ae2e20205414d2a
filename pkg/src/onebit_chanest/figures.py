"""Canned scenario presets reproducing the reference experiment set.

``fig1`` through ``fig10`` cover the multi-tap RNMSE comparisons, the
loss sweeps in both modeling modes, and the single-tap offset-loss
contrasts, all at the standard operating point of three taps, 1024
pilot symbols, 1000 trials, and the -21/-6/-3 dB ladder.  Every
constant can be overridden through the CLI flags.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .harness import (
    CURVE_COLUMNS,
    LOSS_COLUMNS,
    ScenarioConfig,
    curve_rows,
    loss_rows,
    run_deterministic,
    run_hybrid,
    run_loss_curves,
    snr_tag,
    write_table,
)
from . import plotting

_LADDER = (-21.0, -6.0, -3.0)
_GRID_FINE = tuple(round(0.05 * i, 2) for i in range(21))


@dataclass(frozen=True)
class FigurePreset:
    name: str
    description: str
    kind: str  # "rnmse" or "loss"
    mode: str
    taps: int
    snr1_db: float = -3.0
    loss_plot: str = "quantization"

    def config(self, trials: int | None = None, seed: int | None = None) -> ScenarioConfig:
        cfg = ScenarioConfig(
            mode=self.mode,
            taps=self.taps,
            n_symbols=1024,
            snr1_db=self.snr1_db,
            tap_offsets_db=None,
            alpha_grid=_GRID_FINE,
            trials=1000,
            seed=0,
            snr_ladder_db=_LADDER,
        )
        if trials is not None:
            cfg = replace(cfg, trials=trials)
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        return cfg


FIGURE_PRESETS = {
    p.name: p
    for p in (
        FigurePreset(
            "fig1",
            "deterministic multi-tap RNMSE vs offset at -21 dB",
            "rnmse",
            "deterministic",
            taps=3,
            snr1_db=-21.0,
        ),
        FigurePreset(
            "fig2",
            "deterministic multi-tap RNMSE vs offset at -3 dB",
            "rnmse",
            "deterministic",
            taps=3,
            snr1_db=-3.0,
        ),
        FigurePreset(
            "fig3",
            "deterministic multi-tap quantization loss over the SNR ladder",
            "loss",
            "deterministic",
            taps=3,
            loss_plot="quantization",
        ),
        FigurePreset(
            "fig4",
            "deterministic multi-tap offset loss over the SNR ladder",
            "loss",
            "deterministic",
            taps=3,
            loss_plot="offset",
        ),
        FigurePreset(
            "fig5",
            "hybrid multi-tap RNMSE vs offset at -21 dB",
            "rnmse",
            "hybrid",
            taps=3,
            snr1_db=-21.0,
        ),
        FigurePreset(
            "fig6",
            "hybrid multi-tap RNMSE vs offset at -3 dB",
            "rnmse",
            "hybrid",
            taps=3,
            snr1_db=-3.0,
        ),
        FigurePreset(
            "fig7",
            "hybrid multi-tap quantization loss over the SNR ladder",
            "loss",
            "hybrid",
            taps=3,
            loss_plot="quantization",
        ),
        FigurePreset(
            "fig8",
            "hybrid multi-tap offset loss over the SNR ladder",
            "loss",
            "hybrid",
            taps=3,
            loss_plot="offset",
        ),
        FigurePreset(
            "fig9",
            "deterministic single-tap offset loss over the SNR ladder",
            "loss",
            "deterministic",
            taps=1,
            loss_plot="offset",
        ),
        FigurePreset(
            "fig10",
            "hybrid single-tap offset loss over the SNR ladder",
            "loss",
            "hybrid",
            taps=1,
            loss_plot="offset",
        ),
    )
}


def run_preset(
    name: str,
    out_dir,
    trials: int | None = None,
    seed: int | None = None,
    threads: int = 1,
    plot: bool = True,
):
    """Run one preset; returns (config, list of written paths)."""
    if name not in FIGURE_PRESETS:
        known = ", ".join(sorted(FIGURE_PRESETS, key=lambda s: int(s[3:])))
        raise KeyError(f"unknown figure name {name!r}; choose one of: {known}")
    preset = FIGURE_PRESETS[name]
    cfg = preset.config(trials=trials, seed=seed)
    out_dir = Path(out_dir)
    paths = []

    if preset.kind == "rnmse":
        runner = run_deterministic if cfg.mode == "deterministic" else run_hybrid
        curves = runner(cfg, threads=threads)
        tag = snr_tag(cfg.snr1_db)
        for label, curve in curves.items():
            stem = f"{name}_rnmse_{cfg.mode}_{label.replace('-', '_')}_snr_{tag}db.txt"
            title = f"{preset.description}; curve {label}; trials {cfg.trials}; seed {cfg.seed}"
            paths.append(write_table(out_dir / stem, CURVE_COLUMNS, curve_rows(curve), title))
        if plot:
            paths.append(
                plotting.render_rnmse_figure(
                    out_dir / f"{name}.png", curves, preset.description
                )
            )
    else:
        tables = run_loss_curves(cfg)
        for snr_db, table in tables.items():
            stem = f"{name}_loss_{cfg.mode}_k{cfg.taps}_snr_{snr_tag(snr_db)}db.txt"
            title = f"{preset.description}; ladder entry {snr_db:g} dB; seed {cfg.seed}"
            paths.append(write_table(out_dir / stem, LOSS_COLUMNS, loss_rows(table), title))
        if plot:
            paths.append(
                plotting.render_loss_figure(
                    out_dir / f"{name}.png", tables, preset.loss_plot, preset.description
                )
            )
    return cfg, paths
