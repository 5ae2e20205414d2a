"""Scenario configuration, Monte-Carlo execution, and table emission.

Every trial owns an rng stream derived from (seed, offset index, trial
index), and aggregation happens over preallocated per-trial arrays, so
results are bit-identical regardless of worker count or scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .estimators import (
    jmap_mle,
    map_ideal,
    map_quantized_known,
    mle_ideal,
    mle_quantized_joint,
    mle_quantized_known,
)
from .fisher import (
    crlb_ideal,
    crlb_quantized_known,
    crlb_quantized_unknown,
    fim_quantized,
    loss_chi,
    loss_chi_star,
    loss_upsilon,
)
from .hybrid import (
    PriorExpectationConfig,
    bcrlb,
    ecrlb,
    ehcrlb,
    ehcrlb_known_offset,
    hcrlb,
    hybrid_losses,
)
from .pilots import ChannelParams, GaussianPrior, make_pilot, quantize, sample_ideal

MODES = ("deterministic", "hybrid")
PILOT_POLICIES = ("fixed-per-scenario", "redrawn-per-trial")

DETERMINISTIC_LABELS = ("ideal", "1bit-unknown", "1bit-known")
HYBRID_LABELS = ("ideal-map", "1bit-jmap", "1bit-map-known")

_DEFAULT_ALPHA_GRID = tuple(np.round(np.linspace(0.0, 1.0, 21), 10))
_DEFAULT_LADDER = (-21.0, -6.0, -3.0)

# spawn-key tags keeping the pilot, trial, and bound streams disjoint
_PILOT_STREAM = 101
_TRIAL_STREAM = 202
_BOUND_STREAM = 303


@dataclass(frozen=True)
class ScenarioConfig:
    """One experiment scenario.

    ``snr1_db`` sets the first tap; the remaining taps follow it at the
    ``tap_offsets_db`` spacings (default 0, -3, -6 dB pattern).  In
    deterministic mode the gains are the positive roots of the per-tap
    SNRs; in hybrid mode the same numbers become the prior variances.
    ``snr_ladder_db`` is used by the loss-curve sweep only.
    """

    mode: str = "deterministic"
    taps: int = 3
    n_symbols: int = 1024
    snr1_db: float = -3.0
    tap_offsets_db: tuple = None
    alpha_grid: tuple = _DEFAULT_ALPHA_GRID
    trials: int = 1000
    seed: int = 0
    pilot_policy: str = "fixed-per-scenario"
    snr_ladder_db: tuple = _DEFAULT_LADDER

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode: must be one of {MODES}, got {self.mode!r}")
        if not isinstance(self.taps, int) or self.taps < 1:
            raise ConfigError(f"taps: must be a positive integer, got {self.taps!r}")
        if not isinstance(self.n_symbols, int) or self.n_symbols < 2 or self.n_symbols % 2:
            raise ConfigError(f"n_symbols: must be a positive even integer, got {self.n_symbols!r}")
        if self.n_symbols < 2 * self.taps:
            raise ConfigError(f"n_symbols: must be at least 2 * taps, got {self.n_symbols}")
        if not np.isfinite(self.snr1_db):
            raise ConfigError("snr1_db: must be finite")
        offsets = self.tap_offsets_db
        if offsets is None:
            offsets = tuple(-3.0 * k for k in range(self.taps))
        offsets = tuple(float(v) for v in offsets)
        object.__setattr__(self, "tap_offsets_db", offsets)
        if len(offsets) != self.taps:
            raise ConfigError(
                f"tap_offsets_db: expected {self.taps} entries, got {len(offsets)}"
            )
        grid = tuple(float(a) for a in self.alpha_grid)
        object.__setattr__(self, "alpha_grid", grid)
        if len(grid) == 0:
            raise ConfigError("alpha_grid: must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("alpha_grid: must be sorted strictly ascending")
        if not all(np.isfinite(a) for a in grid):
            raise ConfigError("alpha_grid: entries must be finite")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials: must be a positive integer, got {self.trials!r}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed: must be an integer, got {self.seed!r}")
        if self.pilot_policy not in PILOT_POLICIES:
            raise ConfigError(
                f"pilot_policy: must be one of {PILOT_POLICIES}, got {self.pilot_policy!r}"
            )
        ladder = tuple(float(v) for v in self.snr_ladder_db)
        object.__setattr__(self, "snr_ladder_db", ladder)
        if len(ladder) == 0:
            raise ConfigError("snr_ladder_db: must not be empty")

    @property
    def snr_db_per_tap(self) -> np.ndarray:
        return self.snr1_db + np.asarray(self.tap_offsets_db)

    @property
    def snr_linear_per_tap(self) -> np.ndarray:
        return 10.0 ** (self.snr_db_per_tap / 10.0)

    @property
    def tap_gains(self) -> np.ndarray:
        """Deterministic-mode gains: the positive square roots of the SNRs."""
        return np.sqrt(self.snr_linear_per_tap)

    @property
    def prior(self) -> GaussianPrior:
        return GaussianPrior(self.snr_linear_per_tap)

    def at_snr(self, snr1_db: float) -> "ScenarioConfig":
        return replace(self, snr1_db=float(snr1_db))


@dataclass(frozen=True)
class CurvePoint:
    """One offset value of a performance curve."""

    alpha: float
    rnmse_mc: float
    rnmse_bound: float
    mc_standard_error: float
    separability_count: int


@dataclass(frozen=True)
class Curve:
    label: str
    points: tuple


@dataclass(frozen=True)
class LossTable:
    """Analytic loss measures in dB over the offset grid at one SNR."""

    snr1_db: float
    alphas: tuple
    chi_db: tuple
    chi_star_db: tuple
    upsilon_db: tuple


def to_db(ratio) -> float:
    """Power-ratio decibels; the loss measures are MSE ratios."""
    return float(10.0 * np.log10(ratio))


def _scenario_pilot_seed(cfg: ScenarioConfig) -> int:
    ss = np.random.SeedSequence(cfg.seed, spawn_key=(_PILOT_STREAM,))
    return int(ss.generate_state(1)[0])


def _trial_rng(cfg: ScenarioConfig, alpha_index: int, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence(cfg.seed, spawn_key=(_TRIAL_STREAM, alpha_index, trial))
    return np.random.default_rng(ss)


def _trial_pilot_seed(cfg: ScenarioConfig, alpha_index: int, trial: int) -> int:
    ss = np.random.SeedSequence(cfg.seed, spawn_key=(_PILOT_STREAM, alpha_index, trial))
    return int(ss.generate_state(1)[0])


def _bound_expectation_config(cfg: ScenarioConfig) -> PriorExpectationConfig:
    ss = np.random.SeedSequence(cfg.seed, spawn_key=(_BOUND_STREAM,))
    return PriorExpectationConfig(seed=int(ss.generate_state(1)[0]))


def scenario_pilot(cfg: ScenarioConfig):
    """The pilot shared by all trials under the fixed-per-scenario policy."""
    return make_pilot(cfg.n_symbols, cfg.taps, _scenario_pilot_seed(cfg))


def _rnmse_stats(sq_errors: np.ndarray, normalizers: np.ndarray):
    """Root-normalized MSE and its standard error from per-trial errors.

    ``sq_errors`` is (trials, taps).  Each trial contributes the tap
    average of its normalized squared errors; the delta method converts
    the standard error of that mean to the root scale.
    """
    per_trial = (sq_errors / normalizers).mean(axis=1)
    mean = float(per_trial.mean())
    rnmse = float(np.sqrt(mean))
    if per_trial.size > 1 and mean > 0.0:
        se_mean = float(per_trial.std(ddof=1) / np.sqrt(per_trial.size))
        se = se_mean / (2.0 * rnmse)
    else:
        se = 0.0
    return rnmse, se


def rnmse_from_matrix(mse: np.ndarray, normalizers: np.ndarray) -> float:
    """Root of the tap-averaged, power-normalized bound diagonal."""
    return float(np.sqrt(np.mean(np.diagonal(mse) / normalizers)))


def _run_grid(cfg, trial_fn, n_estimators, threads):
    """Run trials for every offset; returns squared errors and flags.

    ``trial_fn(alpha_index, alpha, trial)`` fills one (n_estimators,
    taps) error block plus one flag vector.  Work is sharded over trial
    chunks; every (offset, trial) pair reseeds itself, so the schedule
    cannot change the numbers.
    """
    n_alpha = len(cfg.alpha_grid)
    sq = np.empty((n_alpha, cfg.trials, n_estimators, cfg.taps))
    flags = np.zeros((n_alpha, cfg.trials, n_estimators), dtype=int)

    def run_span(alpha_index, lo, hi):
        alpha = cfg.alpha_grid[alpha_index]
        for trial in range(lo, hi):
            sq[alpha_index, trial], flags[alpha_index, trial] = trial_fn(
                alpha_index, alpha, trial
            )

    if threads <= 1:
        for a in range(n_alpha):
            run_span(a, 0, cfg.trials)
    else:
        chunk = max(1, (cfg.trials + threads - 1) // threads)
        spans = [
            (a, lo, min(lo + chunk, cfg.trials))
            for a in range(n_alpha)
            for lo in range(0, cfg.trials, chunk)
        ]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda args: run_span(*args), spans))
    return sq, flags


def _assemble_curves(cfg, labels, sq, flags, bound_rnmse, normalizers):
    curves = []
    for e, label in enumerate(labels):
        points = []
        for a, alpha in enumerate(cfg.alpha_grid):
            rnmse, se = _rnmse_stats(sq[a, :, e, :], normalizers)
            points.append(
                CurvePoint(
                    alpha=float(alpha),
                    rnmse_mc=rnmse,
                    rnmse_bound=float(bound_rnmse[e][a]),
                    mc_standard_error=se,
                    separability_count=int(flags[a, :, e].sum()),
                )
            )
        curves.append(Curve(label, tuple(points)))
    return {c.label: c for c in curves}


def run_deterministic(cfg: ScenarioConfig, threads: int = 1) -> dict:
    """Monte-Carlo RNMSE plus analytic bounds for fixed tap gains.

    Returns one curve per estimator, keyed ``ideal``, ``1bit-unknown``,
    ``1bit-known``; each point carries the empirical value, its standard
    error, and the matching bound.
    """
    if cfg.mode != "deterministic":
        raise ConfigError(f"mode: run_deterministic needs 'deterministic', got {cfg.mode!r}")
    gains = cfg.tap_gains
    normalizers = cfg.snr_linear_per_tap
    fixed_pilot = scenario_pilot(cfg)

    bound_rows = {label: [] for label in DETERMINISTIC_LABELS}
    ideal_rnmse = rnmse_from_matrix(crlb_ideal(fixed_pilot), normalizers)
    for alpha in cfg.alpha_grid:
        blocks = fim_quantized(fixed_pilot, ChannelParams(gains, alpha))
        bound_rows["ideal"].append(ideal_rnmse)
        bound_rows["1bit-unknown"].append(
            rnmse_from_matrix(crlb_quantized_unknown(blocks), normalizers)
        )
        bound_rows["1bit-known"].append(
            rnmse_from_matrix(crlb_quantized_known(blocks), normalizers)
        )

    def trial_fn(alpha_index, alpha, trial):
        if cfg.pilot_policy == "redrawn-per-trial":
            pilot = make_pilot(cfg.n_symbols, cfg.taps, _trial_pilot_seed(cfg, alpha_index, trial))
        else:
            pilot = fixed_pilot
        rng = _trial_rng(cfg, alpha_index, trial)
        y = sample_ideal(pilot, gains, rng)
        z = quantize(y, alpha)
        results = (
            mle_ideal(pilot, y),
            mle_quantized_joint(pilot, z),
            mle_quantized_known(pilot, z, alpha),
        )
        errs = np.stack([(r.theta_hat - gains) ** 2 for r in results])
        flag = np.array([int(r.boundary_active) for r in results])
        return errs, flag

    sq, flags = _run_grid(cfg, trial_fn, len(DETERMINISTIC_LABELS), threads)
    bounds = [bound_rows[label] for label in DETERMINISTIC_LABELS]
    return _assemble_curves(cfg, DETERMINISTIC_LABELS, sq, flags, bounds, normalizers)


def run_hybrid(cfg: ScenarioConfig, threads: int = 1) -> dict:
    """Monte-Carlo RNMSE plus prior-averaged bounds for random taps.

    Each trial draws the taps from the prior before drawing the noise;
    normalization uses the prior variances.  Curves are keyed
    ``ideal-map``, ``1bit-jmap``, ``1bit-map-known``.
    """
    if cfg.mode != "hybrid":
        raise ConfigError(f"mode: run_hybrid needs 'hybrid', got {cfg.mode!r}")
    prior = cfg.prior
    normalizers = prior.variances
    fixed_pilot = scenario_pilot(cfg)
    expectation_cfg = _bound_expectation_config(cfg)

    bound_rows = {label: [] for label in HYBRID_LABELS}
    ideal_rnmse = rnmse_from_matrix(ecrlb(fixed_pilot, prior, expectation_cfg).mse, normalizers)
    for alpha in cfg.alpha_grid:
        bound_rows["ideal-map"].append(ideal_rnmse)
        bound_rows["1bit-jmap"].append(
            rnmse_from_matrix(ehcrlb(fixed_pilot, prior, alpha, expectation_cfg).mse, normalizers)
        )
        bound_rows["1bit-map-known"].append(
            rnmse_from_matrix(
                ehcrlb_known_offset(fixed_pilot, prior, alpha, expectation_cfg).mse, normalizers
            )
        )

    def trial_fn(alpha_index, alpha, trial):
        if cfg.pilot_policy == "redrawn-per-trial":
            pilot = make_pilot(cfg.n_symbols, cfg.taps, _trial_pilot_seed(cfg, alpha_index, trial))
        else:
            pilot = fixed_pilot
        rng = _trial_rng(cfg, alpha_index, trial)
        theta = rng.standard_normal(cfg.taps) * prior.stddevs
        y = sample_ideal(pilot, theta, rng)
        z = quantize(y, alpha)
        results = (
            map_ideal(pilot, y, prior),
            jmap_mle(pilot, z, prior),
            map_quantized_known(pilot, z, alpha, prior),
        )
        errs = np.stack([(r.theta_hat - theta) ** 2 for r in results])
        flag = np.array([int(r.boundary_active) for r in results])
        return errs, flag

    sq, flags = _run_grid(cfg, trial_fn, len(HYBRID_LABELS), threads)
    bounds = [bound_rows[label] for label in HYBRID_LABELS]
    return _assemble_curves(cfg, HYBRID_LABELS, sq, flags, bounds, normalizers)


def deterministic_losses(cfg: ScenarioConfig, snr1_db: float) -> LossTable:
    """Analytic loss measures at fixed gains for one ladder entry."""
    sub = cfg.at_snr(snr1_db)
    pilot = scenario_pilot(sub)
    gains = sub.tap_gains
    mse_y = crlb_ideal(pilot)
    chi, chi_star, upsilon = [], [], []
    for alpha in sub.alpha_grid:
        blocks = fim_quantized(pilot, ChannelParams(gains, alpha))
        mse_z = crlb_quantized_unknown(blocks)
        mse_z_star = crlb_quantized_known(blocks)
        chi.append(to_db(loss_chi(mse_y, mse_z)))
        chi_star.append(to_db(loss_chi_star(mse_y, mse_z_star)))
        upsilon.append(to_db(loss_upsilon(mse_z_star, mse_z)))
    return LossTable(snr1_db, sub.alpha_grid, tuple(chi), tuple(chi_star), tuple(upsilon))


def hybrid_loss_table(cfg: ScenarioConfig, snr1_db: float) -> LossTable:
    """Prior-averaged loss measures for one ladder entry.

    The same draw set serves every offset on the grid, which keeps the
    curves smooth and preserves the per-draw orderings exactly.
    """
    sub = cfg.at_snr(snr1_db)
    pilot = scenario_pilot(sub)
    prior = sub.prior
    expectation_cfg = _bound_expectation_config(sub)
    chi, chi_star, upsilon = [], [], []
    for alpha in sub.alpha_grid:
        losses = hybrid_losses(pilot, prior, alpha, expectation_cfg)
        chi.append(to_db(losses["chi"]))
        chi_star.append(to_db(losses["chi_star"]))
        upsilon.append(to_db(losses["upsilon"]))
    return LossTable(snr1_db, sub.alpha_grid, tuple(chi), tuple(chi_star), tuple(upsilon))


def run_loss_curves(cfg: ScenarioConfig) -> dict:
    """Loss tables for every SNR on the ladder, keyed by the dB value."""
    if cfg.mode == "deterministic":
        build = deterministic_losses
    else:
        build = hybrid_loss_table
    return {snr: build(cfg, snr) for snr in cfg.snr_ladder_db}


def bound_tables(cfg: ScenarioConfig) -> dict:
    """Analytic bound curves only, as RNMSE columns over the offset grid.

    Deterministic mode emits the three receiver bounds; hybrid mode adds
    the two classical lower bounds next to the attainment values.
    """
    pilot = scenario_pilot(cfg)
    rows = []
    if cfg.mode == "deterministic":
        normalizers = cfg.snr_linear_per_tap
        gains = cfg.tap_gains
        ideal = rnmse_from_matrix(crlb_ideal(pilot), normalizers)
        for alpha in cfg.alpha_grid:
            blocks = fim_quantized(pilot, ChannelParams(gains, alpha))
            rows.append(
                (
                    alpha,
                    ideal,
                    rnmse_from_matrix(crlb_quantized_unknown(blocks), normalizers),
                    rnmse_from_matrix(crlb_quantized_known(blocks), normalizers),
                )
            )
        columns = ("alpha", "rnmse_ideal", "rnmse_1bit_unknown", "rnmse_1bit_known")
    else:
        prior = cfg.prior
        normalizers = prior.variances
        expectation_cfg = _bound_expectation_config(cfg)
        ideal = rnmse_from_matrix(ecrlb(pilot, prior, expectation_cfg).mse, normalizers)
        bayes = rnmse_from_matrix(bcrlb(pilot, prior, expectation_cfg).mse, normalizers)
        for alpha in cfg.alpha_grid:
            rows.append(
                (
                    alpha,
                    ideal,
                    rnmse_from_matrix(
                        ehcrlb(pilot, prior, alpha, expectation_cfg).mse, normalizers
                    ),
                    rnmse_from_matrix(
                        ehcrlb_known_offset(pilot, prior, alpha, expectation_cfg).mse,
                        normalizers,
                    ),
                    bayes,
                    rnmse_from_matrix(
                        hcrlb(pilot, prior, alpha, expectation_cfg).mse, normalizers
                    ),
                )
            )
        columns = (
            "alpha",
            "rnmse_ecrlb_ideal",
            "rnmse_ehcrlb_1bit_unknown",
            "rnmse_ehcrlb_1bit_known",
            "rnmse_bcrlb_ideal",
            "rnmse_hcrlb_1bit_unknown",
        )
    return {"columns": columns, "rows": rows}


def format_value(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12e")


def write_table(path, columns, rows, title: str) -> Path:
    """Write one delimiter-separated curve file with a commented header."""
    path = Path(path)
    lines = [f"# {title}", "# columns: " + " ".join(columns)]
    for row in rows:
        lines.append(" ".join(format_value(v) for v in row))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def curve_rows(curve: Curve):
    return [
        (p.alpha, p.rnmse_mc, p.rnmse_bound, p.mc_standard_error, p.separability_count)
        for p in curve.points
    ]


CURVE_COLUMNS = ("alpha", "rnmse_mc", "rnmse_bound", "mc_standard_error", "separability_count")
LOSS_COLUMNS = ("alpha", "chi_db", "chi_star_db", "upsilon_db")


def loss_rows(table: LossTable):
    return list(zip(table.alphas, table.chi_db, table.chi_star_db, table.upsilon_db))


def snr_tag(snr_db: float) -> str:
    """File-name tag for an SNR value, such as m3 for -3 dB."""
    mag = abs(snr_db)
    text = f"{mag:g}".replace(".", "p")
    return ("m" if snr_db < 0 else "p" if snr_db > 0 else "") + (text if snr_db != 0 else "0")
