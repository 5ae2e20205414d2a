"""Command-line front end; argument parsing and wiring only.

Exit codes: 0 success, 2 invalid usage or configuration, 3 numerical
failure such as a singular information matrix.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import plotting
from .config import config_digest, dump_config, load_config
from .errors import ConfigError, NumericalError
from .figures import FIGURE_PRESETS, run_preset
from .harness import (
    CURVE_COLUMNS,
    LOSS_COLUMNS,
    bound_tables,
    curve_rows,
    loss_rows,
    run_deterministic,
    run_hybrid,
    run_loss_curves,
    snr_tag,
    write_table,
)


@dataclass(frozen=True)
class InvocationReport:
    command: str
    config_digest: str
    elapsed: float
    output_paths: tuple

    def render(self) -> str:
        lines = [
            f"command = {self.command}",
            f"config_digest = {self.config_digest}",
            f"elapsed_seconds = {self.elapsed:.3f}",
        ]
        lines.extend(f"output = {p}" for p in self.output_paths)
        return "\n".join(lines) + "\n"


def _write_report(out_dir: Path, report: InvocationReport) -> Path:
    path = out_dir / f"{report.command}_report.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.render(), encoding="utf-8")
    return path


def _common_flags(sub):
    sub.add_argument("--out-dir", default="results", help="directory for output files")
    sub.add_argument("--threads", type=int, default=1, help="worker threads for trials")
    sub.add_argument(
        "--no-plot", action="store_true", help="skip the companion PNG next to the tables"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onebit-chanest",
        description=(
            "Analytic performance bounds and Monte-Carlo benchmarks for channel "
            "estimation from 1-bit quantized measurements with an unknown "
            "comparator threshold."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds = sub.add_parser("bounds", help="analytic bound tables only (fast path)")
    p_bounds.add_argument("--config", required=True, help="scenario config file")
    _common_flags(p_bounds)

    p_sim = sub.add_parser("simulate", help="Monte-Carlo RNMSE tables plus bounds")
    p_sim.add_argument("--config", required=True, help="scenario config file")
    _common_flags(p_sim)

    p_loss = sub.add_parser("losses", help="loss tables in dB over the SNR ladder")
    p_loss.add_argument("--config", required=True, help="scenario config file")
    _common_flags(p_loss)

    names = sorted(FIGURE_PRESETS, key=lambda s: int(s[3:]))
    p_fig = sub.add_parser("figure", help="run a canned preset reproducing one figure")
    p_fig.add_argument("--name", required=True, choices=names, help="preset name")
    p_fig.add_argument("--trials", type=int, default=None, help="override the trial count")
    p_fig.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    _common_flags(p_fig)

    return parser


def _load(args):
    cfg = load_config(args.config)
    digest = config_digest(Path(args.config).read_text(encoding="utf-8"))
    return cfg, digest


def _cmd_bounds(args) -> int:
    cfg, digest = _load(args)
    started = time.perf_counter()
    out_dir = Path(args.out_dir)
    tables = bound_tables(cfg)
    stem = f"bounds_{cfg.mode}_k{cfg.taps}_snr_{snr_tag(cfg.snr1_db)}db.txt"
    title = f"analytic RNMSE bounds; mode {cfg.mode}; seed {cfg.seed}"
    paths = [write_table(out_dir / stem, tables["columns"], tables["rows"], title)]
    if not args.no_plot:
        paths.append(
            plotting.render_bounds_figure(
                out_dir / "bounds.png", tables["columns"], tables["rows"], title
            )
        )
    _finish(args, out_dir, "bounds", digest, started, paths)
    return 0


def _cmd_simulate(args) -> int:
    cfg, digest = _load(args)
    started = time.perf_counter()
    out_dir = Path(args.out_dir)
    runner = run_deterministic if cfg.mode == "deterministic" else run_hybrid
    curves = runner(cfg, threads=args.threads)
    tag = snr_tag(cfg.snr1_db)
    paths = []
    for label, curve in curves.items():
        stem = f"rnmse_{cfg.mode}_{label.replace('-', '_')}_snr_{tag}db.txt"
        title = f"simulated and analytic RNMSE; curve {label}; trials {cfg.trials}; seed {cfg.seed}"
        paths.append(write_table(out_dir / stem, CURVE_COLUMNS, curve_rows(curve), title))
    if not args.no_plot:
        paths.append(
            plotting.render_rnmse_figure(
                out_dir / "simulate.png", curves, f"RNMSE vs offset ({cfg.mode})"
            )
        )
    _finish(args, out_dir, "simulate", digest, started, paths)
    return 0


def _cmd_losses(args) -> int:
    cfg, digest = _load(args)
    started = time.perf_counter()
    out_dir = Path(args.out_dir)
    tables = run_loss_curves(cfg)
    paths = []
    for snr_db, table in tables.items():
        stem = f"loss_{cfg.mode}_k{cfg.taps}_snr_{snr_tag(snr_db)}db.txt"
        title = f"loss measures in dB; mode {cfg.mode}; ladder entry {snr_db:g} dB; seed {cfg.seed}"
        paths.append(write_table(out_dir / stem, LOSS_COLUMNS, loss_rows(table), title))
    if not args.no_plot:
        for which in ("quantization", "offset"):
            paths.append(
                plotting.render_loss_figure(
                    out_dir / f"losses_{which}.png",
                    tables,
                    which,
                    f"{which} loss ({cfg.mode})",
                )
            )
    _finish(args, out_dir, "losses", digest, started, paths)
    return 0


def _cmd_figure(args) -> int:
    started = time.perf_counter()
    out_dir = Path(args.out_dir)
    cfg, paths = run_preset(
        args.name,
        out_dir,
        trials=args.trials,
        seed=args.seed,
        threads=args.threads,
        plot=not args.no_plot,
    )
    digest = config_digest(dump_config(cfg))
    _finish(args, out_dir, f"figure_{args.name}", digest, started, paths)
    return 0


def _finish(args, out_dir, command, digest, started, paths) -> None:
    report = InvocationReport(
        command=command,
        config_digest=digest,
        elapsed=time.perf_counter() - started,
        output_paths=tuple(str(p) for p in paths),
    )
    report_path = _write_report(out_dir, report)
    for line in report.render().splitlines():
        print(line)
    print(f"report = {report_path}")


_HANDLERS = {
    "bounds": _cmd_bounds,
    "simulate": _cmd_simulate,
    "losses": _cmd_losses,
    "figure": _cmd_figure,
}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse exits itself: 0 for --help, 2 for usage errors
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
