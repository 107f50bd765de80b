"""Command-line entry point: ``sparls run | sweep | trace``."""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from dataclasses import replace
from pathlib import Path

from .channel import ChannelSpec, generate_trace, write_trace_csv
from .estimator import RECURSION_MODES
from .harness import (
    SWEEP_FD,
    SWEEP_SNR_DB,
    ExperimentConfig,
    emit_results,
    run_experiment,
    sigma2_from_snr_db,
)

# CLI flag dest -> ExperimentConfig field
_OVERRIDES = {
    "algorithms": "algorithms",
    "m": "M",
    "l": "L",
    "trials": "n_trials",
    "samples": "n_samples",
    "k": "k",
    "gamma": "gamma",
    "lam": "lam",
    "recursion_mode": "recursion_mode",
    "seed": "base_seed",
    "window": "measure_window",
    "delta": "delta",
}


def _csv_list(text: str) -> list[str]:
    return [t for t in text.split(",") if t]


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    p.add_argument("--algorithms", type=_csv_list, help="comma-separated subset of sparls,rls")
    p.add_argument("--snr-db", type=float, nargs="+", dest="snr_db")
    p.add_argument("--fd", type=float, nargs="+")
    p.add_argument("--m", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--lambda", type=float, dest="lam")
    p.add_argument("--recursion-mode", choices=RECURSION_MODES, dest="recursion_mode")
    p.add_argument("--seed", type=int)
    p.add_argument("--window", type=float, help="fraction of each trace used for the MSE")
    p.add_argument("--delta", type=float, help="RLS initialisation regulariser")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, default=Path("results.csv"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparls", description="SPARLS vs RLS sparse channel estimation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one or more (SNR, f_d) grid points")
    _add_experiment_flags(run)
    sweep = sub.add_parser("sweep", help="run the full SNR x f_d grid")
    _add_experiment_flags(sweep)

    trace = sub.add_parser("trace", help="export a simulated channel trace as CSV")
    trace.add_argument("--m", type=int, default=100)
    trace.add_argument("--l", type=int, default=5)
    trace.add_argument("--fd", type=float, default=0.001)
    noise = trace.add_mutually_exclusive_group()
    noise.add_argument("--snr-db", type=float, dest="snr_db", default=30.0)
    noise.add_argument("--sigma2", type=float)
    trace.add_argument("--samples", type=int, default=1000)
    trace.add_argument("--seed", type=int, default=0)
    trace.add_argument("--out", type=Path, default=Path("trace.csv"))
    return parser


def _grid_from_args(args, sweep: bool) -> list[ExperimentConfig]:
    file_cfg: dict = {}
    if args.config is not None:
        file_cfg = json.loads(args.config.read_text())
    snrs = file_cfg.pop("snr_db", None)
    fds = file_cfg.pop("fd", None)
    base = ExperimentConfig.from_dict(file_cfg)
    overrides = {field: getattr(args, dest) for dest, field in _OVERRIDES.items() if getattr(args, dest) is not None}
    base = replace(base, **overrides)

    if args.snr_db is not None:
        snrs = args.snr_db
    if args.fd is not None:
        fds = args.fd
    if snrs is None:
        snrs = list(SWEEP_SNR_DB) if sweep else [base.snr_db]
    if fds is None:
        fds = list(SWEEP_FD) if sweep else [base.fd]
    snrs = snrs if isinstance(snrs, list) else [snrs]
    fds = fds if isinstance(fds, list) else [fds]
    return [replace(base, snr_db=float(s), fd=float(f)) for s, f in itertools.product(snrs, fds)]


def _run(args, sweep: bool) -> int:
    configs = _grid_from_args(args, sweep)
    results = []
    for cfg in configs:
        r = run_experiment(cfg, workers=args.workers)
        results.append(r)
        parts = [f"snr={cfg.snr_db:g}dB fd={cfg.fd:g}"]
        for algo, s in r.stats.items():
            parts.append(f"{algo}: mse={s.mse_db:.2f}dB (+/-{s.ci_halfwidth:.2g})")
        if r.ccr == r.ccr:
            parts.append(f"ccr={r.ccr:.3f}")
        print("  ".join(parts))
    manifest = emit_results(results, args.out)
    print(f"wrote {args.out} and {manifest}")
    return 0


def _trace(args) -> int:
    sigma2 = args.sigma2 if args.sigma2 is not None else sigma2_from_snr_db(args.snr_db, args.l)
    spec = ChannelSpec(M=args.m, L=args.l, fd_ts=args.fd, sigma2=sigma2, n_samples=args.samples, seed=args.seed)
    write_trace_csv(generate_trace(spec), args.out)
    print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "trace":
            return _trace(args)
        return _run(args, sweep=args.command == "sweep")
    except (ValueError, OSError, RuntimeError, json.JSONDecodeError) as exc:
        print(f"sparls: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
