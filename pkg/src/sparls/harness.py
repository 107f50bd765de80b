"""Monte Carlo comparison of SPARLS against RLS on simulated sparse channels.

Every trial draws one trace from its own random stream (seeded by
``(base_seed, trial_index)``) and runs each requested estimator over the
identical data. Trials are aggregated in index order, so the result does not
depend on how or where the trials were executed.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .channel import ChannelSpec, ChannelTrace, generate_trace
from .estimator import DEFINITION_CONSISTENT, SparlsParams, sparls_init, sparls_step
from .rls import DEFAULT_DELTA, rls_init, rls_update

__all__ = [
    "ALGORITHMS",
    "CSV_COLUMNS",
    "AlgorithmStats",
    "ExperimentConfig",
    "ExperimentError",
    "ExperimentResult",
    "GAMMA_TABLE",
    "LAMBDA_TABLE",
    "SWEEP_FD",
    "SWEEP_SNR_DB",
    "TABLE_FD",
    "TABLE_SIGMA2",
    "TrialRecord",
    "default_params",
    "emit_results",
    "manifest_path",
    "run_experiment",
    "run_rls",
    "run_sparls",
    "run_trial",
    "sigma2_from_snr_db",
]

ALGORITHMS = ("sparls", "rls")

# rows: noise variance, columns: normalized Doppler
TABLE_SIGMA2 = (0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05)
TABLE_FD = (0.0, 0.0001, 0.0005, 0.001, 0.005, 0.01)
LAMBDA_TABLE = (
    (0.98, 0.95, 0.95, 0.99, 0.99, 0.99),
    (0.99, 0.97, 0.98, 0.99, 0.99, 0.99),
    (0.99, 0.97, 0.98, 0.99, 0.99, 0.99),
    (0.99, 0.99, 0.99, 0.99, 0.99, 0.99),
    (0.99, 0.99, 0.99, 0.99, 0.99, 0.99),
    (0.99, 0.99, 0.99, 0.99, 0.99, 0.99),
)
GAMMA_TABLE = (
    (100, 100, 100, 100, 100, 100),
    (45, 40, 40, 60, 50, 50),
    (30, 25, 30, 25, 25, 25),
    (15, 15, 10, 10, 10, 10),
    (10, 10, 5, 5, 5, 5),
    (5, 5, 3, 2, 2, 2),
)

SWEEP_SNR_DB = (10.0, 15.0, 20.0, 25.0, 30.0)
SWEEP_FD = TABLE_FD

CSV_COLUMNS = (
    "snr_db",
    "fd",
    "algorithm",
    "mse",
    "mse_db",
    "ccr",
    "n_stat",
    "mults_per_sample",
    "ci_halfwidth",
    "seed",
)


class ExperimentError(RuntimeError):
    pass


def default_params(sigma2: float, fd_ts: float) -> tuple[float, float]:
    """Tabulated ``(lambda, gamma)`` for the grid point nearest ``(sigma2, fd_ts)``.

    Noise variance is matched on a log scale, Doppler on a linear scale.
    Points outside the table are clamped with a warning.
    """
    if not sigma2 > 0.0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    lo, hi = TABLE_SIGMA2[0], TABLE_SIGMA2[-1]
    if not lo <= sigma2 <= hi or not TABLE_FD[0] <= fd_ts <= TABLE_FD[-1]:
        warnings.warn(
            f"(sigma2={sigma2:g}, fd={fd_ts:g}) lies outside the parameter tables; clamping",
            RuntimeWarning,
            stacklevel=2,
        )
    row = int(np.argmin([abs(math.log(sigma2 / s)) for s in TABLE_SIGMA2]))
    col = int(np.argmin([abs(fd_ts - f) for f in TABLE_FD]))
    return LAMBDA_TABLE[row][col], float(GAMMA_TABLE[row][col])


def sigma2_from_snr_db(snr_db: float, L: int) -> float:
    """Noise variance giving ``E||w||^2 / sigma2 = SNR`` with unit-power taps."""
    return L / 10.0 ** (snr_db / 10.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """One grid point of the comparison.

    `lam` and `gamma` fall back to the tables when left as ``None``.
    """

    algorithms: tuple[str, ...] = ALGORITHMS
    M: int = 100
    L: int = 5
    snr_db: float = 30.0
    fd: float = 0.001
    n_samples: int = 1000
    lam: float | None = None
    gamma: float | None = None
    k: int = 1
    n_trials: int = 200
    measure_window: float = 0.5
    base_seed: int = 0
    recursion_mode: str = DEFINITION_CONSISTENT
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        bad = set(self.algorithms) - set(ALGORITHMS)
        if bad or not self.algorithms:
            raise ValueError(f"algorithms must be a non-empty subset of {ALGORITHMS}, got {self.algorithms}")
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be >= 1, got {self.n_trials}")
        if not 0.0 < self.measure_window <= 1.0:
            raise ValueError(f"measure_window must lie in (0, 1], got {self.measure_window}")
        if not 1 <= self.L <= self.M:
            raise ValueError(f"need 1 <= L <= M, got L={self.L}, M={self.M}")

    @property
    def sigma2(self) -> float:
        return sigma2_from_snr_db(self.snr_db, self.L)

    def resolved_params(self) -> tuple[float, float]:
        lam, gamma = self.lam, self.gamma
        if lam is None or gamma is None:
            t_lam, t_gamma = default_params(self.sigma2, self.fd)
            lam = t_lam if lam is None else lam
            gamma = t_gamma if gamma is None else gamma
        return float(lam), float(gamma)

    def channel_spec(self) -> ChannelSpec:
        return ChannelSpec(M=self.M, L=self.L, fd_ts=self.fd, sigma2=self.sigma2, n_samples=self.n_samples)

    def window_start(self) -> int:
        return self.n_samples - max(1, int(round(self.measure_window * self.n_samples)))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["algorithms"] = list(self.algorithms)
        return d


@dataclass
class AlgorithmRun:
    """Outcome of one estimator on one trace."""

    sq_err: np.ndarray
    mults: int
    extra_mults: int = 0
    n_stat: float = math.nan
    mean_support: float = math.nan


def run_rls(trace: ChannelTrace, lam: float, delta: float = DEFAULT_DELTA) -> AlgorithmRun:
    X = trace.X
    state = rls_init(trace.M, lam, delta)
    sq_err = np.empty(trace.n_samples)
    for i in range(trace.n_samples):
        w_hat = rls_update(state, X[i], trace.d[i])
        sq_err[i] = np.sum(np.abs(w_hat - trace.w[i]) ** 2)
    return AlgorithmRun(sq_err=sq_err, mults=state.counter.count)


def run_sparls(trace: ChannelTrace, params: SparlsParams, window_start: int = 0) -> AlgorithmRun:
    """Run SPARLS over `trace`.

    Samples before the first nonzero tap-input vector leave the estimate at
    zero. `mults` counts the support-restricted products only; the rank-one
    maintenance of ``B`` and ``u`` is reported in `extra_mults`.
    """
    X = trace.X
    n = trace.n_samples
    sq_err = np.empty(n)
    support = np.zeros(n)
    state = None
    for i in range(n):
        if state is None:
            if np.any(X[i]):
                state = sparls_init(X[i], trace.d[i], params)
            w_hat = np.zeros(trace.M)
        else:
            w_hat = sparls_step(state, X[i], trace.d[i])
        sq_err[i] = np.sum(np.abs(w_hat - trace.w[i]) ** 2)
        support[i] = np.count_nonzero(w_hat)
    if state is None:
        return AlgorithmRun(sq_err=sq_err, mults=0, n_stat=0.0, mean_support=0.0)
    n_stat = state.support_sum / state.iterations if state.iterations else 0.0
    return AlgorithmRun(
        sq_err=sq_err,
        mults=state.counter.count,
        extra_mults=state.update_counter.count,
        n_stat=n_stat,
        mean_support=float(np.mean(support[window_start:])),
    )


@dataclass
class TrialRecord:
    trial_index: int
    mse: dict[str, float]
    mults: dict[str, int]
    extra_mults: dict[str, int]
    n_stat: float
    mean_support: float


def _trial_rng(base_seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([base_seed, trial_index]))


def run_trial(config: ExperimentConfig, trial_index: int) -> TrialRecord:
    """Simulate one trace and run every requested estimator on it."""
    try:
        trace = generate_trace(config.channel_spec(), _trial_rng(config.base_seed, trial_index))
        lam, gamma = config.resolved_params()
        start = config.window_start()
        power = float(np.mean(np.sum(np.abs(trace.w[start:]) ** 2, axis=1)))
        runs: dict[str, AlgorithmRun] = {}
        for algo in config.algorithms:
            if algo == "rls":
                runs[algo] = run_rls(trace, lam, config.delta)
            else:
                params = SparlsParams(
                    gamma=gamma,
                    sigma2=config.sigma2,
                    lam=lam,
                    k=config.k,
                    recursion_mode=config.recursion_mode,
                )
                runs[algo] = run_sparls(trace, params, start)
    except Exception as exc:
        raise ExperimentError(f"trial {trial_index} failed: {exc}") from exc

    sp = runs.get("sparls")
    return TrialRecord(
        trial_index=trial_index,
        mse={a: float(np.mean(r.sq_err[start:])) / power for a, r in runs.items()},
        mults={a: r.mults for a, r in runs.items()},
        extra_mults={a: r.extra_mults for a, r in runs.items()},
        n_stat=sp.n_stat if sp else math.nan,
        mean_support=sp.mean_support if sp else math.nan,
    )


@dataclass
class AlgorithmStats:
    mse: float
    mse_db: float
    ci_halfwidth: float
    mults_per_sample: float
    n_stat: float = math.nan
    mean_support: float = math.nan


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    stats: dict[str, AlgorithmStats]
    ccr: float = math.nan
    # counts the rank-one maintenance of B and u as well
    ccr_full: float = math.nan
    trials: list[TrialRecord] = field(default_factory=list, repr=False)

    @property
    def seed(self) -> int:
        return self.config.base_seed


def _aggregate(config: ExperimentConfig, records: list[TrialRecord]) -> ExperimentResult:
    if not records:
        raise ExperimentError("no successful trials")
    records = sorted(records, key=lambda r: r.trial_index)
    n = len(records)
    total_samples = n * config.n_samples
    stats = {}
    for algo in config.algorithms:
        vals = np.array([r.mse[algo] for r in records])
        mse = float(np.mean(vals))
        half = 1.96 * float(np.std(vals, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
        stats[algo] = AlgorithmStats(
            mse=mse,
            mse_db=10.0 * math.log10(mse) if mse > 0 else -math.inf,
            ci_halfwidth=half,
            mults_per_sample=sum(r.mults[algo] for r in records) / total_samples,
        )
    if "sparls" in stats:
        stats["sparls"].n_stat = float(np.mean([r.n_stat for r in records]))
        stats["sparls"].mean_support = float(np.mean([r.mean_support for r in records]))
    result = ExperimentResult(config=config, stats=stats, trials=records)
    if "sparls" in stats and "rls" in stats:
        rls_total = sum(r.mults["rls"] for r in records)
        sp_total = sum(r.mults["sparls"] for r in records)
        sp_extra = sum(r.extra_mults["sparls"] for r in records)
        result.ccr = sp_total / rls_total
        result.ccr_full = (sp_total + sp_extra) / rls_total
    return result


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Run all trials of `config` and aggregate them in trial order."""
    indices = range(config.n_trials)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_trial, [config] * config.n_trials, indices))
    else:
        records = [run_trial(config, i) for i in indices]
    return _aggregate(config, records)


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def manifest_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".manifest.json")


def _result_manifest(r: ExperimentResult) -> dict:
    lam, gamma = r.config.resolved_params()
    return {
        "config": r.config.to_dict(),
        "sigma2": r.config.sigma2,
        "resolved_lambda": lam,
        "resolved_gamma": gamma,
        "ccr": None if math.isnan(r.ccr) else r.ccr,
        "ccr_full": None if math.isnan(r.ccr_full) else r.ccr_full,
        "stats": {
            a: {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in asdict(s).items()}
            for a, s in r.stats.items()
        },
        "trial_seeds": [[r.config.base_seed, t.trial_index] for t in r.trials],
    }


def emit_results(results: list[ExperimentResult], path) -> Path:
    """Write one CSV row per (grid point, algorithm) plus a JSON manifest.

    Returns the manifest path. Floats are printed with ``repr`` so the CSV
    round-trips exactly.
    """
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for r in results:
                for algo in r.config.algorithms:
                    s = r.stats[algo]
                    if algo == "sparls":
                        ccr, n_stat = r.ccr, s.n_stat
                    else:
                        ccr, n_stat = (1.0 if not math.isnan(r.ccr) else math.nan), math.nan
                    writer.writerow(
                        [
                            _fmt(float(r.config.snr_db)),
                            _fmt(float(r.config.fd)),
                            algo,
                            _fmt(s.mse),
                            _fmt(s.mse_db),
                            _fmt(ccr),
                            _fmt(n_stat),
                            _fmt(s.mults_per_sample),
                            _fmt(s.ci_halfwidth),
                            str(r.seed),
                        ]
                    )
        mpath = manifest_path(path)
        with mpath.open("w") as fh:
            json.dump({"results": [_result_manifest(r) for r in results]}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return mpath
