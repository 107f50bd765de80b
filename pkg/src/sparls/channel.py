"""Sparse Rayleigh-fading channel traces under the Jakes model.

Each active tap is an independent unit-power complex Gaussian process with
autocorrelation ``J0(2 pi f_d T_s m)`` at lag ``m``; inactive taps stay
zero. Inputs are i.i.d. ``N(0, 1/M)`` and observations follow
``d(i) = w(i)^H x(i) + eta(i)`` with circular complex noise of variance
``sigma2``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "ChannelSpec",
    "ChannelTrace",
    "N_OSCILLATORS",
    "generate_support",
    "generate_trace",
    "jakes_tap",
    "read_trace_csv",
    "tap_input_matrix",
    "write_trace_csv",
]

N_OSCILLATORS = 64


@dataclass(frozen=True)
class ChannelSpec:
    M: int
    L: int
    fd_ts: float
    sigma2: float
    n_samples: int
    seed: int | None = None

    def __post_init__(self):
        if not 1 <= self.L <= self.M:
            raise ValueError(f"need 1 <= L <= M, got L={self.L}, M={self.M}")
        if not self.fd_ts >= 0.0:
            raise ValueError(f"fd_ts must be non-negative, got {self.fd_ts}")
        if not self.sigma2 >= 0.0:
            raise ValueError(f"sigma2 must be non-negative, got {self.sigma2}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")


@dataclass
class ChannelTrace:
    """A simulated stream.

    Attributes
    ----------
    support : numpy.ndarray
        Sorted 0-based indices of the active taps.
    w : numpy.ndarray
        True tap weights, shape ``(n, M)``; row ``i`` is ``w(i)``.
    x : numpy.ndarray
        Scalar inputs, shape ``(n,)``.
    d : numpy.ndarray
        Noisy desired outputs, shape ``(n,)``.
    """

    support: np.ndarray
    w: np.ndarray
    x: np.ndarray
    d: np.ndarray

    @property
    def M(self) -> int:
        return self.w.shape[1]

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @property
    def X(self) -> np.ndarray:
        """Tap-input vectors, row ``i`` is ``[x(i), x(i-1), ..., x(i-M+1)]``."""
        return tap_input_matrix(self.x, self.M)


def tap_input_matrix(x, M: int) -> np.ndarray:
    """Stack the tap-input vectors of `x` with zero pre-history."""
    x = np.asarray(x).reshape(-1)
    n = x.shape[0]
    padded = np.concatenate([np.zeros(M - 1, dtype=x.dtype), x])
    # row i holds padded[i + M - 1], ..., padded[i]
    idx = np.arange(n)[:, None] + (M - 1) - np.arange(M)[None, :]
    return padded[idx]


def generate_support(M: int, L: int, rng: np.random.Generator) -> np.ndarray:
    if not 1 <= L <= M:
        raise ValueError(f"need 1 <= L <= M, got L={L}, M={M}")
    return np.sort(rng.choice(M, size=L, replace=False)).astype(np.intp)


def _sos_component(fd_ts: float, t: np.ndarray, rng: np.random.Generator, n_osc: int) -> np.ndarray:
    # angles stratified over a quarter circle with one random offset, so the
    # time-average autocorrelation is a 64-node quadrature of J0
    offset = rng.uniform(-np.pi, np.pi)
    angles = (2.0 * np.pi * np.arange(1, n_osc + 1) - np.pi + offset) / (4.0 * n_osc)
    phases = rng.uniform(-np.pi, np.pi, size=n_osc)
    omega = 2.0 * np.pi * fd_ts * np.cos(angles)
    return np.sqrt(2.0 / n_osc) * np.cos(np.outer(t, omega) + phases).sum(axis=1)


def jakes_tap(
    fd_ts: float, n_samples: int, rng: np.random.Generator, n_osc: int = N_OSCILLATORS
) -> np.ndarray:
    """One Rayleigh-fading tap, ``E|w|^2 = 1``, sampled at ``T_s = 1``.

    Sum-of-sinusoids synthesis with `n_osc` oscillators for each of the
    in-phase and quadrature parts, drawn independently. ``fd_ts == 0``
    yields a single complex Gaussian draw held constant.
    """
    if not fd_ts >= 0.0:
        raise ValueError(f"fd_ts must be non-negative, got {fd_ts}")
    if fd_ts == 0.0:
        g = (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2.0)
        return np.full(n_samples, g, dtype=np.complex128)
    t = np.arange(n_samples, dtype=float)
    re = _sos_component(fd_ts, t, rng, n_osc)
    im = _sos_component(fd_ts, t, rng, n_osc)
    return (re + 1j * im) / np.sqrt(2.0)


def generate_trace(spec: ChannelSpec, rng: np.random.Generator | None = None) -> ChannelTrace:
    """Draw a full trace; deterministic given ``spec.seed`` (or `rng`)."""
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    n, M = spec.n_samples, spec.M
    support = generate_support(M, spec.L, rng)
    w = np.zeros((n, M), dtype=np.complex128)
    for j in support:
        w[:, j] = jakes_tap(spec.fd_ts, n, rng)
    x = rng.normal(0.0, np.sqrt(1.0 / M), size=n)
    eta = np.sqrt(spec.sigma2 / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    X = tap_input_matrix(x, M)
    d = np.einsum("ij,ij->i", w.conj(), X) + eta
    return ChannelTrace(support=support, w=w, x=x, d=d)


def _trace_header(M: int) -> list[str]:
    cols = ["i", "x", "d_re", "d_im"]
    for j in range(M):
        cols += [f"w{j}_re", f"w{j}_im"]
    return cols


def write_trace_csv(trace: ChannelTrace, path) -> None:
    """Write `trace` as CSV with columns ``i, x, d_re, d_im, w0_re, w0_im, ...``.

    ``i`` is 1-based. Floats are written with ``repr`` so they round-trip
    exactly.
    """
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_trace_header(trace.M))
            for i in range(trace.n_samples):
                row = [str(i + 1), repr(float(trace.x[i])), repr(float(trace.d[i].real)), repr(float(trace.d[i].imag))]
                for wij in trace.w[i]:
                    row += [repr(float(wij.real)), repr(float(wij.imag))]
                writer.writerow(row)
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc


def read_trace_csv(path) -> ChannelTrace:
    """Inverse of :func:`write_trace_csv`. The support is every tap that is
    nonzero at some time."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(v) for v in row] for row in reader], dtype=float).reshape(-1, len(header))
    M = (len(header) - 4) // 2
    x = rows[:, 1]
    d = rows[:, 2] + 1j * rows[:, 3]
    w = rows[:, 4::2] + 1j * rows[:, 5::2]
    support = np.flatnonzero(np.any(w != 0, axis=0)).astype(np.intp)
    return ChannelTrace(support=support, w=w.reshape(-1, M), x=x, d=d)
