"""Shared primitives: soft thresholding, support extraction and
support-restricted matrix-vector products with multiplication counting.

Index sets are 0-based, strictly increasing ``numpy`` integer arrays.
Real versus complex behaviour is selected by the dtype of the input
vector, so a real-valued problem stays on the real branch throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MultCounter",
    "as_support",
    "restricted_matvec",
    "sgn",
    "soft_threshold",
    "threshold_support",
]

_EMPTY = np.zeros(0, dtype=np.intp)


@dataclass
class MultCounter:
    """Running tally of scalar multiplications.

    One multiplication is counted per scalar product regardless of whether
    the operands are real or complex, and a division is counted as a
    multiplication. Only ratios between estimators are meaningful.
    """

    count: int = 0

    def add(self, n: int) -> None:
        if n < 0:
            raise ValueError(f"multiplication count must be non-negative, got {n}")
        self.count += int(n)

    def reset(self) -> None:
        self.count = 0


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not tau >= 0.0:  # also rejects NaN
        raise ValueError(f"threshold must be non-negative, got {tau}")
    return tau


def _check_vector(r) -> np.ndarray:
    r = np.asarray(r)
    if r.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValueError("vector contains NaN or Inf")
    return r


def sgn(r: np.ndarray) -> np.ndarray:
    """Element-wise sign with ``sgn(0) = +1``."""
    return np.where(np.asarray(r) >= 0, 1.0, -1.0)


def soft_threshold(r, tau: float) -> np.ndarray:
    """Shrink every entry of `r` towards zero by `tau`.

    Real input: ``sgn(r) * (|r| - tau)_+``. Complex input: the phase is kept
    and only the modulus shrinks, ``r/|r| * (|r| - tau)_+`` (zero where
    ``r == 0``), which is the proximal map of ``tau * ||.||_1`` on C^M.

    Parameters
    ----------
    r : array_like
        Real or complex 1-D vector.
    tau : float
        Non-negative threshold.

    Returns
    -------
    numpy.ndarray
        Array of the same shape as `r`; float64 or complex128.
    """
    tau = _check_tau(tau)
    r = _check_vector(r)
    mag = np.abs(r)
    shrunk = np.maximum(mag - tau, 0.0)
    if np.iscomplexobj(r):
        out = np.zeros(r.shape, dtype=np.complex128)
        nz = mag > 0
        # real shrink factor rather than r/|r|: stays finite for subnormal
        # entries and for moduli that overflow
        with np.errstate(divide="ignore", over="ignore"):
            out[nz] = r[nz] * np.maximum(1.0 - tau / mag[nz], 0.0)
        return out
    return sgn(r) * shrunk


def threshold_support(r, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Indices whose entries survive soft thresholding at `tau`.

    Real input returns ``(I_plus, I_minus)`` with ``r_i > tau`` and
    ``r_i < -tau`` respectively. Complex input has no sign split and returns
    ``(I, empty)`` with ``|r_i| > tau``. All inequalities are strict.
    """
    tau = _check_tau(tau)
    r = _check_vector(r)
    if np.iscomplexobj(r):
        return np.flatnonzero(np.abs(r) > tau), _EMPTY.copy()
    return np.flatnonzero(r > tau), np.flatnonzero(r < -tau)


def as_support(indices, m: int) -> np.ndarray:
    """Validate and normalise an index set against dimension `m`."""
    j = np.asarray(indices, dtype=np.intp).reshape(-1)
    if j.size == 0:
        return _EMPTY.copy()
    if j.min() < 0 or j.max() >= m:
        raise ValueError(f"support index out of range [0, {m})")
    if np.any(np.diff(j) <= 0):
        raise ValueError("support indices must be strictly increasing")
    return j


def _complex_columns(A: np.ndarray, v: np.ndarray, J: np.ndarray) -> np.ndarray:
    # (a + ib)(c + id) = (ac - bd) + i(ad + bc) as separate real ops; complex
    # ufuncs may fuse multiply-adds, which breaks bitwise reproducibility
    re = np.zeros(A.shape[0])
    im = np.zeros(A.shape[0])
    a_complex = np.iscomplexobj(A)
    for j, vj in zip(J, v):
        c, d = float(np.real(vj)), float(np.imag(vj))
        if a_complex:
            ar, ai = A[:, j].real, A[:, j].imag
            re += ar * c - ai * d
            im += ar * d + ai * c
        else:
            col = A[:, j]
            re += col * c
            im += col * d
    out = np.empty(A.shape[0], dtype=np.complex128)
    out.real = re
    out.imag = im
    return out


def restricted_matvec(A: np.ndarray, v, J, counter: MultCounter | None = None) -> np.ndarray:
    """Compute ``A[:, J] @ v`` touching only the columns in `J`.

    `v` holds the values on `J` (``len(v) == len(J)``). Columns are
    accumulated in ascending index order, so with ``J = range(M)`` the result
    matches a row-by-row ascending dot product bit for bit. Adds
    ``A.shape[0] * len(J)`` to `counter`.
    """
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {A.shape}")
    J = as_support(J, A.shape[1])
    v = np.asarray(v).reshape(-1)
    if v.shape[0] != J.shape[0]:
        raise ValueError(f"len(v)={v.shape[0]} does not match |J|={J.shape[0]}")

    if np.iscomplexobj(A) or np.iscomplexobj(v):
        out = _complex_columns(A, v, J)
    else:
        out = np.zeros(A.shape[0])
        for j, vj in zip(J, v):
            out += A[:, j] * vj
    if counter is not None:
        counter.add(A.shape[0] * J.shape[0])
    return out
