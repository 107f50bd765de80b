"""Recursive l1-regularized least squares (SPARLS).

Each new sample ``(x(n), d(n))`` updates the pair::

    B(n) = I - (alpha^2/sigma^2) Phi(n)
    u(n) = (alpha^2/sigma^2) z(n)

by a rank-one correction, after which a few support-restricted EM
(iterative soft thresholding) sweeps, warm-started at ``B(n) ŵ(n-1)``,
produce ``ŵ(n)``. Only the columns of ``B`` on the current support are
touched, so one sweep costs ``M * |support|`` multiplications.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core_ops import MultCounter, restricted_matvec, soft_threshold, threshold_support

__all__ = [
    "DEFINITION_CONSISTENT",
    "PAPER_LITERAL",
    "NoStepsError",
    "SparlsParams",
    "SparlsState",
    "lcem",
    "rank_one_update",
    "rank_one_mults",
    "regularized_cost",
    "sparls_init",
    "sparls_step",
    "support_stats",
]

DEFINITION_CONSISTENT = "definition_consistent"
PAPER_LITERAL = "paper_literal"
RECURSION_MODES = (DEFINITION_CONSISTENT, PAPER_LITERAL)


class NoStepsError(RuntimeError):
    """Raised when statistics are requested before any LCEM iteration ran."""


@dataclass(frozen=True)
class SparlsParams:
    """Hyperparameters of the estimator.

    `alpha` defaults to ``sqrt(sigma2) / 2``. The soft threshold applied by
    each sweep is ``gamma * alpha**2``.

    `recursion_mode` selects how ``B`` is propagated when ``lam < 1``:
    ``"definition_consistent"`` keeps ``B(n) = I - (alpha^2/sigma^2) Phi(n)``
    exactly; ``"paper_literal"`` uses ``B <- lam B - (alpha^2/sigma^2) x x^H``,
    whose identity part decays as ``lam**(n-1)``.
    """

    gamma: float
    sigma2: float
    lam: float = 1.0
    k: int = 1
    alpha: float | None = None
    recursion_mode: str = DEFINITION_CONSISTENT

    def __post_init__(self):
        if not self.gamma >= 0.0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if not self.sigma2 > 0.0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if not 0.0 < self.lam <= 1.0:
            raise ValueError(f"forgetting factor must lie in (0, 1], got {self.lam}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if self.recursion_mode not in RECURSION_MODES:
            raise ValueError(
                f"recursion_mode must be one of {RECURSION_MODES}, got {self.recursion_mode!r}"
            )
        if self.alpha is None:
            object.__setattr__(self, "alpha", math.sqrt(self.sigma2) / 2.0)
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.alpha**2 > self.sigma2:
            warnings.warn(
                f"alpha^2={self.alpha**2:g} exceeds sigma2={self.sigma2:g}; "
                "the EM step may not be a descent step",
                RuntimeWarning,
                stacklevel=3,
            )

    @property
    def ratio(self) -> float:
        """``alpha^2 / sigma^2``, the step size of the gradient half-step."""
        return self.alpha**2 / self.sigma2

    @property
    def threshold(self) -> float:
        return self.gamma * self.alpha**2


@dataclass
class SparlsState:
    B: np.ndarray
    u: np.ndarray
    w_hat: np.ndarray
    params: SparlsParams
    # LCEM sweeps plus the warm-start product
    counter: MultCounter = field(default_factory=MultCounter)
    # rank-one maintenance of B and u
    update_counter: MultCounter = field(default_factory=MultCounter)
    support_sum: int = 0
    iterations: int = 0
    n: int = 1

    @property
    def M(self) -> int:
        return self.w_hat.shape[0]


def rank_one_mults(M: int) -> int:
    """Multiplications charged by :func:`rank_one_update`.

    ``c x`` (M), the outer product (M^2), ``lam B`` (M^2), ``lam u`` (M),
    ``c conj(d)`` (1) and its product with ``x`` (M).
    """
    return 2 * M * M + 3 * M + 1


def _as_input(x, M: int | None = None) -> np.ndarray:
    x = np.asarray(x).reshape(-1)
    if M is not None and x.shape[0] != M:
        raise ValueError(f"input vector has length {x.shape[0]}, expected {M}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input vector contains NaN or Inf")
    return x


def sparls_init(x1, d1, params: SparlsParams) -> SparlsState:
    """Start the recursion from the first sample, ``x1`` must be nonzero."""
    x1 = _as_input(x1)
    if not np.any(x1):
        raise ValueError("the first tap-input vector must be nonzero")
    M = x1.shape[0]
    c = params.ratio
    cx = c * x1
    B = np.eye(M, dtype=np.result_type(x1.dtype, np.float64)) - np.outer(cx, x1.conj())
    u = cx * np.conj(d1)
    w_dtype = np.result_type(x1.dtype, np.asarray(d1).dtype, np.float64)
    state = SparlsState(B=B, u=u, w_hat=np.zeros(M, dtype=w_dtype), params=params)
    state.update_counter.add(M * M + 2 * M)
    return state


def rank_one_update(state: SparlsState, x, d) -> None:
    """Fold sample ``(x, d)`` into ``B`` and ``u`` in place."""
    x = _as_input(x, state.M)
    p = state.params
    c = p.ratio
    cx = c * x
    B = state.B
    if np.iscomplexobj(x) and not np.iscomplexobj(B):
        B = B.astype(np.complex128)
    B *= p.lam
    if p.recursion_mode == DEFINITION_CONSISTENT and p.lam != 1.0:
        B[np.diag_indices_from(B)] += 1.0 - p.lam
    B -= np.outer(cx, x.conj())
    state.B = B
    state.u = p.lam * state.u + (c * np.conj(d)) * x
    state.update_counter.add(rank_one_mults(state.M))
    state.n += 1


def _shrink_on(r: np.ndarray, J: np.ndarray, tau: float) -> np.ndarray:
    return soft_threshold(r[J], tau)


def lcem(
    B: np.ndarray,
    u: np.ndarray,
    s0: np.ndarray,
    k: int,
    threshold: float,
    counter: MultCounter | None = None,
    support_sizes: list[int] | None = None,
) -> np.ndarray:
    """Run `k` support-restricted EM iterations and return the new estimate.

    Equivalent to `k` applications of ``w <- soft_threshold(B w + u, threshold)``
    started from any ``w0`` with ``B w0 = s0``, but each product with `B`
    uses only the columns whose entries of ``r = s + u`` exceed the threshold.

    Iteration ``l`` thresholds ``r^(l)`` and then forms ``s^(l+1) = B w^(l+1)``
    at a cost of ``M * (|I+^(l)| + |I-^(l)|)``. The product of the last
    iteration is not needed here; :func:`sparls_step` forms it against the
    next ``B`` as its warm start, so a call charges `k - 1` products and a
    stream of calls is charged ``k M N`` per sample.

    Parameters
    ----------
    B, u : numpy.ndarray
        ``B(n)`` (M x M) and ``u(n)`` (M,).
    s0 : numpy.ndarray
        Warm start ``B(n) w0``.
    k : int
        Number of EM iterations, at least 1.
    threshold : float
        Soft threshold ``gamma * alpha**2``.
    counter : MultCounter, optional
        Charged for the restricted products performed.
    support_sizes : list of int, optional
        ``|I+^(l)| + |I-^(l)|`` for ``l = 0..k-1`` is appended here.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    B = np.asarray(B)
    u = np.asarray(u).reshape(-1)
    s0 = np.asarray(s0).reshape(-1)
    M = u.shape[0]
    if B.shape != (M, M) or s0.shape[0] != M:
        raise ValueError(f"dimension mismatch: B {B.shape}, u {u.shape}, s0 {s0.shape}")

    r = s0 + u
    i_plus, i_minus = threshold_support(r, threshold)
    for it in range(k):
        if support_sizes is not None:
            support_sizes.append(i_plus.size + i_minus.size)
        if it == k - 1:
            break
        s = restricted_matvec(B, _shrink_on(r, i_plus, threshold), i_plus, counter)
        if i_minus.size:
            s += restricted_matvec(B, _shrink_on(r, i_minus, threshold), i_minus, counter)
        r = s + u
        i_plus, i_minus = threshold_support(r, threshold)

    w = np.zeros(M, dtype=r.dtype)
    w[i_plus] = _shrink_on(r, i_plus, threshold)
    w[i_minus] = _shrink_on(r, i_minus, threshold)
    return w


def sparls_step(state: SparlsState, x, d) -> np.ndarray:
    """Absorb one sample and return the updated estimate ``ŵ(n)``."""
    rank_one_update(state, x, d)
    p = state.params
    support = np.flatnonzero(state.w_hat)
    s0 = restricted_matvec(state.B, state.w_hat[support], support, state.counter)
    sizes: list[int] = []
    state.w_hat = lcem(state.B, state.u, s0, p.k, p.threshold, state.counter, sizes)
    state.support_sum += sum(sizes)
    state.iterations += len(sizes)
    return state.w_hat


def support_stats(state: SparlsState) -> tuple[float, int]:
    """Average active-set size ``N`` over all sweeps, and total multiplications.

    The total includes both the sweeps and the rank-one maintenance.
    """
    if state.iterations == 0:
        raise NoStepsError("no LCEM iterations have been run on this state")
    total = state.counter.count + state.update_counter.count
    return state.support_sum / state.iterations, total


def regularized_cost(w, X, d, lam: float, sigma2: float, gamma: float) -> float:
    """Exponentially weighted l1-regularized least-squares cost.

    ``1/(2 sigma2) * sum_i lam**(n-i) |d(i) - w^H x(i)|^2 + gamma ||w||_1``
    where row ``i`` of `X` is ``x(i)`` (so ``X`` is n x M).
    """
    X = np.asarray(X)
    d = np.asarray(d).reshape(-1)
    n = X.shape[0]
    weights = lam ** np.arange(n - 1, -1, -1, dtype=float)
    resid = d - X @ np.conj(w)
    return float(np.sum(weights * np.abs(resid) ** 2) / (2.0 * sigma2) + gamma * np.sum(np.abs(w)))
