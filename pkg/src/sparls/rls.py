"""Exponentially weighted recursive least squares, instrumented with a
multiplication counter so that it can serve as the complexity baseline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core_ops import MultCounter

__all__ = ["RlsState", "rls_init", "rls_mults_per_update", "rls_update"]

DEFAULT_DELTA = 1e-2


@dataclass
class RlsState:
    """Inverse correlation matrix `P` and current estimate `w_hat`.

    After `n` updates ``P = (Phi(n) + delta * lam**n * I)^-1`` where
    ``Phi(n) = sum_i lam**(n-i) x(i) x(i)^H``.
    """

    P: np.ndarray
    w_hat: np.ndarray
    lam: float
    delta: float
    counter: MultCounter = field(default_factory=MultCounter)
    n: int = 0

    @property
    def M(self) -> int:
        return self.w_hat.shape[0]


def rls_mults_per_update(M: int) -> int:
    """Multiplications charged by one :func:`rls_update` of a length-`M` filter.

    ``P x`` (M^2), ``x^H P x`` (M), the reciprocal of the gain denominator (1),
    the gain (M), the a priori error (M), the weight correction (M), the
    outer product ``k (P x)^H`` (M^2) and the ``1/lam`` rescaling (M^2).
    The Hermitian re-symmetrisation is bookkeeping and is not charged.
    """
    return 3 * M * M + 4 * M + 1


def rls_init(M: int, lam: float = 0.99, delta: float = DEFAULT_DELTA) -> RlsState:
    if M < 1:
        raise ValueError(f"filter length must be >= 1, got {M}")
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"forgetting factor must lie in (0, 1], got {lam}")
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    return RlsState(
        P=np.eye(M) / delta,
        w_hat=np.zeros(M),
        lam=float(lam),
        delta=float(delta),
    )


def rls_update(state: RlsState, x, d) -> np.ndarray:
    """Absorb one sample ``(x, d)`` with ``d = w^H x + noise`` and return ŵ(n).

    Uses the matrix inversion lemma form::

        k = P x / (lam + x^H P x)
        e = d - w^H x
        w = w + k conj(e)
        P = (P - k x^H P) / lam

    The state is modified in place.
    """
    x = np.asarray(x).reshape(-1)
    M = state.M
    if x.shape[0] != M:
        raise ValueError(f"input vector has length {x.shape[0]}, expected {M}")

    P = state.P
    Px = P @ x
    denom = state.lam + np.vdot(x, Px).real
    k = Px * (1.0 / denom)
    e = d - np.vdot(state.w_hat, x)
    state.w_hat = state.w_hat + k * np.conj(e)
    # x^H P == (P x)^H because P is Hermitian
    P = (P - np.outer(k, Px.conj())) * (1.0 / state.lam)
    state.P = 0.5 * (P + P.conj().T)

    state.counter.add(rls_mults_per_update(M))
    state.n += 1
    return state.w_hat
