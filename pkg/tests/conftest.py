"""Independent oracles shared by the test modules.

Nothing here calls into the estimator code paths it is used to check.
"""

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, name, passed, detail=""):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {name}"
    if detail:
        line += f" -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def oracle_soft(r, tau):
    """Soft threshold written from scratch, element by element."""
    out = []
    for v in np.asarray(r).tolist():
        mag = abs(v)
        if mag <= tau:
            out.append(0.0 * v)
        elif isinstance(v, complex):
            out.append(v * (mag - tau) / mag)
        else:
            out.append(v - tau if v > 0 else v + tau)
    return np.array(out, dtype=np.asarray(r).dtype)


def dense_em(B, u, w0, k, tau):
    """k full (unrestricted) EM / soft-threshold iterations."""
    w = np.array(w0)
    for _ in range(k):
        w = oracle_soft(B @ w + u, tau)
    return w


def brute_normal_terms(X, d, lam):
    """Phi(n) = sum lam^(n-i) x(i) x(i)^H and z(n) = sum lam^(n-i) x(i) conj(d(i)).

    Row ``i`` of `X` is ``x(i)``.
    """
    X = np.asarray(X)
    n, M = X.shape
    dtype = np.result_type(X.dtype, np.asarray(d).dtype, np.float64)
    Phi = np.zeros((M, M), dtype=np.result_type(X.dtype, np.float64))
    z = np.zeros(M, dtype=dtype)
    for i in range(n):
        wgt = lam ** (n - 1 - i)
        for a in range(M):
            z[a] += wgt * X[i, a] * np.conj(d[i])
            for b in range(M):
                Phi[a, b] += wgt * X[i, a] * np.conj(X[i, b])
    return Phi, z


def random_vector(rng, M, complex_):
    v = rng.standard_normal(M)
    if complex_:
        v = v + 1j * rng.standard_normal(M)
    return v


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
