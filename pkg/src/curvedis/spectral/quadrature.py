"""Gauss-Legendre rules and Legendre polynomials on [-1, 1]."""

from functools import lru_cache

import numpy as np


def legendre_p(k, t):
    """P_k(t) by the three-term recurrence (vectorized in ``t``)."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    t = np.asarray(t, dtype=float)
    p_prev, p = np.ones_like(t), t.copy()
    if k == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    for n in range(1, k):
        p_prev, p = p, ((2 * n + 1) * t * p - n * p_prev) / (n + 1)
    return p if p.ndim else float(p)


def legendre_table(k_max, t):
    """Array of P_0(t) ... P_{k_max}(t) stacked along the last axis."""
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape + (k_max + 1,))
    out[..., 0] = 1.0
    if k_max >= 1:
        out[..., 1] = t
    for n in range(1, k_max):
        out[..., n + 1] = ((2 * n + 1) * t * out[..., n] - n * out[..., n - 1]) / (n + 1)
    return out


def _p_and_dp(n, x):
    p0, p1 = np.ones_like(x), x.copy()
    for j in range(1, n):
        p0, p1 = p1, ((2 * j + 1) * x * p1 - j * p0) / (j + 1)
    # derivative from P_n and P_{n-1}
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@lru_cache(maxsize=256)
def _gauss_legendre_cached(n):
    if n == 1:
        return np.array([0.0]), np.array([2.0])
    i = np.arange(1, n + 1)
    # Tricomi style initial guess, then Newton on the recurrence
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5)) * (1 - (n - 1) / (8.0 * n ** 3))
    for _ in range(100):
        p, dp = _p_and_dp(n, x)
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) < 1e-15:
            break
    p, dp = _p_and_dp(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # symmetrize away the last rounding asymmetries
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n):
    """Nodes (ascending, in (-1, 1)) and weights (summing to 2) of the n-point rule."""
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    return _gauss_legendre_cached(int(n))


def gauss_legendre_interval(n, a, b):
    """n-point rule mapped to [a, b]."""
    x, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w
