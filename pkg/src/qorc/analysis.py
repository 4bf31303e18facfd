"""Distribution distances, the two-sample KS test, and Hill-curve fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import FitFailedError, NoCrossoverError

SUM_TOL = 1e-6


def _probability_pair(p, q):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError(f"shape mismatch: {p.shape} vs {q.shape}")
    for name, v in (("p", p), ("q", q)):
        if np.any(v < 0):
            raise ValueError(f"{name} has negative entries")
        if abs(v.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"{name} sums to {v.sum():.9f}, not 1")
    return p, q


def renormalize(v) -> np.ndarray:
    """Shift to non-negative (if needed) and scale to unit sum."""
    v = np.asarray(v, dtype=np.float64)
    if v.min() < 0:
        v = v - v.min()
    s = v.sum()
    if s <= 0:
        raise ValueError("cannot renormalize an all-zero vector")
    return v / s


def tvd(p, q) -> float:
    """Total variation distance, half the L1 distance."""
    p, q = _probability_pair(p, q)
    return 0.5 * float(np.abs(p - q).sum())


def _kl2(p, m):
    mask = p > 0
    return float(np.sum(p[mask] * np.log2(p[mask] / m[mask])))


def js_divergence(p, q) -> float:
    """Jensen-Shannon divergence with base-2 logs, so it lies in [0, 1]."""
    p, q = _probability_pair(p, q)
    m = 0.5 * (p + q)
    return min(max(0.5 * _kl2(p, m) + 0.5 * _kl2(q, m), 0.0), 1.0)


def ks_statistic(x, y) -> float:
    x = np.sort(np.asarray(x, dtype=np.float64))
    y = np.sort(np.asarray(y, dtype=np.float64))
    grid = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, grid, side="right") / x.size
    cdf_y = np.searchsorted(y, grid, side="right") / y.size
    return float(np.max(np.abs(cdf_x - cdf_y)))


def kolmogorov_sf(lam: float, tol: float = 1e-12, max_terms: int = 1_000_000) -> float:
    """``2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lam^2)``, clipped to [0, 1]."""
    if lam <= 0:
        return 1.0
    total = 0.0
    for k in range(1, max_terms + 1):
        term = math.exp(-2.0 * k * k * lam * lam)
        total += term if k % 2 else -term
        if term < tol:
            break
    return min(max(2.0 * total, 0.0), 1.0)


def ks_two_sample(x, y) -> tuple[float, float]:
    """KS statistic and asymptotic p-value with effective size ``n m / (n + m)``."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size == 0 or y.size == 0:
        raise ValueError("both samples must be non-empty")
    d = ks_statistic(x, y)
    en = x.size * y.size / (x.size + y.size)
    return d, kolmogorov_sf(d * math.sqrt(en))


@dataclass
class HillFit:
    L: float
    k: float
    x50: float
    residual: float
    degenerate: bool = False

    def __call__(self, x):
        return hill(x, self.L, self.k, self.x50)


def hill(x, L, k, x50):
    x = np.asarray(x, dtype=np.float64)
    return L / (1.0 + (x50 / x) ** k)


def fit_hill(xs, ys, max_iter: int = 10_000, diameter: float = 1e-8) -> HillFit:
    """Least-squares fit of ``L / (1 + (x50 / x)^k)`` by Nelder-Mead.

    Starts from ``(max y, 1, median x)``; stops once every simplex vertex is
    within ``diameter`` of the best one.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size < 4 or xs.shape != ys.shape:
        raise ValueError("need at least 4 (x, y) points")
    if np.any(xs <= 0):
        raise ValueError("training sizes must be positive")
    if np.ptp(ys) == 0:
        return HillFit(float(ys[0]), math.nan, math.nan, 0.0, degenerate=True)

    def sse(theta):
        L, k, x50 = theta
        if L <= 0 or k <= 0 or x50 <= 0:
            return np.inf
        r = hill(xs, L, k, x50) - ys
        return float(r @ r)

    start = np.array([ys.max(), 1.0, float(np.median(xs))])
    opts = {"xatol": diameter, "fatol": np.inf, "maxiter": max_iter, "maxfev": 4 * max_iter}
    res = minimize(sse, start, method="Nelder-Mead", options=opts)
    # a restart from the optimum guards against a collapsed simplex
    res = minimize(sse, res.x, method="Nelder-Mead", options=opts)
    if not res.success:
        raise FitFailedError(f"Hill fit did not converge: {res.message}", best=tuple(res.x))
    L, k, x50 = (float(v) for v in res.x)
    return HillFit(L, k, x50, float(res.fun))


def crossover_size(fit: HillFit, target: float) -> float:
    """Training size at which the fitted curve reaches ``target``."""
    if fit.L <= target:
        raise NoCrossoverError(f"asymptote {fit.L} does not exceed target {target}")
    return fit.x50 / (fit.L / target - 1.0) ** (1.0 / fit.k)


def crossover_ratio(fit: HillFit, target: float, n_full: float) -> float:
    """``n_full`` divided by the training size at which the curve reaches ``target``."""
    return n_full / crossover_size(fit, target)
