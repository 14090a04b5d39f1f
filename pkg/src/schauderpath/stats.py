"""Moment and normality diagnostics for path ensembles.

Jarque-Bera with the closed-form chi-square(2) tail, known-parameter
Kolmogorov-Smirnov with the asymptotic Kolmogorov series, joint marginal
moments with jackknife standard errors against Gaussian references, and
the ensemble-mean p-th variation against C_p t with
C_p = E|N(0,1)|^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi).

The KS variant is deliberately known-null: the construction dictates the
marginal mean and variance, so estimating them would only weaken the
test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma, ndtr

from .fbm import bridge_kernel, fbm_kernel

__all__ = [
    "TestReport",
    "MomentTable",
    "DegenerateSampleError",
    "jarque_bera",
    "ks_normal",
    "kolmogorov_p_value",
    "empirical_moments",
    "pth_variation_in_mean",
    "gaussian_abs_moment",
    "marginal_std",
]


class DegenerateSampleError(ValueError):
    """Sample has zero variance; the test statistic is undefined."""


@dataclass(frozen=True)
class TestReport:
    name: str
    statistic: float
    p_value: float
    n: int


def jarque_bera(samples) -> TestReport:
    """JB = n/6 (S^2 + (K-3)^2 / 4), p from the chi-square(2) upper tail."""
    x = np.asarray(samples, dtype=float)
    if x.size < 20:
        raise ValueError("need at least 20 samples")
    x = x - x.mean()
    m2 = np.mean(x ** 2)
    if m2 == 0.0:
        raise DegenerateSampleError("zero sample variance")
    skew = np.mean(x ** 3) / m2 ** 1.5
    kurt = np.mean(x ** 4) / m2 ** 2
    jb = x.size / 6.0 * (skew ** 2 + 0.25 * (kurt - 3.0) ** 2)
    return TestReport(name="jarque-bera", statistic=float(jb),
                      p_value=float(math.exp(-jb / 2.0)), n=x.size)


def kolmogorov_p_value(d: float, n: int, max_terms: int = 100) -> float:
    """Asymptotic Kolmogorov tail with the Stephens small-sample scaling."""
    lam = d * (math.sqrt(n) + 0.12 + 0.11 / math.sqrt(n))
    total = 0.0
    for k in range(1, max_terms + 1):
        term = 2.0 * (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-12:
            break
    return float(min(max(total, 0.0), 1.0))


def ks_normal(samples, mu: float, sigma: float) -> TestReport:
    """Known-parameter KS against N(mu, sigma^2)."""
    if sigma <= 0:
        raise DegenerateSampleError("sigma must be positive")
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 2:
        raise ValueError("need at least 2 samples")
    cdf = ndtr((x - mu) / sigma)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))
    return TestReport(name="kolmogorov-smirnov", statistic=d,
                      p_value=kolmogorov_p_value(d, n), n=n)


def gaussian_abs_moment(p: float) -> float:
    """C_p = E|N(0,1)|^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi)."""
    if p < 0:
        raise ValueError("p must be nonnegative")
    return float(2.0 ** (p / 2.0) * _gamma((p + 1.0) / 2.0) / math.sqrt(math.pi))


def _manifest_kernel(manifest: dict):
    H = manifest.get("H") or 0.5
    if manifest.get("include_endpoint", False):
        return lambda t, s: float(fbm_kernel(t, s, H))
    return lambda t, s: float(bridge_kernel(t, s, H))


def marginal_std(manifest: dict, t: float) -> float:
    """Model standard deviation of Y(t) implied by the ensemble manifest."""
    kern = _manifest_kernel(manifest)
    return math.sqrt(max(kern(t, t), 0.0))


def _reference_moment(times: tuple, manifest: dict) -> float:
    kern = _manifest_kernel(manifest)
    order = len(times)
    if order % 2 == 1:
        return 0.0
    if order == 2:
        return kern(times[0], times[1])
    # order 4: Isserlis pairing of the Gaussian reference
    (a, b, c, d) = times
    return (kern(a, b) * kern(c, d) + kern(a, c) * kern(b, d)
            + kern(a, d) * kern(b, c))


def _jackknife_se(prod: np.ndarray) -> float:
    n = prod.size
    loo = (prod.sum() - prod) / (n - 1)
    return float(np.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))


@dataclass(frozen=True)
class MomentTable:
    order: int
    times: list
    values: np.ndarray
    std_errors: np.ndarray
    references: np.ndarray

    def rows(self):
        for t, v, se, ref in zip(self.times, self.values, self.std_errors, self.references):
            yield t, v, se, ref


def empirical_moments(ensemble, time_tuples, order: int | None = None) -> MomentTable:
    """Monte Carlo joint moments E[prod_j Y(t_j)] with jackknife errors.

    time_tuples is a list of tuples of grid times (one joint moment per
    tuple); references come from the Gaussian kernel implied by the
    ensemble manifest (orders 1-2 exact, 3-4 by the Isserlis/Wick
    expansion) and are only available up to order 4.
    """
    if isinstance(time_tuples, tuple):
        time_tuples = [time_tuples]
    time_tuples = [tuple(float(t) for t in tt) for tt in time_tuples]
    orders = {len(tt) for tt in time_tuples}
    if order is not None:
        orders.add(order)
    if len(orders) != 1:
        raise ValueError("all time tuples must share one order")
    ell = orders.pop()
    if not 1 <= ell <= 4:
        raise ValueError("analytic references cover orders 1..4 only")
    values, ses, refs = [], [], []
    for tt in time_tuples:
        cols = ensemble.values_at(list(tt))
        prod = np.prod(cols, axis=1)
        values.append(float(prod.mean()))
        ses.append(_jackknife_se(prod))
        refs.append(_reference_moment(tt, ensemble.manifest))
    return MomentTable(order=ell, times=time_tuples, values=np.array(values),
                       std_errors=np.array(ses), references=np.array(refs))


def pth_variation_in_mean(ensemble, p: float, t: float | None = None) -> float:
    """Ensemble average of the finest-grid p-th variation up to time t.

    The Gaussian reference is C_p * t (gaussian_abs_moment(p) times t).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    grid = ensemble.grid
    if t is None:
        t = float(grid[-1])
    n_inc = min(int(np.searchsorted(grid, t, side="right")), grid.size - 1)
    if n_inc <= 0:
        return 0.0
    inc = np.abs(np.diff(ensemble.values[:, : n_inc + 1], axis=1)) ** p
    return float(inc.sum(axis=1).mean())
