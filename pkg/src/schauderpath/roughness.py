"""Pathwise regularity analytics.

Hölder semi-norms from grid samples, the coefficient-based Hölder
exponent estimator (three branches driven by whether the per-level
coefficient maxima decay, stay bounded, or grow), Ciesielski-type
two-sided bounds on the semi-norm, p-th variation along partition levels,
and the variation-index estimator.

Finite data cannot realize a limsup, so the estimator uses a trailing
window: the branch is classified by the least-squares slope of
g_m = max_k log|theta_{m,k}| against m, and the limit ratio is replaced
by the max over the last few levels.  Window length and slope tolerance
are the central hyperparameters and are exposed as arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import CoefficientField
from .partition import PartitionSequence

__all__ = [
    "HolderEstimate",
    "VariationResult",
    "UnsupportedPartitionError",
    "holder_seminorm_grid",
    "holder_exponent_estimate",
    "ciesielski_bounds",
    "pth_variation",
    "pth_variation_curve",
    "qv_from_coeffs_dyadic",
    "variation_index_estimate",
    "scaled_qv",
]


class UnsupportedPartitionError(ValueError):
    """Operation requires a dyadic / uniform partition level."""


@dataclass(frozen=True)
class HolderEstimate:
    alpha_hat: float
    branch: str                      # "decaying" | "bounded" | "growing"
    slope: float
    trace: np.ndarray = field(repr=False)   # rows (m, g_m, log|pi^{m+1}|, ratio)
    degenerate: bool = False


@dataclass(frozen=True)
class VariationResult:
    index_hat: float
    p_grid: np.ndarray
    levels: np.ndarray
    sums: np.ndarray                 # shape (len(p_grid), len(levels))
    slopes: np.ndarray
    indeterminate: bool = False


def holder_seminorm_grid(samples, grid, alpha: float) -> float:
    """max over grid pairs of |x(t)-x(s)| / |t-s|^alpha (grid lower bound)."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    x = np.asarray(samples, dtype=float)
    t = np.asarray(grid, dtype=float)
    if x.size != t.size or x.size < 2:
        raise ValueError("need matching samples/grid with at least 2 points")
    best = 0.0
    block = max(1, int(4e6 // x.size))
    for i0 in range(0, x.size - 1, block):
        i1 = min(i0 + block, x.size - 1)
        dx = np.abs(x[i0:i1, None] - x[None, i0 + 1:])
        dt = np.abs(t[i0:i1, None] - t[None, i0 + 1:])
        mask = dt > 0
        if mask.any():
            best = max(best, float(np.max(dx[mask] / dt[mask] ** alpha)))
    return best


def _level_log_maxima(field: CoefficientField, seq: PartitionSequence,
                      window=None):
    """(m, g_m, log mesh) for levels in the window whose max |theta| > 0."""
    lo, hi = (0, field.n_levels - 1) if window is None else window
    lo = max(lo, 0)
    hi = min(hi, field.n_levels - 1)
    ms, gs, logmesh = [], [], []
    for m in range(lo, hi + 1):
        arr = field.levels[m]
        amax = np.max(np.abs(arr)) if arr.size else 0.0
        if amax == 0.0:
            continue  # log|0| = -inf: sparse levels are skipped
        ms.append(m)
        gs.append(np.log(amax))
        logmesh.append(np.log(seq.mesh(m + 1)))
    return np.array(ms, dtype=float), np.array(gs), np.array(logmesh)


def holder_exponent_estimate(field: CoefficientField, seq: PartitionSequence,
                             window=None, trailing: int = 6,
                             slope_tol: float = 0.05) -> HolderEstimate:
    """Estimate the global Hölder exponent from the coefficient decay.

    Branches:
      decaying  g_m -> -inf : alpha = 1/2 + max_{trailing} g_m / log|pi^{m+1}|
      bounded   g_m bounded : alpha = 1/2
      growing   g_m -> +inf : alpha = 1/2 - max_{trailing} g_m / (-log|pi^{m+1}|)
    """
    ms, gs, logmesh = _level_log_maxima(field, seq, window)
    if ms.size == 0:
        return HolderEstimate(alpha_hat=1.0, branch="decaying", slope=float("-inf"),
                              trace=np.empty((0, 4)), degenerate=True)
    if ms.size < 4:
        raise ValueError("need at least 4 levels with nonzero coefficients in the window")
    # both the classifier and the limsup surrogate look at the trailing levels
    tail = slice(-min(max(trailing, 2), ms.size), None)
    slope = float(np.polyfit(ms[tail], gs[tail], 1)[0])
    ratio = gs / logmesh
    if slope < -slope_tol:
        branch = "decaying"
        alpha = 0.5 + float(np.max(gs[tail] / logmesh[tail]))
    elif slope > slope_tol:
        branch = "growing"
        alpha = 0.5 - float(np.max(gs[tail] / (-logmesh[tail])))
    else:
        branch = "bounded"
        alpha = 0.5
    trace = np.column_stack([ms, gs, logmesh, ratio])
    return HolderEstimate(alpha_hat=float(np.clip(alpha, 0.0, 1.0)), branch=branch,
                          slope=slope, trace=trace)


def ciesielski_bounds(field: CoefficientField, seq: PartitionSequence,
                      alpha: float, diagnostics) -> tuple[float, float]:
    """Two-sided bound on the alpha-Hölder semi-norm from the coefficients.

    With S = max |theta_{m,k}| |pi^{m+1}|^{1/2-alpha} and the empirical
    constants (a, c, M):  S / (2 c^{3/2})  <=  ||x||_alpha  <=
    S (2 M sqrt(c) K1 + 2 M K2),  K1 = 1/(1-(1+a)^{alpha-1}),
    K2 = 1/(1-(1+a)^{-alpha}).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if diagnostics.a_hat <= 0:
        raise UnsupportedPartitionError("sequence is not complete refining (a_hat <= 0)")
    S = 0.0
    for m in range(field.n_levels):
        arr = field.levels[m]
        if arr.size:
            S = max(S, float(np.max(np.abs(arr))) * seq.mesh(m + 1) ** (0.5 - alpha))
    if S == 0.0:
        return 0.0, 0.0
    a, c, M = diagnostics.a_hat, diagnostics.c_hat, diagnostics.M_hat
    K1 = 1.0 / (1.0 - (1.0 + a) ** (alpha - 1.0))
    K2 = 1.0 / (1.0 - (1.0 + a) ** (-alpha))
    lower = S / (2.0 * c ** 1.5)
    upper = S * (2.0 * M * np.sqrt(c) * K1 + 2.0 * M * K2)
    return lower, upper


def _values_on_level(samples, grid, seq: PartitionSequence, level: int) -> np.ndarray:
    """Extract sample values at the level's points (exact grid match)."""
    x = np.asarray(samples, dtype=float)
    g = np.asarray(grid, dtype=float)
    if x.shape != g.shape:
        raise ValueError("samples and grid shapes differ")
    pts = seq.points(level)
    idx = np.searchsorted(g, pts)
    if np.any(idx >= g.size) or np.any(g[np.minimum(idx, g.size - 1)] != pts):
        raise ValueError(f"sample grid does not contain every level-{level} point")
    return x[idx]


def pth_variation(samples, grid, seq: PartitionSequence, level: int,
                  p: float, t: float | None = None) -> float:
    """sum over level increments with left endpoint <= t of |dx|^p."""
    if p < 1:
        raise ValueError("p must be >= 1")
    v = _values_on_level(samples, grid, seq, level)
    pts = seq.points(level)
    if t is None:
        t = seq.T
    n_inc = min(int(np.searchsorted(pts, t, side="right")), pts.size - 1)
    if n_inc <= 0:
        return 0.0
    return float(np.sum(np.abs(np.diff(v[: n_inc + 1])) ** p))


def pth_variation_curve(samples, grid, seq: PartitionSequence, level: int,
                        p: float) -> np.ndarray:
    """Partial sums of |dx|^p at every level point (nondecreasing curve)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    v = _values_on_level(samples, grid, seq, level)
    out = np.empty(v.size)
    out[0] = 0.0
    np.cumsum(np.abs(np.diff(v)) ** p, out=out[1:])
    return out


def _dyadic_levels_or_raise(seq: PartitionSequence, n: int) -> None:
    for lev in range(min(n, seq.depth) + 1):
        pts = seq.points(lev)
        if pts.size != 2 ** lev + 1:
            raise UnsupportedPartitionError("coefficient-side qv needs a dyadic sequence")
        gaps = np.diff(pts)
        if not np.allclose(gaps, gaps[0], rtol=1e-12, atol=0.0):
            raise UnsupportedPartitionError("coefficient-side qv needs a dyadic sequence")


def qv_from_coeffs_dyadic(field: CoefficientField, seq: PartitionSequence,
                          n: int, t: float | None = None) -> float:
    """Coefficient-side quadratic variation at dyadic level n.

    (T/2^n) sum_{m<n} sum_k theta_{m,k}^2 1{support left endpoint < t};
    agrees with the increment-side qv of the reconstructed path at t = T.
    """
    _dyadic_levels_or_raise(seq, n)
    if t is None:
        t = seq.T
    total = 0.0
    for m in range(min(n, field.n_levels)):
        arr = field.levels[m]
        if not arr.size:
            continue
        lefts = np.arange(arr.size) * (seq.T / 2 ** m)
        total += float(np.sum(arr[lefts < t] ** 2))
    return total * seq.T / 2 ** n


def variation_index_estimate(samples, grid, seq: PartitionSequence,
                             p_grid, levels, bisect_tol: float = 0.01) -> VariationResult:
    """Smallest p whose level sums trend to zero (log-sum slope < 0).

    The boundary between non-vanishing and vanishing p is refined by
    bisection down to ``bisect_tol``.  A vanishing pattern that is not
    monotone across the p grid is reported via ``indeterminate`` rather
    than raised.
    """
    p_grid = np.asarray(p_grid, dtype=float)
    levels = np.asarray(levels, dtype=int)
    if p_grid.size < 2 or np.any(np.diff(p_grid) <= 0):
        raise ValueError("p_grid must be increasing with at least 2 entries")
    if p_grid[0] < 1.0 or p_grid[-1] > 8.0:
        raise ValueError("p_grid must lie in [1, 8]")
    if levels.size < 3:
        raise ValueError("need at least 3 levels")

    level_values = [_values_on_level(samples, grid, seq, n) for n in levels]
    abs_incs = [np.abs(np.diff(v)) for v in level_values]

    def sums_for(p: float) -> np.ndarray:
        return np.array([np.sum(a ** p) for a in abs_incs])

    def slope_for(sums: np.ndarray) -> float:
        if np.any(sums <= 0.0):
            return float("-inf")  # exact zero: already vanished
        return float(np.polyfit(levels, np.log(sums), 1)[0])

    all_sums = np.array([sums_for(p) for p in p_grid])
    slopes = np.array([slope_for(s) for s in all_sums])
    vanish = slopes < 0.0

    if not vanish.any():
        return VariationResult(index_hat=float("nan"), p_grid=p_grid, levels=levels,
                               sums=all_sums, slopes=slopes, indeterminate=True)
    first = int(np.argmax(vanish))
    indeterminate = not bool(np.all(vanish[first:]))
    if first == 0:
        return VariationResult(index_hat=float(p_grid[0]), p_grid=p_grid, levels=levels,
                               sums=all_sums, slopes=slopes, indeterminate=indeterminate)
    lo, hi = float(p_grid[first - 1]), float(p_grid[first])
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if slope_for(sums_for(mid)) < 0.0:
            hi = mid
        else:
            lo = mid
    return VariationResult(index_hat=0.5 * (lo + hi), p_grid=p_grid, levels=levels,
                           sums=all_sums, slopes=slopes, indeterminate=indeterminate)


def scaled_qv(samples, grid, seq: PartitionSequence, H: float, t: float,
              level: int) -> float:
    """count^{2H-1} * sum_{right endpoint <= t} |dx|^2, count = floor(t/|pi^n|).

    Requires the level to be uniform.  At H = 1/2 this is the plain
    quadratic variation; for Hurst-H processes the ensemble mean tends to
    t^{2H}.
    """
    if not 0.0 < H < 1.0:
        raise ValueError("H must lie in (0, 1)")
    pts = seq.points(level)
    gaps = np.diff(pts)
    if not np.allclose(gaps, gaps[0], rtol=1e-12, atol=0.0):
        raise UnsupportedPartitionError(f"level {level} is not uniform")
    v = _values_on_level(samples, grid, seq, level)
    mesh = float(gaps[0])
    count = int(np.floor(t / mesh + 1e-12))
    if count <= 0:
        return 0.0
    # increments with right endpoint <= t
    last = min(int(np.searchsorted(pts, t * (1 + 1e-15), side="right")) - 1, pts.size - 1)
    qv = float(np.sum(np.diff(v[: last + 1]) ** 2))
    return count ** (2.0 * H - 1.0) * qv
