"""Coefficient sampling and path-ensemble generation.

Fake Brownian paths use independent mean-zero unit-variance coefficients
(uniform, centred/scaled beta, three-point, or a per-level-parity mix of
normal and uniform).  Fake fractional paths couple the coefficients
through a Gaussian copula whose correlation matrix comes from the fBM
coefficient covariance; marginals are then restored by the inverse CDF
and scaled to the target standard deviations.

The copula reproduces the target covariance exactly only for normal
marginals.  The optional Pearson correction pre-adjusts the normal
correlation per pair (closed form 2 sin(pi rho / 6) for uniform pairs,
a scale factor for normal/uniform pairs, Gauss-Hermite tabulation plus
monotone inversion otherwise) so the output Pearson correlations match.

Reproducibility: every replica draws from its own counter-based stream,
Philox keyed by (master seed, replica index), so results are independent
of chunking or generation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.special import betaincinv, ndtr, ndtri

from . import __version__
from .basis import CoefficientField, SchauderBasis, basis_matrix, enumerate_supports, _refine_paths
from .fbm import CoeffCovariance, assemble_covariance, cholesky_psd
from .partition import PartitionSequence, build_dyadic, build_shifted_binary

__all__ = [
    "MarginalSpec",
    "PathConfig",
    "PathEnsemble",
    "LAW_NAMES",
    "sample_law",
    "law_ppf",
    "draw_iid_coeffs",
    "draw_correlated_coeffs",
    "fake_bm_paths",
    "fake_fbm_paths",
    "sample_path_values",
    "deterministic_example_a",
    "deterministic_example_b",
    "apply_bernoulli_mask",
    "build_sequence",
    "basis_for_config",
]

_SQRT3 = math.sqrt(3.0)
_SQRT20 = math.sqrt(20.0)
_SQRT8 = math.sqrt(8.0)


def _three_point(rng, size):
    u = rng.random(size)
    return np.where(u < 1 / 6, _SQRT3, np.where(u < 1 / 3, -_SQRT3, 0.0))


# samplers and inverse CDFs of the shipped mean-0 variance-1 marginals;
# all are bounded except the normal, so the sub-Gaussian tail condition
# holds trivially (P[|theta| >= d] = 0 beyond the support bound: sqrt(3)
# for the uniform and three-point laws, sqrt(20)/2 for beta22,
# sqrt(8)/2 for betaHalfHalf; the normal satisfies it with C1=1, C2=1).
_LAWS = {
    "standard-normal": {
        "sample": lambda rng, n: rng.standard_normal(n),
        "ppf": ndtri,
        "continuous": True,
    },
    "uniform-sqrt3": {
        "sample": lambda rng, n: rng.uniform(-_SQRT3, _SQRT3, n),
        "ppf": lambda u: _SQRT3 * (2.0 * u - 1.0),
        "continuous": True,
    },
    "beta22": {
        "sample": lambda rng, n: _SQRT20 * (rng.beta(2.0, 2.0, n) - 0.5),
        "ppf": lambda u: _SQRT20 * (betaincinv(2.0, 2.0, u) - 0.5),
        "continuous": True,
    },
    "betaHalfHalf": {
        "sample": lambda rng, n: _SQRT8 * (rng.beta(0.5, 0.5, n) - 0.5),
        "ppf": lambda u: _SQRT8 * (betaincinv(0.5, 0.5, u) - 0.5),
        "continuous": True,
    },
    "threePoint": {
        "sample": _three_point,
        "ppf": None,
        "continuous": False,
    },
}

LAW_NAMES = tuple(_LAWS)


def _law(name: str) -> dict:
    try:
        return _LAWS[name]
    except KeyError:
        raise ValueError(f"unknown marginal law {name!r}; known: {', '.join(LAW_NAMES)}") from None


def sample_law(name: str, rng, size: int) -> np.ndarray:
    return _law(name)["sample"](rng, size)


def law_ppf(name: str, u):
    ppf = _law(name)["ppf"]
    if ppf is None:
        raise ValueError(f"law {name!r} has no continuous inverse CDF")
    return ppf(np.asarray(u, dtype=float))


@dataclass(frozen=True)
class MarginalSpec:
    """Coefficient law, either one name or a per-level-parity mix."""

    law: str = "standard-normal"
    mixing: dict | None = None   # {"even": law, "odd": law}

    def __post_init__(self):
        if self.mixing is not None:
            if set(self.mixing) != {"even", "odd"}:
                raise ValueError("mixing must map exactly the keys 'even' and 'odd'")
            for v in self.mixing.values():
                _law(v)
        else:
            _law(self.law)

    @classmethod
    def mixed(cls) -> "MarginalSpec":
        """Normal coefficients on odd levels, uniform on even levels."""
        return cls(mixing={"even": "uniform-sqrt3", "odd": "standard-normal"})

    def law_for_level(self, m: int) -> str:
        if self.mixing is None:
            return self.law
        return self.mixing["even" if m % 2 == 0 else "odd"]

    def to_dict(self) -> dict:
        return {"law": self.law, "mixing": dict(self.mixing) if self.mixing else None}


@dataclass(frozen=True)
class PathConfig:
    """Everything needed to regenerate an ensemble bit-for-bit.

    depth is the finest partition level: paths live on the level-`depth`
    grid and coefficients span levels 0..depth-1.  H = None means
    Brownian (independent coefficients).  include_endpoint adds the
    linear term Z t (Z = process value at T = 1), which is what makes the
    second moments match the unanchored process.
    """

    seed: int
    depth: int
    count: int
    kind: str = "dyadic"
    ratio: float = 2.5
    T: float = 1.0
    H: float | None = None
    marginal: MarginalSpec = field(default_factory=MarginalSpec)
    pearson_correct: bool = False
    include_endpoint: bool = False

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.kind not in ("dyadic", "shifted-binary"):
            raise ValueError("kind must be 'dyadic' or 'shifted-binary'")
        if self.H is not None and not 0.0 < self.H < 1.0:
            raise ValueError("H must lie in (0, 1)")
        if self.H is not None and self.T != 1.0:
            raise ValueError("the fractional pipeline works on the unit horizon")
        if self.include_endpoint and self.T != 1.0:
            raise ValueError("include_endpoint requires the unit horizon")


@dataclass
class PathEnsemble:
    grid: np.ndarray
    values: np.ndarray        # shape (count, grid.size)
    manifest: dict

    @property
    def count(self) -> int:
        return self.values.shape[0]

    def values_at(self, times) -> np.ndarray:
        """Columns at exactly-matching grid times; (count, len(times))."""
        t = np.atleast_1d(np.asarray(times, dtype=float))
        idx = np.searchsorted(self.grid, t)
        if np.any(idx >= self.grid.size) or np.any(self.grid[np.minimum(idx, self.grid.size - 1)] != t):
            raise ValueError("requested times are not grid points")
        out = self.values[:, idx]
        return out[:, 0] if np.ndim(times) == 0 else out


def build_sequence(config: PathConfig) -> PartitionSequence:
    if config.kind == "dyadic":
        return build_dyadic(config.T, config.depth)
    return build_shifted_binary(config.T, config.depth, config.ratio)


def basis_for_config(config: PathConfig, seq: PartitionSequence | None = None) -> SchauderBasis:
    if seq is None:
        seq = build_sequence(config)
    return enumerate_supports(seq, config.depth - 1)


def _replica_rng(master_seed: int, replica: int):
    key = np.array([master_seed & 0xFFFFFFFFFFFFFFFF, replica], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw_iid_flat(spec: MarginalSpec, basis: SchauderBasis, rng) -> np.ndarray:
    parts = [sample_law(spec.law_for_level(m), rng, basis.level_size(m))
             for m in range(basis.n_levels)]
    return np.concatenate(parts)


def draw_iid_coeffs(spec: MarginalSpec, basis: SchauderBasis, seed: int) -> CoefficientField:
    """One independent coefficient field (replica stream 0 of the seed)."""
    flat = _draw_iid_flat(spec, basis, _replica_rng(seed, 0))
    return CoefficientField.from_flat(flat, basis)


# ----------------------------------------------------------- copula machinery

_SQRT_3_OVER_PI = math.sqrt(3.0 / math.pi)
_CORR_TABLE_CACHE: dict = {}
_STEIN_CACHE: dict = {}


def _hermite_z_w(nodes: int = 64):
    x, w = np.polynomial.hermite.hermgauss(nodes)
    return math.sqrt(2.0) * x, w


def _stein_factor(name: str, nodes: int = 64) -> float:
    """E[Z F^{-1}(Phi(Z))]: the achieved correlation of a (normal, F) pair
    under the Gaussian copula is exactly this factor times rho_Z."""
    if name not in _STEIN_CACHE:
        z, w = _hermite_z_w(nodes)
        f = law_ppf(name, ndtr(z))
        _STEIN_CACHE[name] = float(np.sum(w * z * f) / math.sqrt(math.pi))
    return _STEIN_CACHE[name]


def _corr_table(name_a: str, name_b: str, nodes: int = 64, grid_size: int = 41):
    """Map rho_Z -> achieved Pearson correlation, by 2D Gauss-Hermite.

    Only for bounded marginals; (normal, X) pairs go through the exact
    Stein factor instead (the normal inverse CDF overflows at the
    quadrature tails).
    """
    key = tuple(sorted((name_a, name_b)))
    if key in _CORR_TABLE_CACHE:
        return _CORR_TABLE_CACHE[key]
    z, w = _hermite_z_w(nodes)
    fa = law_ppf(key[0], ndtr(z))
    rho_grid = np.linspace(-0.999, 0.999, grid_size)
    achieved = np.empty(grid_size)
    for i, rho in enumerate(rho_grid):
        z2 = rho * z[:, None] + math.sqrt(1.0 - rho * rho) * z[None, :]
        fb = law_ppf(key[1], ndtr(z2))
        achieved[i] = (w[:, None] * w[None, :] * fa[:, None] * fb).sum() / math.pi
    _CORR_TABLE_CACHE[key] = (rho_grid, achieved)
    return rho_grid, achieved


def _corrected_rho_z(name_a: str, name_b: str, rho_target: np.ndarray):
    """Normal correlation producing the target Pearson correlation.

    Returns (rho_z, fallback_mask): entries whose target cannot be
    bracketed keep the uncorrected value and are flagged.
    """
    pair = tuple(sorted((name_a, name_b)))
    if pair == ("standard-normal", "standard-normal"):
        return rho_target, np.zeros(rho_target.shape, dtype=bool)
    if pair == ("uniform-sqrt3", "uniform-sqrt3"):
        return 2.0 * np.sin(np.pi * rho_target / 6.0), np.zeros(rho_target.shape, dtype=bool)
    if pair == ("standard-normal", "uniform-sqrt3"):
        rho_z = rho_target / _SQRT_3_OVER_PI
        bad = np.abs(rho_z) > 1.0
        return np.where(bad, rho_target, rho_z), bad
    if "standard-normal" in pair:
        other = pair[0] if pair[1] == "standard-normal" else pair[1]
        rho_z = rho_target / _stein_factor(other)
        bad = np.abs(rho_z) > 1.0
        return np.where(bad, rho_target, rho_z), bad
    rho_grid, achieved = _corr_table(*pair)
    bad = (rho_target < achieved[0]) | (rho_target > achieved[-1])
    rho_z = np.interp(rho_target, achieved, rho_grid)
    return np.where(bad, rho_target, rho_z), bad


class _CopulaSampler:
    """Precomputed Cholesky + marginal transforms for correlated draws."""

    def __init__(self, cov: CoeffCovariance, spec: MarginalSpec, pearson_correct: bool):
        self.cov = cov
        basis = cov.basis
        names = []
        if cov.include_endpoint:
            names.append("standard-normal")  # the endpoint keeps a Gaussian marginal
        for m in range(basis.n_levels):
            names.extend([spec.law_for_level(m)] * basis.level_size(m))
        self.names = np.array(names)
        for nm in np.unique(self.names):
            if not _law(nm)["continuous"]:
                raise ValueError(f"law {nm!r} is discrete; copula mode needs continuous marginals")
        R = cov.correlation()
        self.n_fallback = 0
        if pearson_correct:
            R = self._corrected(R)
        R = np.clip(R, -1.0, 1.0)
        np.fill_diagonal(R, 1.0)
        self.chol, self.jitter = cholesky_psd(R)
        self.pearson_correct = pearson_correct

    def _corrected(self, R: np.ndarray) -> np.ndarray:
        out = np.array(R, copy=True)
        off_diag = ~np.eye(R.shape[0], dtype=bool)  # the diagonal stays 1
        uniq = np.unique(self.names)
        for i, a in enumerate(uniq):
            sel_a = self.names == a
            for b in uniq[i:]:
                sel_b = self.names == b
                mask = np.outer(sel_a, sel_b)
                if a != b:
                    mask |= np.outer(sel_b, sel_a)
                mask &= off_diag
                vals, bad = _corrected_rho_z(a, b, R[mask])
                out[mask] = vals
                self.n_fallback += int(bad.sum())
        return out

    def draw_block(self, z: np.ndarray) -> np.ndarray:
        """Map (n, dim) standard normals to coefficient rows."""
        y = z @ self.chol.T
        out = np.empty_like(y)
        for nm in np.unique(self.names):
            cols = self.names == nm
            if nm == "standard-normal":
                out[:, cols] = y[:, cols]  # identity transform, bit-exact
            else:
                out[:, cols] = law_ppf(nm, ndtr(y[:, cols]))
        return out * self.cov.sigmas


def draw_correlated_coeffs(cov: CoeffCovariance, spec: MarginalSpec, seed: int,
                           pearson_correct: bool = False) -> CoefficientField:
    """One covariance-matched coefficient field via the Gaussian copula."""
    sampler = _CopulaSampler(cov, spec, pearson_correct)
    z = _replica_rng(seed, 0).standard_normal(cov.dim)
    flat = sampler.draw_block(z[None, :])[0]
    if cov.include_endpoint:
        flat = flat[1:]
    return CoefficientField.from_flat(flat, cov.basis)


# ----------------------------------------------------------- ensembles

def _base_manifest(config: PathConfig) -> dict:
    cfg = asdict(config)
    cfg["marginal"] = config.marginal.to_dict()
    return {
        "config": cfg,
        "seed": config.seed,
        "H": config.H,
        "T": config.T,
        "include_endpoint": config.include_endpoint,
        "rng": "philox key=[seed, replica]; endpoint draw first, then coefficients level-major",
        "version": __version__,
        "jitter": 0.0,
        "warnings": [],
    }


def _chunks(count: int, dim: int):
    step = max(1, min(count, int(4e6 // max(dim, 1)) or 1))
    for lo in range(0, count, step):
        yield lo, min(lo + step, count)


def _iid_coeff_block(config: PathConfig, basis: SchauderBasis, lo: int, hi: int):
    d = basis.size
    block = np.empty((hi - lo, d))
    z = np.empty(hi - lo) if config.include_endpoint else None
    for r in range(lo, hi):
        rng = _replica_rng(config.seed, r)
        if z is not None:  # endpoint first, matching the copula draw order
            z[r - lo] = rng.standard_normal()
        block[r - lo] = _draw_iid_flat(config.marginal, basis, rng)
    return block, z


def fake_bm_paths(config: PathConfig) -> PathEnsemble:
    """Ensemble of fake Brownian paths on the full level-depth grid."""
    if config.H is not None:
        raise ValueError("fake_bm_paths needs H = None; use fake_fbm_paths")
    seq = build_sequence(config)
    basis = basis_for_config(config, seq)
    grid = seq.points(config.depth)
    values = np.empty((config.count, grid.size))
    for lo, hi in _chunks(config.count, basis.size):
        block, z = _iid_coeff_block(config, basis, lo, hi)
        values[lo:hi] = _refine_paths(block, 0.0, 0.0, basis)
        if z is not None:
            values[lo:hi] += z[:, None] * grid[None, :]
    return PathEnsemble(grid=grid, values=values, manifest=_base_manifest(config))


def _copula_block(config: PathConfig, sampler: _CopulaSampler, lo: int, hi: int):
    dim = sampler.cov.dim
    z = np.empty((hi - lo, dim))
    for r in range(lo, hi):
        z[r - lo] = _replica_rng(config.seed, r).standard_normal(dim)
    theta = sampler.draw_block(z)
    if sampler.cov.include_endpoint:
        return theta[:, 1:], theta[:, 0]
    return theta, None


def fake_fbm_paths(config: PathConfig, cov: CoeffCovariance | None = None) -> PathEnsemble:
    """Ensemble of fake fractional paths (copula-coupled coefficients)."""
    if config.H is None:
        raise ValueError("fake_fbm_paths needs a Hurst index")
    seq = build_sequence(config)
    basis = basis_for_config(config, seq)
    if cov is None:
        cov = assemble_covariance(basis, config.H, include_endpoint=config.include_endpoint)
    if cov.include_endpoint != config.include_endpoint or cov.H != config.H:
        raise ValueError("covariance does not match the config (H / endpoint flag)")
    if cov.basis.size != basis.size:
        raise ValueError("covariance was assembled for a different basis")
    sampler = _CopulaSampler(cov, config.marginal, config.pearson_correct)
    grid = seq.points(config.depth)
    values = np.empty((config.count, grid.size))
    for lo, hi in _chunks(config.count, cov.dim):
        block, z = _copula_block(config, sampler, lo, hi)
        values[lo:hi] = _refine_paths(block, 0.0, 0.0, basis)
        if z is not None:
            values[lo:hi] += z[:, None] * grid[None, :]
    manifest = _base_manifest(config)
    manifest["jitter"] = cov.jitter
    manifest["correlation_jitter"] = sampler.jitter
    if sampler.n_fallback:
        manifest["warnings"].append(
            f"pearson correction fell back to uncorrected on {sampler.n_fallback} pairs")
    return PathEnsemble(grid=grid, values=values, manifest=manifest)


def sample_path_values(config: PathConfig, times, cov: CoeffCovariance | None = None):
    """Path values at selected times only, without storing full paths.

    Returns (values, manifest) with values of shape (count, len(times)).
    Uses the same per-replica streams as the full-path generators, so the
    coefficients agree draw-for-draw with fake_bm_paths / fake_fbm_paths.
    """
    t = np.asarray(times, dtype=float)
    seq = build_sequence(config)
    basis = basis_for_config(config, seq)
    E = basis_matrix(basis, t)
    values = np.empty((config.count, t.size))
    manifest = _base_manifest(config)
    if config.H is None:
        for lo, hi in _chunks(config.count, basis.size):
            block, z = _iid_coeff_block(config, basis, lo, hi)
            values[lo:hi] = block @ E
            if z is not None:
                values[lo:hi] += z[:, None] * t[None, :]
    else:
        if cov is None:
            cov = assemble_covariance(basis, config.H, include_endpoint=config.include_endpoint)
        sampler = _CopulaSampler(cov, config.marginal, config.pearson_correct)
        for lo, hi in _chunks(config.count, cov.dim):
            block, z = _copula_block(config, sampler, lo, hi)
            values[lo:hi] = block @ E
            if z is not None:
                values[lo:hi] += z[:, None] * t[None, :]
        manifest["jitter"] = cov.jitter
        if sampler.n_fallback:
            manifest["warnings"].append(
                f"pearson correction fell back to uncorrected on {sampler.n_fallback} pairs")
    return values, manifest


# ----------------------------------------------------------- deterministic fields

def deterministic_example_a(eps0: float, depth: int) -> CoefficientField:
    """Sparse field theta_{m,k} = 2^{eps0 m} on k-multiples of floor(2^m / m^(1/4)).

    Dyadic levels only.  The resulting path has Hölder exponent
    1/2 - eps0 while its quadratic variation still vanishes, so the
    variation index stays at most 2.  Level 0 carries the single
    coefficient at k = 0 (the step is undefined at m = 0).
    """
    if not 0.0 < eps0 < 1.0 / 3.0:
        raise ValueError("eps0 must lie in (0, 1/3)")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    levels = [np.array([1.0])]
    for m in range(1, depth):
        arr = np.zeros(2 ** m)
        step = int(2 ** m / m ** 0.25)
        ks = np.arange(0, 2 ** m, max(step, 1))
        arr[ks] = 2.0 ** (eps0 * m)
        levels.append(arr)
    return CoefficientField(levels=levels)


def deterministic_example_b(depth: int) -> CoefficientField:
    """Field theta_{m,k} = sqrt(m) on k-multiples of m (dyadic levels).

    The path is continuous, has unit quadratic variation slope and an
    infinite (1/2)-Hölder semi-norm, mimicking Brownian path properties
    without any Gaussian structure.
    """
    if depth < 2:
        raise ValueError("depth must be >= 2")
    levels = [np.zeros(1)]
    for m in range(1, depth):
        arr = np.zeros(2 ** m)
        arr[np.arange(0, 2 ** m, m)] = math.sqrt(m)
        levels.append(arr)
    return CoefficientField(levels=levels)


def apply_bernoulli_mask(field: CoefficientField, q: float, seed: int) -> CoefficientField:
    """Keep each coefficient independently with probability q, else zero it."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    rng = _replica_rng(seed, 0)
    levels = [arr * (rng.random(arr.size) < q) for arr in field.levels]
    return CoefficientField(levels=levels, x0=field.x0, xT=field.xT)
