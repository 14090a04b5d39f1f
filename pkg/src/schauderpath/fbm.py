"""Closed-form moments of fractional-Brownian Schauder coefficients.

For a tent with support triple (t1, t2, t3) the coefficient of fBM with
Hurst index H is Gaussian; its variance, the covariance between any two
coefficients, and the covariance with the endpoint value B^H(1) all have
closed forms built from the increment covariance
2 E[(B(t)-B(s))(B(v)-B(u))] = |t-u|^{2H} + |s-v|^{2H} - |t-v|^{2H} - |s-u|^{2H}.

The full coefficient covariance matrix (dense, level-major flat index) is
assembled from these formulas and factorized with a jitter ladder: the
matrix is PSD in exact arithmetic, so only roundoff-scale diagonal boosts
are ever needed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .basis import SchauderBasis, SupportTriple, basis_matrix

__all__ = [
    "HurstIndex",
    "XiTerms",
    "CoeffCovariance",
    "NumericalError",
    "fbm_kernel",
    "bridge_kernel",
    "xi_terms",
    "coeff_variance",
    "dyadic_coeff_variance",
    "coeff_covariance",
    "dyadic_coeff_covariance",
    "endpoint_covariance",
    "assemble_covariance",
    "reconstruct_kernel",
    "cholesky_psd",
    "covariance_to_binary",
    "covariance_from_binary",
]


class NumericalError(RuntimeError):
    """Factorization failed beyond the jitter ladder."""


@dataclass(frozen=True)
class HurstIndex:
    H: float

    def __post_init__(self):
        if not 0.0 < self.H < 1.0:
            raise ValueError("Hurst index must lie in (0, 1)")


def _check_H(H: float) -> float:
    H = float(H)
    if not 0.0 < H < 1.0:
        raise ValueError("Hurst index must lie in (0, 1)")
    return H


def fbm_kernel(t, s, H: float):
    """E[B^H(t) B^H(s)] = (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    h2 = 2.0 * H
    return 0.5 * (np.abs(t) ** h2 + np.abs(s) ** h2 - np.abs(t - s) ** h2)


def bridge_kernel(t, s, H: float):
    """Covariance of B^H(t) - t B^H(1) on [0, 1]."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    return (fbm_kernel(t, s, H) - t * fbm_kernel(s, 1.0, H)
            - s * fbm_kernel(t, 1.0, H) + t * s)


@dataclass(frozen=True)
class XiTerms:
    xi11: float
    xi22: float
    xi21: float
    xi12: float


def _xi_arrays(a1, a2, a3, b1, b2, b3, H):
    """The four increment covariances for triple arrays a and b."""
    h2 = 2.0 * H
    p = lambda z: np.abs(z) ** h2
    xi11 = 0.5 * (p(a1 - b2) + p(a2 - b1) - p(a1 - b1) - p(a2 - b2))
    xi22 = 0.5 * (p(a2 - b3) + p(a3 - b2) - p(a2 - b2) - p(a3 - b3))
    xi21 = 0.5 * (p(a2 - b2) + p(a3 - b1) - p(a2 - b1) - p(a3 - b2))
    xi12 = 0.5 * (p(a1 - b3) + p(a2 - b2) - p(a1 - b2) - p(a2 - b3))
    return xi11, xi22, xi21, xi12


def xi_terms(sup1: SupportTriple, sup2: SupportTriple, H: float) -> XiTerms:
    H = _check_H(H)
    xi11, xi22, xi21, xi12 = _xi_arrays(sup1.t1, sup1.t2, sup1.t3,
                                        sup2.t1, sup2.t2, sup2.t3, H)
    return XiTerms(float(xi11), float(xi22), float(xi21), float(xi12))


def coeff_variance(sup: SupportTriple, H: float) -> float:
    """Variance of the fBM coefficient on a support triple."""
    H = _check_H(H)
    d1, d2 = sup.d1, sup.d2
    h2 = 2.0 * H
    num = (d2 ** 2 * d1 ** h2 + d1 ** 2 * d2 ** h2
           - d1 * d2 * ((d1 + d2) ** h2 - d1 ** h2 - d2 ** h2))
    return float(num / (d1 * d2 * (d1 + d2)))


def dyadic_coeff_variance(m: int, H: float) -> float:
    """Dyadic closed form |2 - 2^{2H-1}| 2^{(m+1)(1-2H)} on [0, 1]."""
    H = _check_H(H)
    return abs(2.0 - 2.0 ** (2.0 * H - 1.0)) * 2.0 ** ((m + 1) * (1.0 - 2.0 * H))


def coeff_covariance(sup1: SupportTriple, sup2: SupportTriple, H: float) -> float:
    """Covariance of the two fBM coefficients via the xi combination."""
    H = _check_H(H)
    xi11, xi22, xi21, xi12 = _xi_arrays(sup1.t1, sup1.t2, sup1.t3,
                                        sup2.t1, sup2.t2, sup2.t3, H)
    d1, d2 = sup1.d1, sup1.d2
    e1, e2 = sup2.d1, sup2.d2
    num = d2 * e2 * xi11 + d1 * e1 * xi22 - d1 * e2 * xi21 - e1 * d2 * xi12
    den = np.sqrt(d1 * d2 * (d1 + d2)) * np.sqrt(e1 * e2 * (e1 + e2))
    return float(num / den)


def dyadic_coeff_covariance(m: int, k: int, mp: int, kp: int, H: float) -> float:
    """Dyadic reduction 2^{(m+m')/2} (xi11 + xi22 - xi21 - xi12) on [0, 1]."""
    H = _check_H(H)
    a = SupportTriple(2 * k / 2 ** (m + 1), (2 * k + 1) / 2 ** (m + 1), (2 * k + 2) / 2 ** (m + 1))
    b = SupportTriple(2 * kp / 2 ** (mp + 1), (2 * kp + 1) / 2 ** (mp + 1), (2 * kp + 2) / 2 ** (mp + 1))
    xi = xi_terms(a, b, H)
    return 2.0 ** (0.5 * (m + mp)) * (xi.xi11 + xi.xi22 - xi.xi21 - xi.xi12)


def _endpoint_cov_arrays(t1, t2, t3, H):
    h2 = 2.0 * H
    p = lambda z: np.abs(z) ** h2
    d1, d2 = t2 - t1, t3 - t2
    den = 2.0 * np.sqrt(d1 * d2 * (d1 + d2))
    return (d2 * (p(1.0 - t1) + p(t2) - p(1.0 - t2) - p(t1))
            - d1 * (p(1.0 - t2) + p(t3) - p(1.0 - t3) - p(t2))) / den


def endpoint_covariance(sup: SupportTriple, H: float, T: float = 1.0) -> float:
    """Covariance between B^H(1) and the coefficient; horizon must be 1."""
    H = _check_H(H)
    if T != 1.0:
        raise ValueError("endpoint covariance is defined for the unit horizon only")
    return float(_endpoint_cov_arrays(sup.t1, sup.t2, sup.t3, H))


# ------------------------------------------------------------- assembly

def cholesky_psd(mat: np.ndarray, jitter_start: float = 1e-12,
                 jitter_max: float = 1e-6) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor with a doubling diagonal jitter ladder.

    The jitter is eps * mean(diagonal) with eps doubling from
    ``jitter_start`` to ``jitter_max``; returns (factor, applied jitter).
    """
    try:
        return np.linalg.cholesky(mat), 0.0
    except np.linalg.LinAlgError:
        pass
    mean_diag = float(np.mean(np.diagonal(mat)))
    work = mat.copy()
    applied = 0.0
    eps = jitter_start
    while eps <= jitter_max * (1.0 + 1e-12):
        bump = eps * mean_diag - applied
        work[np.diag_indices_from(work)] += bump
        applied = eps * mean_diag
        try:
            return np.linalg.cholesky(work), applied
        except np.linalg.LinAlgError:
            eps *= 2.0
    try:
        lo = float(np.linalg.eigvalsh(mat)[0])
    except np.linalg.LinAlgError:  # pragma: no cover
        lo = float("nan")
    raise NumericalError(
        f"matrix not factorizable at jitter {jitter_max:g}*mean-diag; smallest eigenvalue ~ {lo:.3e}"
    )


class CoeffCovariance:
    """Dense coefficient covariance with its Cholesky factor.

    Flat index follows the basis (level-major); when the endpoint value is
    included it occupies index 0 and all coefficient indices shift by 1.
    """

    def __init__(self, H, matrix, basis: SchauderBasis, include_endpoint: bool,
                 factor, jitter: float):
        self.H = H
        self.matrix = matrix
        self.basis = basis
        self.include_endpoint = include_endpoint
        self.factor = factor
        self.jitter = jitter
        self.sigmas = np.sqrt(np.diagonal(matrix).copy())

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def offset(self) -> int:
        return 1 if self.include_endpoint else 0

    def flat_index(self, m: int, k: int) -> int:
        if m == -1:
            if not self.include_endpoint:
                raise ValueError("endpoint row not included in this matrix")
            return 0
        return self.basis.flat_index(m, k) + self.offset

    def entry(self, m: int, k: int, mp: int, kp: int) -> float:
        return float(self.matrix[self.flat_index(m, k), self.flat_index(mp, kp)])

    def correlation(self) -> np.ndarray:
        return self.matrix / np.outer(self.sigmas, self.sigmas)


def assemble_covariance(basis: SchauderBasis, H: float,
                        include_endpoint: bool = False,
                        jitter_start: float = 1e-12, jitter_max: float = 1e-6,
                        max_dim: int | None = None) -> CoeffCovariance:
    """Fill the symmetric coefficient covariance and factorize it.

    The fill runs over upper-triangular row blocks of the closed-form
    covariance (exactly the pairwise ``coeff_covariance`` values) and
    mirrors them, so the result is symmetric by construction.
    """
    H = _check_H(H)
    D = basis.size
    if max_dim is not None and D > max_dim:
        raise ValueError(f"covariance dimension {D} exceeds the guard {max_dim}")
    if include_endpoint and basis.seq.T != 1.0:
        raise ValueError("endpoint term requires the unit horizon")

    t1 = np.concatenate([basis.level(m).t1 for m in range(basis.n_levels)])
    t2 = np.concatenate([basis.level(m).t2 for m in range(basis.n_levels)])
    t3 = np.concatenate([basis.level(m).t3 for m in range(basis.n_levels)])
    d1, d2 = t2 - t1, t3 - t2
    s = np.sqrt(d1 * d2 * (d1 + d2))

    off = 1 if include_endpoint else 0
    n = D + off
    sigma = np.empty((n, n))

    def block(rows: slice, cols: slice) -> np.ndarray:
        a1, a2, a3 = t1[rows, None], t2[rows, None], t3[rows, None]
        b1, b2, b3 = t1[None, cols], t2[None, cols], t3[None, cols]
        xi11, xi22, xi21, xi12 = _xi_arrays(a1, a2, a3, b1, b2, b3, H)
        num = (d2[rows, None] * d2[None, cols] * xi11
               + d1[rows, None] * d1[None, cols] * xi22
               - d1[rows, None] * d2[None, cols] * xi21
               - d1[None, cols] * d2[rows, None] * xi12)
        return num / (s[rows, None] * s[None, cols])

    bs = max(1, int(4e6 // max(D, 1)))
    starts = list(range(0, D, bs))
    for i0 in starts:
        i1 = min(i0 + bs, D)
        diag = block(slice(i0, i1), slice(i0, i1))
        sigma[off + i0:off + i1, off + i0:off + i1] = 0.5 * (diag + diag.T)
        for j0 in range(i1, D, bs):
            j1 = min(j0 + bs, D)
            blk = block(slice(i0, i1), slice(j0, j1))
            sigma[off + i0:off + i1, off + j0:off + j1] = blk
            sigma[off + j0:off + j1, off + i0:off + i1] = blk.T
    # diagonal from the one-division variance formula (exact at H = 1/2,
    # where the block route loses a ulp through sqrt(x)^2)
    h2 = 2.0 * H
    var_num = (d2 ** 2 * d1 ** h2 + d1 ** 2 * d2 ** h2
               - d1 * d2 * ((d1 + d2) ** h2 - d1 ** h2 - d2 ** h2))
    sigma[np.arange(off, n), np.arange(off, n)] = var_num / (d1 * d2 * (d1 + d2))
    if include_endpoint:
        row = _endpoint_cov_arrays(t1, t2, t3, H)
        sigma[0, 0] = 1.0  # Var[B^H(1)] on the unit horizon
        sigma[0, 1:] = row
        sigma[1:, 0] = row

    factor, jitter = cholesky_psd(sigma, jitter_start, jitter_max)
    return CoeffCovariance(H=H, matrix=sigma, basis=basis,
                           include_endpoint=include_endpoint,
                           factor=factor, jitter=jitter)


def reconstruct_kernel(cov: CoeffCovariance, times) -> np.ndarray:
    """Truncated kernel sum_{(m,k),(m',k')} sigma e_{m,k}(t) e_{m',k'}(s).

    With the endpoint included this converges to the fBM kernel; without
    it, to the bridge kernel.
    """
    t = np.asarray(times, dtype=float)
    E = basis_matrix(cov.basis, t)
    if cov.include_endpoint:
        E = np.vstack([t[None, :], E])  # e_{-1,0}(t) = t on [0, 1]
    return E.T @ cov.matrix @ E


# ------------------------------------------------------------- binary dump

def covariance_to_binary(cov: CoeffCovariance, path_base: str,
                         with_factor: bool = True) -> None:
    """Row-major float64 dump of the matrix (and optionally the lower
    Cholesky factor) plus a JSON sidecar for audit."""
    mat_path = f"{path_base}.bin"
    cov.matrix.astype("<f8").tofile(mat_path)
    with open(mat_path, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    sidecar = {
        "dimension": cov.dim,
        "H": cov.H,
        "level": cov.basis.max_level,
        "jitter": cov.jitter,
        "include_endpoint": cov.include_endpoint,
        "sha256": digest,
    }
    if with_factor:
        cov.factor.astype("<f8").tofile(f"{path_base}_factor.bin")
        sidecar["factor_file"] = f"{path_base}_factor.bin"
    with open(f"{path_base}.json", "w") as fh:
        json.dump(sidecar, fh, indent=2)


def covariance_from_binary(path_base: str) -> tuple[np.ndarray, dict]:
    """Load the matrix and sidecar; the factor (when dumped) is at
    sidecar['factor_file'] in the same layout."""
    with open(f"{path_base}.json") as fh:
        sidecar = json.load(fh)
    n = sidecar["dimension"]
    mat = np.fromfile(f"{path_base}.bin", dtype="<f8").reshape(n, n)
    return mat, sidecar
