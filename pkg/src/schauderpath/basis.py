"""Generalized Haar/Schauder system along a refining partition sequence.

Each level m contributes one tent function per point that is new in level
m+1.  A tent is described by its support triple (t1, t2, t3): it vanishes
outside [t1, t3], rises linearly on [t1, t2), peaks at t2 (the new point)
and falls back to zero at t3.  When a parent interval gains several new
points the triples are nested — they all share the parent's left endpoint
t1 and are ordered by their peak t2 — which keeps the underlying Haar
steps orthonormal.

Coefficients of a sampled path are weighted second differences at
(t1, t2, t3); no quadrature or interpolation is involved, which is why
they can be computed exactly from grid samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .partition import PartitionSequence, validate

__all__ = [
    "BasisIndex",
    "SupportTriple",
    "SchauderBasis",
    "CoefficientField",
    "enumerate_supports",
    "eval_schauder",
    "eval_haar",
    "decompose",
    "reconstruct",
    "reconstruct_on_grid",
    "basis_matrix",
    "check_continuity_condition",
    "coeffs_to_csv",
    "coeffs_from_csv",
]


@dataclass(frozen=True)
class BasisIndex:
    m: int
    k: int


@dataclass(frozen=True)
class SupportTriple:
    t1: float
    t2: float
    t3: float

    def __post_init__(self):
        if not (self.t1 < self.t2 < self.t3):
            raise ValueError("support triple must satisfy t1 < t2 < t3")

    @property
    def d1(self) -> float:
        return self.t2 - self.t1

    @property
    def d2(self) -> float:
        return self.t3 - self.t2

    @property
    def peak(self) -> float:
        """Tent height at t2: sqrt(d1 d2 / (d1 + d2))."""
        return float(np.sqrt(self.d1 * self.d2 / (self.d1 + self.d2)))


class _Level:
    """Support triples of one level, stored as flat arrays."""

    __slots__ = ("t1", "t2", "t3", "d1", "d2", "peak", "up", "down",
                 "i1", "i2", "i3", "parent_offsets")

    def __init__(self, t1, t2, t3, i1, i2, i3, parent_offsets):
        self.t1, self.t2, self.t3 = t1, t2, t3
        self.d1 = t2 - t1
        self.d2 = t3 - t2
        self.peak = np.sqrt(self.d1 * self.d2 / (self.d1 + self.d2))
        self.up = np.sqrt(self.d2 / (self.d1 * (self.d1 + self.d2)))
        self.down = np.sqrt(self.d1 / (self.d2 * (self.d1 + self.d2)))
        self.i1, self.i2, self.i3 = i1, i2, i3
        self.parent_offsets = parent_offsets

    @property
    def size(self) -> int:
        return self.t2.size


class SchauderBasis:
    """Tent system for levels 0..max_level of a partition sequence.

    The flat index runs level-major, k ascending within each level (k
    follows the peak position t2, left to right).
    """

    def __init__(self, seq: PartitionSequence, max_level: int, levels: list[_Level]):
        self.seq = seq
        self.max_level = max_level
        self._levels = levels
        sizes = np.array([lv.size for lv in levels], dtype=np.int64)
        self.level_offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.size = int(self.level_offsets[-1])
        self.grid = seq.points(max_level + 1)
        self.is_binary = all(
            np.all(np.diff(lv.parent_offsets) == 1) for lv in levels
        )

    @property
    def n_levels(self) -> int:
        return self.max_level + 1

    def level(self, m: int) -> _Level:
        return self._levels[m]

    def level_size(self, m: int) -> int:
        return self._levels[m].size

    def support(self, m: int, k: int) -> SupportTriple:
        lv = self._levels[m]
        return SupportTriple(float(lv.t1[k]), float(lv.t2[k]), float(lv.t3[k]))

    def flat_index(self, m: int, k: int) -> int:
        if not 0 <= k < self._levels[m].size:
            raise ValueError(f"k={k} outside I_{m}")
        return int(self.level_offsets[m]) + k

    def index_of_flat(self, j: int) -> BasisIndex:
        m = int(np.searchsorted(self.level_offsets, j, side="right")) - 1
        return BasisIndex(m, int(j - self.level_offsets[m]))

    def mesh(self, m: int) -> float:
        """Mesh of the level the peaks live on, |pi^{m+1}|."""
        return self.seq.mesh(m + 1)


def enumerate_supports(seq: PartitionSequence, max_level: int) -> SchauderBasis:
    """Build the tent system for levels 0..max_level.

    Requires max_level + 1 stored partition levels beyond level 0 and a
    finitely refining sequence (every parent interval gains a new point).
    """
    if max_level < 0:
        raise ValueError("max_level must be >= 0")
    if max_level + 1 > seq.depth:
        raise ValueError(
            f"max_level={max_level} needs partition depth {max_level + 1}, have {seq.depth}"
        )
    diag = validate(seq)
    if not diag.is_finitely_refining:
        raise ValueError("sequence is not finitely refining (a parent interval gains no point)")

    finest = seq.points(max_level + 1)
    levels = []
    for m in range(max_level + 1):
        coarse = seq.points(m)
        fine = seq.points(m + 1)
        p = np.searchsorted(fine, coarse)  # exact by construction (copied points)
        t1_l, t2_l, t3_l = [], [], []
        offsets = [0]
        for j in range(coarse.size - 1):
            lo, hi = p[j], p[j + 1]
            # new points t_{lo+1} .. t_{hi-1}; triples share the parent's left end
            for q in range(lo + 1, hi):
                t1_l.append(fine[lo])
                t2_l.append(fine[q])
                t3_l.append(fine[q + 1])
            offsets.append(len(t1_l))
        t1 = np.array(t1_l)
        t2 = np.array(t2_l)
        t3 = np.array(t3_l)
        i1 = np.searchsorted(finest, t1)
        i2 = np.searchsorted(finest, t2)
        i3 = np.searchsorted(finest, t3)
        levels.append(_Level(t1, t2, t3, i1, i2, i3, np.array(offsets, dtype=np.int64)))
    return SchauderBasis(seq, max_level, levels)


def _check_times(basis: SchauderBasis, t: np.ndarray) -> None:
    if np.any(t < 0.0) or np.any(t > basis.seq.T):
        raise ValueError("evaluation time outside [0, T]")


def _as_mk(idx) -> tuple[int, int]:
    if isinstance(idx, BasisIndex):
        return idx.m, idx.k
    return idx


def eval_schauder(basis: SchauderBasis, idx, t):
    """Tent value e_{m,k}(t); t may be scalar or array in [0, T]."""
    m, k = _as_mk(idx)
    lv = basis.level(m)
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    _check_times(basis, tt)
    t1, t2, t3 = lv.t1[k], lv.t2[k], lv.t3[k]
    out = np.where(
        (tt >= t1) & (tt < t2), lv.up[k] * (tt - t1),
        np.where((tt >= t2) & (tt < t3), lv.down[k] * (t3 - tt), 0.0),
    )
    return out if np.ndim(t) else float(out[0])


def eval_haar(basis: SchauderBasis, idx, t):
    """Two-step value psi_{m,k}(t): +up on [t1, t2), -down on [t2, t3)."""
    m, k = _as_mk(idx)
    lv = basis.level(m)
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    _check_times(basis, tt)
    t1, t2, t3 = lv.t1[k], lv.t2[k], lv.t3[k]
    out = np.where(
        (tt >= t1) & (tt < t2), lv.up[k],
        np.where((tt >= t2) & (tt < t3), -lv.down[k], 0.0),
    )
    return out if np.ndim(t) else float(out[0])


@dataclass
class CoefficientField:
    """Ragged coefficient array theta[m][k] plus the endpoint datum."""

    levels: list[np.ndarray]
    x0: float = 0.0
    xT: float = 0.0

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def theta(self, m: int, k: int) -> float:
        return float(self.levels[m][k])

    def flat(self) -> np.ndarray:
        return np.concatenate(self.levels) if self.levels else np.array([])

    @classmethod
    def from_flat(cls, values: np.ndarray, basis: SchauderBasis,
                  x0: float = 0.0, xT: float = 0.0) -> "CoefficientField":
        values = np.asarray(values, dtype=float)
        if values.size != basis.size:
            raise ValueError(f"flat vector has {values.size} entries, basis needs {basis.size}")
        offs = basis.level_offsets
        levels = [values[offs[m]:offs[m + 1]].copy() for m in range(basis.n_levels)]
        return cls(levels=levels, x0=x0, xT=xT)

    @classmethod
    def zeros(cls, basis: SchauderBasis, x0: float = 0.0, xT: float = 0.0) -> "CoefficientField":
        return cls(levels=[np.zeros(basis.level_size(m)) for m in range(basis.n_levels)],
                   x0=x0, xT=xT)

    def check_shape(self, basis: SchauderBasis) -> None:
        if self.n_levels > basis.n_levels:
            raise ValueError(f"field has {self.n_levels} levels, basis only {basis.n_levels}")
        for m, arr in enumerate(self.levels):
            if arr.size != basis.level_size(m):
                raise ValueError(
                    f"level {m}: field has {arr.size} coefficients, basis has {basis.level_size(m)}"
                )


def decompose(samples: np.ndarray, basis: SchauderBasis) -> CoefficientField:
    """Exact coefficients of a path sampled on the level-(max_level+1) grid.

    theta_{m,k} = [(x(t2)-x(t1)) d2 - (x(t3)-x(t2)) d1] / sqrt(d1 d2 (d1+d2)).
    """
    x = np.asarray(samples, dtype=float)
    if x.shape != basis.grid.shape:
        raise ValueError(f"need {basis.grid.size} samples on the level-{basis.max_level + 1} grid, got {x.shape}")
    levels = []
    for m in range(basis.n_levels):
        lv = basis.level(m)
        num = (x[lv.i2] - x[lv.i1]) * lv.d2 - (x[lv.i3] - x[lv.i2]) * lv.d1
        levels.append(num / np.sqrt(lv.d1 * lv.d2 * (lv.d1 + lv.d2)))
    return CoefficientField(levels=levels, x0=float(x[0]), xT=float(x[-1]))


def reconstruct_on_grid(field: CoefficientField, basis: SchauderBasis) -> np.ndarray:
    """Path values on the full level-(max_level+1) grid.

    Level-by-level refinement: copy parent values, interpolate the new
    points, add the tent contributions.  This is exact because every tent
    of level m is linear between consecutive level-m points.
    """
    field.check_shape(basis)
    return _refine_paths(field.flat()[None, :], field.x0, field.xT, basis)[0]


def _refine_paths(flat_coeffs: np.ndarray, x0, xT, basis: SchauderBasis) -> np.ndarray:
    """Vectorized pyramid reconstruction; flat_coeffs has shape (n_paths, D)."""
    seq = basis.seq
    n_paths = flat_coeffs.shape[0]
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (n_paths,))
    xT = np.broadcast_to(np.asarray(xT, dtype=float), (n_paths,))
    vals = np.empty((n_paths, 2))
    vals[:, 0], vals[:, 1] = x0, xT
    offs = basis.level_offsets
    for m in range(basis.n_levels):
        lv = basis.level(m)
        theta = flat_coeffs[:, offs[m]:offs[m + 1]]
        coarse = seq.points(m)
        fine = seq.points(m + 1)
        p = np.searchsorted(fine, coarse)
        new = np.empty((n_paths, fine.size))
        new[:, p] = vals
        counts = np.diff(lv.parent_offsets)
        if np.all(counts == 1):
            # one new point per parent: tent peak sits on the affine interpolant
            lam = lv.d1 / (lv.d1 + lv.d2)
            interp = vals[:, :-1] + (vals[:, 1:] - vals[:, :-1]) * lam
            new[:, np.searchsorted(fine, lv.t2)] = interp + theta * lv.peak
        else:
            for j in range(coarse.size - 1):
                lo, hi = lv.parent_offsets[j], lv.parent_offsets[j + 1]
                if lo == hi:
                    continue
                tq = lv.t2[lo:hi]
                tL, tR = coarse[j], coarse[j + 1]
                lam = (tq - tL) / (tR - tL)
                interp = vals[:, j:j + 1] + (vals[:, j + 1:j + 2] - vals[:, j:j + 1]) * lam
                B = np.empty((hi - lo, hi - lo))
                for col, i in enumerate(range(lo, hi)):
                    B[:, col] = np.where(
                        tq < lv.t2[i], lv.up[i] * (tq - lv.t1[i]),
                        np.where(tq < lv.t3[i], lv.down[i] * (lv.t3[i] - tq), 0.0),
                    )
                    B[col, col] = lv.peak[i]
                new[:, p[j] + 1:p[j + 1]] = interp + theta[:, lo:hi] @ B.T
        vals = new
    return vals


def reconstruct(field: CoefficientField, basis: SchauderBasis, grid=None) -> np.ndarray:
    """Evaluate x(t) = x0 + (xT - x0) t/T + sum theta e(t) on arbitrary times.

    With grid=None the full level-(max_level+1) grid is used (fast path).
    """
    if grid is None:
        return reconstruct_on_grid(field, basis)
    field.check_shape(basis)
    t = np.asarray(grid, dtype=float)
    _check_times(basis, t)
    T = basis.seq.T
    out = field.x0 + (field.xT - field.x0) * (t / T)
    for m in range(field.n_levels):
        out = out + _eval_level_sum(basis, m, field.levels[m], t)
    return out


def _eval_level_sum(basis: SchauderBasis, m: int, theta: np.ndarray, t: np.ndarray) -> np.ndarray:
    """sum_k theta_k e_{m,k}(t), exploiting that at most M-1 tents cover t."""
    lv = basis.level(m)
    pts = basis.seq.points(m)
    parent = np.clip(np.searchsorted(pts, t, side="right") - 1, 0, pts.size - 2)
    counts = np.diff(lv.parent_offsets)
    out = np.zeros_like(t, dtype=float)
    if np.all(counts == 1):
        k = parent
        t1, t2, t3 = lv.t1[k], lv.t2[k], lv.t3[k]
        val = np.where(
            (t >= t1) & (t < t2), lv.up[k] * (t - t1),
            np.where((t >= t2) & (t < t3), lv.down[k] * (t3 - t), 0.0),
        )
        return theta[k] * val
    for j in np.unique(parent):
        lo, hi = lv.parent_offsets[j], lv.parent_offsets[j + 1]
        if lo == hi:
            continue
        sel = parent == j
        ts = t[sel]
        acc = np.zeros_like(ts)
        for i in range(lo, hi):
            val = np.where(
                (ts >= lv.t1[i]) & (ts < lv.t2[i]), lv.up[i] * (ts - lv.t1[i]),
                np.where((ts >= lv.t2[i]) & (ts < lv.t3[i]), lv.down[i] * (lv.t3[i] - ts), 0.0),
            )
            acc += theta[i] * val
        out[sel] = acc
    return out


def basis_matrix(basis: SchauderBasis, times) -> np.ndarray:
    """Dense (D, len(times)) matrix of tent values; rows follow the flat index."""
    t = np.asarray(times, dtype=float)
    _check_times(basis, t)
    E = np.zeros((basis.size, t.size))
    for m in range(basis.n_levels):
        lv = basis.level(m)
        off = basis.level_offsets[m]
        for k in range(lv.size):
            mask = (t >= lv.t1[k]) & (t < lv.t3[k])
            if not mask.any():
                continue
            ts = t[mask]
            E[off + k, mask] = np.where(
                ts < lv.t2[k], lv.up[k] * (ts - lv.t1[k]), lv.down[k] * (lv.t3[k] - ts)
            )
    return E


def check_continuity_condition(field: CoefficientField, basis: SchauderBasis,
                               eps: float, C: float) -> bool:
    """Sufficient continuity bound: |theta_{m,k}| <= C |pi^{m+1}|^{eps - 1/2} for all m, k."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    for m in range(field.n_levels):
        bound = C * basis.mesh(m) ** (eps - 0.5)
        if field.levels[m].size and np.max(np.abs(field.levels[m])) > bound:
            return False
    return True


# ------------------------------------------------------------------ CSV io

def coeffs_to_csv(field: CoefficientField, path) -> None:
    """Columns (m, k, theta); header row carries the endpoint datum."""
    with open(path, "w") as fh:
        fh.write(f"# x0={field.x0!r},xT={field.xT!r},n_levels={field.n_levels}\n")
        fh.write("m,k,theta\n")
        for m, arr in enumerate(field.levels):
            for k, v in enumerate(arr):
                fh.write(f"{m},{k},{float(v)!r}\n")


def coeffs_from_csv(path) -> CoefficientField:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# "):
            raise ValueError("missing endpoint header row")
        meta = dict(item.split("=") for item in header[2:].split(","))
        fh.readline()  # column names
        per_level: dict[int, dict[int, float]] = {}
        for line in fh:
            if not line.strip():
                continue
            m_s, k_s, v_s = line.split(",")
            per_level.setdefault(int(m_s), {})[int(k_s)] = float(v_s)
    n_levels = int(meta["n_levels"])
    levels = []
    for m in range(n_levels):
        row = per_level.get(m, {})
        arr = np.zeros(max(row) + 1 if row else 0)
        for k, v in row.items():
            arr[k] = v
        levels.append(arr)
    return CoefficientField(levels=levels, x0=float(meta["x0"]), xT=float(meta["xT"]))
