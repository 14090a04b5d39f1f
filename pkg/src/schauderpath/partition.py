"""Refining partition sequences of [0, T].

A partition sequence is a list of levels, each a strictly increasing grid
from 0 to T, with every level's points contained in the next (nested).
Two builders are provided: the dyadic sequence (midpoint splits) and a
"shifted binary" sequence that splits every interval at an off-centre
fraction 1/ratio, which produces non-uniform grids while keeping the
consecutive-mesh ratio constant.

Refined levels copy their parent's points bit-exactly, so nestedness can
be checked with float equality rather than tolerances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PartitionLevel",
    "PartitionSequence",
    "PartitionDiagnostics",
    "PartitionStructureError",
    "build_dyadic",
    "build_shifted_binary",
    "from_levels",
    "refinement_map",
    "validate",
    "to_json",
    "from_json",
    "save_json",
    "load_json",
]


class PartitionStructureError(ValueError):
    """A level violates the nesting/refinement structure."""


@dataclass(frozen=True)
class PartitionLevel:
    """One grid: strictly increasing times, first exactly 0, last exactly T."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("a partition level needs at least 2 points")
        if not np.all(np.diff(pts) > 0):
            raise ValueError("partition points must be strictly increasing")
        if pts[0] != 0.0:
            raise ValueError("first partition point must be exactly 0")

    @property
    def n_intervals(self) -> int:
        return self.points.size - 1

    @property
    def mesh(self) -> float:
        """Largest interval length."""
        return float(np.max(np.diff(self.points)))

    @property
    def min_gap(self) -> float:
        """Smallest interval length."""
        return float(np.min(np.diff(self.points)))


@dataclass(frozen=True)
class PartitionSequence:
    """Nested levels 0..N of grids on [0, T].

    Level 0 is always {0, T}.  The constructor checks per-level structure
    and endpoints; full nestedness is checked by :func:`validate`, so that
    deliberately broken sequences can still be constructed and diagnosed.
    """

    T: float
    kind: str
    levels: tuple[PartitionLevel, ...]

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("horizon T must be positive")
        if not self.levels:
            raise ValueError("need at least level 0")
        for lv in self.levels:
            if lv.points[-1] != self.T:
                raise ValueError("every level must end exactly at T")
        lv0 = self.levels[0].points
        if lv0.size != 2:
            raise ValueError("level 0 must be exactly {0, T}")

    @property
    def depth(self) -> int:
        """Index of the finest stored level."""
        return len(self.levels) - 1

    def points(self, n: int) -> np.ndarray:
        return self.levels[n].points

    def n_intervals(self, n: int) -> int:
        return self.levels[n].n_intervals

    def mesh(self, n: int) -> float:
        return self.levels[n].mesh


@dataclass(frozen=True)
class PartitionDiagnostics:
    """Empirical structure constants computed by an exhaustive scan.

    M_hat   largest per-parent branching count (intervals of level n+1
            inside one interval of level n)
    c_hat   max over n of mesh / smallest gap at level n
    a_hat   min over n of mesh(n)/mesh(n+1) - 1
    b_hat   max over n of mesh(n)/mesh(n+1)
    """

    M_hat: int
    c_hat: float
    a_hat: float
    b_hat: float
    is_finitely_refining: bool
    is_balanced: bool
    is_complete_refining: bool
    per_level_balance: np.ndarray = field(repr=False)
    mesh_ratios: np.ndarray = field(repr=False)


def _split_all(points: np.ndarray, ratio: float) -> np.ndarray:
    """Insert one point in every interval at fraction 1/ratio from the left.

    Parent points are copied, never recomputed.
    """
    left = points[:-1]
    new = left + (points[1:] - left) / ratio
    out = np.empty(points.size * 2 - 1)
    out[0::2] = points
    out[1::2] = new
    return out


def build_dyadic(T: float, depth: int) -> PartitionSequence:
    """Dyadic sequence: level n has 2^n + 1 equally spaced points on [0, T]."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if T <= 0:
        raise ValueError("horizon T must be positive")
    levels = [PartitionLevel(np.array([0.0, float(T)]))]
    for _ in range(depth):
        levels.append(PartitionLevel(_split_all(levels[-1].points, 2.0)))
    return PartitionSequence(T=float(T), kind="dyadic", levels=tuple(levels))


def build_shifted_binary(T: float, depth: int, ratio: float = 2.5) -> PartitionSequence:
    """Split every interval at fraction 1/ratio from its left endpoint.

    ratio = 2 reproduces the dyadic sequence bit-exactly.  The larger the
    ratio, the more lopsided the two children (imbalance grows with the
    level, but consecutive meshes keep the fixed ratio ratio/(ratio-1)).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if T <= 0:
        raise ValueError("horizon T must be positive")
    if ratio <= 1:
        raise ValueError("ratio must be > 1 so both children are nonempty")
    levels = [PartitionLevel(np.array([0.0, float(T)]))]
    for _ in range(depth):
        levels.append(PartitionLevel(_split_all(levels[-1].points, float(ratio))))
    return PartitionSequence(T=float(T), kind="shifted-binary", levels=tuple(levels))


def from_levels(T: float, levels, kind: str = "custom") -> PartitionSequence:
    """Wrap raw point arrays as a PartitionSequence (validated lazily)."""
    return PartitionSequence(
        T=float(T), kind=kind, levels=tuple(PartitionLevel(np.asarray(p, dtype=float)) for p in levels)
    )


def refinement_map(seq: PartitionSequence) -> list[np.ndarray]:
    """For each level n < depth, the index p(n, k) of t^n_k inside level n+1.

    Nestedness is required to hold bit-exactly; a mismatch raises
    PartitionStructureError naming the offending level and point.
    """
    maps = []
    for n in range(seq.depth):
        coarse = seq.points(n)
        fine = seq.points(n + 1)
        idx = np.searchsorted(fine, coarse)
        bad = (idx >= fine.size) | (fine[np.minimum(idx, fine.size - 1)] != coarse)
        if np.any(bad):
            k = int(np.argmax(bad))
            raise PartitionStructureError(
                f"level {n} point t[{k}]={coarse[k]!r} is missing from level {n + 1}"
            )
        maps.append(idx.astype(np.int64))
    return maps


def validate(seq: PartitionSequence, c_bound: float | None = None,
             a_bound: float | None = None, b_bound: float | None = None) -> PartitionDiagnostics:
    """Exhaustively scan the stored levels and report empirical constants.

    The flags are decided from the scan alone: ``is_finitely_refining``
    requires every parent interval to gain at least one interior point,
    ``is_complete_refining`` requires every consecutive-mesh ratio to
    exceed 1 (and to fit user bounds when given), ``is_balanced`` checks
    c_hat against ``c_bound`` when one is supplied.
    """
    pmaps = refinement_map(seq)  # also checks nestedness

    branching = []
    for n, p in enumerate(pmaps):
        counts = np.diff(p)
        branching.append(counts)
        # paper chain: t^n_k = t^{n+1}_{p(n,k)} < ... < t^{n+1}_{p(n,k+1)} = t^n_{k+1}
        if np.any(counts < 1):
            raise PartitionStructureError(f"level {n} refinement map is not monotone")
    all_counts = np.concatenate(branching) if branching else np.array([1])
    M_hat = int(all_counts.max())
    gains_everywhere = bool((all_counts >= 2).all())

    meshes = np.array([lv.mesh for lv in seq.levels])
    gaps = np.array([lv.min_gap for lv in seq.levels])
    per_level_balance = meshes / gaps
    c_hat = float(per_level_balance.max())

    if seq.depth >= 1:
        mesh_ratios = meshes[:-1] / meshes[1:]
        a_hat = float(mesh_ratios.min() - 1.0)
        b_hat = float(mesh_ratios.max())
    else:
        mesh_ratios = np.array([])
        a_hat, b_hat = 0.0, 1.0

    # sanity: |pi^n| <= c T / N(pi^n) must hold with the empirical c
    n_ints = np.array([lv.n_intervals for lv in seq.levels], dtype=float)
    if not np.all(meshes <= c_hat * seq.T / n_ints + 1e-12 * seq.T):
        raise PartitionStructureError("mesh bound |pi^n| <= cT/N(pi^n) failed with empirical c")

    mesh_decreasing = bool(np.all(np.diff(meshes) < 0)) if seq.depth >= 1 else True
    finitely_refining = gains_everywhere and mesh_decreasing
    complete = a_hat > 0.0
    if a_bound is not None:
        complete = complete and bool(np.all(mesh_ratios >= 1.0 + a_bound))
    if b_bound is not None:
        complete = complete and bool(np.all(mesh_ratios <= b_bound))
    balanced = True if c_bound is None else c_hat <= c_bound

    return PartitionDiagnostics(
        M_hat=M_hat,
        c_hat=c_hat,
        a_hat=a_hat,
        b_hat=b_hat,
        is_finitely_refining=finitely_refining,
        is_balanced=balanced,
        is_complete_refining=complete,
        per_level_balance=per_level_balance,
        mesh_ratios=mesh_ratios,
    )


# ------------------------------------------------------------------ JSON io

def to_json(seq: PartitionSequence) -> str:
    """Serialize as {T, kind, levels}; floats round-trip bit-exactly."""
    doc = {"T": seq.T, "kind": seq.kind, "levels": [lv.points.tolist() for lv in seq.levels]}
    return json.dumps(doc)


def from_json(text: str) -> PartitionSequence:
    doc = json.loads(text)
    return from_levels(doc["T"], doc["levels"], kind=doc.get("kind", "custom"))


def save_json(seq: PartitionSequence, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_json(seq))


def load_json(path) -> PartitionSequence:
    with open(path) as fh:
        return from_json(fh.read())
