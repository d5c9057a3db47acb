"""Classical local-outlier-factor reference (Breunig-style definitions).

Direct O(m^2 * n * k) pairwise computation with no spatial index, so the code
is transparently correct and serves as the brute-force oracle for every
quantum-pipeline equivalence test.

Distance convention: every operation takes ``normalized`` (default True),
selecting d-bar = d / (sqrt(n) * c_norm) or the raw Euclidean d.  LOF values
are identical under both (the constant cancels in the density ratios); the
local reachability density scales by the constant, which is why both
conventions are exposed.

Tie semantics: the k-distance is the k-th order statistic of the distances to
the other points, and the neighborhood is everything at distance <= k-distance,
so it can exceed k members on ties and duplicates at distance zero count
toward k.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dataset import (
    Dataset,
    DegenerateDataError,
    normalized_distance_matrix,
    raw_distance_matrix,
)


@dataclass(frozen=True)
class NeighborRow:
    """Per-point neighborhood: k-distance, members, aligned distances, count."""

    kdist: float
    neighbors: list[int]
    dists: list[float]

    @property
    def count(self) -> int:
        return len(self.neighbors)


@dataclass(frozen=True)
class NeighborhoodTable:
    """Neighborhood rows for every point, under one distance convention."""

    rows: list[NeighborRow]
    k: int
    normalized: bool = True

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def max_count(self) -> int:
        return max(r.count for r in self.rows)

    def row(self, i: int) -> NeighborRow:
        return self.rows[i]


@dataclass(frozen=True)
class LofReport:
    """Outlier factors and flags for a whole dataset.

    ``lrd`` follows the table's distance convention (normalized by default);
    ``lof`` is convention-free.
    """

    k: int
    delta: float
    kdist: np.ndarray
    counts: np.ndarray
    lrd: np.ndarray
    lof: np.ndarray
    flagged: np.ndarray

    @property
    def n_flagged(self) -> int:
        return int(np.count_nonzero(self.flagged))

    def flagged_indices(self) -> list[int]:
        return [int(i) for i in np.nonzero(self.flagged)[0]]

    def point_dicts(self) -> list[dict]:
        return [
            {
                "index": i,
                "kdist": float(self.kdist[i]),
                "count": int(self.counts[i]),
                "lrd": float(self.lrd[i]),
                "lof": float(self.lof[i]),
                "flagged": bool(self.flagged[i]),
            }
            for i in range(self.lof.size)
        ]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "delta": self.delta,
            "n_flagged": self.n_flagged,
            "points": self.point_dicts(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _distances(ds: Dataset, normalized: bool) -> np.ndarray:
    return normalized_distance_matrix(ds) if normalized else raw_distance_matrix(ds)


def _check_k(ds: Dataset, k: int) -> None:
    if not 1 <= k <= ds.m - 1:
        raise ValueError(f"k={k} outside [1, m-1={ds.m - 1}]")


def k_distance(ds: Dataset, i: int, k: int, normalized: bool = True) -> float:
    """k-th smallest distance from point i to the other points."""
    _check_k(ds, k)
    d = _distances(ds, normalized)[i]
    others = np.sort(np.delete(d, i))
    return float(others[k - 1])


def neighborhood(ds: Dataset, i: int, k: int, normalized: bool = True) -> NeighborRow:
    """All points within the k-distance of i (>= k members, more on ties)."""
    _check_k(ds, k)
    d = _distances(ds, normalized)[i]
    kd = k_distance(ds, i, k, normalized=normalized)
    members = [int(t) for t in range(ds.m) if t != i and d[t] <= kd]
    return NeighborRow(kdist=kd, neighbors=members, dists=[float(d[t]) for t in members])


def reach_dist(ds: Dataset, i: int, t: int, k: int, normalized: bool = True) -> float:
    """max(k-distance(t), d(i, t)): the distance, floored by t's k-distance."""
    _check_k(ds, k)
    d = _distances(ds, normalized)[i, t]
    return float(max(k_distance(ds, t, k, normalized=normalized), d))


def build_table(ds: Dataset, k: int, normalized: bool = True) -> NeighborhoodTable:
    _check_k(ds, k)
    dmat = _distances(ds, normalized)
    rows = []
    for i in range(ds.m):
        d = dmat[i]
        kd = float(np.sort(np.delete(d, i))[k - 1])
        members = [int(t) for t in range(ds.m) if t != i and d[t] <= kd]
        rows.append(
            NeighborRow(kdist=kd, neighbors=members, dists=[float(d[t]) for t in members])
        )
    return NeighborhoodTable(rows=rows, k=k, normalized=normalized)


def _lrd_from_table(table: NeighborhoodTable) -> np.ndarray:
    """Inverse mean reachability distance per point; rejects zero means.

    Sums run in sorted-value order so the result is bitwise independent of
    point numbering (exact permutation equivariance).
    """
    kd = np.array([r.kdist for r in table.rows])
    lrd = np.empty(table.m)
    for i, row in enumerate(table.rows):
        reach = sorted(max(kd[t], d) for t, d in zip(row.neighbors, row.dists))
        mean = sum(reach) / len(reach)
        if mean <= 0.0:
            raise DegenerateDataError(
                f"point {i}: every neighbor is an exact duplicate, "
                "local reachability density is undefined"
            )
        lrd[i] = 1.0 / mean
    return lrd


def lrd_values(table: NeighborhoodTable) -> np.ndarray:
    """Local reachability density of every point, in the table's convention."""
    return _lrd_from_table(table)


def lrd(ds: Dataset, i: int, k: int, normalized: bool = True) -> float:
    """Local reachability density of point i.

    Scales as 1/c under coordinate scaling by c when normalized=False; the
    normalized variant is scale-invariant.
    """
    table = build_table(ds, k, normalized=normalized)
    return float(_lrd_from_table(table)[i])


def lof(ds: Dataset, i: int, k: int) -> float:
    """Mean ratio of the neighbors' densities to i's own density."""
    table = build_table(ds, k, normalized=True)
    dens = _lrd_from_table(table)
    row = table.rows[i]
    return float(sum(sorted(dens[t] / dens[i] for t in row.neighbors)) / row.count)


def lof_all(ds: Dataset, k: int, table: NeighborhoodTable | None = None) -> np.ndarray:
    if table is None:
        table = build_table(ds, k, normalized=True)
    dens = _lrd_from_table(table)
    out = np.empty(table.m)
    for i, row in enumerate(table.rows):
        out[i] = sum(sorted(dens[t] / dens[i] for t in row.neighbors)) / row.count
    return out


def flag(ds: Dataset, k: int, delta: float, normalized: bool = True) -> LofReport:
    """Full classical run: anomaly iff LOF >= delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    table = build_table(ds, k, normalized=normalized)
    dens = _lrd_from_table(table)
    lofs = np.empty(table.m)
    for i, row in enumerate(table.rows):
        lofs[i] = sum(sorted(dens[t] / dens[i] for t in row.neighbors)) / row.count
    flagged = lofs >= delta
    return LofReport(
        k=k,
        delta=delta,
        kdist=np.array([r.kdist for r in table.rows]),
        counts=np.array([r.count for r in table.rows]),
        lrd=dens,
        lof=lofs,
        flagged=flagged,
    )


def max_density_ratio(ds: Dataset, k: int, table: NeighborhoodTable | None = None) -> float:
    """Largest lrd(t)/lrd(i) over points i and neighbors t (the ratio ceiling)."""
    if table is None:
        table = build_table(ds, k, normalized=True)
    dens = _lrd_from_table(table)
    return float(
        max(dens[t] / dens[i] for i, row in enumerate(table.rows) for t in row.neighbors)
    )


def dist_floor_sq(table: NeighborhoodTable) -> float:
    """Largest P such that at least half of every point's neighbor distances
    are >= sqrt(P): the square of the minimum upper-median neighbor distance.
    """
    floors = []
    for row in table.rows:
        vals = sorted(row.dists, reverse=True)
        floors.append(vals[math.ceil(row.count / 2) - 1])
    return float(min(floors)) ** 2
