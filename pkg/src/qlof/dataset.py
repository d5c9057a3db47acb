"""Dataset loading, validation, normalization, and the data-access oracle.

The dataset is an immutable m x n real matrix.  Its global normalization
constant ``c_norm`` is the largest coordinate difference over all point pairs
and coordinates, so every pairwise Euclidean distance divided by
``sqrt(n) * c_norm`` lies in [0, 1] and fits the rotation-angle encoding used
by the quantum pipeline.

``oracle_ox`` emulates the QRAM lookup |i>|j>|0> -> |i>|j>|x_j^i>: a classical
indexed read whose applications are counted by the query ledger (one charge per
application in the control flow, superposition free).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .ledger import QueryLedger


class DataError(Exception):
    """Base class for dataset failures."""


class DataParseError(DataError):
    """Malformed input file; carries row/column location when known."""


class DegenerateDataError(DataError):
    """All points identical (c_norm would be 0) or densities undefined."""


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass(frozen=True)
class Dataset:
    """Immutable point matrix with its normalization constant."""

    points: np.ndarray  # shape (m, n), float64
    c_norm: float

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def summary(self) -> dict:
        return {"m": self.m, "n": self.n, "c_norm": self.c_norm}

    def summary_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)


def from_points(points: np.ndarray) -> Dataset:
    """Validate a raw matrix and compute c_norm.

    Requires m >= 2, n >= 1, all entries finite, and at least two distinct
    points (otherwise every distance is 0 and no scale exists).
    """
    pts = np.array(points, dtype=float, copy=True)
    if pts.ndim != 2:
        raise DataParseError(f"expected a 2-D point matrix, got ndim={pts.ndim}")
    m, n = pts.shape
    if m < 2:
        raise DataParseError(f"need at least 2 points, got {m}")
    if n < 1:
        raise DataParseError("points must have at least one coordinate")
    if not np.all(np.isfinite(pts)):
        bad = np.argwhere(~np.isfinite(pts))[0]
        raise DataParseError(f"non-finite value at row {bad[0]}, column {bad[1]}")
    # Max |x_j^i - x_j^t| over i, t, j = the largest per-coordinate range.
    c = float(np.max(pts.max(axis=0) - pts.min(axis=0)))
    if c <= 0.0:
        raise DegenerateDataError("all points are identical; no distance scale")
    pts.setflags(write=False)
    return Dataset(points=pts, c_norm=c)


def load_csv(path: str) -> Dataset:
    """Load a headerless comma-separated matrix, one point per row.

    UTF-8, '.' decimal separator.  Parse failures report the offending
    row/column (0-based).
    """
    rows: list[list[float]] = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for r, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                cells = line.split(",")
                if rows and len(cells) != len(rows[0]):
                    raise DataParseError(
                        f"row {r} has {len(cells)} columns, expected {len(rows[0])}"
                    )
                parsed = []
                for c, cell in enumerate(cells):
                    try:
                        parsed.append(float(cell))
                    except ValueError:
                        raise DataParseError(
                            f"row {r}, column {c}: {cell!r} is not numeric"
                        ) from None
                rows.append(parsed)
    except OSError as exc:
        raise DataParseError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataParseError(f"{path} contains no data rows")
    return from_points(np.array(rows, dtype=float))


def oracle_ox(ds: Dataset, i: int, j: int, ledger: QueryLedger | None = None) -> float:
    """Indexed coordinate lookup x_j^i (0-based), charged as one O_X query."""
    if not 0 <= i < ds.m:
        raise IndexError(f"point index {i} outside [0, {ds.m})")
    if not 0 <= j < ds.n:
        raise IndexError(f"coordinate index {j} outside [0, {ds.n})")
    if ledger is not None:
        ledger.charge("o_x")
    return float(ds.points[i, j])


def normalized_distance(ds: Dataset, i: int, t: int) -> float:
    """d-bar(i, t) = ||x^i - x^t|| / (sqrt(n) * c_norm), always in [0, 1]."""
    if i == t:
        raise ValueError("normalized_distance requires two distinct points")
    if not (0 <= i < ds.m and 0 <= t < ds.m):
        raise IndexError(f"point index outside [0, {ds.m})")
    d = float(np.linalg.norm(ds.points[i] - ds.points[t]))
    return d / (math.sqrt(ds.n) * ds.c_norm)


def raw_distance_matrix(ds: Dataset) -> np.ndarray:
    """All pairwise Euclidean distances; diagonal 0."""
    diff = ds.points[:, None, :] - ds.points[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def normalized_distance_matrix(ds: Dataset) -> np.ndarray:
    return raw_distance_matrix(ds) / (math.sqrt(ds.n) * ds.c_norm)


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a pipeline run.

    ae_qubits_* are the precision-register sizes of the three amplitude
    estimations (distance, neighbor count, outlier factor); the corresponding
    angle errors are pi / 2**t.  ``backend`` selects full statevector state
    preparation ("exact") or analytic outcome-law sampling with query
    accounting only ("ledger").
    """

    k: int
    delta: float = 1.5
    fp_width: int = 16
    fp_frac: int = 12
    ae_qubits_dist: int = 10
    ae_qubits_count: int = 8
    ae_qubits_lof: int = 10
    ae_repeats: int = 5
    shots: int = 64
    seed: int = 0
    backend: str = "exact"
    ratio_safety: float = 2.0
    min_boost: int = 5
    budget_multiplier: float = 22.5

    def validate(self, m: int) -> None:
        if not 1 <= self.k <= m - 1:
            raise ConfigError(f"k={self.k} outside [1, m-1={m - 1}]")
        if self.delta <= 0:
            raise ConfigError("delta must be positive")
        if self.fp_frac >= self.fp_width or self.fp_frac < 1:
            raise ConfigError(
                f"need 1 <= fp_frac < fp_width, got ({self.fp_width}, {self.fp_frac})"
            )
        for name in ("ae_qubits_dist", "ae_qubits_count", "ae_qubits_lof"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.ae_repeats < 1 or self.ae_repeats % 2 == 0:
            raise ConfigError("ae_repeats must be a positive odd integer")
        if self.shots < 1:
            raise ConfigError("shots must be >= 1")
        if self.backend not in ("exact", "ledger"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.ratio_safety < 1.0:
            raise ConfigError("ratio_safety must be >= 1")
        if self.min_boost < 1:
            raise ConfigError("min_boost must be >= 1")

    @property
    def eps_dist(self) -> float:
        return math.pi / (1 << self.ae_qubits_dist)

    @property
    def eps_lof(self) -> float:
        return math.pi / (1 << self.ae_qubits_lof)

    def eps_count(self, domain: int) -> float:
        """Worst-case neighbor-count error over a domain of that size."""
        t = self.ae_qubits_count
        return math.pi * domain / (1 << t) + (math.pi**2) * domain / (1 << (2 * t))

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "delta": self.delta,
            "fp_width": self.fp_width,
            "fp_frac": self.fp_frac,
            "ae_qubits_dist": self.ae_qubits_dist,
            "ae_qubits_count": self.ae_qubits_count,
            "ae_qubits_lof": self.ae_qubits_lof,
            "ae_repeats": self.ae_repeats,
            "shots": self.shots,
            "seed": self.seed,
            "backend": self.backend,
            "ratio_safety": self.ratio_safety,
            "min_boost": self.min_boost,
            "budget_multiplier": self.budget_multiplier,
        }
