"""Trajectory-state distance and the condensed pairwise matrix.

The distance between two trajectory-states A and B is

    d(A, B) = sum_{k=1..12} ||p_k(A) - p_k(B)||_2
              + k_a |a_A - a_B| + k_v |v_A - v_B| + k_h |h_A - h_B|

a sum of per-timestep point displacements plus weighted dynamic-state
differences. It is a metric (each term is one), and the O(n^2) pairwise
computation over a pool is the performance core of the package: pairs are
independent, so the index space may be partitioned across threads while
staying bitwise deterministic (no pair's sum is ever split).

Coordinates are used exactly as ingested; no re-centering or rotation
normalization is applied, so the frame of the input data defines the
clustering semantics.
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NonFiniteValue, ParseError
from .states import TrajectoryState

_MATRIX_MAGIC = b"TSDM"
_MATRIX_VERSION = 1


@dataclass(frozen=True)
class MetricWeights:
    """Scale factors mapping state differences into meters of path error.

    Defaults reflect typical ranges: heading change rates span roughly
    -0.5..0.5 rad/s (k_h = 1), velocities 0..20 m/s (k_v = 1/40), and
    accelerations -5..5 m/s^2 (k_a = 1/20).
    """

    k_a: float = 1.0 / 20.0
    k_v: float = 1.0 / 40.0
    k_h: float = 1.0

    def __post_init__(self) -> None:
        for name in ("k_a", "k_v", "k_h"):
            w = float(getattr(self, name))
            if not np.isfinite(w) or w < 0.0:
                raise NonFiniteValue(f"weight {name} must be finite and >= 0, got {w}")
            object.__setattr__(self, name, w)


DEFAULT_WEIGHTS = MetricWeights()


@dataclass(frozen=True, eq=False)
class CondensedDistanceMatrix:
    """Upper-triangle pairwise distances in canonical row-major order.

    Entry for pair (i, j), i < j, lives at index
    ``i * (2n - i - 1) // 2 + (j - i - 1)``; storage is exactly
    n(n-1)/2 float64 values, half the square-matrix cost.
    """

    n: int
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        expected = self.n * (self.n - 1) // 2
        if self.n < 1 or vals.shape != (expected,):
            raise ParseError(
                f"condensed matrix for n={self.n} needs {expected} values, got {vals.shape}"
            )
        if expected and (not np.all(np.isfinite(vals)) or vals.min() < 0.0):
            raise NonFiniteValue("condensed matrix values must be finite and >= 0")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def get(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        if i > j:
            i, j = j, i
        return float(self.values[condensed_index(self.n, i, j)])

    def to_square(self) -> np.ndarray:
        """Materialize the full symmetric matrix (zero diagonal)."""
        out = np.zeros((self.n, self.n))
        pos = 0
        for i in range(self.n - 1):
            cnt = self.n - 1 - i
            row = self.values[pos : pos + cnt]
            out[i, i + 1 :] = row
            out[i + 1 :, i] = row
            pos += cnt
        return out


def condensed_index(n: int, i: int, j: int) -> int:
    """Canonical condensed index of pair (i, j) with i < j."""
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


def _pool_arrays(states: Sequence[TrajectoryState]) -> tuple[np.ndarray, np.ndarray]:
    """Pack states into (n, 12, 2) points and (n, 3) [v, a, h] arrays."""
    pts = np.asarray([s.points for s in states], dtype=np.float64)
    dyn = np.asarray([(s.v, s.a, s.h) for s in states], dtype=np.float64)
    return pts, dyn


def trajectory_state_distance(
    a: TrajectoryState, b: TrajectoryState, w: MetricWeights = DEFAULT_WEIGHTS
) -> float:
    """Distance between two trajectory-states.

    The operation order mirrors the vectorized pairwise kernel exactly so
    pointwise and batched results agree bit for bit.
    """
    pa = np.asarray(a.points, dtype=np.float64)
    pb = np.asarray(b.points, dtype=np.float64)
    total = np.sqrt(((pa - pb) ** 2).sum(axis=1)).sum()
    total = total + w.k_a * abs(a.a - b.a)
    total = total + w.k_v * abs(a.v - b.v)
    total = total + w.k_h * abs(a.h - b.h)
    return float(total)


def _row_block(
    pts: np.ndarray,
    dyn: np.ndarray,
    w: MetricWeights,
    out: np.ndarray,
    i0: int,
    i1: int,
) -> None:
    """Fill condensed entries for rows [i0, i1).

    Each row writes a disjoint slice of ``out`` and every pair's terms are
    reduced in a fixed order, so results do not depend on how rows are
    assigned to workers.
    """
    n = pts.shape[0]
    for i in range(i0, i1):
        m = n - 1 - i
        if m <= 0:
            continue
        start = condensed_index(n, i, i + 1)
        d = np.sqrt(((pts[i + 1 :] - pts[i]) ** 2).sum(axis=2)).sum(axis=1)
        d += w.k_a * np.abs(dyn[i + 1 :, 1] - dyn[i, 1])
        d += w.k_v * np.abs(dyn[i + 1 :, 0] - dyn[i, 0])
        d += w.k_h * np.abs(dyn[i + 1 :, 2] - dyn[i, 2])
        out[start : start + m] = d


def pairwise_distances(
    pool: Sequence[TrajectoryState],
    w: MetricWeights = DEFAULT_WEIGHTS,
    workers: int | None = None,
) -> CondensedDistanceMatrix:
    """Condensed pairwise distance matrix over a pool.

    ``workers`` threads partition the row space; numpy kernels release the
    GIL so this scales on multicore boxes, and the output is byte-identical
    for any worker count.
    """
    states = list(pool)
    n = len(states)
    if n < 1:
        raise ParseError("pairwise_distances needs at least one trajectory-state")
    pts, dyn = _pool_arrays(states)
    out = np.empty(n * (n - 1) // 2, dtype=np.float64)
    if workers is None:
        workers = max(1, min(4, os.cpu_count() or 1))
    if workers <= 1 or n < 64:
        _row_block(pts, dyn, w, out, 0, n)
    else:
        # small chunks keep the decreasing row costs balanced across threads
        chunk = max(1, n // (workers * 8))
        bounds = list(range(0, n, chunk)) + [n]
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futures = [
                ex.submit(_row_block, pts, dyn, w, out, lo, hi)
                for lo, hi in zip(bounds[:-1], bounds[1:])
            ]
            for f in futures:
                f.result()
    return CondensedDistanceMatrix(n=n, values=out)


def write_distance_matrix(m: CondensedDistanceMatrix, path) -> None:
    """Binary dump: magic "TSDM", u32 version, u64 n, little-endian f64 values."""
    with open(path, "wb") as fh:
        fh.write(_MATRIX_MAGIC)
        fh.write(struct.pack("<I", _MATRIX_VERSION))
        fh.write(struct.pack("<Q", m.n))
        fh.write(m.values.astype("<f8").tobytes())


def read_distance_matrix(path) -> CondensedDistanceMatrix:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MATRIX_MAGIC:
            raise ParseError(f"bad matrix magic {magic!r}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != _MATRIX_VERSION:
            raise ParseError(f"unsupported matrix version {version}")
        (n,) = struct.unpack("<Q", fh.read(8))
        payload = fh.read()
    expected = n * (n - 1) // 2
    values = np.frombuffer(payload, dtype="<f8")
    if values.shape != (expected,):
        raise ParseError(f"matrix payload has {values.shape[0]} values, expected {expected}")
    return CondensedDistanceMatrix(n=int(n), values=values.astype(np.float64))
