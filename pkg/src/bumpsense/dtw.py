"""Dynamic time warping distance between one-dimensional value sequences.

The distance is the classic dynamic program over the full cost lattice with
steps (i-1, j), (i, j-1), (i-1, j-1) and local cost ``|a_i - b_j|``; no
normalization by path length is applied (all comparisons downstream are
between equal-length frames, so it would cancel).  An optional Sakoe-Chiba
band constrains ``|i - j|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True)
class DtwConfig:
    """Kernel options.

    ``local_cost`` names the per-cell cost; only absolute difference is
    supported.  ``window`` is the Sakoe-Chiba band half-width in samples;
    ``None`` leaves the lattice unconstrained.
    """

    local_cost: str = "abs"
    window: int | None = None

    def __post_init__(self) -> None:
        if self.local_cost != "abs":
            raise ValueError(f"unsupported local cost {self.local_cost!r}")
        if self.window is not None and self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")


@njit(cache=True)
def _dtw_kernel(a: np.ndarray, b: np.ndarray, window: int) -> float:
    n = a.shape[0]
    m = b.shape[0]
    prev = np.empty(m, dtype=np.float64)
    curr = np.empty(m, dtype=np.float64)
    for i in range(n):
        if window < 0:
            j_lo, j_hi = 0, m - 1
        else:
            j_lo = i - window if i - window > 0 else 0
            j_hi = i + window if i + window < m - 1 else m - 1
        for j in range(m):
            curr[j] = np.inf
        for j in range(j_lo, j_hi + 1):
            cost = abs(a[i] - b[j])
            if i == 0 and j == 0:
                best = 0.0
            else:
                best = np.inf
                if j > 0 and curr[j - 1] < best:
                    best = curr[j - 1]
                if i > 0:
                    if prev[j] < best:
                        best = prev[j]
                    if j > 0 and prev[j - 1] < best:
                        best = prev[j - 1]
            curr[j] = cost + best
        prev, curr = curr, prev
    return prev[m - 1]


def _as_sequence(x, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise ValueError(f"{name} must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def dtw_distance(a, b, config: DtwConfig | None = None) -> float:
    """Cumulative warping cost between sequences ``a`` and ``b``.

    Raises ``ValueError`` on empty or non-finite input, and when a band is
    too narrow to connect the lattice corners (``window < ||a| - |b||``).
    """
    cfg = config if config is not None else DtwConfig()
    x = _as_sequence(a, "a")
    y = _as_sequence(b, "b")
    if cfg.window is not None and cfg.window < abs(x.shape[0] - y.shape[0]):
        raise ValueError(
            f"window {cfg.window} cannot connect sequences of lengths "
            f"{x.shape[0]} and {y.shape[0]}"
        )
    return float(_dtw_kernel(x, y, -1 if cfg.window is None else cfg.window))


def dtw_cost_matrix(a, b, config: DtwConfig | None = None) -> np.ndarray:
    """Full cumulative-cost lattice, for debugging and cross-checks.

    ``dtw_distance`` keeps only a rolling pair of rows; this retains the
    whole matrix (entry [-1, -1] equals the distance).
    """
    cfg = config if config is not None else DtwConfig()
    x = _as_sequence(a, "a")
    y = _as_sequence(b, "b")
    n, m = x.shape[0], y.shape[0]
    if cfg.window is not None and cfg.window < abs(n - m):
        raise ValueError(
            f"window {cfg.window} cannot connect sequences of lengths {n} and {m}"
        )
    acc = np.full((n, m), np.inf)
    for i in range(n):
        lo = 0 if cfg.window is None else max(0, i - cfg.window)
        hi = m - 1 if cfg.window is None else min(m - 1, i + cfg.window)
        for j in range(lo, hi + 1):
            cost = abs(x[i] - y[j])
            if i == 0 and j == 0:
                acc[i, j] = cost
                continue
            best = np.inf
            if j > 0:
                best = min(best, acc[i, j - 1])
            if i > 0:
                best = min(best, acc[i - 1, j], acc[i - 1, j - 1] if j > 0 else np.inf)
            acc[i, j] = cost + best
    return acc
