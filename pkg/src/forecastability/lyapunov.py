"""Largest Lyapunov exponent from a scalar series.

States are reconstructed by delay embedding. Every state that still has a
future ``horizon`` steps ahead is paired with its nearest admissible
neighbor (outside the Theiler window, at or above the distance floor), and
the log growth of their separation over the horizon is averaged::

    lambda = mean_t  log(|x[t+h] - x[t'+h]| / |x[t] - x[t']|) / h

Units are per sample step. Multiply by ``1/dt`` for per-unit-time values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import EmbeddingInfeasibleError, EstimationImpossibleError, WindowSizeError
from .timeseries import WindowPlan, as_series, iterate_windows, sparsity_of
from .windows import MovingMetric

MIN_POINTS_PER_DIM = 100
MAX_SPARSITY = 0.7

# caps the size of the (rows x pool) distance block held in memory
_BLOCK_ELEMENTS = 2_000_000


class Sufficiency(str, Enum):
    OK = "ok"
    SHORT_SERIES = "short_series"
    HIGH_SPARSITY = "high_sparsity"


@dataclass(frozen=True)
class EmbeddingConfig:
    embedding_dim: int = 3
    delay: int = 1
    horizon: int = 5
    theiler_window: Optional[int] = None  # None -> embedding_dim * delay
    distance_floor: float = 1e-12
    norm: str = "euclidean"
    search: str = "exhaustive"  # or "kdtree"; both return identical neighbors

    def __post_init__(self):
        if self.embedding_dim < 2:
            raise ValueError(f"embedding_dim must be >= 2, got {self.embedding_dim}")
        if self.delay < 1:
            raise ValueError(f"delay must be >= 1, got {self.delay}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.theiler_window is not None and self.theiler_window < 0:
            raise ValueError(f"theiler_window must be >= 0, got {self.theiler_window}")
        if not self.distance_floor > 0:
            raise ValueError(f"distance_floor must be > 0, got {self.distance_floor}")
        if self.norm != "euclidean":
            raise ValueError(f"unsupported norm {self.norm!r}")
        if self.search not in ("exhaustive", "kdtree"):
            raise ValueError(f"search must be 'exhaustive' or 'kdtree', got {self.search!r}")

    @property
    def exclusion(self) -> int:
        if self.theiler_window is None:
            return self.embedding_dim * self.delay
        return self.theiler_window

    @property
    def span(self) -> int:
        return (self.embedding_dim - 1) * self.delay

    @property
    def min_window(self) -> int:
        return self.span + self.horizon + 2


@dataclass(frozen=True)
class LyapunovEstimate:
    lambda_: float
    pair_count: int
    skipped_pairs: int
    sufficiency: Sufficiency
    # (t, t') index pairs that entered the mean, in averaging order
    pairs: np.ndarray = field(default=None, repr=False, compare=False)


def delay_embed(series, m: int, tau: int) -> np.ndarray:
    """Return the ``(T - (m-1)*tau, m)`` array of delay vectors.

    Row ``t`` is ``(y[t], y[t+tau], ..., y[t+(m-1)*tau])``.
    """
    y = as_series(series).values
    if m < 1 or tau < 1:
        raise EmbeddingInfeasibleError(f"need m >= 1 and tau >= 1, got m={m}, tau={tau}")
    n = y.size - (m - 1) * tau
    if n < 1:
        raise EmbeddingInfeasibleError(
            f"series of length {y.size} is too short for m={m}, tau={tau}")
    out = np.empty((n, m))
    for j in range(m):
        out[:, j] = y[j * tau: j * tau + n]
    return out


def _distances(rows: np.ndarray, pool: np.ndarray) -> np.ndarray:
    """Euclidean distances between every row and every pool state.

    Coordinates are accumulated one at a time with elementwise ops so a
    given (row, pool state) distance is bit-identical no matter how the
    work is blocked.
    """
    acc = np.zeros((rows.shape[0], pool.shape[0]))
    for k in range(rows.shape[1]):
        diff = rows[:, k, None] - pool[None, :, k]
        acc += diff * diff
    return np.sqrt(acc)


def _pair_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    acc = np.zeros(a.shape[0])
    for k in range(a.shape[1]):
        diff = a[:, k] - b[:, k]
        acc += diff * diff
    return np.sqrt(acc)


def _admissible_argmin(dist: np.ndarray, rows: np.ndarray, cols: np.ndarray,
                       exclusion: int, floor: float) -> np.ndarray:
    """Smallest admissible distance per row; -1 where none exists.

    ``rows`` and ``cols`` are the state indices behind the distance matrix.
    """
    masked = np.where(np.abs(rows[:, None] - cols[None, :]) > exclusion, dist, np.inf)
    masked[masked < floor] = np.inf
    best = np.argmin(masked, axis=1)  # first occurrence -> smallest index on ties
    found = np.isfinite(masked[np.arange(rows.size), best])
    return np.where(found, cols[best], -1)


def _neighbors_exhaustive(states: np.ndarray, n_query: int, n_pool: int,
                          exclusion: int, floor: float) -> np.ndarray:
    pool = states[:n_pool]
    cols = np.arange(n_pool)
    block = max(1, _BLOCK_ELEMENTS // max(n_pool, 1))
    out = np.empty(n_query, dtype=np.int64)
    for start in range(0, n_query, block):
        rows = np.arange(start, min(start + block, n_query))
        dist = _distances(states[rows], pool)
        out[rows] = _admissible_argmin(dist, rows, cols, exclusion, floor)
    return out


def _neighbors_kdtree(states: np.ndarray, n_query: int, n_pool: int,
                      exclusion: int, floor: float) -> np.ndarray:
    """KD-tree candidate search that reproduces the exhaustive result exactly.

    Candidates are re-scored with :func:`_distances`. A row is settled only
    when the k-th tree distance clears the best admissible candidate by a
    relative margin, so no unreturned state can tie or beat it; otherwise k
    doubles for that row.
    """
    from scipy.spatial import cKDTree

    pool = states[:n_pool]
    tree = cKDTree(pool)
    out = np.full(n_query, -1, dtype=np.int64)
    pending = np.arange(n_query)
    k = min(n_pool, 2 * exclusion + 8)
    while pending.size:
        tree_d, idx = tree.query(states[pending], k=k)
        tree_d = tree_d.reshape(pending.size, -1)
        idx = idx.reshape(pending.size, -1)
        still = []
        for r, i in enumerate(pending):
            cand = np.sort(idx[r])
            d = _distances(states[i:i + 1], pool[cand])
            j = _admissible_argmin(d, np.array([i]), cand, exclusion, floor)[0]
            if k >= n_pool:
                out[i] = j
                continue
            if j >= 0:
                best = _distances(states[i:i + 1], pool[j:j + 1])[0, 0]
                if tree_d[r, -1] > best * (1 + 1e-9) + 1e-300:
                    out[i] = j
                    continue
            still.append(i)
        pending = np.asarray(still, dtype=np.int64)
        k = min(n_pool, 2 * k)
    return out


def nearest_neighbor(states, index: int, theiler_window: int = 0,
                     distance_floor: float = 1e-12) -> Optional[int]:
    """Index of the closest state to ``states[index]`` with
    ``|index - j| > theiler_window`` and distance ``>= distance_floor``.

    Ties go to the smallest ``j``. Returns ``None`` when nothing qualifies.
    """
    X = np.asarray(states, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    dist = _distances(X[index:index + 1], X)
    j = _admissible_argmin(dist, np.array([index]), np.arange(X.shape[0]),
                           theiler_window, distance_floor)[0]
    return None if j < 0 else int(j)


def sufficiency_check(series, config: EmbeddingConfig = EmbeddingConfig()) -> Sufficiency:
    """Flag series shorter than ``100*m`` points or sparser than 0.7."""
    series = as_series(series)
    if len(series) < MIN_POINTS_PER_DIM * config.embedding_dim:
        return Sufficiency.SHORT_SERIES
    if sparsity_of(series) > MAX_SPARSITY:
        return Sufficiency.HIGH_SPARSITY
    return Sufficiency.OK


def largest_lyapunov(series, config: EmbeddingConfig = EmbeddingConfig()) -> LyapunovEstimate:
    series = as_series(series)
    states = delay_embed(series, config.embedding_dim, config.delay)
    n = states.shape[0]
    h = config.horizon
    n_future = n - h  # states t with t + h still embedded
    if n_future < 2:
        raise EstimationImpossibleError(
            f"{n} embedded states leave no room for a horizon of {h}")
    search = _neighbors_kdtree if config.search == "kdtree" else _neighbors_exhaustive
    nbr = search(states, n_future, n_future, config.exclusion, config.distance_floor)

    t = np.flatnonzero(nbr >= 0)
    if t.size == 0:
        raise EstimationImpossibleError("no state has an admissible nearest neighbor")
    tp = nbr[t]
    d0 = _pair_distances(states[t], states[tp])
    dh = _pair_distances(states[t + h], states[tp + h])
    keep = dh >= config.distance_floor
    if not keep.any():
        raise EstimationImpossibleError(
            f"all {t.size} neighbor pairs collapsed below the distance floor")
    rates = np.log(dh[keep] / d0[keep]) / h
    return LyapunovEstimate(
        lambda_=float(np.mean(rates)),
        pair_count=int(keep.sum()),
        skipped_pairs=int((~keep).sum()),
        sufficiency=sufficiency_check(series, config),
        pairs=np.column_stack([t[keep], tp[keep]]),
    )


def moving_lyapunov(series, plan: WindowPlan,
                    config: EmbeddingConfig = EmbeddingConfig()) -> MovingMetric:
    """Windowed estimate; windows with no admissible pair become NaN gaps."""
    series = as_series(series)
    if plan.window_size < config.min_window:
        raise WindowSizeError(
            f"window of {plan.window_size} is below the minimum {config.min_window} "
            f"for m={config.embedding_dim}, tau={config.delay}, horizon={config.horizon}")
    vals = []
    for w in iterate_windows(series, plan):
        try:
            vals.append(largest_lyapunov(w, config).lambda_)
        except EstimationImpossibleError:
            vals.append(np.nan)
    return MovingMetric.build(series, plan, vals, name="lambda")
