"""Benchmark segment evaluation and length x sparsity sensitivity sweeps."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ForecastabilityError
from .lyapunov import EmbeddingConfig, largest_lyapunov, moving_lyapunov
from .spectral import SpectralConfig, moving_spectral_predictability, spectral_predictability
from .synth import RNG_ALGORITHM, Benchmark, SignalSpec, generate, sparsify
from .timeseries import WindowPlan

METRICS = ("spectral_predictability", "largest_lyapunov")
DEFAULT_LENGTHS = (50, 100, 150, 200, 250, 300)
DEFAULT_RATES = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95)


def fmt(x) -> str:
    """Fixed 9-significant-digit rendering used by every output file."""
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return ""
    return f"{float(x):.9g}"


def rounded(x):
    if x is None or not np.isfinite(x):
        return None
    return float(f"{float(x):.9g}")


def mean_std(values: Sequence[float]) -> tuple:
    """Mean and sample (n-1) standard deviation; std is 0 for one value and
    both are NaN for none."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return float("nan"), float("nan")
    if v.size == 1:
        return float(v[0]), 0.0
    return float(v.mean()), float(v.std(ddof=1))


def map_ordered(fn, items, jobs: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool; order is kept."""
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class SweepSpec:
    generator: SignalSpec
    lengths: tuple = DEFAULT_LENGTHS
    sparsity_rates: tuple = DEFAULT_RATES
    replicates: int = 100
    metric: str = "spectral_predictability"
    base_seed: int = 0
    spectral: SpectralConfig = SpectralConfig()
    embedding: EmbeddingConfig = EmbeddingConfig()

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if not self.lengths or not self.sparsity_rates or self.replicates < 1:
            raise ValueError("lengths and sparsity_rates must be non-empty and replicates >= 1")
        object.__setattr__(self, "lengths", tuple(int(v) for v in self.lengths))
        object.__setattr__(self, "sparsity_rates", tuple(float(v) for v in self.sparsity_rates))

    def seed_for(self, replicate: int) -> int:
        return self.base_seed + replicate

    def to_dict(self) -> dict:
        return {
            "generator": self.generator.to_dict(),
            "lengths": list(self.lengths),
            "sparsity_rates": list(self.sparsity_rates),
            "replicates": self.replicates,
            "metric": self.metric,
            "base_seed": self.base_seed,
            "spectral": asdict(self.spectral),
            "embedding": asdict(self.embedding),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        kw = {k: d[k] for k in ("lengths", "sparsity_rates", "replicates", "metric", "base_seed") if k in d}
        gen = d.get("generator", {"kind": "sine", "length": 300})
        gen = dict(gen, length=gen.get("length", max(kw.get("lengths", DEFAULT_LENGTHS))))
        return cls(generator=SignalSpec.from_dict(gen),
                   spectral=SpectralConfig(**d.get("spectral", {})),
                   embedding=EmbeddingConfig(**d.get("embedding", {})), **kw)


@dataclass(frozen=True)
class SweepCell:
    length: int
    sparsity_rate: float
    mean: float
    std: float
    replicate_count: int
    failure_count: int
    short_series: bool = False


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    cells: tuple

    def cell(self, length: int, rate: float) -> SweepCell:
        for c in self.cells:
            if c.length == length and abs(c.sparsity_rate - rate) < 1e-12:
                return c
        raise KeyError((length, rate))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["length", "sparsity", "mean", "std", "n", "failures"])
        for c in self.cells:
            w.writerow([c.length, fmt(c.sparsity_rate), fmt(c.mean), fmt(c.std),
                        c.replicate_count, c.failure_count])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "spec": self.spec.to_dict(),
            "rng": RNG_ALGORITHM,
            "cells": [
                {"length": c.length, "sparsity": rounded(c.sparsity_rate), "mean": rounded(c.mean),
                 "std": rounded(c.std), "n": c.replicate_count, "failures": c.failure_count,
                 "short_series": c.short_series}
                for c in self.cells
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _replicate_value(spec: SweepSpec, length: int, rate: float, r: int) -> Optional[float]:
    seed = spec.seed_for(r)
    base = generate(SignalSpec(spec.generator.kind, length, seed, spec.generator.params), randomize=True)
    series = sparsify(base, rate, seed)
    try:
        if spec.metric == "spectral_predictability":
            return spectral_predictability(series, spec.spectral)
        return largest_lyapunov(series, spec.embedding).lambda_
    except ForecastabilityError:
        return None


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Evaluate every (length, rate) cell over ``spec.replicates`` seeds.

    Replicate ``r`` draws its signal and its zeroed positions from seed
    ``base_seed + r``. Failed estimates are counted, not averaged.
    """
    tasks = [(L, s, r) for L in spec.lengths for s in spec.sparsity_rates
             for r in range(spec.replicates)]
    values = map_ordered(lambda task: _replicate_value(spec, *task), tasks, jobs)
    cells = []
    n_rep = spec.replicates
    min_len = 100 * spec.embedding.embedding_dim
    for k in range(0, len(tasks), n_rep):
        L, s, _ = tasks[k]
        ok = [v for v in values[k:k + n_rep] if v is not None]
        mean, std = mean_std(ok)
        cells.append(SweepCell(L, s, mean, std, len(ok), n_rep - len(ok),
                               short_series=spec.metric == "largest_lyapunov" and L < min_len))
    return SweepResult(spec, tuple(cells))


@dataclass(frozen=True)
class SegmentStat:
    label: str
    metric: str
    mean: float
    std: float
    windows: int
    gaps: int = 0


@dataclass(frozen=True)
class SegmentSummary:
    segment_length: int
    interior: tuple  # SegmentStat per (segment, metric)
    boundary: tuple  # SegmentStat per (boundary, metric)
    omega_window: int
    lambda_window: int

    def means(self, metric: str) -> list:
        return [s.mean for s in self.interior if s.metric == metric]

    def boundary_means(self, metric: str) -> list:
        return [s.mean for s in self.boundary if s.metric == metric]

    def to_rows(self) -> list:
        rows = []
        for kind, stats in (("segment", self.interior), ("boundary", self.boundary)):
            for s in stats:
                rows.append({"kind": kind, "label": s.label, "metric": s.metric,
                             "mean": s.mean, "std": s.std, "windows": s.windows, "gaps": s.gaps})
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "label", "metric", "mean", "std", "windows", "gaps"])
        for r in self.to_rows():
            w.writerow([r["kind"], r["label"], r["metric"], fmt(r["mean"]), fmt(r["std"]),
                        r["windows"], r["gaps"]])
        return buf.getvalue()

    def to_json(self, extra: Optional[dict] = None) -> str:
        doc = {"segment_length": self.segment_length, "omega_window": self.omega_window,
               "lambda_window": self.lambda_window, "rng": RNG_ALGORITHM,
               "rows": [dict(r, mean=rounded(r["mean"]), std=rounded(r["std"])) for r in self.to_rows()]}
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _split_windows(values: np.ndarray, start: np.ndarray, end: np.ndarray, L: int,
                   labels: Sequence[str], metric: str) -> tuple:
    interior, boundary = [], []
    for k, label in enumerate(labels):
        inside = (start >= k * L) & (end < (k + 1) * L)
        v = values[inside]
        mean, std = mean_std(v[~np.isnan(v)])
        interior.append(SegmentStat(label, metric, mean, std, int(inside.sum()), int(np.isnan(v).sum())))
    for k in range(1, len(labels)):
        b = k * L
        straddle = (start < b) & (end >= b)
        v = values[straddle]
        mean, std = mean_std(v[~np.isnan(v)])
        boundary.append(SegmentStat(f"{labels[k - 1]}|{labels[k]}", metric, mean, std,
                                    int(straddle.sum()), int(np.isnan(v).sum())))
    return interior, boundary


def segment_metrics(benchmark: Benchmark,
                    plans: tuple = (WindowPlan(200), WindowPlan(300)),
                    spectral: SpectralConfig = SpectralConfig(),
                    embedding: EmbeddingConfig = EmbeddingConfig(),
                    jobs: int = 1) -> SegmentSummary:
    """Moving Omega and lambda summarized per segment.

    Only windows lying entirely inside one segment count toward that
    segment; windows that straddle a boundary are summarized per boundary.
    """
    omega_plan, lambda_plan = plans
    L = benchmark.segment_length
    if omega_plan.window_size > L or lambda_plan.window_size > L:
        raise ValueError("window sizes must not exceed the segment length")
    omega, lam = map_ordered(
        lambda f: f(),
        [lambda: moving_spectral_predictability(benchmark.series, omega_plan, spectral),
         lambda: moving_lyapunov(benchmark.series, lambda_plan, embedding)],
        jobs)
    interior, boundary = [], []
    for name, mm in (("omega", omega), ("lambda", lam)):
        i, b = _split_windows(mm.values, mm.start_index, mm.end_index, L, benchmark.labels, name)
        interior += i
        boundary += b
    return SegmentSummary(L, tuple(interior), tuple(boundary),
                          omega_plan.window_size, lambda_plan.window_size)


def average_segment_means(summaries: Sequence[SegmentSummary], metric: str) -> np.ndarray:
    return np.mean([s.means(metric) for s in summaries], axis=0)
