"""Per-series and per-level forecastability report with optional error joins."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from . import __version__
from .errors import EstimationImpossibleError, ForecastabilityError
from .experiments import fmt, map_ordered, mean_std, rounded
from .ingest import pearson_r
from .lyapunov import EmbeddingConfig, largest_lyapunov, sufficiency_check
from .spectral import SpectralConfig, omega_from_distribution, power_distribution
from .synth import RNG_ALGORITHM, gen_white_noise, zero_positions
from .timeseries import Frequency, TimeSeries, resample_weekly, sparsity_of

logger = logging.getLogger(__name__)

OMEGA_LOW = 0.2
LAMBDA_HIGH = 1.0
MIN_CORRELATION_POINTS = 3


def low_forecastability(omega: Optional[float], lam: Optional[float]) -> bool:
    """True when Omega < 0.2 or lambda > 1.0; missing values never trigger."""
    return (omega is not None and omega < OMEGA_LOW) or (lam is not None and lam > LAMBDA_HIGH)


def white_noise_baseline(length: int, zeros: int, config: SpectralConfig,
                         seed: int = 0, replicates: int = 5) -> float:
    """Mean Omega of white noise with the same length and zero count."""
    vals = []
    for r in range(replicates):
        noise = gen_white_noise(length, 1.0, seed + r)
        noise = zero_positions(noise, zeros, seed + r)
        vals.append(omega_from_distribution(power_distribution(noise, config), config))
    return float(np.mean(vals))


@dataclass
class MetricReport:
    rows: list
    summaries: list
    correlations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def summary(self, level: str, frequency: str) -> dict:
        for s in self.summaries:
            if s["level"] == level and s["frequency"] == frequency:
                return s
        raise KeyError((level, frequency))

    def correlation(self, metric: str, frequency: str, model: str, level: str = "all") -> dict:
        for c in self.correlations:
            if (c["metric"], c["frequency"], c["model"], c["level"]) == (metric, frequency, model, level):
                return c
        raise KeyError((metric, frequency, model, level))

    def to_json(self) -> str:
        def clean(obj):
            if isinstance(obj, float):
                return rounded(obj)
            if isinstance(obj, dict):
                return {k: clean(v) for k, v in obj.items()}
            if isinstance(obj, (list, tuple)):
                return [clean(v) for v in obj]
            return obj

        doc = {"metadata": self.metadata, "rows": self.rows, "summaries": self.summaries,
               "correlations": self.correlations, "warnings": self.warnings}
        return json.dumps(clean(doc), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        models = sorted({m for r in self.rows for m in r.get("errors", {})})
        cols = ["level", "frequency", "series_id", "length", "sparsity", "omega", "lambda",
                "lambda_pairs", "sufficiency", "baseline_omega", "low_forecastability"]
        if any("omega_two_pi" in r for r in self.rows):
            cols.insert(6, "omega_two_pi")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols + [f"wape_{m}" for m in models])
        for r in self.rows:
            out = []
            for c in cols:
                v = r.get(c)
                if isinstance(v, bool):
                    out.append(str(v).lower())
                elif isinstance(v, float):
                    out.append(fmt(v))
                else:
                    out.append("" if v is None else v)
            out += [fmt(r.get("errors", {}).get(m)) for m in models]
            w.writerow(out)
        return buf.getvalue()


def _series_row(level: str, freq: str, s: TimeSeries, spectral: SpectralConfig,
                embedding: EmbeddingConfig, baseline: bool, seed: int, debug: bool) -> dict:
    row = {"level": level, "frequency": freq, "series_id": s.id, "length": len(s),
           "sparsity": sparsity_of(s), "omega": None, "lambda": None, "lambda_pairs": 0,
           "sufficiency": sufficiency_check(s, embedding).value, "notes": []}
    try:
        dist = power_distribution(s, spectral)
        row["omega"] = omega_from_distribution(dist, spectral)
        if debug:
            row["omega_two_pi"] = omega_from_distribution(dist, replace(spectral, normalizer="two_pi"))
    except ForecastabilityError as exc:
        row["notes"].append(f"omega: {exc}")
    try:
        est = largest_lyapunov(s, embedding)
        row["lambda"] = est.lambda_
        row["lambda_pairs"] = est.pair_count
    except EstimationImpossibleError as exc:
        row["notes"].append(f"lambda gap: {exc}")
    except ForecastabilityError as exc:
        row["notes"].append(f"lambda: {exc}")
    if baseline and row["omega"] is not None:
        zeros = int(np.count_nonzero(s.values == 0.0))
        row["baseline_omega"] = white_noise_baseline(len(s), zeros, spectral, seed)
    else:
        row["baseline_omega"] = None
    row["low_forecastability"] = low_forecastability(row["omega"], row["lambda"])
    return row


def build_report(levels: Dict[str, Sequence[TimeSeries]],
                 spectral: SpectralConfig = SpectralConfig(),
                 embedding: EmbeddingConfig = EmbeddingConfig(),
                 errors: Optional[pd.DataFrame] = None,
                 frequencies: Sequence[str] = ("daily", "weekly"),
                 baseline: bool = True, seed: int = 0, debug: bool = False,
                 jobs: int = 1) -> MetricReport:
    """Compute Omega and lambda for every series at every level and frequency.

    Weekly rows come from :func:`resample_weekly` of the daily series with
    the same configs. ``errors`` (columns series_id, model, wape and an
    optional frequency) is joined onto rows and correlated against both
    metrics per (frequency, model), pooled over levels and per level.
    """
    tasks, warnings = [], []
    for level, series_list in levels.items():
        for s in sorted(series_list, key=lambda x: x.id):
            for freq in frequencies:
                if freq == "weekly":
                    if s.frequency == Frequency.WEEKLY:
                        tasks.append((level, freq, s))
                        continue
                    try:
                        tasks.append((level, freq, resample_weekly(s)))
                    except ForecastabilityError as exc:
                        warnings.append(f"{level}/{s.id}: no weekly row ({exc})")
                else:
                    tasks.append((level, freq, s))
    rows = map_ordered(
        lambda t: _series_row(t[0], t[1], t[2], spectral, embedding, baseline, seed, debug),
        tasks, jobs)

    if errors is not None:
        warnings += _join_errors(rows, errors)

    summaries = []
    for level in levels:
        for freq in frequencies:
            sel = [r for r in rows if r["level"] == level and r["frequency"] == freq]
            if not sel:
                continue
            om = [r["omega"] for r in sel if r["omega"] is not None]
            la = [r["lambda"] for r in sel if r["lambda"] is not None]
            om_mean, om_std = mean_std(om)
            la_mean, la_std = mean_std(la)
            summaries.append({"level": level, "frequency": freq, "series": len(sel),
                              "omega_mean": om_mean, "omega_std": om_std, "omega_n": len(om),
                              "lambda_mean": la_mean, "lambda_std": la_std, "lambda_n": len(la),
                              "lambda_gaps": len(sel) - len(la),
                              "low_forecastability": sum(r["low_forecastability"] for r in sel)})

    correlations = _correlations(rows, list(levels), frequencies, warnings) if errors is not None else []
    for w in warnings:
        logger.warning(w)
    metadata = {
        "version": __version__,
        "rng": RNG_ALGORITHM,
        "seed": seed,
        "spectral_config": asdict(spectral),
        "embedding_config": dict(asdict(embedding), theiler_window=embedding.exclusion),
        "omega_normalizer": ("log_a(N), N = number of one-sided bins" if spectral.normalizer == "bins"
                             else "log_a(2*pi)"),
        "entropy": "-sum p log_a p over bins with p > 0",
        "lambda_units": "per sample step",
        "thresholds": {"omega_below": OMEGA_LOW, "lambda_above": LAMBDA_HIGH},
        "baseline": "mean Omega of 5 white-noise draws, matched length and zero count" if baseline else None,
        "frequencies": list(frequencies),
    }
    return MetricReport(rows, summaries, correlations, warnings, metadata)


def _join_errors(rows: list, errors: pd.DataFrame) -> list:
    has_freq = "frequency" in errors.columns
    lookup: Dict[tuple, dict] = {}
    for rec in errors.itertuples(index=False):
        key = (rec.series_id, rec.frequency if has_freq else None)
        lookup.setdefault(key, {})[rec.model] = float(rec.wape)
    used = set()
    for r in rows:
        key = (r["series_id"], r["frequency"] if has_freq else None)
        if key in lookup:
            r["errors"] = dict(sorted(lookup[key].items()))
            used.add(key)
        else:
            r["errors"] = {}
    warnings = []
    unmatched_rows = sum(1 for r in rows if not r["errors"])
    unmatched_errors = len(lookup) - len(used)
    if unmatched_rows:
        warnings.append(f"{unmatched_rows} report row(s) have no error entry")
    if unmatched_errors:
        warnings.append(f"{unmatched_errors} error entr(y/ies) match no report row")
    return warnings


def _correlations(rows: list, levels: list, frequencies: Sequence[str], warnings: list) -> list:
    models = sorted({m for r in rows for m in r["errors"]})
    out = []
    for metric, col in (("omega", "omega"), ("lambda", "lambda")):
        for freq in frequencies:
            for model in models:
                for level in ["all"] + levels:
                    pts = [(r[col], r["errors"][model]) for r in rows
                           if r["frequency"] == freq and model in r["errors"] and r[col] is not None
                           and (level == "all" or r["level"] == level)]
                    entry = {"metric": metric, "frequency": freq, "model": model, "level": level,
                             "n": len(pts), "r": None}
                    if len(pts) < MIN_CORRELATION_POINTS:
                        entry["skipped"] = f"fewer than {MIN_CORRELATION_POINTS} joined points"
                    else:
                        x, y = zip(*pts)
                        try:
                            entry["r"] = pearson_r(x, y)
                        except ForecastabilityError as exc:
                            entry["skipped"] = str(exc)
                    out.append(entry)
    return out
