"""Loading long-format sales files, hierarchy aggregation, WAPE and Pearson r.

Long input files carry one row per (series, time step)::

    series_id,<level dims...>,t,value

``t`` is a non-negative integer ordinal. Values must be finite; nothing is
imputed. The M5 competition's wide ``sales_train_*.csv`` layout is accepted
through :func:`load_m5_wide`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .errors import DataError, UndefinedCorrelationError, UndefinedDenominatorError
from .timeseries import Frequency, TimeSeries

logger = logging.getLogger(__name__)

M5_DIMS = ("state_id", "store_id", "cat_id", "dept_id", "item_id")


@dataclass(frozen=True)
class LongRecord:
    series_id: str
    level_keys: dict
    timestamp_index: int
    value: float


@dataclass(frozen=True)
class Schema:
    """Maps file columns to roles. ``levels=None`` means every other column."""

    series_id: str = "series_id"
    t: str = "t"
    value: str = "value"
    levels: Optional[tuple] = None


@dataclass(frozen=True)
class Level:
    name: str
    grouping: tuple = ()


@dataclass(frozen=True)
class HierarchySpec:
    levels: tuple

    def __post_init__(self):
        levels = tuple(lv if isinstance(lv, Level) else Level(lv["name"], tuple(lv.get("grouping", ())))
                       for lv in self.levels)
        if not levels:
            raise ValueError("a hierarchy needs at least one level")
        for prev, cur in zip(levels, levels[1:]):
            if not set(prev.grouping) <= set(cur.grouping):
                raise ValueError(f"level {cur.name!r} does not refine {prev.name!r}")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def from_dict(cls, d: dict) -> "HierarchySpec":
        return cls(tuple(d["levels"]))

    def to_dict(self) -> dict:
        return {"levels": [{"name": lv.name, "grouping": list(lv.grouping)} for lv in self.levels]}

    @classmethod
    def m5(cls) -> "HierarchySpec":
        """Total, category, department and product levels (no state/store split)."""
        return cls((Level("L0", ()), Level("L1", ("cat_id",)), Level("L2", ("cat_id", "dept_id")),
                    Level("L3", ("cat_id", "dept_id", "item_id"))))

    @classmethod
    def total_and(cls, dims: Sequence[str]) -> "HierarchySpec":
        """L0 total followed by one level per prefix of ``dims``."""
        levels = [Level("L0", ())]
        for k in range(1, len(dims) + 1):
            levels.append(Level(f"L{k}", tuple(dims[:k])))
        return cls(tuple(levels))


@dataclass
class Dataset:
    """Validated long-format data: columns ``series_id, <dims>, t, value``."""

    frame: pd.DataFrame
    dims: tuple = ()
    frequency: Frequency = Frequency.DAILY
    source: str = ""

    def records(self) -> List[LongRecord]:
        out = []
        for row in self.frame.itertuples(index=False):
            d = row._asdict()
            out.append(LongRecord(str(d["series_id"]), {k: d[k] for k in self.dims},
                                  int(d["t"]), float(d["value"])))
        return out

    def series(self) -> Dict[str, TimeSeries]:
        return _assemble(self.frame, ["series_id"], self.frequency)


def _fail_row(mask: np.ndarray, message: str):
    # +2: one for the header line, one for 1-based numbering
    first = int(np.flatnonzero(mask)[0])
    raise DataError(f"line {first + 2}: {message}")


def load_long_csv(path, schema: Schema = Schema(), frequency=Frequency.DAILY) -> Dataset:
    """Read and validate a long-format CSV.

    Raises :class:`DataError` naming the offending line for missing or
    non-finite values, non-integer or negative ``t``, duplicate
    (series_id, t) keys and gaps in a series' time index.
    """
    path = Path(path)
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot parse {path}: {exc}") from None

    missing = [c for c in (schema.series_id, schema.t, schema.value) if c not in raw.columns]
    if missing:
        raise DataError(f"{path}: column(s) {missing} not found in header {list(raw.columns)}")
    roles = {schema.series_id, schema.t, schema.value}
    dims = tuple(schema.levels) if schema.levels is not None else tuple(c for c in raw.columns if c not in roles)
    unknown = [c for c in dims if c not in raw.columns]
    if unknown:
        raise DataError(f"{path}: level column(s) {unknown} not found")
    if raw.empty:
        raise DataError(f"{path}: no data rows")

    blank = raw[schema.value].str.strip() == ""
    if blank.any():
        _fail_row(blank.to_numpy(), f"missing value in column {schema.value!r}")
    values = pd.to_numeric(raw[schema.value], errors="coerce").to_numpy(dtype=np.float64)
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        _fail_row(bad, f"non-finite value {raw[schema.value].iloc[i]!r}")
    t = pd.to_numeric(raw[schema.t], errors="coerce").to_numpy(dtype=np.float64)
    bad_t = ~np.isfinite(t) | (t < 0) | (t != np.floor(t))
    if bad_t.any():
        i = int(np.flatnonzero(bad_t)[0])
        _fail_row(bad_t, f"timestamp {raw[schema.t].iloc[i]!r} is not a non-negative integer")
    sid = raw[schema.series_id]
    if (sid.str.strip() == "").any():
        _fail_row((sid.str.strip() == "").to_numpy(), "empty series_id")

    frame = pd.DataFrame({"series_id": sid})
    for d in dims:
        frame[d] = raw[d]
    frame["t"] = t.astype(np.int64)
    frame["value"] = values
    dup = frame.duplicated(["series_id", "t"], keep="first").to_numpy()
    if dup.any():
        i = int(np.flatnonzero(dup)[0])
        _fail_row(dup, f"duplicate key (series_id={frame.series_id.iloc[i]!r}, t={frame.t.iloc[i]})")
    for d in dims:
        per = frame.groupby("series_id", sort=False)[d].nunique()
        if (per > 1).any():
            raise DataError(f"series {per[per > 1].index[0]!r} has more than one {d!r} value")
    ds = Dataset(frame, dims, Frequency(frequency), str(path))
    ds.series()  # contiguity check
    return ds


def load_m5_wide(path, frequency=Frequency.DAILY, max_items: Optional[int] = None) -> Dataset:
    """Load an M5 ``sales_train_*.csv`` (one row per item-store, ``d_1..d_N``)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    wide = pd.read_csv(path)
    day_cols = [c for c in wide.columns if c.startswith("d_")]
    absent = [c for c in ("id",) + M5_DIMS if c not in wide.columns]
    if absent or not day_cols:
        raise DataError(f"{path} does not look like an M5 sales file (missing {absent or 'd_* columns'})")
    if max_items is not None:
        keep = sorted(wide["item_id"].unique())[:max_items]
        wide = wide[wide["item_id"].isin(keep)]
    vals = wide[day_cols].to_numpy(dtype=np.float64)
    if not np.all(np.isfinite(vals)):
        raise DataError(f"{path}: non-finite sales values")
    days = np.array([int(c[2:]) for c in day_cols], dtype=np.int64)
    n_series, n_days = vals.shape
    frame = pd.DataFrame({"series_id": np.repeat(wide["id"].to_numpy(), n_days)})
    for d in M5_DIMS:
        frame[d] = np.repeat(wide[d].to_numpy(), n_days)
    frame["t"] = np.tile(days, n_series)
    frame["value"] = vals.ravel()
    return Dataset(frame, M5_DIMS, Frequency(frequency), str(path))


def _assemble(frame: pd.DataFrame, keys: List[str], frequency: Frequency) -> Dict[str, TimeSeries]:
    out = {}
    if keys:
        groups = frame.groupby(keys, sort=True)
    else:
        groups = [((), frame)]
    for key, g in groups:
        key = key if isinstance(key, tuple) else (key,)
        sid = "/".join(str(k) for k in key) if key else "total"
        g = g.sort_values("t")
        t = g["t"].to_numpy()
        if t.size > 1 and np.any(np.diff(t) != 1):
            gap = int(t[np.flatnonzero(np.diff(t) != 1)[0]])
            raise DataError(f"series {sid!r} has a gap in t after {gap}")
        out[sid] = TimeSeries(g["value"].to_numpy(), id=sid, start_index=int(t[0]), frequency=frequency)
    return out


def aggregate_levels(dataset: Dataset, hierarchy: HierarchySpec) -> Dict[str, List[TimeSeries]]:
    """Sum series per timestamp within each level's groups.

    Series ids at a level join the group's dimension values with ``/``; the
    empty grouping yields the single series ``"total"``.
    """
    if dataset.frame.empty:
        raise DataError("empty dataset")
    out = {}
    for lv in hierarchy.levels:
        unknown = [d for d in lv.grouping if d not in dataset.dims]
        if unknown:
            raise DataError(f"level {lv.name!r} groups by unknown dimension(s) {unknown}")
        keys = list(lv.grouping)
        summed = dataset.frame.groupby(keys + ["t"], sort=True, as_index=False)["value"].sum()
        series = _assemble(summed, keys, dataset.frequency)
        out[lv.name] = [s for _, s in sorted(series.items())]
    return out


def load_errors(path) -> pd.DataFrame:
    """Read a ``series_id,model,wape`` file (an optional ``frequency`` column
    restricts a row to that frequency)."""
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype={"series_id": str, "model": str}, keep_default_na=False)
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    need = {"series_id", "model", "wape"}
    if not need <= set(df.columns):
        raise DataError(f"{path}: expected columns {sorted(need)}, got {list(df.columns)}")
    w = pd.to_numeric(df["wape"], errors="coerce").to_numpy(dtype=np.float64)
    bad = ~np.isfinite(w)
    if bad.any():
        _fail_row(bad, f"non-finite wape {df['wape'].iloc[int(np.flatnonzero(bad)[0])]!r}")
    df = df.assign(wape=w)
    keys = ["series_id", "model"] + (["frequency"] if "frequency" in df.columns else [])
    dup = df.duplicated(keys).to_numpy()
    if dup.any():
        _fail_row(dup, "duplicate error entry")
    return df


def wape(actuals, forecasts) -> float:
    """Weighted absolute percentage error, ``sum|a - f| / sum|a|`` (a ratio, not %)."""
    a = np.asarray(actuals, dtype=np.float64)
    f = np.asarray(forecasts, dtype=np.float64)
    if a.shape != f.shape or a.size < 1:
        raise ValueError("actuals and forecasts must be non-empty and of equal length")
    denom = np.abs(a).sum()
    if denom == 0:
        raise UndefinedDenominatorError("WAPE is undefined when every actual is zero")
    return float(np.abs(a - f).sum() / denom)


def pearson_r(x, y) -> float:
    """Sample Pearson correlation. Symmetric in its arguments bit-for-bit."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("pearson_r needs two equal-length sequences of at least 2 values")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = np.dot(dx, dx)
    syy = np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("correlation is undefined for a constant input")
    r = np.dot(dx, dy) / (np.sqrt(sxx) * np.sqrt(syy))
    return float(min(1.0, max(-1.0, r)))
