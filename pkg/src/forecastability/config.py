"""Declarative JSON configuration.

Top-level keys are type names and their bodies use the dataclass field
names, e.g.::

    {
      "SpectralConfig": {"log_base": 2.0, "apply_hann": true},
      "EmbeddingConfig": {"embedding_dim": 3, "delay": 1, "horizon": 5},
      "HierarchySpec": {"levels": [{"name": "L0", "grouping": []},
                                   {"name": "L1", "grouping": ["cat_id"]}]},
      "SweepSpec": {"generator": {"kind": "sine", "length": 300},
                    "lengths": [300], "sparsity_rates": [0.0, 0.9],
                    "replicates": 100, "metric": "spectral_predictability",
                    "base_seed": 0},
      "SignalSpec": {"kind": "lorenz", "length": 1000, "seed": 3,
                     "params": {"sample_every": 25}}
    }

``SweepSpec`` inherits the top-level spectral and embedding configs unless
it carries its own ``spectral`` / ``embedding`` bodies.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

from .experiments import SweepSpec
from .ingest import HierarchySpec
from .lyapunov import EmbeddingConfig
from .spectral import SpectralConfig
from .synth import SignalSpec

KNOWN_KEYS = ("SpectralConfig", "EmbeddingConfig", "HierarchySpec", "SweepSpec", "SignalSpec")


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    spectral: SpectralConfig = SpectralConfig()
    embedding: EmbeddingConfig = EmbeddingConfig()
    hierarchy: Optional[HierarchySpec] = None
    sweep: Optional[dict] = None
    signal: Optional[SignalSpec] = None


def _build(cls, body: dict, key: str):
    names = {f.name for f in fields(cls)}
    extra = sorted(set(body) - names)
    if extra:
        raise ConfigError(f"{key}: unknown field(s) {extra}; expected {sorted(names)}")
    try:
        return cls(**body)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from None


def parse_config(doc: dict) -> Config:
    unknown = sorted(set(doc) - set(KNOWN_KEYS))
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {unknown}; expected some of {list(KNOWN_KEYS)}")
    cfg = Config()
    if "SpectralConfig" in doc:
        cfg.spectral = _build(SpectralConfig, doc["SpectralConfig"], "SpectralConfig")
    if "EmbeddingConfig" in doc:
        cfg.embedding = _build(EmbeddingConfig, doc["EmbeddingConfig"], "EmbeddingConfig")
    try:
        if "HierarchySpec" in doc:
            cfg.hierarchy = HierarchySpec.from_dict(doc["HierarchySpec"])
        if "SignalSpec" in doc:
            cfg.signal = SignalSpec.from_dict(doc["SignalSpec"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from None
    if "SweepSpec" in doc:
        cfg.sweep = dict(doc["SweepSpec"])
    return cfg


def load_config(path) -> Config:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    return parse_config(doc)


def sweep_from_config(cfg: Config) -> SweepSpec:
    body = dict(cfg.sweep or {})
    body.setdefault("spectral", asdict(cfg.spectral))
    body.setdefault("embedding", asdict(cfg.embedding))
    try:
        return SweepSpec.from_dict(body)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"SweepSpec: {exc}") from None
