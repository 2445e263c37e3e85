from __future__ import annotations

import dataclasses
import datetime as dt
import json
import os
from dataclasses import dataclass
from typing import Any, Mapping, Optional

from .journeys import DEFAULT_MIN_SUPPORT
from .lsh import DEFAULT_BANDS, DEFAULT_ROWS, DEFAULT_THRESHOLD, ConfigurationError
from .minhash import DEFAULT_NUM_HASHES
from .shingling import DEFAULT_K, DEFAULT_SEED

CONFIG_ENV = "DUPESCAN_CONFIG"


@dataclass(frozen=True)
class PipelineConfig:
    k: int = DEFAULT_K
    num_hashes: int = DEFAULT_NUM_HASHES
    bands: int = DEFAULT_BANDS
    rows: int = DEFAULT_ROWS
    threshold: float = DEFAULT_THRESHOLD
    seed: int = DEFAULT_SEED
    analysis_date: Optional[dt.date] = None
    min_support: int = DEFAULT_MIN_SUPPORT
    withdrawn_as_rejection: bool = False

    def __post_init__(self):
        if isinstance(self.analysis_date, str):
            object.__setattr__(self, "analysis_date", dt.date.fromisoformat(self.analysis_date))
        self.validate()

    def validate(self) -> None:
        if self.k < 1:
            raise ConfigurationError(f"shingle size k must be >= 1 (got {self.k})")
        if self.bands * self.rows != self.num_hashes:
            raise ConfigurationError(
                f"bands*rows ({self.bands}*{self.rows}) must equal num_hashes ({self.num_hashes})"
            )
        if not 0 < self.threshold <= 1:
            raise ConfigurationError(f"threshold must be in (0, 1] (got {self.threshold})")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be an unsigned 64-bit integer")
        if self.min_support < 0:
            raise ConfigurationError("min_support must be non-negative")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "PipelineConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(str(exc)) from exc

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        return cls.from_mapping(data)

    @classmethod
    def load(cls, overrides: Optional[Mapping[str, Any]] = None) -> "PipelineConfig":
        """Defaults, then the file named by $DUPESCAN_CONFIG, then ``overrides``."""
        base: dict[str, Any] = {}
        path = os.environ.get(CONFIG_ENV)
        if path:
            base = cls.from_file(path).to_dict()
        base.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_mapping(base)

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if self.analysis_date is not None:
            d["analysis_date"] = self.analysis_date.isoformat()
        return d
