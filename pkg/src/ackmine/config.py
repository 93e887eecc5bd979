"""Pipeline configuration: one flat TOML document, every key overridable by
the CLI flag of the same name (flags win)."""

from __future__ import annotations

import sys
from dataclasses import dataclass, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Raised for unusable configuration."""


@dataclass
class PipelineConfig:
    # Paths
    input: str = ""                      # glob of field-tagged export files
    domain_map: str | None = None        # None -> bundled default table
    fund_gazetteer: str | None = None
    uni_gazetteer: str | None = None
    cor_gazetteer: str | None = None
    overrides: str | None = None
    abbreviations: str | None = None     # sentence-splitter guard list
    tags: str | None = None              # external tags (import mode)
    report_dir: str = "report"
    # Corpus restriction
    year_min: int = 2014
    year_max: int = 2019
    languages: tuple[str, ...] = ("English",)
    doc_types: tuple[str, ...] = ("Article", "Review")
    sample_n: int | None = None
    # Determinism
    seed: int = 0
    # Tagging
    tagger_mode: str = "baseline"        # baseline | import
    # Disambiguation thresholds
    name_threshold: int = 93
    abbrev_threshold: int = 99
    cor_partial_threshold: int = 96
    misspelling_threshold: int = 90
    min_chars: int = 4
    # Analysis
    bootstrap_resamples: int = 1000

    def validate(self) -> None:
        for name in (
            "name_threshold",
            "abbrev_threshold",
            "cor_partial_threshold",
            "misspelling_threshold",
        ):
            value = getattr(self, name)
            if not 0 <= value <= 100:
                raise ConfigError(f"{name} must be within [0, 100], got {value}")
        if self.tagger_mode not in ("baseline", "import"):
            raise ConfigError(
                f"tagger_mode must be 'baseline' or 'import', got {self.tagger_mode!r}"
            )
        if self.tagger_mode == "import" and not self.tags:
            raise ConfigError("tagger_mode 'import' requires a tags file")
        if self.year_min > self.year_max:
            raise ConfigError(f"year_min {self.year_min} > year_max {self.year_max}")
        if self.sample_n is not None and self.sample_n <= 0:
            raise ConfigError(f"sample_n must be positive, got {self.sample_n}")
        if self.bootstrap_resamples < 1:
            raise ConfigError("bootstrap_resamples must be >= 1")
        if self.min_chars < 0:
            raise ConfigError("min_chars must be >= 0")

    def to_snapshot(self) -> dict:
        """Plain dict of every setting, for the manifest."""
        snapshot = {}
        for spec in fields(self):
            value = getattr(self, spec.name)
            snapshot[spec.name] = list(value) if isinstance(value, tuple) else value
        return snapshot


def load_config(path: str | Path) -> PipelineConfig:
    """Read a flat TOML config; unknown keys are an error so typos surface."""
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    return config_from_mapping(data, source=str(path))


def config_from_mapping(data: dict, source: str = "<config>") -> PipelineConfig:
    known = {spec.name for spec in fields(PipelineConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{source}: unknown config keys: {', '.join(sorted(unknown))}")
    kwargs = dict(data)
    for key in ("languages", "doc_types"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    try:
        config = PipelineConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return config
