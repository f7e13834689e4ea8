"""Run configuration: defaults, flat key/value config files, flag overrides.

Config file example::

    # cement.conf
    n = 100
    aggregator = mean
    maturity = confident
    mode = best
    budget_fraction = 1/10
    k_links = 5
    filter_scope = all
    pooled_mean = false
    test_path_globs = **/src/test/**, **/*Test.java
    test_name_patterns = test*
    ignore_globs = **/generated/**
    extensions = .java
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Any

from cement.applications import (
    DEFAULT_BUDGET_FRACTION,
    DEFAULT_K_LINKS,
    FilterScope,
    MaturityLevel,
    SelectionMode,
)
from cement.coupling import DEFAULT_TOP_N, Aggregator
from cement.errors import ConfigError
from cement.extraction.classify import ClassifierConfig
from cement.extraction.ingest import DEFAULT_EXTENSIONS


@dataclass(frozen=True)
class RunConfig:
    n: int = DEFAULT_TOP_N
    aggregator: Aggregator = Aggregator.MEAN
    maturity: MaturityLevel = MaturityLevel.ALL
    selection_mode: SelectionMode = SelectionMode.BEST
    budget_fraction: Fraction = DEFAULT_BUDGET_FRACTION
    budget: int | None = None  # absolute override of budget_fraction
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    extensions: tuple[str, ...] = DEFAULT_EXTENSIONS
    k_links: int = DEFAULT_K_LINKS
    filter_scope: FilterScope = FilterScope.ALL
    pooled_mean: bool = False

    def provenance(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "aggregator": self.aggregator.value,
            "maturity": self.maturity.value,
            "mode": self.selection_mode.value,
            "budget_fraction": str(self.budget_fraction),
            "budget": self.budget,
            "k_links": self.k_links,
            "filter_scope": self.filter_scope.value,
            "pooled_mean": self.pooled_mean,
        }


def parse_fraction(text: str) -> Fraction:
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a fraction: {text!r}") from None
    if not 0 < value <= 1:
        raise ConfigError(f"fraction {text!r} outside (0, 1]")
    return value


def _enum(cls, text: str):
    try:
        return cls(text.strip().lower())
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ConfigError(f"invalid value {text!r} (choose from {choices})") from None


def _int(text: str, minimum: int = 0) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ConfigError(f"not an integer: {text!r}") from None
    if value < minimum:
        raise ConfigError(f"{value} is below the minimum {minimum}")
    return value


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _list(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


_CLASSIFIER_KEYS = {f.name for f in fields(ClassifierConfig)}


def apply_settings(cfg: RunConfig, settings: dict[str, str]) -> RunConfig:
    """Apply string-valued settings (from a file or flags) to ``cfg``."""
    changes: dict[str, Any] = {}
    classifier: dict[str, Any] = {}
    for key, raw in settings.items():
        key = key.strip().lower().replace("-", "_")
        if key == "n":
            changes["n"] = _int(raw)
        elif key == "aggregator":
            changes["aggregator"] = _enum(Aggregator, raw)
        elif key == "maturity":
            changes["maturity"] = _enum(MaturityLevel, raw)
        elif key in ("mode", "selection_mode"):
            changes["selection_mode"] = _enum(SelectionMode, raw)
        elif key == "budget_fraction":
            changes["budget_fraction"] = parse_fraction(raw)
        elif key == "budget":
            if "/" in raw or "." in raw:
                changes["budget_fraction"] = parse_fraction(raw)
                changes["budget"] = None
            else:
                changes["budget"] = _int(raw, 1)
        elif key in ("k", "k_links"):
            changes["k_links"] = _int(raw, 1)
        elif key == "filter_scope":
            changes["filter_scope"] = _enum(FilterScope, raw)
        elif key == "pooled_mean":
            changes["pooled_mean"] = _bool(raw)
        elif key == "extensions":
            changes["extensions"] = _list(raw)
        elif key in _CLASSIFIER_KEYS:
            classifier[key] = _list(raw)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if classifier:
        changes["classifier"] = replace(cfg.classifier, **classifier)
    return replace(cfg, **changes)


def read_config_file(path: str | Path) -> dict[str, str]:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config {path}: {e}") from None
    return dict(parser["run"])


def load_config(path: str | Path | None = None, overrides: dict[str, str] | None = None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        cfg = apply_settings(cfg, read_config_file(path))
    if overrides:
        cfg = apply_settings(cfg, overrides)
    return cfg
