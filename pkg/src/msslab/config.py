"""Experiment configuration: flat key=value INI with [form]/[experiment]/[output]."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError
from .satake import FormSpec, ingest_ap_file


@dataclass(frozen=True)
class ExperimentConfig:
    # [form]
    n: int = 3
    source: str = "synthetic"
    form_seed: int = 1001
    vartheta: float = 0.0
    label: str = ""
    ap_file: str = ""
    # [experiment]
    X: float = 1_000_000.0
    L: float = 10.0
    delta: float | None = None  # fixed window; defaults to X^0.75 when needed
    theta: float = 0.3
    samples: int = 10_000
    seed: int = 0
    M: int = 2_100_000
    P_max: int = 10_000
    k_max: int = 64
    series_cutoff: int = 1_000_000
    epsilon: float = 0.01
    # [output]
    outdir: str = "out"
    cache_dir: str = ""

    def resolved_delta(self) -> float:
        return float(self.delta) if self.delta is not None else self.X**0.75

    def resolved_cache_dir(self) -> Path:
        return Path(self.cache_dir) if self.cache_dir else Path(self.outdir) / "cache"

    def form_spec(self) -> FormSpec:
        ap = None
        if self.source == "lift":
            if not self.ap_file:
                raise ConfigError("ap_file", "required for source = lift")
            ap = ingest_ap_file(self.ap_file)
        try:
            return FormSpec(n=self.n, source=self.source, seed=self.form_seed,
                            theta_assumed=self.vartheta, label=self.label, ap_data=ap)
        except ValueError as exc:
            raise ConfigError("form", str(exc)) from None

    def validate(self) -> "ExperimentConfig":
        if self.n < 3:
            raise ConfigError("n", f"must be >= 3, got {self.n}")
        if self.source not in ("synthetic", "lift", "degenerate"):
            raise ConfigError("source", f"unknown source {self.source!r}")
        if not 0.0 <= self.vartheta <= 0.5:
            raise ConfigError("vartheta", "must lie in [0, 1/2]")
        for name in ("X", "L", "theta", "epsilon"):
            if getattr(self, name) <= 0:
                raise ConfigError(name, "must be positive")
        for name in ("samples", "M", "P_max", "k_max", "series_cutoff"):
            if getattr(self, name) < 1:
                raise ConfigError(name, "must be >= 1")
        if self.delta is not None and self.delta <= 0:
            raise ConfigError("delta", "must be positive when given")
        return self


_SECTIONS = {
    "form": {"n": int, "source": str, "seed": int, "vartheta": float,
             "label": str, "ap_file": str},
    "experiment": {"X": float, "L": float, "delta": float, "theta": float,
                   "samples": int, "seed": int, "M": int, "P_max": int,
                   "k_max": int, "series_cutoff": int, "epsilon": float},
    "output": {"dir": str, "cache_dir": str},
}

_KEY_TO_FIELD = {
    ("form", "seed"): "form_seed",
    ("experiment", "seed"): "seed",
    ("output", "dir"): "outdir",
}


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Parse the INI file (if given), then apply per-field overrides."""
    values: dict = {}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            read = parser.read(str(path))
        except configparser.Error as exc:
            raise ConfigError("file", f"{path}: {exc}") from None
        if not read:
            raise ConfigError("file", f"cannot read {path}")
        for section in parser.sections():
            if section not in _SECTIONS:
                raise ConfigError(section, "unknown section")
            types = _SECTIONS[section]
            for key, raw in parser.items(section):
                if key not in types:
                    raise ConfigError(f"{section}.{key}", "unknown key")
                field_name = _KEY_TO_FIELD.get((section, key), key)
                try:
                    values[field_name] = types[key](raw)
                except ValueError:
                    raise ConfigError(f"{section}.{key}",
                                      f"cannot parse {raw!r} as {types[key].__name__}") from None
    cfg = ExperimentConfig(**values)
    if overrides:
        known = {f.name for f in fields(ExperimentConfig)}
        clean = {}
        for key, val in overrides.items():
            if val is None:
                continue
            if key not in known:
                raise ConfigError(key, "unknown override")
            clean[key] = val
        cfg = replace(cfg, **clean)
    return cfg.validate()


def config_echo(cfg: ExperimentConfig) -> list[tuple[str, str]]:
    """Stable key=value echo for manifests."""
    out = []
    for f in fields(ExperimentConfig):
        val = getattr(cfg, f.name)
        out.append((f"config.{f.name}", "" if val is None else repr(val) if isinstance(val, float) else str(val)))
    return out
