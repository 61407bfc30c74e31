"""Flat ``key=value`` configuration files (``#`` starts a comment)."""

from __future__ import annotations

import dataclasses
from pathlib import Path

from .evaluation import ExperimentConfig

__all__ = ["ConfigError", "parse_kv", "read_kv", "experiment_config"]


class ConfigError(ValueError):
    pass


_FLOAT = {"lam", "delta", "gamma1", "gamma2", "decay", "tol", "noise_variance",
          "contributive_tol"}
_INT = {"n_vertices", "knn", "K", "n_mandatory", "n_forbidden", "z", "n_samples",
        "max_iters", "trials", "seed"}
_ALIASES = {"lambda": "lam", "N": "n_vertices", "M": "n_samples", "k": "knn",
            "sigma2": "noise_variance"}


def parse_kv(text: str, source: str = "<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw!r}")
        out[key.strip()] = val.strip()
    return out


def read_kv(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_kv(text, str(path))


def experiment_config(values: dict, **overrides) -> ExperimentConfig:
    """Typed :class:`ExperimentConfig` from raw string values plus overrides."""
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    kw = {}
    for key, val in values.items():
        key = _ALIASES.get(key, key)
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            if key in _FLOAT:
                kw[key] = float(val)
            elif key in _INT:
                kw[key] = int(val)
            else:
                kw[key] = val or None
        except ValueError:
            raise ConfigError(f"bad value for {key}: {val!r}") from None
    kw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
