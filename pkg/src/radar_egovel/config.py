"""YAML configuration for the estimator with strict key checking.

The file mirrors :class:`EstimatorConfig`::

    rejector:
      method: ransac          # ransac | mlesac | gnc | none
      inlier_threshold: 0.15
    loss:
      kind: cauchy            # any LossKind or alias (ls, wls, tls, wtls, welsch, ...)
      c: 0.2
    filter:
      window_size: 5
    filter_enabled: true
    doppler_sign: as_is       # as_is | flipped

Omitted keys take their defaults; unknown keys are an error. Environment
variables ``RADAR_EGOVEL_<SECTION>__<KEY>`` (or ``RADAR_EGOVEL_<KEY>`` for
top-level keys) override file values; their text is parsed as YAML scalars.
"""

from __future__ import annotations

import dataclasses
import enum
import os
from pathlib import Path
from typing import Mapping

import yaml

from .errors import ConfigError
from .gating import FilterConfig, ZeroVelocityConfig
from .losses import ALIASES, LossKind, LossSpec
from .optimize import SolverConfig
from .pipeline import EstimatorConfig
from .rejection import RejectorConfig

ENV_PREFIX = "RADAR_EGOVEL_"

SECTIONS = {
    "rejector": RejectorConfig,
    "loss": LossSpec,
    "solver": SolverConfig,
    "zero_velocity": ZeroVelocityConfig,
    "filter": FilterConfig,
}
TOP_LEVEL = ("filter_enabled", "doppler_sign")


def _coerce(cls, name, value, path):
    default = {f.name: f for f in dataclasses.fields(cls)}[name]
    sample = default.default if default.default is not dataclasses.MISSING else None
    if value is None:
        return None
    try:
        if isinstance(sample, bool):
            if not isinstance(value, bool):
                raise TypeError
            return value
        if isinstance(sample, enum.Enum):
            return type(sample)(str(value).lower())
        if isinstance(sample, int):
            if isinstance(value, int) and not isinstance(value, bool):
                return value
            if isinstance(value, bool) or float(value) != int(value):
                raise TypeError
            return int(value)
        if isinstance(sample, float) or sample is None:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: invalid value {value!r}", key=path) from None
    return value


def _section(cls, data, section):
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigError(f"{section}: expected a mapping", key=section)
    data = dict(data)
    known = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    if cls is LossSpec and "kind" in data:
        kind = str(data.pop("kind")).lower().replace("-", "_")
        if kind in ALIASES:
            kwargs.update(ALIASES[kind])
        else:
            try:
                kwargs["kind"] = LossKind(kind)
            except ValueError:
                raise ConfigError(f"loss.kind: unknown loss {kind!r}", key="loss.kind") from None
    for key, value in data.items():
        path = f"{section}.{key}"
        if key not in known:
            raise ConfigError(f"unknown configuration key {path!r}", key=path)
        kwargs[key] = _coerce(cls, key, value, path)
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{section}: {exc}", key=section) from None


def config_from_dict(data: Mapping | None) -> EstimatorConfig:
    data = dict(data or {})
    for key in data:
        if key not in SECTIONS and key not in TOP_LEVEL:
            raise ConfigError(f"unknown configuration key {key!r}", key=key)
    kwargs = {name: _section(cls, data.get(name), name) for name, cls in SECTIONS.items()}
    for key in TOP_LEVEL:
        if key in data:
            kwargs[key] = _coerce(EstimatorConfig, key, data[key], key)
    try:
        return EstimatorConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def apply_env_overrides(data: dict, env: Mapping[str, str]) -> dict:
    data = {k: (dict(v) if isinstance(v, Mapping) else v) for k, v in data.items()}
    for var, text in sorted(env.items()):
        if not var.startswith(ENV_PREFIX):
            continue
        path = var[len(ENV_PREFIX):].lower().split("__")
        value = yaml.safe_load(text) if text != "" else None
        if len(path) == 1:
            data[path[0]] = value
        elif len(path) == 2:
            section = data.get(path[0])
            if section is None:
                section = data[path[0]] = {}
            if not isinstance(section, dict):
                raise ConfigError(f"environment override {var}: {path[0]} is not a section", key=var)
            section[path[1]] = value
        else:
            raise ConfigError(f"environment override {var} is nested too deeply", key=var)
    return data


def load_config(path=None, env: Mapping[str, str] | None = None) -> EstimatorConfig:
    """Load a YAML file (or defaults when ``path`` is None) plus env overrides.

    An unreadable file raises OSError; bad content raises ConfigError.
    """
    data = {}
    if path is not None:
        text = Path(path).read_text()
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(data, Mapping):
            raise ConfigError(f"{path}: top level must be a mapping")
    data = apply_env_overrides(dict(data), os.environ if env is None else env)
    return config_from_dict(data)


def config_to_dict(cfg: EstimatorConfig) -> dict:
    def plain(x):
        if isinstance(x, enum.Enum):
            return x.value
        return x

    out = {}
    for name in SECTIONS:
        sec = getattr(cfg, name)
        out[name] = {f.name: plain(getattr(sec, f.name)) for f in dataclasses.fields(sec)}
    for key in TOP_LEVEL:
        out[key] = plain(getattr(cfg, key))
    return out


def dump_config(cfg: EstimatorConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)
