"""Flat key=value run configuration.

A run is described by a small text file (or an equivalent JSON object
over the service API) whose keys mirror the command-line flag names:
``data``, ``out``, ``seed``, ``rounds``, ``budget``, ``strategy``.
Every other knob is reachable through a dotted key naming the config
section and field, e.g. ``committee.objective = triplet`` or
``index.backend = ivf``.  Command-line flags override file values.
"""

from __future__ import annotations

import types
import typing
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Literal, Mapping

from .blocker import CommitteeConfig
from .encoder import EncoderConfig
from .errors import ConfigError
from .indexing import IndexConfig
from .loop import LoopConfig, SessionConfig
from .matcher import MatcherConfig
from .selection import SelectionConfig

_SECTIONS = {
    "loop": LoopConfig,
    "encoder": EncoderConfig,
    "matcher": MatcherConfig,
    "committee": CommitteeConfig,
    "index": IndexConfig,
    "selection": SelectionConfig,
}

# short keys shared with the CLI flags
_ALIASES = {
    "seed": "loop.global_seed",
    "rounds": "loop.rounds",
    "budget": "selection.budget",
    "strategy": "selection.strategy",
}

_PATH_KEYS = ("data", "out")


@dataclass
class RunSpec:
    """A fully resolved run: config tree plus dataset/output paths."""

    config: SessionConfig
    data: str | None = None
    out: str | None = None


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` comments and blanks ignored."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def read_config_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


def _convert(value: Any, target: Any, key: str) -> Any:
    """Coerce a raw (usually string) value to a config field's type."""
    origin = typing.get_origin(target)
    if origin is Literal:
        allowed = typing.get_args(target)
        if value in allowed:
            return value
        raise ConfigError(f"{key}: expected one of {allowed}, got {value!r}")
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(target) if a is not type(None)]
        if isinstance(value, str) and value.lower() in ("none", ""):
            return None
        if value is None:
            return None
        return _convert(value, args[0], key)
    if target is bool:
        if isinstance(value, bool):
            return value
        if isinstance(value, str):
            low = value.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    if target is int:
        try:
            return int(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: expected an integer, got {value!r}") from exc
    if target is float:
        try:
            return float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: expected a number, got {value!r}") from exc
    if target is str:
        return str(value)
    if origin is tuple:
        if isinstance(value, (tuple, list)):
            items = list(value)
        else:
            items = [v.strip() for v in str(value).split(",") if v.strip()]
        elem = typing.get_args(target)[0]
        return tuple(_convert(v, elem, key) for v in items)
    raise ConfigError(f"{key}: unsupported config field")


def build_run_spec(values: Mapping[str, Any]) -> RunSpec:
    """Resolve a flat key map into a validated :class:`RunSpec`.

    Unknown keys, unknown fields and out-of-range values raise
    :class:`ConfigError` so the caller can exit cleanly.
    """
    section_kwargs: dict[str, dict[str, Any]] = {name: {} for name in _SECTIONS}
    data_path: str | None = None
    out_path: str | None = None

    hints = {name: typing.get_type_hints(cls) for name, cls in _SECTIONS.items()}
    field_names = {name: {f.name for f in fields(cls)} for name, cls in _SECTIONS.items()}

    for key, raw in values.items():
        full = _ALIASES.get(key, key)
        if full == "data":
            data_path = None if raw is None else str(raw)
            continue
        if full == "out":
            out_path = None if raw is None else str(raw)
            continue
        if "." not in full:
            raise ConfigError(f"unknown config key {key!r}")
        section, _, field_name = full.partition(".")
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section {section!r} (key {key!r})")
        if field_name not in field_names[section]:
            raise ConfigError(f"unknown field {field_name!r} in section {section!r}")
        section_kwargs[section][field_name] = _convert(
            raw, hints[section][field_name], full
        )

    try:
        config = SessionConfig(
            **{name: cls(**section_kwargs[name]) for name, cls in _SECTIONS.items()}
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunSpec(config=config, data=data_path, out=out_path)


def merge_values(*layers: Mapping[str, Any]) -> dict[str, Any]:
    """Later layers win; aliases collapse onto their dotted form."""
    merged: dict[str, Any] = {}
    for layer in layers:
        for key, value in layer.items():
            merged[_ALIASES.get(key, key)] = value
    return merged


def format_run_spec(spec: RunSpec) -> str:
    """Render the full effective configuration as key=value lines.

    The output parses back to an identical spec, so it doubles as the
    checkpoint's config snapshot.
    """
    lines = []
    if spec.data is not None:
        lines.append(f"data = {spec.data}")
    if spec.out is not None:
        lines.append(f"out = {spec.out}")
    for name in _SECTIONS:
        section_obj = getattr(spec.config, name)
        for f in fields(section_obj):
            value = getattr(section_obj, f.name)
            if isinstance(value, tuple):
                rendered = ",".join(str(v) for v in value)
            elif value is None:
                rendered = "none"
            elif isinstance(value, bool):
                rendered = "true" if value else "false"
            else:
                rendered = str(value)
            lines.append(f"{name}.{f.name} = {rendered}")
    return "\n".join(lines) + "\n"
