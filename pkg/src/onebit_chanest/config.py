"""Plain-text scenario configuration files.

Grammar: one ``key = value`` assignment per line, ``#`` starts a
comment, blank lines are ignored, unknown keys are errors.  Vector
values are comma separated.  Every ScenarioConfig field is addressable
under its field name.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from .errors import ConfigError
from .harness import ScenarioConfig


def _parse_int(text: str) -> int:
    return int(text, 10)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_str(text: str) -> str:
    return text


def _parse_float_tuple(text: str) -> tuple:
    parts = [p for p in (s.strip() for s in text.split(",")) if p]
    if not parts:
        raise ValueError("empty list")
    return tuple(float(p) for p in parts)


_FIELD_PARSERS = {
    "mode": _parse_str,
    "taps": _parse_int,
    "n_symbols": _parse_int,
    "snr1_db": _parse_float,
    "tap_offsets_db": _parse_float_tuple,
    "alpha_grid": _parse_float_tuple,
    "trials": _parse_int,
    "seed": _parse_int,
    "pilot_policy": _parse_str,
    "snr_ladder_db": _parse_float_tuple,
}


def parse_config_text(text: str, origin: str = "<config>") -> ScenarioConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}: line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"{origin}: line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{origin}: line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _FIELD_PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{origin}: line {lineno}: bad value for {key!r}: {exc}") from exc
    try:
        return ScenarioConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{origin}: {exc}") from exc


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, origin=str(path))


def dump_config(cfg: ScenarioConfig) -> str:
    """Canonical text for a config, also used to fingerprint presets."""

    def fmt(value):
        if isinstance(value, tuple):
            return ", ".join(f"{v:g}" for v in value)
        return str(value)

    lines = [f"{name} = {fmt(getattr(cfg, name))}" for name in _FIELD_PARSERS]
    return "\n".join(lines) + "\n"


def config_digest(text: str) -> str:
    """Content hash of config text; identical text gives identical digests."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
