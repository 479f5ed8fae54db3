"""Flat ``key=value`` configuration shared by the CLI, config files and scenarios.

Layers are merged as plain dicts (later wins) and then turned into the typed
config objects in one place, so every source accepts exactly the same keys.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Mapping

from .errors import ConfigError
from .feedback import FeedbackPolicy, policy_from_mapping, policy_keys
from .radio import RadioConfig
from .sensing import ClassifierThresholds

RADIO_KEYS = {
    "radio.range_m": ("range_m", float),
    "radio.adv_interval_ms": ("adv_interval_ms", int),
    "radio.loss_prob": ("loss_prob", float),
    "radio.neighbor_ttl_ms": ("neighbor_ttl_ms", int),
    "radio.seed": ("rng_seed", int),
}
CLASSIFIER_KEYS = {
    f"classifier.{f.name}": (f.name, float) for f in dataclasses.fields(ClassifierThresholds)
}
KNOWN_KEYS = frozenset(RADIO_KEYS) | frozenset(CLASSIFIER_KEYS) | frozenset(policy_keys())


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not eq or not key:
            raise ConfigError(f"{source}:{lineno}: expected key=value")
        check_key(key, f"{source}:{lineno}")
        out[key] = value
    return out


def load_config_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, str(path))


def check_key(key: str, where: str = "") -> None:
    if key not in KNOWN_KEYS:
        prefix = f"{where}: " if where else ""
        raise ConfigError(f"{prefix}unknown config key {key!r}")


def _typed(values: Mapping[str, str], table) -> dict:
    out = {}
    for key, (attr, conv) in table.items():
        if key in values:
            try:
                out[attr] = conv(values[key])
            except ValueError:
                raise ConfigError(f"{key}: cannot parse {values[key]!r}") from None
    return out


def build_configs(*layers: Mapping[str, str]) -> tuple[RadioConfig, ClassifierThresholds, FeedbackPolicy]:
    """Merge ``layers`` (lowest precedence first) over the built-in defaults."""
    merged: dict[str, str] = {}
    for layer in layers:
        for key in layer:
            check_key(key)
        merged.update(layer)
    radio = RadioConfig(**_typed(merged, RADIO_KEYS))
    th = ClassifierThresholds(**_typed(merged, CLASSIFIER_KEYS))
    policy = policy_from_mapping(merged, FeedbackPolicy())
    return radio, th, policy
