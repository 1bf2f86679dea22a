"""Configuration loading, validation, and the comparability hash.

One JSON document with sections ``profiles``, ``rules``, ``models``,
``composite``, ``duplication``, ``metrics``, ``report``. Defaults are
complete, so an empty config is valid. The effective-config hash covers
everything that can change a measured value, which is what snapshot
comparability and the same-estimator guard key on.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
from pathlib import Path

from .composite import INDICATORS, IndicatorMapping, validate_weights
from .errors import InvalidConfig, SingleCountingViolation
from .rules import CANONICAL_IDS, COMMENT_DENSITY, DUPLICATION_BLOCK, _DEFAULTS

ENV_CONFIG = "XMAINT_CONFIG"

DEFAULT_CONFIG: dict = {
    "profiles": {"files": [], "definitions": []},
    "rules": {},
    "models": {
        "mi": {"scope": "unit"},
        "sqale": {"cost_per_line_minutes": 30.0},
        "sig": {
            "cc_bands": [10, 20, 50],
            "unit_size_bands": [30, 60, 120],
            "volume_ladder": [[20000, 5], [50000, 4], [120000, 3], [300000, 2]],
            "duplication_ladder": [[0.03, 5], [0.05, 4], [0.10, 3], [0.20, 2]],
            "coverage_ladder": [[0.95, 5], [0.80, 4], [0.60, 3], [0.20, 2]],
            "profile_caps": {
                "5": [0.25, 0.0, 0.0],
                "4": [0.30, 0.05, 0.0],
                "3": [0.40, 0.10, 0.0],
                "2": [0.50, 0.15, 0.05],
                "1": [1.0, 1.0, 1.0],
            },
            "matrix": {
                "analysability": ["volume", "duplication", "unitSize", "unitTesting"],
                "changeability": ["complexity", "duplication"],
                "stability": ["unitTesting"],
                "testability": ["complexity", "unitSize", "unitTesting"],
            },
            "coverage": None,
        },
    },
    "metrics": {"weighted_unit_means": False},
    "duplication": {"min_tokens": 50, "mode": "exact"},
    "composite": {
        "indicators": {
            "commentRatio": {"shape": "rising-then-falling", "low": 0.15, "high": 0.40, "weight": 0.15},
            "duplicationRatio": {"shape": "falling-linear", "low": 0.05, "high": 0.15, "weight": 0.15},
            "tdr": {"shape": "falling-linear", "low": 0.0, "high": 0.20, "weight": 0.45},
            "volumetry": {"shape": "relative-min", "low": 1.0, "high": 1.5, "weight": 0.25},
        },
        "duplication_source": "token",
        "sensitivity": {"delta_pp": 5.0},
    },
    "report": {"format": "json"},
}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config(path: str | os.PathLike | None = None) -> dict:
    """Read, merge over defaults, and validate a config file.

    ``path=None`` falls back to the XMAINT_CONFIG environment variable and
    then to pure defaults.
    """
    if path is None:
        path = os.environ.get(ENV_CONFIG) or None
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfig(f"cannot load config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidConfig("config root must be a JSON object")
    unknown = set(data) - set(DEFAULT_CONFIG)
    if unknown:
        raise InvalidConfig(f"unknown config sections: {sorted(unknown)}")
    merged = _merge(DEFAULT_CONFIG, data)
    validate_config(merged)
    return merged


def composite_mappings(config: dict) -> list[IndicatorMapping]:
    indicators = config["composite"]["indicators"]
    unknown = set(indicators) - set(INDICATORS)
    if unknown:
        raise InvalidConfig(f"unknown composite indicators: {sorted(unknown)}")
    mappings = []
    for name in INDICATORS:
        if name not in indicators:
            continue
        entry = indicators[name]
        try:
            mappings.append(
                IndicatorMapping(
                    indicator=name,
                    shape=str(entry["shape"]),
                    low=float(entry["low"]),
                    high=float(entry["high"]),
                    weight=float(entry["weight"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfig(f"bad composite indicator '{name}': {exc}") from exc
    return mappings


def _rule_enabled(config: dict, canonical_id: str) -> bool:
    entry = config["rules"].get(canonical_id, {})
    if isinstance(entry, dict) and "enabled" in entry:
        return bool(entry["enabled"])
    return _DEFAULTS[canonical_id][2]


def validate_config(config: dict) -> None:
    """Structural checks plus the single-counting guard.

    An attribute wired in as a weighted indicator must not also be an
    enabled debt rule; such configs are rejected outright with the
    conflicting pair named.
    """
    unknown_rules = set(config["rules"]) - set(CANONICAL_IDS)
    if unknown_rules:
        raise InvalidConfig(f"unknown rule ids in config: {sorted(unknown_rules)}")
    mappings = composite_mappings(config)
    try:
        validate_weights(mappings)
    except ValueError as exc:
        raise InvalidConfig(str(exc)) from exc
    mode = config["duplication"]["mode"]
    if mode not in ("exact", "identifier-blind"):
        raise InvalidConfig(f"duplication.mode must be 'exact' or 'identifier-blind', got '{mode}'")
    if int(config["duplication"]["min_tokens"]) < 3:
        raise InvalidConfig("duplication.min_tokens must be >= 3")
    if float(config["models"]["sqale"]["cost_per_line_minutes"]) <= 0:
        raise InvalidConfig("models.sqale.cost_per_line_minutes must be > 0")
    if config["models"]["mi"]["scope"] not in ("unit", "file"):
        raise InvalidConfig("models.mi.scope must be 'unit' or 'file'")

    weighted = {m.indicator for m in mappings if m.weight > 0}
    conflicts = []
    if "duplicationRatio" in weighted and _rule_enabled(config, DUPLICATION_BLOCK):
        conflicts.append(("duplicationRatio", DUPLICATION_BLOCK))
    if "commentRatio" in weighted and _rule_enabled(config, COMMENT_DENSITY):
        conflicts.append(("commentRatio", COMMENT_DENSITY))
    if conflicts:
        raise SingleCountingViolation(conflicts)


def apply_flag_overrides(config: dict, *, min_tokens=None, dup_mode=None,
                         cost_per_line=None, coverage=None) -> dict:
    """CLI flags override the corresponding config keys."""
    out = copy.deepcopy(config)
    if min_tokens is not None:
        out["duplication"]["min_tokens"] = int(min_tokens)
    if dup_mode is not None:
        out["duplication"]["mode"] = dup_mode
    if cost_per_line is not None:
        out["models"]["sqale"]["cost_per_line_minutes"] = float(cost_per_line)
    if coverage is not None:
        out["models"]["sig"]["coverage"] = float(coverage)
    validate_config(out)
    return out


def config_hash(config: dict, profiles: list[dict], discovery: dict) -> str:
    """Digest of everything that affects measured values.

    Output format, worker count, and store options are deliberately
    excluded: they change presentation, not results.
    """
    payload = {
        "config": {k: v for k, v in config.items() if k != "report"},
        "profiles": profiles,
        "discovery": discovery,
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
