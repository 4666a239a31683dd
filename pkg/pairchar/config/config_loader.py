"""Loads ``config.json`` into frozen settings objects.

The file next to this module is the default; ``PAIRCHAR_CONFIG`` or an
explicit path overrides it. Sections missing from an override file fall back
to the packaged defaults key by key.
"""
import json
import logging
import os
from dataclasses import dataclass, fields
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from pairchar.models.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).with_name("config.json")
CONFIG_ENV_VAR = "PAIRCHAR_CONFIG"


@dataclass(frozen=True)
class OracleSettings:
    start_tolerance: float
    state_tail_tolerance: float
    convergence: float
    min_start_order: int
    max_cutoff_photons: int


@dataclass(frozen=True)
class OptimumSettings:
    p_min: float
    p_max: float
    grid_points: int
    xtol: float
    heuristic_factor: float


@dataclass(frozen=True)
class MonteCarloSettings:
    block_size: int
    default_trials: int
    default_seed: int
    min_trials: int
    workers: int
    state_tail_tolerance: float


@dataclass(frozen=True)
class FigureSettings:
    eta: float
    p_dc_levels: Tuple[float, ...]
    p_min: float
    p_max: float
    points: int


@dataclass(frozen=True)
class McValidationSettings:
    p: Tuple[float, ...]
    eta: Tuple[float, ...]
    p_dc: Tuple[float, ...]
    n_modes: Tuple[int, ...]
    trials: int
    seeds: int
    sigma: float
    pass_fraction: float


@dataclass(frozen=True)
class ValidationSettings:
    p: Tuple[float, ...]
    eta: Tuple[float, ...]
    p_dc: Tuple[float, ...]
    n_modes: Tuple[int, ...]
    quick_n_modes: Tuple[int, ...]
    tolerance: float
    identity_tolerance: float
    identity_p: Tuple[float, ...]
    identity_x: Tuple[float, ...]
    ideal_p: Tuple[float, ...]
    arbitration: Dict[str, float]
    mc: McValidationSettings


@dataclass(frozen=True)
class Settings:
    oracle: OracleSettings
    optimum: OptimumSettings
    monte_carlo: MonteCarloSettings
    figures: FigureSettings
    validate: ValidationSettings
    source: str


def _section(cls, raw: Dict[str, Any], name: str, **overrides):
    values = {}
    for f in fields(cls):
        if f.name in overrides:
            values[f.name] = overrides[f.name]
            continue
        if f.name not in raw:
            raise ConfigError(f"missing key '{name}.{f.name}'", {"section": name, "key": f.name})
        value = raw[f.name]
        values[f.name] = tuple(value) if isinstance(value, list) else value
    return cls(**values)


def _merge(defaults: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(defaults)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _read(path: Path) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", {"path": str(path)}) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}", {"path": str(path)}) from None


def parse_settings(raw: Dict[str, Any], source: str = "<dict>") -> "Settings":
    try:
        validate_raw = raw["validate"]
        settings = Settings(
            oracle=_section(OracleSettings, raw["oracle"], "oracle"),
            optimum=_section(OptimumSettings, raw["optimum"], "optimum"),
            monte_carlo=_section(MonteCarloSettings, raw["monte_carlo"], "monte_carlo"),
            figures=_section(FigureSettings, raw["figures"], "figures"),
            validate=_section(
                ValidationSettings,
                validate_raw,
                "validate",
                arbitration=dict(validate_raw.get("arbitration", {})),
                mc=_section(McValidationSettings, validate_raw.get("mc", {}), "validate.mc"),
            ),
            source=source,
        )
    except KeyError as exc:
        raise ConfigError(f"missing config section {exc}", {"section": str(exc)}) from None

    from pairchar.config.check_config import validate_settings

    problems = validate_settings(settings)
    if problems:
        raise ConfigError("invalid configuration", {"source": source, "problems": problems})
    return settings


@lru_cache(maxsize=8)
def _load_cached(path: Optional[str]) -> "Settings":
    raw = _read(DEFAULT_CONFIG_PATH)
    if path is not None:
        raw = _merge(raw, _read(Path(path)))
    logger.debug("Loaded settings from %s", path or DEFAULT_CONFIG_PATH)
    return parse_settings(raw, source=path or str(DEFAULT_CONFIG_PATH))


def load_settings(config_path: Optional[str] = None) -> "Settings":
    """
    Loads settings from ``config_path``, else ``$PAIRCHAR_CONFIG``, else the
    packaged defaults.
    """
    path = config_path or os.environ.get(CONFIG_ENV_VAR)
    return _load_cached(str(path) if path else None)
