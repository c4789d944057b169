"""Run settings: built-in defaults, then polyharm.yml, then POLYHARM_* variables.

Command-line flags are applied on top by the CLI.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Mapping
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

import yaml

logger = logging.getLogger(__name__)

ROOT = Path(__file__).resolve().parent.parent
DEFAULT_CONFIG_FILE = ROOT / "polyharm.yml"
DEFAULT_RUN_LOG = os.path.join("build", "logs", "polyharm_runs.log")

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass(frozen=True)
class Settings:
    seed: int = 42
    points: int = 100
    tolerance: float = 1e-5
    fd_step: float = 1e-4
    r_min: float = 0.3
    threads: int = 1
    max_order: int = 6
    log_level: str = "WARNING"
    run_log: str = DEFAULT_RUN_LOG

    def __post_init__(self):
        if self.points < 1:
            raise ValueError(f"points must be >= 1, got {self.points}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if not self.fd_step > 0:
            raise ValueError(f"fd_step must be positive, got {self.fd_step}")
        if not self.r_min > 0:
            raise ValueError(f"r_min must be positive, got {self.r_min}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.max_order < 1:
            raise ValueError(f"max_order must be >= 1, got {self.max_order}")
        if self.log_level not in _LOG_LEVELS:
            raise ValueError(
                f"log_level must be one of {', '.join(_LOG_LEVELS)}, got {self.log_level!r}"
            )

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_KEYS = {f.name: f for f in fields(Settings)}
ENV_VARS = {name: f"POLYHARM_{name.upper()}" for name in _KEYS}


def _convert(name: str, raw: Any, source: str) -> Any:
    kind = type(getattr(Settings(), name))
    try:
        if kind is int:
            if isinstance(raw, bool) or (isinstance(raw, float) and not raw.is_integer()):
                raise ValueError
            return int(raw)
        if kind is float:
            if isinstance(raw, bool):
                raise ValueError
            return float(raw)
    except (TypeError, ValueError):
        raise ValueError(f"{source}: {name} must be a {kind.__name__}, got {raw!r}") from None
    if name == "log_level":
        return str(raw).upper()
    return "" if raw is None else str(raw)


def read_config_file(path: Path) -> dict[str, Any]:
    """Settings mapping from a YAML file; a missing file gives {}."""
    if not path.exists():
        return {}
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ValueError(f"cannot parse config file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValueError(f"config file {path} must hold a mapping, got {type(raw).__name__}")
    return raw


def _config_path(config_path: str | os.PathLike | None, env: Mapping[str, str]) -> Path:
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ValueError(f"config file {path} does not exist")
        return path
    if env.get("POLYHARM_CONFIG"):
        return Path(env["POLYHARM_CONFIG"])
    return DEFAULT_CONFIG_FILE


def load_settings(
    config_path: str | os.PathLike | None = None,
    env: Mapping[str, str] | None = None,
) -> Settings:
    if env is None:
        env = os.environ
    values: dict[str, Any] = {}

    path = _config_path(config_path, env)
    for key, raw in read_config_file(path).items():
        if key not in _KEYS:
            logger.warning("ignoring unknown key %r in %s", key, path)
            continue
        values[key] = _convert(key, raw, str(path))

    for key, var in ENV_VARS.items():
        raw = env.get(var)
        if raw is None:
            continue
        if raw == "" and key != "run_log":
            continue
        values[key] = _convert(key, raw, var)

    settings = replace(Settings(), **values)
    logger.debug("settings loaded from %s: %s", path, settings)
    return settings
