"""
Configuration management for consensusprobe
"""

import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from .exceptions import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    """Everything one bench run needs"""

    rule: str = "metropolis"
    rule_params: Dict[str, Any] = field(default_factory=dict)
    seq: str = "constant-line"
    seq_params: Dict[str, Any] = field(default_factory=dict)
    B: Optional[int] = None  # None: the generator's window hint
    n: Optional[int] = None
    n_list: List[int] = field(default_factory=list)
    epsilon: float = 0.01
    init: str = "spectral"
    seed: int = 0
    t_max: Optional[int] = None  # None: default horizon
    out: str = "results"
    jobs: int = 1
    plugin_dir: Optional[str] = None
    format: str = "kv"
    log_level: str = "INFO"

    def validate(self) -> List[str]:
        """Return a list of configuration problems"""
        from ..reporting import REPORTERS

        problems = []

        if not 0.0 < self.epsilon < 1.0:
            problems.append(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.n is not None and self.n < 2:
            problems.append(f"n must be at least 2, got {self.n}")
        for n in self.n_list:
            if n < 2:
                problems.append(f"every n in n_list must be at least 2, got {n}")
        if self.B is not None and self.B < 1:
            problems.append(f"B must be at least 1, got {self.B}")
        if self.t_max is not None and self.t_max < 0:
            problems.append(f"t_max must be non-negative, got {self.t_max}")
        if self.seed < 0:
            problems.append(f"seed must be non-negative, got {self.seed}")
        if self.jobs < 1:
            problems.append(f"jobs must be at least 1, got {self.jobs}")
        if self.log_level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR"):
            problems.append(f"unknown log level: {self.log_level}")
        if self.format.lower() not in REPORTERS:
            problems.append(
                f"unknown report format: {self.format}. "
                f"Available: {', '.join(REPORTERS)}"
            )

        return problems

    def check(self) -> "ExperimentConfig":
        problems = self.validate()
        if problems:
            raise ConfigurationError("; ".join(problems))
        return self

    def merged(self, overrides: Dict[str, Any]) -> "ExperimentConfig":
        """Copy with every non-None override applied; params maps are merged."""
        updates: Dict[str, Any] = {}
        for key, value in overrides.items():
            if value is None:
                continue
            if key in ("rule_params", "seq_params"):
                updates[key] = {**getattr(self, key), **value}
            elif key == "n_list" and not value:
                continue
            else:
                updates[key] = value
        return replace(self, **updates)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# Scalar keys and the type each is coerced to when read from a file
_SCALAR_KEYS = {
    "rule": str,
    "seq": str,
    "B": int,
    "n": int,
    "epsilon": float,
    "init": str,
    "seed": int,
    "t_max": int,
    "out": str,
    "jobs": int,
    "plugin_dir": str,
    "format": str,
    "log_level": str,
}


class ConfigManager:
    """Manages configuration loading and validation"""

    DEFAULT_CONFIG_PATHS = [
        Path("consensusprobe.yaml"),
        Path("config/consensusprobe.yaml"),
        Path.home() / ".consensusprobe" / "config.yaml",
    ]

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path
        self.config = ExperimentConfig()
        self._load_config()

    def _load_config(self) -> None:
        """Load configuration from file"""
        config_file = self._find_config_file()
        if config_file is None:
            return
        if not config_file.exists():
            raise ConfigurationError(f"Config file not found: {config_file}")

        text = config_file.read_text()
        try:
            if config_file.suffix in (".yaml", ".yml"):
                data = yaml.safe_load(text)
            elif config_file.suffix == ".json":
                data = json.loads(text)
            else:
                data = parse_flat_config(text)
        except (yaml.YAMLError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"Failed to parse config {config_file}: {e}")

        if data:
            if not isinstance(data, dict):
                raise ConfigurationError(f"Config {config_file} must be a mapping")
            self._update_config(data)
        logger.debug(f"Loaded configuration from {config_file}")

    def _find_config_file(self) -> Optional[Path]:
        """Find configuration file"""
        if self.config_path:
            return Path(self.config_path)

        for path in self.DEFAULT_CONFIG_PATHS:
            if path.exists():
                return path

        return None

    def _update_config(self, data: Dict[str, Any]) -> None:
        """Update configuration from dictionary"""
        data = _nest_dotted(data)
        updates: Dict[str, Any] = {}

        for key, value in data.items():
            if key in ("rule_params", "seq_params"):
                if not isinstance(value, dict):
                    raise ConfigurationError(f"{key} must be a mapping")
                updates[key] = dict(value)
            elif key == "n_list":
                updates[key] = _parse_n_list(value)
            elif key in _SCALAR_KEYS:
                updates[key] = _coerce(key, value)
            else:
                raise ConfigurationError(f"Unknown config key: {key}")

        self.config = self.config.merged(updates)

    def get_config(self) -> ExperimentConfig:
        """Get the current configuration"""
        return self.config

    def save_config(self, path: str) -> None:
        """Save current configuration as YAML"""
        save_path = Path(path)
        save_path.parent.mkdir(parents=True, exist_ok=True)
        with open(save_path, "w") as f:
            yaml.safe_dump(self.config.to_dict(), f, default_flow_style=False, sort_keys=False)


def parse_flat_config(text: str) -> Dict[str, Any]:
    """Parse flat `key = value` lines; `#` starts a comment."""
    data: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"Line {lineno}: expected 'key = value', got {raw!r}")
        data[key.strip()] = value.strip()
    return data


def _nest_dotted(data: Dict[str, Any]) -> Dict[str, Any]:
    """Fold `rule.<param>` / `seq.<param>` keys into rule_params / seq_params."""
    nested: Dict[str, Any] = {}
    for key, value in data.items():
        prefix, dot, name = key.partition(".")
        if dot and prefix in ("rule", "seq"):
            nested.setdefault(f"{prefix}_params", {})[name] = value
        else:
            nested[key] = value
    return nested


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    try:
        return _SCALAR_KEYS[key](value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"Config key {key} has invalid value {value!r}")


def _parse_n_list(value: Any) -> List[int]:
    if isinstance(value, str):
        value = value.replace(",", " ").split()
    try:
        return [int(n) for n in value]
    except (TypeError, ValueError):
        raise ConfigurationError(f"n_list must be a list of integers, got {value!r}")


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Defaults < config file < overrides, validated."""
    config = ConfigManager(path).get_config()
    if overrides:
        config = config.merged(overrides)
    return config.check()
