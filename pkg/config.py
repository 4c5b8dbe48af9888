import copy
import os
import logging
from pathlib import Path
from typing import Any, Dict, List
from functools import lru_cache
from threading import Lock

import yaml
from dotenv import load_dotenv

logger = logging.getLogger('walls.config')

DEFAULTS: Dict[str, Any] = {
    'search': {
        'group_element_cap': 1000000,
        'candidate_cap': 5000000,
        'st_table_cap': 4096,
        'brute_force_cap': 70000,
        'parallelism': 1,
        'closure_cap': 4096,
    },
    'report': {
        'schema_version': '1.0',
        'default_format': 'json',
        'include_timing': False,
    },
    'logging': {
        'level': 'WARNING',
        'json': True,
        'file_logging': False,
        'app_name': 'walls',
    },
    'metrics': {
        'enabled': False,
        'port': 9108,
    },
}

ENV_OVERRIDES = {
    'WALLS_PARALLELISM': ('search.parallelism', int),
    'WALLS_LOG_LEVEL': ('logging.level', str),
    'WALLS_GROUP_CAP': ('search.group_element_cap', int),
}

LOG_LEVELS = {'DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'}


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class ConfigurationManager:
    """Thread-safe layered configuration: defaults, base YAML, env YAML, env vars."""

    def __init__(self, config_dir: str = None):
        default_dir = Path(__file__).resolve().parent / 'config'
        self.config_dir = Path(config_dir) if config_dir else default_dir
        load_dotenv()
        self.env = os.getenv('WALLS_ENV', 'development')
        self._config: Dict[str, Any] = {}
        self._lock = Lock()

        self.reload_config()

    def reload_config(self) -> None:
        """Reload all configuration files"""
        with self._lock:
            base_config = self._load_yaml('base_config.yml')
            env_config = self._load_yaml(f'{self.env}_config.yml')
            merged = _deep_merge(_deep_merge(DEFAULTS, base_config), env_config)
            self._config = _deep_merge(merged, self._load_env_overrides())
        self.get.cache_clear()

    def _load_yaml(self, filename: str) -> Dict[str, Any]:
        """Load and parse YAML configuration file"""
        try:
            config_path = self.config_dir / filename
            if config_path.exists():
                with open(config_path, 'r') as f:
                    return yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            logger.warning(f'Error loading {filename}: {e}')
        return {}

    def _load_env_overrides(self) -> Dict[str, Any]:
        overrides: Dict[str, Any] = {}
        for var, (key, cast) in ENV_OVERRIDES.items():
            raw = os.getenv(var)
            if raw is None:
                continue
            try:
                value = cast(raw)
            except ValueError:
                logger.warning(f'Ignoring {var}={raw!r}: not a valid {cast.__name__}')
                continue
            section, name = key.split('.')
            overrides.setdefault(section, {})[name] = value
        return overrides

    @lru_cache(maxsize=128)
    def get(self, key: str, default: Any = None) -> Any:
        """Get a dotted configuration value with caching"""
        with self._lock:
            value: Any = self._config
            for part in key.split('.'):
                if not isinstance(value, dict) or part not in value:
                    return default
                value = value[part]
            return copy.deepcopy(value)

    def set(self, key: str, value: Any) -> None:
        """Update configuration value"""
        with self._lock:
            parts = key.split('.')
            current = self._config
            for part in parts[:-1]:
                current = current.setdefault(part, {})
            current[parts[-1]] = value
        self.get.cache_clear()

    def update(self, updates: Dict[str, Any]) -> None:
        """Batch update, merged section by section"""
        with self._lock:
            self._config = _deep_merge(self._config, updates)
        self.get.cache_clear()

    def get_all(self) -> Dict[str, Any]:
        with self._lock:
            return copy.deepcopy(self._config)

    def validate(self) -> List[str]:
        """Return a list of problems; empty when the configuration is usable."""
        problems = []
        for cap in ('group_element_cap', 'candidate_cap', 'st_table_cap', 'brute_force_cap', 'closure_cap'):
            value = self.get(f'search.{cap}')
            if not isinstance(value, int) or value <= 0:
                problems.append(f'search.{cap} must be a positive integer')
        parallelism = self.get('search.parallelism')
        if not isinstance(parallelism, int) or parallelism < 1:
            problems.append('search.parallelism must be at least 1')
        level = str(self.get('logging.level', '')).upper()
        if level not in LOG_LEVELS:
            problems.append(f'logging.level {level!r} is not recognised')
        if self.get('report.default_format') not in ('json', 'text'):
            problems.append('report.default_format must be json or text')
        return problems


# Global configuration instance
config = ConfigurationManager()
