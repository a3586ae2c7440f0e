"""
Experiment configuration with schema versioning, migration and strict overrides
"""

import copy
import json
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional
import logging
from src.version import CONFIG_SCHEMA_VERSION
from src.utils.errors import ConfigError
from packaging import version as pkg_version

logger = logging.getLogger(__name__)


def get_app_data_dir() -> Path:
    """
    Get the application data directory for logs and default reports.

    This is the centralized function for determining where app data should be stored.
    All modules should use this function instead of implementing their own path logic.

    Returns:
        Path to the application data directory:
        - $WIGNERSPIKES_HOME when set
        - ~/.wignerspikes otherwise
    """
    override = os.environ.get('WIGNERSPIKES_HOME')
    app_dir = Path(override) if override else Path.home() / '.wignerspikes'

    # Create directory if it doesn't exist
    app_dir.mkdir(parents=True, exist_ok=True)
    return app_dir


def get_default_output_dir() -> Path:
    """Report directory: $WIGNERSPIKES_OUTPUT_DIR, else <app data dir>/reports"""
    override = os.environ.get('WIGNERSPIKES_OUTPUT_DIR')
    if override:
        return Path(override)
    return get_app_data_dir() / 'reports'


def parse_override_value(text: str) -> Any:
    """JSON literal when it parses (numbers, booleans, lists, objects), else the raw string"""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


class ConfigManager:
    """Loads an experiment configuration file over the defaults.

    Unknown keys are rejected wherever they appear, and every value is
    type-checked against the default it replaces.

    Args:
        config_path: JSON configuration file; None runs on defaults
        experiment: Experiment name chosen by the caller (CLI subcommand)
    """

    CURRENT_VERSION = CONFIG_SCHEMA_VERSION  # Imported from centralized version module

    def __init__(self, config_path: Optional[Path] = None, experiment: Optional[str] = None):
        self.config_path = Path(config_path) if config_path else None

        # Default settings structure
        self.default_settings = self._get_default_settings()

        # Current settings
        self.settings = copy.deepcopy(self.default_settings)

        if self.config_path is not None:
            self.load_settings()

        if experiment is not None:
            self._select_experiment(experiment)

    def _get_default_settings(self) -> Dict[str, Any]:
        """Get default settings structure"""
        return {
            "version": self.CURRENT_VERSION,
            "experiment": "outliers",
            "n": 1000,
            "n_ladder": [],
            "beta": 1,
            "replicas": 200,
            "master_seed": 20261017,
            "workers": 1,
            "law": {
                "kind": "gaussian",
                "sigma": 1.0,
                "diag_sigma": None,  # None selects sqrt(2 / beta) * sigma
                "p": 0.5
            },
            "spikes": [
                {"theta": 2.0, "mult": 1, "frame": "uniform"}
            ],
            "truncate": False,
            "null_matrix": False,
            "z_points": [],  # [re, im] pairs
            "include_outlier_points": False,
            "test_function": {
                "f": "poly",
                "coeffs": [0.0, 1.0],
                "freq": 1.0
            },
            "mean_correction": "corrected",  # or "printed"
            "steinitz_k": 2,
            "spectral": {
                "method": "lapack"  # or "householder-ql"
            },
            "theory": {
                "quadrature_nodes": 0,  # 0 selects the adaptive rule
                "draws": 20000
            },
            "tolerances": {
                "mean_abs": 0.01,
                "s_mean_abs": 0.0,
                "variance_rel": 0.15,
                "variance_abs": 1e-9,
                "ks_p": 0.01,
                "centering_abs": 0.002,
                "covariance_abs": 0.05,
                "testfn_mean_abs": 0.002,
                "skip_rate": 0.01
            },
            "output_dir": None
        }

    def load_settings(self) -> Dict[str, Any]:
        """Load the configuration file, migrating older schema versions.

        Raises:
            ConfigError: Missing file, invalid JSON, unknown key or badly typed value
        """
        if not self.config_path.exists():
            raise ConfigError(f"config file not found: {self.config_path}")
        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                loaded_settings = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{self.config_path} is not valid JSON: {e}")
        if not isinstance(loaded_settings, dict):
            raise ConfigError(f"{self.config_path} must contain a JSON object")

        # Check version and migrate if needed
        file_version = loaded_settings.get('version')
        if file_version != self.CURRENT_VERSION:
            logger.info(f"Migrating config from version {file_version} to {self.CURRENT_VERSION}")
            loaded_settings = self._migrate_settings(loaded_settings, file_version)

        self._validate(loaded_settings, self.default_settings, "")

        # Merge with defaults to ensure all keys exist
        self.settings = self._deep_merge(copy.deepcopy(self.default_settings), loaded_settings)
        self.settings['version'] = self.CURRENT_VERSION
        logger.info(f"Configuration loaded from {self.config_path}")
        return self.settings

    def save_settings(self, file_path: Path) -> Path:
        """Write the resolved configuration to ``file_path``"""
        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        self.settings['version'] = self.CURRENT_VERSION
        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(self.settings, f, indent=2, ensure_ascii=False)
        logger.info(f"Configuration saved to {file_path}")
        return file_path

    def _select_experiment(self, experiment: str) -> None:
        configured = self.settings.get('experiment')
        if self.config_path is not None and configured != experiment:
            raise ConfigError(f"{self.config_path} configures experiment '{configured}', not '{experiment}'")
        self.settings['experiment'] = experiment

    def _migrate_settings(self, old_settings: Dict[str, Any], from_version: Optional[str]) -> Dict[str, Any]:
        """Migrate settings from an older version to current version.

        Uses semantic version comparison to handle all version ranges properly.
        Migrations are applied incrementally from older to newer versions.
        """
        migrated = copy.deepcopy(old_settings)

        try:
            current_ver = pkg_version.parse(str(from_version)) if from_version else pkg_version.parse("0.0.0")
        except pkg_version.InvalidVersion:
            # If version parsing fails, assume very old version
            logger.warning(f"Could not parse version '{from_version}', treating as 0.0.0")
            current_ver = pkg_version.parse("0.0.0")

        if current_ver > pkg_version.parse(self.CURRENT_VERSION):
            logger.warning(f"Config version {from_version} is newer than {self.CURRENT_VERSION}")

        # Migration from pre-1.1.0 to 1.1.0: 'seed' -> 'master_seed', single 'spike' -> 'spikes'
        if current_ver < pkg_version.parse("1.1.0"):
            logger.info("Applying migration: pre-1.1.0 -> 1.1.0")
            if 'seed' in migrated:
                seed = migrated.pop('seed')
                migrated.setdefault('master_seed', seed)
            if 'spike' in migrated:
                spike = migrated.pop('spike')
                if 'spikes' not in migrated:
                    migrated['spikes'] = [spike] if isinstance(spike, dict) else spike

        migrated['version'] = self.CURRENT_VERSION
        return migrated

    def _validate(self, overlay: Dict[str, Any], base: Dict[str, Any], prefix: str) -> None:
        """Reject keys missing from ``base`` and values whose type differs from the default"""
        for key, value in overlay.items():
            path = f"{prefix}{key}"
            if key not in base:
                raise ConfigError(f"unknown configuration key '{path}'")
            self._check_type(path, value, base[key])
            if isinstance(base[key], dict):
                self._validate(value, base[key], f"{path}.")

    @staticmethod
    def _check_type(path: str, value: Any, default: Any) -> None:
        if default is None:
            if value is not None and not isinstance(value, (int, float, str)):
                raise ConfigError(f"'{path}' must be a number, a string or null")
            return
        if isinstance(default, bool):
            ok = isinstance(value, bool)
        elif isinstance(default, int):
            ok = isinstance(value, int) and not isinstance(value, bool)
        elif isinstance(default, float):
            ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        else:
            ok = isinstance(value, type(default))
        if not ok:
            raise ConfigError(f"'{path}' expects {type(default).__name__}, got {type(value).__name__} {value!r}")

    def _deep_merge(self, base: Dict[str, Any], overlay: Dict[str, Any]) -> Dict[str, Any]:
        """Deep merge two dictionaries, with overlay values taking precedence"""
        result = base.copy()

        for key, value in overlay.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge(result[key], value)
            else:
                result[key] = value

        return result

    def get(self, key_path: str, default: Any = None) -> Any:
        """Get a setting value using dot notation (e.g., 'law.sigma')"""
        keys = key_path.split('.')
        value = self.settings

        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default

        return value

    def set(self, key_path: str, value: Any) -> None:
        """Set a setting value using dot notation; the key must exist in the defaults"""
        keys = key_path.split('.')
        target = self.settings
        schema = self.default_settings

        # Navigate to the parent of the target key
        for depth, key in enumerate(keys[:-1]):
            if not isinstance(schema.get(key), dict):
                raise ConfigError(f"unknown configuration key '{'.'.join(keys[:depth + 1])}'")
            schema = schema[key]
            target = target[key]

        last = keys[-1]
        if last not in schema or last == 'version':
            raise ConfigError(f"unknown configuration key '{key_path}'")
        self._check_type(key_path, value, schema[last])
        if isinstance(schema[last], dict):
            self._validate(value, schema[last], f"{key_path}.")
            value = self._deep_merge(copy.deepcopy(schema[last]), value)
        target[last] = value

    def apply_overrides(self, overrides: Iterable[str]) -> None:
        """Apply ``key=value`` strings, e.g. ``law.kind=rademacher`` or ``n=500``"""
        for item in overrides:
            if '=' not in item:
                raise ConfigError(f"override '{item}' is not of the form key=value")
            key, text = item.split('=', 1)
            self.set(key.strip(), parse_override_value(text.strip()))
            logger.debug(f"Override {key.strip()} = {text.strip()}")

    def changed_keys(self) -> List[str]:
        """Top-level keys whose value differs from the default"""
        return [key for key, value in self.settings.items()
                if key != 'version' and value != self.default_settings.get(key)]

    def to_experiment_config(self):
        """Typed ``ExperimentConfig`` for the current settings"""
        from src.experiments.config import ExperimentConfig

        return ExperimentConfig.from_dict(self.settings)


def load_experiment_config(config_path: Optional[Path] = None, experiment: Optional[str] = None,
                           overrides: Iterable[str] = ()):
    """Load, override and convert in one call"""
    manager = ConfigManager(config_path, experiment)
    manager.apply_overrides(overrides)
    return manager.to_experiment_config()
