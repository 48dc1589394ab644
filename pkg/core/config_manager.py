import copy
import json
import os
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from .errors import ConfigError

try:
    import tomllib
    TOML_AVAILABLE = True
except ImportError:
    TOML_AVAILABLE = False

# Environment variables recognised after loading .env
ENV_KEYS = {
    'SOPMON_LOG_DIR': 'logging.dir',
    'SOPMON_LOG_LEVEL': 'logging.console_level',
    'SOPMON_WORKERS': 'run.workers',
    'SOPMON_STORE_PATH': 'store.path',
    'SOPMON_STORE_ENABLED': 'store.enabled',
}


def parse_value(text: str) -> Any:
    """Interpret a command-line or environment string as JSON, else keep the string"""
    try:
        return json.loads(text)
    except (json.JSONDecodeError, TypeError):
        lowered = text.strip().lower()
        if lowered in ('true', 'false'):
            return lowered == 'true'
        if lowered in ('none', 'null', ''):
            return None
        return text


class ConfigManager:
    """Layered run configuration: defaults, environment, config file, command-line overrides"""

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = config_file
        self.defaults = {
            'chart': {
                'kind': 'tau_tilde',
                'lambda': 0.1,
                'limit': None,
                'center': 0.0,
                'init': None
            },
            'grid': {
                'm': 10,
                'n': 10
            },
            'dgp': None,
            'pool': {
                'values': None,
                'frames': None,
                'kind': 'tau_tilde'
            },
            'run': {
                'seed': None,
                'workers': None,
                'replications': 10000,
                'cap': 1000000,
                'target_arl': 370.0,
                'rel_tol': None,
                'max_evals': 40,
                'jitter_scale': None,
                'noise_runs': 1,
                'frames': 100,
                'input': None,
                'output': None,
                'plot': None
            },
            'logging': {
                'dir': 'logs',
                'console_level': 'INFO'
            },
            'store': {
                'enabled': True,
                'path': 'data/results.db'
            }
        }
        self.config = self.load_config()

    def load_config(self) -> Dict[str, Any]:
        """Defaults merged with .env/environment and the optional config file"""
        config = copy.deepcopy(self.defaults)

        load_dotenv()
        for env_key, dotted in ENV_KEYS.items():
            if os.getenv(env_key) is not None:
                self._set_in(config, dotted, parse_value(os.getenv(env_key)))

        if self.config_file and os.path.exists(self.config_file):
            self._merge_config(config, self.read_file(self.config_file))

        return config

    def reset(self):
        self.config = self.load_config()

    def read_file(self, path: str) -> Dict[str, Any]:
        """Parse a .toml or .json configuration document"""
        if not os.path.exists(path):
            raise ConfigError(f"Config file not found: {path}")
        ext = os.path.splitext(path)[1].lower()
        try:
            if ext == '.toml':
                if not TOML_AVAILABLE:
                    raise ConfigError("TOML config needs Python 3.11+ (tomllib)")
                with open(path, 'rb') as f:
                    return tomllib.load(f)
            if ext == '.json':
                with open(path, 'r', encoding='utf-8') as f:
                    return json.load(f)
        except (ValueError, OSError) as e:
            raise ConfigError(f"Error loading config file {path}: {e}") from e
        raise ConfigError(f"Unsupported config format: {ext}")

    def load_file(self, path: str):
        """Merge a config file over the current configuration"""
        self.config_file = path
        self._merge_config(self.config, self.read_file(path))

    def apply_override(self, assignment: str):
        """Apply a `section.key=value` override"""
        if '=' not in assignment:
            raise ConfigError(f"Override must look like section.key=value, got '{assignment}'")
        key, text = assignment.split('=', 1)
        self.set(key.strip(), parse_value(text))

    def save_config(self, path: str):
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.config, f, indent=2)

    def get(self, key: str, default=None):
        """Get configuration value using dot notation"""
        keys = key.split('.')
        value = self.config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return default if value is None else value

    def set(self, key: str, value: Any):
        """Set configuration value using dot notation"""
        self._set_in(self.config, key, value)

    def _set_in(self, config: Dict, key: str, value: Any):
        keys = key.split('.')
        for k in keys[:-1]:
            if not isinstance(config.get(k), dict):
                config[k] = {}
            config = config[k]
        config[keys[-1]] = value

    def _merge_config(self, base: Dict, update: Dict):
        """Recursively merge configuration dictionaries"""
        for key, value in update.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                self._merge_config(base[key], value)
            else:
                base[key] = copy.deepcopy(value)


# Global config manager
config_manager = ConfigManager()
