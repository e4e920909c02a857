"""
Configuration manager.

Holds the defaults for norm estimation, searches and experiments, merged
with an optional user JSON file, plus session-folder handling for output.
"""

import copy
import os
import json
import logging
from datetime import datetime

logger = logging.getLogger(__name__)

CONFIG_DIR_ENV = "DIAGSUM_CONFIG_DIR"

DEFAULT_CONFIG = {
    "application": {
        "name": "diagsum",
        "version": "1.0.0"
    },
    "normest": {
        "starts": 32,
        "tol": 1e-10,
        "max_sweeps": 500,
        "workers": 1
    },
    "search": {
        "random_trials": 16,
        "ascent_steps": 32,
        "step_size": 0.1,
        "inner_starts": 4,
        "inner_max_sweeps": 100
    },
    "experiments": {
        "seed": 12345,
        "distribution": "gaussian",
        "ngrid": [2, 4, 8, 16, 32]
    },
    "paths": {
        "default_output": "outputs",
        "auto_create_session_folder": False,
        "session_folder_format": "session_%Y%m%d_%H%M%S"
    }
}


class ConfigManager:
    """Configuration class"""

    def __init__(self, config_file=None, create_default=True):
        """
        Initialize the configuration manager.

        Args:
            config_file: Path of the JSON config file; None uses config.json
                in the config directory.
            create_default: Write the defaults on first run when the file
                does not exist yet.
        """
        self.config_dir = self._get_config_dir() if config_file is None else os.path.dirname(
            os.path.abspath(config_file))
        self.config_file = config_file or os.path.join(self.config_dir, "config.json")
        self.config = self._load_config(create_default)

    def _get_config_dir(self):
        """
        Config directory: $DIAGSUM_CONFIG_DIR, else ~/.config/diagsum.
        """
        config_dir = os.getenv(CONFIG_DIR_ENV) or os.path.join(
            os.path.expanduser("~"), ".config", "diagsum")
        return config_dir

    def _load_config(self, create_default):
        default_config = copy.deepcopy(DEFAULT_CONFIG)

        if os.path.exists(self.config_file):
            try:
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    loaded_config = json.load(f)
                    return self._merge_config(default_config, loaded_config)
            except Exception as e:
                logger.warning(f"Failed to load config file {self.config_file}, using defaults: {e}")
                return default_config
        else:
            if create_default:
                self._save_config(default_config)
            return default_config

    def _merge_config(self, default, loaded):
        """
        Merge user values over the defaults.

        Args:
            default: Default configuration
            loaded: Loaded configuration

        Returns:
            Merged configuration
        """
        def deep_merge(d1, d2):
            for k, v2 in d2.items():
                if k in d1 and isinstance(d1[k], dict) and isinstance(v2, dict):
                    deep_merge(d1[k], v2)
                else:
                    d1[k] = v2
            return d1

        return deep_merge(copy.deepcopy(default), loaded)

    def _save_config(self, config):
        try:
            os.makedirs(os.path.dirname(os.path.abspath(self.config_file)), exist_ok=True)
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(config, f, indent=4, ensure_ascii=False)
        except Exception as e:
            logger.warning(f"Failed to save config file {self.config_file}: {e}")

    def get(self, *keys, default=None):
        """
        Read a config value.

        Args:
            *keys: Key path, e.g. get('normest', 'starts')
            default: Returned when the path does not exist

        Returns:
            The value, or default
        """
        value = self.config
        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default
        return value

    def set(self, value, *keys):
        """
        Set a config value and save the file.

        Args:
            value: Value to store
            *keys: Key path
        """
        config = self.config
        for key in keys[:-1]:
            if key not in config:
                config[key] = {}
            config = config[key]
        config[keys[-1]] = value
        self._save_config(self.config)

    def section(self, name):
        """A copy of one top-level section (empty dict if absent)."""
        return dict(self.get(name, default={}))

    def get_output_base_path(self):
        """
        Absolute base output path; relative paths resolve against the working directory.
        """
        output_path = self.get('paths', 'default_output', default='outputs')
        return os.path.abspath(output_path)

    def create_session_folder(self, base_path=None):
        """
        Create a new session folder.

        Folder naming:
        - auto_create_session_folder = True: session_folder_format with
          strftime placeholders under the base path
        - otherwise: the base path itself

        Returns:
            Absolute path of the session folder
        """
        base_path = base_path or self.get_output_base_path()

        if self.get('paths', 'auto_create_session_folder'):
            folder_format = self.get('paths', 'session_folder_format',
                                     default='session_%Y%m%d_%H%M%S')
            try:
                session_name = datetime.now().strftime(folder_format)
            except Exception as e:
                logger.warning(f"Bad session folder format, using default: {e}")
                session_name = datetime.now().strftime("session_%Y%m%d_%H%M%S")
            session_path = os.path.join(base_path, session_name)
        else:
            session_path = base_path

        os.makedirs(session_path, exist_ok=True)
        return session_path

    def save_session_parameters(self, session_path, parameters):
        """
        Save run parameters to parameters.json in the session folder.

        Args:
            session_path: Session folder
            parameters: Parameter dictionary

        Returns:
            Path of the written file, or None on failure
        """
        try:
            param_file = os.path.join(session_path, "parameters.json")

            session_info = {
                "timestamp": datetime.now().isoformat(),
                "version": self.get('application', 'version'),
                "parameters": parameters
            }

            with open(param_file, 'w', encoding='utf-8') as f:
                json.dump(session_info, f, indent=4, ensure_ascii=False)

            return param_file
        except Exception as e:
            logger.warning(f"Failed to save parameters file: {e}")
            return None

    def get_config_file_path(self):
        return self.config_file
