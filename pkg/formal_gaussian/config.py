"""Configuration loading and validation."""

import os
from pathlib import Path
from typing import Optional

import yaml
from pydantic import ValidationError

from .exceptions import ConfigValidationError
from .models import Config

DEFAULT_CONFIG_FILE = "config.yaml"
CONFIG_ENV_VAR = "FORMAL_GAUSSIAN_CONFIG"


def load_config(config_path: Optional[str] = None) -> Config:
    """
    Load and validate configuration from a YAML file.

    Args:
        config_path: Optional path to config file. If not provided, uses the
                    FORMAL_GAUSSIAN_CONFIG environment variable or defaults
                    to 'config.yaml' in the working directory.

    Returns:
        Validated Config object. A missing default file yields the built-in
        defaults.

    Raises:
        ConfigValidationError: If an explicitly named file is missing, the
            YAML cannot be parsed or validation fails.
    """
    explicit = config_path is not None or CONFIG_ENV_VAR in os.environ
    if config_path is None:
        config_path = os.environ.get(CONFIG_ENV_VAR, DEFAULT_CONFIG_FILE)

    config_file = Path(config_path)

    if not config_file.exists():
        if explicit:
            raise ConfigValidationError(
                f"Configuration file not found: {config_file.absolute()}"
            )
        return Config()

    try:
        with open(config_file, "r", encoding="utf-8") as f:
            config_data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigValidationError(f"Failed to parse YAML configuration: {e}")
    except OSError as e:
        raise ConfigValidationError(f"Failed to read configuration file: {e}")

    if config_data is None:
        config_data = {}
    if not isinstance(config_data, dict):
        raise ConfigValidationError("Configuration root must be a mapping")

    try:
        config = Config(**config_data)
    except ValidationError as e:
        error_messages = []
        for error in e.errors():
            field = " -> ".join(str(loc) for loc in error["loc"])
            message = error["msg"]
            error_messages.append(f"  {field}: {message}")

        raise ConfigValidationError(
            "Configuration validation failed:\n" + "\n".join(error_messages)
        )

    return config
