import os
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from .errors import ParameterError

# Configure logger
logger = logging.getLogger(__name__)

CONFIG_DIR = Path(os.path.expanduser("~/.config/qwhittaker-torus"))
CONFIG_FILE = CONFIG_DIR / "config.json"
ENUMERATION_CAP_ENV = "QWT_ENUMERATION_CAP"
DEFAULT_CONFIG = {
    "enumeration_cap": 10_000_000,   # upper bound on C(L, m1)^N
    "float_tolerance": 1e-12,
    "identity_samples": 10_000,
    "threads": 1,
    "progress_bars": False,
}


def ensure_config_dir_exists():
    """Creates the configuration directory if it doesn't exist."""
    try:
        CONFIG_DIR.mkdir(parents=True, exist_ok=True)
        logger.debug(f"Ensured configuration directory exists: {CONFIG_DIR}")
    except OSError as e:
        logger.error(f"Could not create configuration directory {CONFIG_DIR}: {e}")


def get_config() -> Dict:
    """
    Loads configuration from file, adds missing default values,
    and saves the updated configuration back to the file if defaults were added.
    """
    config = {}
    defaults_added = False

    try:
        if CONFIG_FILE.exists():
            with open(CONFIG_FILE, 'r') as f:
                config = json.load(f)
            if not isinstance(config, dict):
                raise ValueError("top-level JSON value is not an object")
        else:
            logger.info(f"Config file not found at {CONFIG_FILE}. Creating with defaults.")
            defaults_added = True
    except (json.JSONDecodeError, ValueError, IOError) as e:
        logger.warning(f"Error loading config file {CONFIG_FILE}: {e}. Using defaults and attempting to overwrite.")
        config = {}
        defaults_added = True

    missing_keys = set(DEFAULT_CONFIG) - set(config)
    if missing_keys:
        logger.info(f"Adding default values for missing keys: {', '.join(sorted(missing_keys))}")
        for key in missing_keys:
            config[key] = DEFAULT_CONFIG[key]
        defaults_added = True

    if defaults_added:
        save_config(config)

    return config


def save_config(config_data: Dict):
    """Saves the configuration dictionary to the config file."""
    try:
        ensure_config_dir_exists()
        with open(CONFIG_FILE, 'w') as f:
            json.dump(config_data, f, indent=4, sort_keys=True)
    except OSError as e:
        logger.error(f"Error saving config to {CONFIG_FILE}: {e}")


def _coerce(key: str, value: Any) -> Any:
    if key == "progress_bars":
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in ("true", "1", "yes", "on"):
            return True
        if text in ("false", "0", "no", "off"):
            return False
        raise ParameterError(f"'{key}' must be true or false, got {value!r}.")
    if key == "float_tolerance":
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise ParameterError(f"'{key}' must be a number, got {value!r}.")
        if not number > 0:
            raise ParameterError(f"'{key}' must be positive, got {value!r}.")
        return number
    try:
        number = int(value)
    except (TypeError, ValueError):
        raise ParameterError(f"'{key}' must be an integer, got {value!r}.")
    if number < 1:
        raise ParameterError(f"'{key}' must be at least 1, got {number}.")
    return number


def set_config_value(key: str, value: Any) -> Any:
    """Validates and stores one setting; returns the stored value."""
    if key not in DEFAULT_CONFIG:
        raise ParameterError(f"Unknown setting '{key}'. Known settings: {', '.join(sorted(DEFAULT_CONFIG))}.")
    coerced = _coerce(key, value)
    config = get_config()
    config[key] = coerced
    save_config(config)
    logger.info(f"Set {key} = {coerced}")
    return coerced


def get_enumeration_cap(override: Optional[int] = None) -> int:
    """Command-line override, then the environment variable, then the config file."""
    if override is not None:
        return _coerce("enumeration_cap", override)
    env_value = os.environ.get(ENUMERATION_CAP_ENV)
    if env_value:
        try:
            return _coerce("enumeration_cap", env_value)
        except ParameterError as e:
            logger.warning(f"Ignoring {ENUMERATION_CAP_ENV}: {e}")
    return _coerce("enumeration_cap", get_config().get("enumeration_cap", DEFAULT_CONFIG["enumeration_cap"]))


def get_float_tolerance() -> float:
    return _coerce("float_tolerance", get_config().get("float_tolerance", DEFAULT_CONFIG["float_tolerance"]))
