# core/config.py
"""
Settings loading: config/settings.yaml plus .env / environment overrides.
"""
import copy
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv

from core.helpers import parse_workers
from core.logger import get_logger

logger = get_logger(__name__)

PROJECT_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_SETTINGS_PATH = PROJECT_ROOT / "config" / "settings.yaml"

DEFAULT_SETTINGS: Dict[str, Any] = {
    "logging": {
        "level": "INFO",
        "json_format": False,
    },
    "oracle": {
        "max_voters": 6,
        "skip_on_tie": True,
        "workers": 1,
        "chunk_size": 256,
    },
    "classification": {
        "reading": "auto",
    },
    "reports": {
        "format": "text",
        "output_dir": "reports/",
    },
}

# environment variable -> (section, key, converter)
ENV_OVERRIDES = {
    "SFBC_WORKERS": ("oracle", "workers", parse_workers),
    "SFBC_MAX_VOTERS": ("oracle", "max_voters", int),
    "SFBC_LOG_LEVEL": ("logging", "level", str),
    "SFBC_LOG_JSON": ("logging", "json_format", lambda v: v.strip().lower() in ("1", "true", "yes", "on")),
}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_settings(path: Optional[Union[str, Path]] = None, use_env: bool = True) -> Dict[str, Any]:
    """
    Load settings from YAML and apply environment overrides.

    Args:
        path: Settings file (defaults to config/settings.yaml)
        use_env: Apply .env and SFBC_* environment overrides

    Returns:
        Settings dictionary with every default section present
    """
    settings_path = Path(path) if path else DEFAULT_SETTINGS_PATH

    if settings_path.exists():
        with open(settings_path, 'r') as f:
            loaded = yaml.safe_load(f) or {}
        settings = _merge(DEFAULT_SETTINGS, loaded)
        logger.debug(f"Loaded settings from {settings_path}")
    else:
        logger.warning(f"Settings file not found: {settings_path}, using defaults")
        settings = copy.deepcopy(DEFAULT_SETTINGS)

    if use_env:
        load_dotenv()
        for variable, (section, key, convert) in ENV_OVERRIDES.items():
            raw = os.getenv(variable)
            if raw is None:
                continue
            try:
                settings[section][key] = convert(raw)
            except ValueError:
                logger.warning(f"Ignoring invalid {variable}={raw!r}")

    return settings
