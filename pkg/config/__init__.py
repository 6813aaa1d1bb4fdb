"""
Repository-wide defaults read from config/config.yaml.
"""

from pathlib import Path

import yaml

from lattice.errors import ConfigError


CONFIG_PATH = Path(__file__).with_name("config.yaml")

REQUIRED_SECTIONS = ("parallel", "paths", "reference", "tracking")


def load_config(path=None) -> dict:
    """
    Load the defaults file.

    Parameters
    ----------
    path : str or Path, optional
        Alternative YAML file; defaults to config/config.yaml.

    Returns
    -------
    dict
        Section name -> dict of settings.
    """
    path = Path(path) if path is not None else CONFIG_PATH

    try:
        with open(path, "r") as f:
            config = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    if not isinstance(config, dict):
        raise ConfigError(f"{path}: expected a mapping of sections")

    missing = [s for s in REQUIRED_SECTIONS if s not in config]
    if missing:
        raise ConfigError(f"{path}: missing sections {missing}")

    return config
