"""Settings objects and the key=value configuration loader."""

from dataclasses import fields
from pathlib import Path
from typing import Any

import numpy as np
from scipy.spatial.transform import Rotation

from ..errors import ConfigError
from ..geom import Pose
from .grammar import ConfigGrammar, ConfigSyntax
from .settings import EstimatorConfig, MapConfig, OdometryConfig

__all__ = [
    "ConfigGrammar",
    "ConfigSyntax",
    "EstimatorConfig",
    "MapConfig",
    "OdometryConfig",
    "configure",
    "load_config",
]

# Flat key -> (section, field). Section None addresses OdometryConfig itself.
_SECTIONS = {"map": MapConfig, "est": EstimatorConfig}
_KEYS: dict[str, tuple[str | None, str]] = {
    **{f.name: ("map", f.name) for f in fields(MapConfig)},
    **{f.name: ("est", f.name) for f in fields(EstimatorConfig)},
    "extrinsic": (None, "extrinsic"),
    "gravity": (None, "gravity_init"),
    "gravity_tolerance": (None, "gravity_tolerance"),
    "imu_init_window": (None, "imu_init_window"),
    "init_acc_var_max": (None, "init_acc_var_max"),
    "seed": (None, "seed"),
    "timing": (None, "timing"),
}


def _coerce(key: str, value: Any, kind: type) -> Any:
    """Check a parsed value against the declared type of its field."""
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError("Key '{key}' expects true or false.".format(key=key))
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError("Key '{key}' expects an integer.".format(key=key))
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("Key '{key}' expects a number.".format(key=key))
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError("Key '{key}' expects a word.".format(key=key))
        return value
    return value


def _vector(key: str, value: Any, size: int) -> np.ndarray:
    if not isinstance(value, (tuple, list)) or len(value) != size:
        raise ConfigError(
            "Key '{key}' expects {size} numbers.".format(key=key, size=size)
        )
    return np.asarray(value, dtype=float)


def _extrinsic(value: Any) -> Pose:
    """Build the extrinsic from 'tx ty tz qx qy qz qw'."""
    if isinstance(value, Pose):
        return value
    values = _vector("extrinsic", value, 7)
    quat = values[3:]
    if np.linalg.norm(quat) < 1e-12:
        raise ConfigError("Key 'extrinsic' has a zero quaternion.")
    return Pose(Rotation.from_quat(quat), values[:3])


def configure(**settings: Any) -> OdometryConfig:
    """
    Build an OdometryConfig from flat keyword settings.

    :param settings: documented configuration keys with parsed values; keys
        that are not given keep their defaults.
    :return: a validated configuration.
    :raise ConfigError: if a key is unknown or a value is invalid.
    """
    sections: dict[str, dict[str, Any]] = {name: {} for name in _SECTIONS}
    top: dict[str, Any] = {}
    types = {
        name: {f.name: f.type for f in fields(cls)} for name, cls in _SECTIONS.items()
    }

    for key, value in settings.items():
        if key not in _KEYS:
            raise ConfigError("Unknown configuration key '{key}'.".format(key=key))
        section, name = _KEYS[key]
        if section is not None:
            sections[section][name] = _coerce(key, value, types[section][name])
        elif name == "extrinsic":
            top[name] = _extrinsic(value)
        elif name == "gravity_init":
            top[name] = _vector(key, value, 3)
        elif name in ("seed",):
            top[name] = _coerce(key, value, int)
        elif name == "timing":
            top[name] = _coerce(key, value, bool)
        else:
            top[name] = _coerce(key, value, float)

    return OdometryConfig(
        map=MapConfig(**sections["map"]),
        est=EstimatorConfig(**sections["est"]),
        **top,
    )


def load_config(path: str | Path) -> OdometryConfig:
    """
    Read a key=value configuration file.

    :param path: location of the file.
    :return: a validated configuration.
    :raise ConfigError: on syntax errors, unknown keys or invalid values.
    """
    text = Path(path).read_text(encoding="utf-8")
    return configure(**ConfigGrammar().parse(text))
