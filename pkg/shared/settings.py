import os
import logging
from dataclasses import dataclass

from dotenv import load_dotenv

from shared.errors import ConfigError

# Runtime configuration. Values come from the process environment, optionally
# seeded from a .env file at the repository root.
load_dotenv()

DEFAULT_BUDGET = 10 ** 10
DEFAULT_BRUTE_CAP = 8

# Coverage tolerance: a node at distance d is covered by range r iff
# d <= r * (1 + COVER_REL_EPS) + COVER_ABS_EPS.
COVER_REL_EPS = 1e-12
COVER_ABS_EPS = 1e-12

# Two pairwise distances closer than this are treated as a tie on ingest.
TIE_EPS = 1e-9

# Cross coordinates within this distance of an axis are snapped onto it.
AXIS_SNAP_EPS = 1e-12


@dataclass(frozen=True)
class Settings:
    budget: int
    brute_cap: int
    workers: int
    log_level: str
    prune: bool


def _read_int(name, default, minimum=1):
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        # Accept 1e10 / 10_000 style values as well as plain integers
        value = int(float(raw.replace("_", "")))
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


def _read_bool(name, default):
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{name} must be a boolean flag, got {raw!r}")


def _load():
    level = os.environ.get("CROSSBCAST_LOG_LEVEL", "INFO").upper()
    if not isinstance(logging.getLevelName(level), int):
        raise ConfigError(f"CROSSBCAST_LOG_LEVEL: unknown level {level!r}")
    return Settings(
        budget=_read_int("CROSSBCAST_BUDGET", DEFAULT_BUDGET),
        brute_cap=_read_int("CROSSBCAST_BRUTE_CAP", DEFAULT_BRUTE_CAP, minimum=2),
        workers=_read_int("CROSSBCAST_WORKERS", 1),
        log_level=level,
        prune=_read_bool("CROSSBCAST_PRUNE", True),
    )


_settings = None


def get_settings():
    """Cached settings snapshot; call reload_settings() after changing the env."""
    global _settings
    if _settings is None:
        _settings = _load()
    return _settings


def reload_settings():
    global _settings
    _settings = _load()
    return _settings


def resolve_budget(explicit=None):
    """CLI flag / argument wins, then CROSSBCAST_BUDGET, then the default."""
    if explicit is not None:
        if explicit < 1:
            raise ConfigError(f"budget must be >= 1, got {explicit}")
        return int(explicit)
    return get_settings().budget
