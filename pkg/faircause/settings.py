"""Default settings for faircause.

The module-level constants are the library defaults. A TOML file passed with
`--settings` can override them per section; command line flags override both.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Optional

import toml
from rich.console import Console
from rich.logging import RichHandler

from faircause.exceptions import ConfigError, ParseError

BASE_DIR = Path(__file__).resolve().parent
SCHEMA_DIR = BASE_DIR / "schemas"
APP_NAME = "faircause"

SEARCH_RESTARTS = 10
MAX_IN_DEGREE = 4
RANDOM_DAG_EDGE_PROB = 0.1

DML_FOLDS = 5
RIDGE_LAMBDA = 1e-3
KNN_K = 10
COND_MEAN_DEGREE = 3
EXTRAPOLATION_SLACK = 0.05
DEGENERATE_TOLERANCE = 1e-12

CONSISTENCY_K = 5
NEUTRAL_BAND = 1e-9
MONTE_CARLO_DRAWS = 100_000

GRID_STEP = 0.1
MAX_ACTIVE = 2

# Rendering attributes for DOT output.
INTERVENTIONAL_SHAPE = "box"
OBSERVATIONAL_SHAPE = "ellipse"
ROLE_COLORS = {
    "self_x": "orange",
    "self_y": "orange",
    "common_ancestor": "red",
}

stderr = Console(stderr=True)


@dataclass(frozen=True)
class Settings:
    """Tunable defaults, grouped as in the TOML sections."""

    restarts: int = SEARCH_RESTARTS
    max_in_degree: Optional[int] = MAX_IN_DEGREE
    folds: int = DML_FOLDS
    ridge_lambda: float = RIDGE_LAMBDA
    knn_k: int = KNN_K
    cond_mean_degree: int = COND_MEAN_DEGREE
    consistency_k: int = CONSISTENCY_K
    grid_step: float = GRID_STEP
    max_active: int = MAX_ACTIVE
    monte_carlo_draws: int = MONTE_CARLO_DRAWS


SECTIONS = {
    "discovery": ("restarts", "max_in_degree"),
    "inference": ("folds", "ridge_lambda", "knn_k", "cond_mean_degree", "monte_carlo_draws"),
    "metrics": ("consistency_k",),
    "select": ("grid_step", "max_active"),
}


def load_settings(path: Optional[Path] = None) -> Settings:
    """Load settings, overriding defaults with a TOML file.

    Args:
        path: TOML file with optional `[discovery]`, `[inference]`, `[metrics]`
            and `[select]` tables. None returns the defaults.

    Returns:
        The merged settings.
    """
    settings = Settings()
    if path is None:
        return settings

    try:
        document: dict[str, Any] = toml.load(path)
    except (OSError, toml.TomlDecodeError) as e:
        raise ParseError(f"cannot read settings: {e}", source=str(path)) from e

    known = {f.name for f in fields(Settings)}
    overrides: dict[str, Any] = {}
    for section, values in document.items():
        if section not in SECTIONS or not isinstance(values, dict):
            raise ConfigError(f"unknown settings section [{section}]", source=str(path))
        for key, value in values.items():
            if key not in SECTIONS[section] or key not in known:
                raise ConfigError(f"unknown setting {section}.{key}", source=str(path))
            overrides[key] = value
    return replace(settings, **overrides)


def configure_logging(quiet: bool = False, verbose: bool = False) -> None:
    """Route library logging to stderr through rich.

    Args:
        quiet: Only show warnings and errors.
        verbose: Show debug messages.
    """
    level = logging.WARNING if quiet else (logging.DEBUG if verbose else logging.INFO)
    handler = RichHandler(console=stderr, show_time=False, show_path=False)
    logging.basicConfig(level=level, format="%(message)s", handlers=[handler], force=True)
