"""Numerical laboratory for product inequalities of Wishart block traces.

The heavy lifting happens in the C++ extension ``gpilab._core``; this package
adds thin JSON conveniences around the config-driven entry points.
"""

import json as _json

from gpilab._core import (  # noqa: F401
    ConfigError,
    NotPositiveSemidefinite,
    TraceWishartParams,
    fischer_gap,
    generate_sigma,
    kron,
    kron_sum,
    laplace,
    matexp_sym,
    moment_neg_quadrature,
    moment_wick,
    sample,
)
from gpilab import _core


def run_check(config: dict) -> dict:
    """Run one configured inequality check; returns the report body."""
    return _json.loads(_core.run_check_json(_json.dumps(config)))


def run_sweep(config: dict, axis: str, values) -> dict:
    """Run a check across a list of axis values."""
    return _json.loads(_core.run_sweep_json(_json.dumps(config), axis, list(values)))


def run_hunt(config: dict) -> dict:
    """Randomized covariance-space search for negative gaps."""
    return _json.loads(_core.run_hunt_json(_json.dumps(config)))


__all__ = [
    "ConfigError",
    "NotPositiveSemidefinite",
    "TraceWishartParams",
    "fischer_gap",
    "generate_sigma",
    "kron",
    "kron_sum",
    "laplace",
    "matexp_sym",
    "moment_neg_quadrature",
    "moment_wick",
    "run_check",
    "run_hunt",
    "run_sweep",
    "sample",
]
