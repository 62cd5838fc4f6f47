"""Numerical laboratory for Wiener amalgam and modulation space norms.

Sampled functions live on origin-centred uniform grids; the norm engines,
closed-form Gaussian oracles and the scaling lab combine into exponent
experiments driven from :mod:`amalgam_lab.cli`.
"""
from .errors import (
    AmalgamLabError,
    ConfigError,
    DegenerateFit,
    GridInadequate,
    GridMismatch,
    InvalidParam,
    OffGridShift,
    SupportViolation,
    TailTruncation,
)
from .grid import INF, ExponentPair, Grid, SampledFunction
from .norms import NormSpec, Space, Window, amalgam_norm, flp_norm, lp_norm, modulation_norm

__version__ = "0.1.0"

__all__ = [
    "INF",
    "AmalgamLabError",
    "ConfigError",
    "DegenerateFit",
    "ExponentPair",
    "Grid",
    "GridInadequate",
    "GridMismatch",
    "InvalidParam",
    "NormSpec",
    "OffGridShift",
    "SampledFunction",
    "Space",
    "SupportViolation",
    "TailTruncation",
    "Window",
    "amalgam_norm",
    "flp_norm",
    "lp_norm",
    "modulation_norm",
]
