"""Pseudospectral solver for heat equations with exponential nonlinearity."""

from ._core import (
    EXIT_BLOWUP,
    EXIT_INVARIANT,
    EXIT_MISSING_ARTIFACT,
    EXIT_OK,
    EXIT_UNPARSEABLE,
    ConfigError,
    exponent_selector,
    fit_power_law,
    generate,
    lp_norm,
    luxemburg_norm,
    main,
    series_majorant,
    solve,
    theoretical_exponent,
)

__all__ = [
    "EXIT_BLOWUP",
    "EXIT_INVARIANT",
    "EXIT_MISSING_ARTIFACT",
    "EXIT_OK",
    "EXIT_UNPARSEABLE",
    "ConfigError",
    "exponent_selector",
    "fit_power_law",
    "generate",
    "lp_norm",
    "luxemburg_norm",
    "main",
    "series_majorant",
    "solve",
    "theoretical_exponent",
]
