"""Telehealth regulation toolkit: equilibrium model, synthetic panels,
PPML with absorbed fixed effects, and causal post-processing."""

from . import broadband, causal, config, dgp, market, ppml
from .exceptions import (
    AssumptionError,
    ConfigError,
    ConvergenceError,
    DataError,
    DomainError,
    TeleparityError,
)

__version__ = "0.1.0"

__all__ = [
    "broadband",
    "causal",
    "config",
    "dgp",
    "market",
    "ppml",
    "AssumptionError",
    "ConfigError",
    "ConvergenceError",
    "DataError",
    "DomainError",
    "TeleparityError",
    "__version__",
]
