"""Matrix-splitting Metropolis-Hastings: theory and simulation."""

import csv
import io
import json

from ._mhsplit import (
    ConfigError,
    DegenerateWeights,
    Error,
    InvalidArgument,
    NonConvergent,
    NotSpd,
    NotSymmetric,
    NotSymmetrizable,
    SingularM,
    StepTooLarge,
    TheoryUnavailable,
    UnstableIntegrator,
    ar1_to_splitting,
    expected_acceptance,
    lstep_efficiency,
    optimal_L,
    optimal_tuning,
    solve_discrete_lyapunov,
    splitting_to_ar1,
    verify,
)
from . import _mhsplit

__all__ = [
    "ConfigError", "DegenerateWeights", "Error", "InvalidArgument", "NonConvergent", "NotSpd",
    "NotSymmetric", "NotSymmetrizable", "SingularM", "StepTooLarge", "TheoryUnavailable",
    "UnstableIntegrator", "ar1_to_splitting", "expected_acceptance", "lstep_efficiency",
    "optimal_L", "optimal_tuning", "predict", "run", "solve_discrete_lyapunov",
    "splitting_to_ar1", "verify",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def predict(config, as_text=False):
    """Theory columns for a config dict or JSON string; rows as dicts unless as_text."""
    text = _mhsplit.predict_csv(_text(config))
    return text if as_text else _rows(text)


def run(config, as_text=False):
    """Theory and simulation columns for a config dict or JSON string."""
    text = _mhsplit.run_csv(_text(config))
    return text if as_text else _rows(text)
