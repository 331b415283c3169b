"""Input validation for complex-valued arrays.

scikit-learn's ``check_array`` refuses complex input, so the estimators in
this package go through these helpers instead.
"""
import numbers

import numpy as np

from .exceptions import ConfigurationError, DomainError


def check_complex_matrix(X, name="X", min_rows=1, min_cols=1):
    """Validate a 2-D finite array and return it as ``complex128``."""
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ConfigurationError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < min_rows or arr.shape[1] < min_cols:
        raise ConfigurationError(
            f"{name} needs at least {min_rows}x{min_cols} entries, got {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains NaN or Inf")
    return arr


def check_complex_vector(v, name="v"):
    arr = np.asarray(v).astype(np.complex128, copy=False)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains NaN or Inf")
    return arr


def check_count(value, name, minimum=1):
    """Return ``value`` as an int, requiring an integral value >= ``minimum``."""
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, numbers.Real) and float(value).is_integer():
            value = int(value)
        else:
            raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_unit_interval(value, name):
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ConfigurationError(f"{name} must lie in [0, 1], got {value}")
    return value
