"""Input validation helpers shared across the package."""

import numbers

import numpy as np


class InconsistentMeasurementsError(ValueError):
    """Measured quantities violate a relation they must satisfy (e.g. a negative radicand)."""


class InvalidLayoutError(ValueError):
    """A separated-objects layout whose correlation windows overlap or do not fit."""


def check_vector(x, name="x", dtype=float, min_length=1):
    """Return `x` as a contiguous 1-D array of `dtype`.

    Raises ValueError for non 1-D input, too-short input or non-finite entries.
    """
    arr = np.asarray(x)
    if dtype is float and np.iscomplexobj(arr):
        raise ValueError(f"{name} must be real-valued")
    arr = np.ascontiguousarray(arr, dtype=dtype)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_length:
        raise ValueError(f"{name} must have at least {min_length} entries")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_nonnegative(x, name="x"):
    arr = check_vector(x, name)
    if np.any(arr < 0):
        raise ValueError(f"{name} must be entrywise nonnegative")
    return arr


def check_int(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    return int(value)


def check_tau(tau, n, name="tau", strict_margin=0):
    """Validate an even support parameter with ``0 <= tau < n - strict_margin``."""
    tau = check_int(tau, name)
    if tau < 0:
        raise ValueError(f"{name} must be nonnegative, got {tau}")
    if tau % 2:
        raise ValueError(f"{name} must be even, got {tau}")
    if tau >= n - strict_margin:
        raise ValueError(f"{name}={tau} too large for n={n}")
    return tau


def check_sigma(sigma):
    if not isinstance(sigma, numbers.Real) or isinstance(sigma, bool):
        raise ValueError(f"sigma must be a real number, got {sigma!r}")
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    return sigma
