"""Input validation helpers shared by the estimators."""

import numpy as np

from .exceptions import DimensionError, InvalidArgumentError


def check_power_of_two(value, low=2, high=512, name="length"):
    if isinstance(value, bool) or int(value) != value:
        raise InvalidArgumentError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < low or value > high or value & (value - 1):
        raise InvalidArgumentError(
            f"{name} must be a power of two in [{low}, {high}], got {value}"
        )
    return value


def check_positive(value, name, allow_zero=False):
    value = float(value)
    ok = value >= 0 if allow_zero else value > 0
    if not np.isfinite(value) or not ok:
        bound = ">= 0" if allow_zero else "> 0"
        raise InvalidArgumentError(f"{name} must be finite and {bound}, got {value}")
    return value


def check_cube(samples, n_fast=None, name="cube"):
    """Validate an (antennas, fast-time, slow-time) complex array."""
    arr = np.asarray(samples)
    if arr.ndim != 3:
        raise DimensionError(f"{name} must be 3-D (N x P x Q), got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise DimensionError(f"{name} has an empty axis: {arr.shape}")
    if n_fast is not None and arr.shape[1] != n_fast:
        raise DimensionError(
            f"{name} has {arr.shape[1]} fast-time samples, expected {n_fast}"
        )
    if not np.iscomplexobj(arr):
        arr = arr.astype(np.complex128)
    return arr


def check_snapshots(x):
    """Return snapshots as an (N, count) complex array."""
    arr = np.asarray(x)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise DimensionError(f"snapshots must be (N, count), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("snapshots contain non-finite values")
    return arr.astype(np.complex128, copy=False)
