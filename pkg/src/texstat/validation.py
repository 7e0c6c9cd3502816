"""Input validation helpers shared by the DSP modules and the estimators."""

from __future__ import annotations

import numpy as np

from .errors import LengthMismatch, NonFiniteInput


def as_float_vector(x, name: str = "x") -> np.ndarray:
    """Coerce to a contiguous 1-D float64 array without copying when possible."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    return np.ascontiguousarray(arr)


def check_finite(x: np.ndarray, name: str = "x") -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput(f"{name} contains non-finite values")
    return x


def check_length(x: np.ndarray, expected: int, name: str = "x") -> np.ndarray:
    if x.shape[-1] != expected:
        raise LengthMismatch(f"{name} has length {x.shape[-1]}, expected {expected}")
    return x


def check_power_of_two(n: int, minimum: int = 64, name: str = "length") -> int:
    n = int(n)
    if n < minimum or (n & (n - 1)) != 0:
        raise ValueError(f"{name} must be a power of two >= {minimum}, got {n}")
    return n


def check_frame_matrix(X, frame_length: int | None = None) -> np.ndarray:
    """Validate a (n_frames, frame_length) matrix of audio frames."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D frame matrix, got shape {arr.shape}")
    if frame_length is not None and arr.shape[1] != frame_length:
        raise LengthMismatch(
            f"frames have length {arr.shape[1]}, expected {frame_length}"
        )
    check_finite(arr, "frames")
    return arr
