"""Initialisers and losses shared by the dense and recurrent networks."""
from __future__ import annotations

import numpy as np

from ..exceptions import ShapeMismatch, ZeroTrueValue


def he_normal(fan_in: int, shape, seed=None) -> np.ndarray:
    """Draw from N(0, 2 / fan_in); ``seed`` may be an int or a Generator."""
    if fan_in < 1:
        raise ValueError("fan_in must be >= 1")
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)


def glorot_uniform(fan_in: int, fan_out: int, shape, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def orthogonal(shape, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rows, cols = shape
    a = rng.normal(size=(max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    return q if rows >= cols else q.T


def _pair(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=np.float64).reshape(-1)
    y_pred = np.asarray(y_pred, dtype=np.float64).reshape(-1)
    if y_true.shape != y_pred.shape:
        raise ShapeMismatch(f"y_true {y_true.shape} vs y_pred {y_pred.shape}")
    return y_true, y_pred


def _reduce(values, grad, reduction):
    if reduction == "mean":
        n = max(len(values), 1)
        return float(values.sum() / n), grad / n
    if reduction == "sum":
        return float(values.sum()), grad
    raise ValueError(f"unknown reduction {reduction!r}")


def relative_absolute_error(y_true, y_pred, reduction="mean"):
    """|(y - y*) / y| and its gradient with respect to the prediction.

    The kink at y* == y gets the zero subgradient.
    """
    y, p = _pair(y_true, y_pred)
    if np.any(y == 0):
        raise ZeroTrueValue("relative error is undefined for a zero true value")
    diff = p - y
    values = np.abs(diff / y)
    grad = np.sign(diff) / np.abs(y)
    return _reduce(values, grad, reduction)


def squared_error(y_true, y_pred, reduction="mean"):
    y, p = _pair(y_true, y_pred)
    diff = p - y
    return _reduce(diff * diff, 2.0 * diff, reduction)


LOSSES = {"relative_absolute": relative_absolute_error, "squared": squared_error}
