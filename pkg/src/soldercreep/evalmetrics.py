"""Evaluation quantities: R^2 in transformed space and the mean relative
error of reconstructed creep accumulation histories."""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .datasets import Standardizer, inverse_transform_ln, inverse_transform_log10
from .exceptions import ConstantTruth, LengthMismatch, MissingStandardizer, ZeroTrueAccumulation


@dataclass
class MetricsReport:
    r2: float
    f_rel_ave: float
    n_samples: int
    rel_err: np.ndarray = field(repr=False)
    true_accum: np.ndarray = field(repr=False)
    pred_accum: np.ndarray = field(repr=False)
    time_min: np.ndarray | None = field(default=None, repr=False)

    def summary(self, **extra) -> dict:
        return {"r2": float(self.r2), "f_rel_ave": float(self.f_rel_ave), "n_samples": int(self.n_samples), **extra}

    def series_csv(self) -> str:
        buf = io.StringIO()
        with_time = self.time_min is not None
        buf.write("index,true_accum,pred_accum,rel_err" + (",time_min" if with_time else "") + "\n")
        for i in range(self.n_samples):
            row = f"{i},{self.true_accum[i]:.17g},{self.pred_accum[i]:.17g},{self.rel_err[i]:.17g}"
            if with_time:
                row += f",{self.time_min[i]:.17g}"
            buf.write(row + "\n")
        return buf.getvalue()


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise LengthMismatch(f"series lengths differ: {a.shape[0]} vs {b.shape[0]}")
    if a.size == 0:
        raise LengthMismatch("empty series")
    return a, b


def r2_score(y_true, y_pred) -> float:
    y, p = _pair(y_true, y_pred)
    ss_tot = np.sum((y - y.mean()) ** 2)
    if ss_tot == 0:
        raise ConstantTruth("R^2 is undefined for a constant true series")
    return float(1.0 - np.sum((y - p) ** 2) / ss_tot)


def reconstruct_accumulation(predicted, kind: str, standardizer: Standardizer | None = None) -> np.ndarray:
    """Map transformed predictions back to increments and accumulate them.

    ``kind`` is ``"ln"`` (per half-cycle targets) or ``"log10"`` (standardised
    window targets, which need the target standardiser).
    """
    values = np.asarray(predicted, dtype=np.float64).reshape(-1)
    if kind == "ln":
        increments = inverse_transform_ln(values)
    elif kind == "log10":
        if standardizer is None:
            raise MissingStandardizer("log10 targets are standardised; pass the target standardizer")
        increments = inverse_transform_log10(standardizer.inverse_transform(values))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return np.cumsum(np.atleast_1d(increments))


def relative_errors(pred_accum, true_accum) -> np.ndarray:
    p, t = _pair(pred_accum, true_accum)
    if np.any(~(t > 0)):
        raise ZeroTrueAccumulation("true accumulation must be strictly positive")
    return np.abs((p - t) / t)


def f_rel_ave(pred_accum, true_accum) -> float:
    return float(relative_errors(pred_accum, true_accum).mean())


def evaluate_predictions(y_true_transformed, y_pred_transformed, true_increments, kind,
                         standardizer=None, time_min=None) -> MetricsReport:
    """R^2 in transformed space plus f_rel_ave of the rebuilt accumulation."""
    r2 = r2_score(y_true_transformed, y_pred_transformed)
    pred_accum = reconstruct_accumulation(y_pred_transformed, kind, standardizer)
    true_accum = np.cumsum(np.asarray(true_increments, dtype=np.float64))
    rel = relative_errors(pred_accum, true_accum)
    return MetricsReport(r2, float(rel.mean()), len(rel), rel, true_accum, pred_accum,
                         None if time_min is None else np.asarray(time_min, dtype=np.float64))
