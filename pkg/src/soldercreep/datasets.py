"""Turn (profile, creep record) pairs into model-ready partitions.

Splits are chronological: the final share of half-cycles is the test set, and
the last share of what remains is the validation set. Standardisation
statistics always come from the training partition alone.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .artifacts import atomic_write_json, atomic_write_text, read_json
from .creepsim import CreepRecord
from .exceptions import (
    EmptyResult,
    InputValidationError,
    LengthMismatch,
    NonPositiveIncrement,
    WindowTooLong,
)
from .profilegen import HalfCycle, TemperatureTrace

INCREMENT_FLOOR = 1e-16
MIN_KEPT_SAMPLES = 10
MLP_FEATURES = ("t_start_C", "t_target_C", "delta_t_K", "t_dot_max", "dwell_min")


class Standardizer(TransformerMixin, BaseEstimator):
    """Zero-mean, unit-deviation scaling per column (population deviation)."""

    def fit(self, X, y=None):
        X = _as_2d(X)
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        self.scale_ = np.where(scale > 0, scale, 1.0)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "mean_")
        X = np.asarray(X, dtype=np.float64)
        return (X - self._b(X, self.mean_)) / self._b(X, self.scale_)

    def inverse_transform(self, X):
        check_is_fitted(self, "mean_")
        X = np.asarray(X, dtype=np.float64)
        return X * self._b(X, self.scale_) + self._b(X, self.mean_)

    def _b(self, X, stat):
        # 1-D input with one fitted column scales elementwise
        if X.ndim == 1 and len(stat) == 1:
            return stat[0]
        return stat

    def to_dict(self):
        check_is_fitted(self, "mean_")
        return {"mean": self.mean_.tolist(), "scale": self.scale_.tolist()}

    @classmethod
    def from_dict(cls, d):
        s = cls()
        s.mean_ = np.asarray(d["mean"], dtype=np.float64)
        s.scale_ = np.asarray(d["scale"], dtype=np.float64)
        s.n_features_in_ = len(s.mean_)
        return s


def _as_2d(X):
    X = np.asarray(X, dtype=np.float64)
    return X.reshape(-1, 1) if X.ndim == 1 else X


def _positive(increment):
    inc = np.asarray(increment, dtype=np.float64)
    if np.any(~(inc > 0)):
        raise NonPositiveIncrement("log transforms need strictly positive increments")
    return inc


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def transform_target_ln(increment):
    return _scalar_or_array(-np.log(_positive(increment)))


def inverse_transform_ln(value):
    return _scalar_or_array(np.exp(-np.asarray(value, dtype=np.float64)))


def transform_target_log10(increment):
    return _scalar_or_array(-np.log10(_positive(increment)))


def inverse_transform_log10(value):
    return _scalar_or_array(10.0 ** (-np.asarray(value, dtype=np.float64)))


def floor_increments(increments, floor=INCREMENT_FLOOR):
    return np.maximum(np.asarray(increments, dtype=np.float64), floor)


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.2
    validation_fraction: float = 0.2

    def __post_init__(self):
        if not (0 < self.test_fraction < 1 and 0 < self.validation_fraction < 1):
            raise InputValidationError("split fractions must lie in (0, 1)")


@dataclass(frozen=True)
class Partition:
    """Raw (unstandardised) samples in chronological order.

    ``position`` is the half-cycle index (MLP) or the window's first sample
    (LSTM); ``start_min``/``end_min`` bound the covered time span.
    """
    X_raw: np.ndarray
    y_raw: np.ndarray
    increments: np.ndarray
    position: np.ndarray
    start_min: np.ndarray
    end_min: np.ndarray

    def __len__(self):
        return len(self.y_raw)

    def take(self, sl) -> "Partition":
        return Partition(*(getattr(self, f)[sl] for f in _PARTITION_FIELDS))

    @property
    def hours(self) -> float:
        if len(self) == 0:
            return 0.0
        return float(self.end_min[-1] - self.start_min[0]) / 60.0

    @staticmethod
    def concat(a: "Partition", b: "Partition") -> "Partition":
        return Partition(*(np.concatenate([getattr(a, f), getattr(b, f)]) for f in _PARTITION_FIELDS))


_PARTITION_FIELDS = ("X_raw", "y_raw", "increments", "position", "start_min", "end_min")


@dataclass
class DatasetBundle:
    kind: str
    train: Partition
    validation: Partition
    test: Partition
    feature_scaler: Standardizer
    target_scaler: Standardizer | None = None
    fraction_tag: float = 1.0
    params: dict = field(default_factory=dict)
    full_training_side: Partition | None = None

    @property
    def available(self) -> Partition:
        """Training-side data before fraction segmentation."""
        if self.full_training_side is not None:
            return self.full_training_side
        return Partition.concat(self.train, self.validation)

    def X(self, part: Partition) -> np.ndarray:
        if self.kind == "lstm":
            return self.feature_scaler.transform(part.X_raw.reshape(-1, 1)).reshape(part.X_raw.shape)
        return self.feature_scaler.transform(part.X_raw)

    def y(self, part: Partition) -> np.ndarray:
        if self.target_scaler is None:
            return part.y_raw.copy()
        return self.target_scaler.transform(part.y_raw)

    @property
    def train_hours(self) -> float:
        """Hours of profile behind the training-side data actually kept."""
        return Partition.concat(self.train, self.validation).hours

    def standardizers(self) -> dict:
        out = {"features": self.feature_scaler.to_dict()}
        if self.target_scaler is not None:
            out["target"] = self.target_scaler.to_dict()
        return out


def _split_counts(n, fraction):
    """Chronological head/tail split; the head gets floor((1 - fraction) * n)."""
    head = int(math.floor(n * (1.0 - fraction) + 1e-9))
    return head, n - head


def _fit_bundle(kind, available, test, validation_fraction, fraction_tag, params):
    n_train, n_val = _split_counts(len(available), validation_fraction)
    if n_train < 1 or n_val < 1:
        raise EmptyResult(f"{len(available)} samples cannot be split into train and validation")
    train, validation = available.take(slice(0, n_train)), available.take(slice(n_train, None))
    if kind == "lstm":
        feature_scaler = Standardizer().fit(train.X_raw.reshape(-1, 1))
        target_scaler = Standardizer().fit(train.y_raw)
    else:
        feature_scaler = Standardizer().fit(train.X_raw)
        target_scaler = None
    return DatasetBundle(kind, train, validation, test, feature_scaler, target_scaler, fraction_tag,
                         dict(params), available)


def _cycle_times(cycles):
    dwell = np.array([c.dwell_min for c in cycles], dtype=np.float64)
    starts = np.concatenate([[0.0], np.cumsum(dwell)[:-1]])
    return starts, starts + dwell


def _check_lengths(cycles, records):
    if len(cycles) != len(records):
        raise LengthMismatch(f"{len(cycles)} half-cycles but {len(records)} creep records")


def mlp_features(cycles) -> np.ndarray:
    return np.array([[c.t_start_C, c.t_target_C, c.delta_t_K, c.t_dot_max_K_per_min, c.dwell_min]
                     for c in cycles], dtype=np.float64).reshape(-1, len(MLP_FEATURES))


def build_mlp_dataset(cycles: list[HalfCycle], records: list[CreepRecord],
                      split: SplitSpec | None = None) -> DatasetBundle:
    """One sample per half-cycle; targets are -ln(increment), left unscaled."""
    split = split or SplitSpec()
    _check_lengths(cycles, records)
    inc = floor_increments([r.increment for r in records])
    starts, ends = _cycle_times(cycles)
    full = Partition(mlp_features(cycles), transform_target_ln(inc), inc,
                     np.arange(len(cycles)), starts, ends)
    n_side, _ = _split_counts(len(cycles), split.test_fraction)
    params = {"n_half_cycles": len(cycles), "test_fraction": split.test_fraction,
              "validation_fraction": split.validation_fraction}
    return _fit_bundle("mlp", full.take(slice(0, n_side)), full.take(slice(n_side, None)),
                       split.validation_fraction, 1.0, params)


def window_stride(n_window: int, overlap: float) -> int:
    return max(1, int(math.floor(n_window * (1.0 - overlap) + 1e-9)))


def _windows(temps, first, stop, n_window, stride, mids, inc, period):
    starts = np.arange(first, stop - n_window + 1, stride, dtype=np.int64)
    if len(starts) == 0:
        raise WindowTooLong(f"window of {n_window} samples exceeds the {stop - first}-sample partition")
    X = temps[starts[:, None] + np.arange(n_window)[None, :]]
    t0 = starts * period
    t1 = (starts + n_window) * period
    lo = np.searchsorted(mids, t0, side="left")
    hi = np.searchsorted(mids, t1, side="left")
    sums = floor_increments([inc[a:b].sum() for a, b in zip(lo, hi)])
    return Partition(X, transform_target_log10(sums), sums, starts, t0, t1)


def build_lstm_dataset(trace: TemperatureTrace, cycles: list[HalfCycle], records: list[CreepRecord],
                       sequence_length_min: float = 165.0, overlap: float = 0.75,
                       split: SplitSpec | None = None) -> DatasetBundle:
    """Fixed-length temperature windows labelled with -log10 of their creep.

    A half-cycle's increment is credited to the window containing its dwell
    midpoint. Training-side windows stride by the overlap setting; test
    windows tile the test span without overlap so their sums partition it.
    """
    split = split or SplitSpec()
    _check_lengths(cycles, records)
    if not 0.0 <= overlap < 1.0:
        raise InputValidationError("overlap must lie in [0, 1)")
    period = trace.sample_period_min
    if sequence_length_min < period:
        raise InputValidationError("sequence length is shorter than the sample period")
    n_window = int(round(sequence_length_min / period))
    stride = window_stride(n_window, overlap)
    starts, ends = _cycle_times(cycles)
    mids = 0.5 * (starts + ends)
    inc = np.array([r.increment for r in records], dtype=np.float64)
    n_side, _ = _split_counts(len(cycles), split.test_fraction)
    boundary = int(trace.cycle_boundaries[n_side]) if n_side < len(cycles) else trace.n_samples
    temps = np.asarray(trace.temps_C, dtype=np.float64)
    available = _windows(temps, 0, boundary, n_window, stride, mids, inc, period)
    test = _windows(temps, boundary, trace.n_samples, n_window, n_window, mids, inc, period)
    params = {"sequence_length_min": float(sequence_length_min), "overlap": float(overlap),
              "sample_period_min": period, "window_samples": n_window, "stride_samples": stride,
              "n_half_cycles": len(cycles), "test_fraction": split.test_fraction,
              "validation_fraction": split.validation_fraction}
    return _fit_bundle("lstm", available, test, split.validation_fraction, 1.0, params)


def segment_training_fraction(bundle: DatasetBundle, fraction: float) -> DatasetBundle:
    """Keep the chronological prefix ceil(fraction * N) of the training side."""
    if not 0.0 < fraction <= 1.0:
        raise InputValidationError("fraction must lie in (0, 1]")
    available = bundle.available
    keep = int(math.ceil(fraction * len(available) - 1e-9))
    if keep < MIN_KEPT_SAMPLES:
        raise EmptyResult(f"fraction {fraction} keeps {keep} samples (< {MIN_KEPT_SAMPLES})")
    out = _fit_bundle(bundle.kind, available.take(slice(0, keep)), bundle.test,
                      bundle.params.get("validation_fraction", 0.2), float(fraction), bundle.params)
    return replace(out, full_training_side=available)


DATASET_FORMAT = "soldercreep-dataset"
DATASET_VERSION = 1
_META_COLUMNS = ("position", "start_min", "end_min", "increment", "target")
_PARTS = ("train", "validation", "test")


def _feature_columns(kind, width):
    if kind == "mlp":
        return list(MLP_FEATURES)
    return [f"x{i}" for i in range(width)]


def partition_to_csv(part: Partition, kind: str) -> str:
    """Raw samples, one row each; standardisation lives in the sidecar."""
    width = part.X_raw.shape[1] if part.X_raw.ndim == 2 else 0
    buf = io.StringIO()
    buf.write(",".join(list(_META_COLUMNS) + _feature_columns(kind, width)) + "\n")
    for i in range(len(part)):
        row = [str(int(part.position[i]))]
        row += [repr(float(v)) for v in (part.start_min[i], part.end_min[i], part.increments[i], part.y_raw[i])]
        row += [repr(float(v)) for v in part.X_raw[i]]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def partition_from_csv(text: str) -> Partition:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0][:len(_META_COLUMNS)]) != _META_COLUMNS:
        raise InputValidationError("not a dataset partition CSV")
    width = len(rows[0]) - len(_META_COLUMNS)
    body = rows[1:]
    data = np.array([[float(v) for v in r[1:]] for r in body], dtype=np.float64).reshape(len(body), 4 + width)
    position = np.array([int(r[0]) for r in body], dtype=np.int64)
    return Partition(data[:, 4:], data[:, 3], data[:, 2], position, data[:, 0], data[:, 1])


def write_bundle(bundle: DatasetBundle, directory, stem: str, provenance: dict | None = None) -> list:
    """Write ``<stem>_{train,validation,test}.csv`` plus ``<stem>.json``."""
    directory = Path(directory)
    paths = [atomic_write_text(directory / f"{stem}_{name}.csv",
                               partition_to_csv(getattr(bundle, name), bundle.kind)) for name in _PARTS]
    sidecar = {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "kind": bundle.kind,
        "fraction_tag": float(bundle.fraction_tag),
        "params": bundle.params,
        "standardizers": bundle.standardizers(),
        "sizes": {name: len(getattr(bundle, name)) for name in _PARTS},
        "train_hours": bundle.train_hours,
        "provenance": provenance or {},
    }
    paths.append(atomic_write_json(directory / f"{stem}.json", sidecar))
    return paths


def read_bundle(directory, stem: str) -> DatasetBundle:
    directory = Path(directory)
    meta = read_json(directory / f"{stem}.json")
    if meta.get("format") != DATASET_FORMAT or meta.get("version") != DATASET_VERSION:
        raise InputValidationError(f"{stem}.json is not a version {DATASET_VERSION} dataset sidecar")
    parts = {}
    for name in _PARTS:
        parts[name] = partition_from_csv((directory / f"{stem}_{name}.csv").read_text(encoding="utf-8"))
    scalers = meta["standardizers"]
    target = Standardizer.from_dict(scalers["target"]) if "target" in scalers else None
    return DatasetBundle(meta["kind"], parts["train"], parts["validation"], parts["test"],
                         Standardizer.from_dict(scalers["features"]), target,
                         float(meta["fraction_tag"]), dict(meta["params"]))
