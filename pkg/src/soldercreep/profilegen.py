"""Synthetic automotive temperature profiles built from exponential half-cycles.

A half-cycle moves from a start temperature towards a target temperature as

    T(t) = T_target - dT * exp(a * t),    dT = T_target - T_start,

with the decay exponent fixed by the largest gradient at ``t = 0`` and the
dwell chosen so that the remaining deviation is 1 % of the target value.
Consecutive half-cycles are chained: each target becomes the next start.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DegenerateStep,
    EmptyInput,
    InputValidationError,
    NonPositiveGradient,
    OutOfDwell,
    RejectionOverflow,
)

TARGET_RANGE_C = (-40.0, 150.0)
GRADIENT_RANGE_K_PER_MIN = (0.5, 20.0)
MAX_STEP_K = 130.0
DWELL_RANGE_MIN = (1.0, 165.0)
MIN_STEP_K = 1.0
RESIDUAL_FRACTION = 0.01
MAX_CONSECUTIVE_REJECTIONS = 100


@dataclass(frozen=True)
class HalfCycle:
    t_start_C: float
    t_target_C: float
    t_dot_max_K_per_min: float
    delta_t_K: float
    exponent_a_per_min: float
    dwell_min: float

    def temperature(self, t_min):
        """Evaluate the exponential approach without dwell bounds checking."""
        return self.t_target_C - self.delta_t_K * np.exp(self.exponent_a_per_min * np.asarray(t_min, dtype=float))

    @property
    def dwell_is_clamped(self) -> bool:
        raw = _raw_dwell(self.t_target_C, self.delta_t_K, self.exponent_a_per_min)
        return not (DWELL_RANGE_MIN[0] <= raw <= DWELL_RANGE_MIN[1])


@dataclass(frozen=True)
class ProfileSpec:
    n_half_cycles: int = 10000
    seed: int = 0
    target_mean_C: float = 25.0
    target_sd_C: float = 190.0 / 10.0
    gradient_mean: float = 7.5
    gradient_sd: float = 19.5 / 8.0
    sample_period_min: float = 1.0

    def __post_init__(self):
        if int(self.n_half_cycles) < 1:
            raise InputValidationError("n_half_cycles must be >= 1")
        if not (self.target_sd_C > 0 and self.gradient_sd > 0):
            raise InputValidationError("standard deviations must be positive")
        if not self.sample_period_min > 0:
            raise InputValidationError("sample_period_min must be positive")


@dataclass(frozen=True)
class TemperatureTrace:
    sample_period_min: float
    temps_C: np.ndarray
    cycle_boundaries: np.ndarray
    cycle_start_min: np.ndarray

    @property
    def n_samples(self) -> int:
        return len(self.temps_C)

    @property
    def times_min(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.sample_period_min

    @property
    def total_duration_h(self) -> float:
        return (self.n_samples - 1) * self.sample_period_min / 60.0

    def cycle_index(self) -> np.ndarray:
        """Half-cycle index for every sample."""
        idx = np.zeros(self.n_samples, dtype=np.int64)
        idx[self.cycle_boundaries[1:]] = 1
        return np.cumsum(idx)


@dataclass(frozen=True)
class PropertySummary:
    min: float
    max: float
    mean: float
    median: float
    p25: float
    p75: float

    def as_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in ("min", "max", "mean", "median", "p25", "p75")}


def _raw_dwell(t_target_C, delta_t_K, a):
    if t_target_C == 0.0:
        return math.inf
    return math.log(abs(RESIDUAL_FRACTION * t_target_C / delta_t_K)) / a


def derive_half_cycle(t_start_C: float, t_target_C: float, t_dot_max: float) -> HalfCycle:
    """Derive exponent and dwell of the half-cycle from its defining triple.

    ``t_dot_max`` is the gradient magnitude in K/min. The exponent is always
    negative so the curve decays onto the target; the dwell is clamped to
    [1, 165] min (a 0 degC target gives an unbounded dwell and lands on 165).
    """
    if not t_dot_max > 0:
        raise NonPositiveGradient(f"gradient must be positive, got {t_dot_max}")
    delta = float(t_target_C) - float(t_start_C)
    if abs(delta) <= MIN_STEP_K:
        raise DegenerateStep(f"|dT| = {abs(delta)} K is not above {MIN_STEP_K} K")
    a = -float(t_dot_max) / abs(delta)
    dwell = min(max(_raw_dwell(float(t_target_C), delta, a), DWELL_RANGE_MIN[0]), DWELL_RANGE_MIN[1])
    return HalfCycle(float(t_start_C), float(t_target_C), float(t_dot_max), delta, a, dwell)


def temperature_at(hc: HalfCycle, t_min: float) -> float:
    if not 0.0 <= t_min <= hc.dwell_min:
        raise OutOfDwell(f"t = {t_min} min outside [0, {hc.dwell_min}]")
    return float(hc.t_target_C - hc.delta_t_K * math.exp(hc.exponent_a_per_min * t_min))


def _accepted(t_start, t_target, grad):
    lo, hi = TARGET_RANGE_C
    if not lo <= t_target <= hi:
        return False
    glo, ghi = GRADIENT_RANGE_K_PER_MIN
    if not glo <= grad <= ghi:
        return False
    return MIN_STEP_K < abs(t_target - t_start) <= MAX_STEP_K


def draw_half_cycles(spec: ProfileSpec) -> list[HalfCycle]:
    rng = np.random.default_rng(spec.seed)
    cycles = []
    t_start = float(spec.target_mean_C)
    for _ in range(int(spec.n_half_cycles)):
        for _attempt in range(MAX_CONSECUTIVE_REJECTIONS + 1):
            t_target = float(rng.normal(spec.target_mean_C, spec.target_sd_C))
            grad = float(rng.normal(spec.gradient_mean, spec.gradient_sd))
            if _accepted(t_start, t_target, grad):
                break
        else:
            raise RejectionOverflow(
                f"more than {MAX_CONSECUTIVE_REJECTIONS} consecutive draws rejected; check the spec"
            )
        hc = derive_half_cycle(t_start, t_target, grad)
        cycles.append(hc)
        t_start = hc.t_target_C
    return cycles


def render_trace(cycles: list[HalfCycle], sample_period_min: float = 1.0) -> TemperatureTrace:
    """Sample the chained half-cycles on a uniform grid.

    Half-cycle ``k`` owns the grid points in ``[tau_k, tau_k + dwell_k)``; a
    final sample at or just past the last dwell end closes the trace.
    """
    if not cycles:
        raise EmptyInput("no half-cycles to render")
    dwell = np.array([c.dwell_min for c in cycles])
    starts = np.concatenate([[0.0], np.cumsum(dwell)[:-1]])
    end = starts[-1] + dwell[-1]
    n_samples = int(math.ceil(end / sample_period_min - 1e-9)) + 1
    times = np.arange(n_samples) * sample_period_min
    owner = np.searchsorted(starts, times, side="right") - 1
    t_start = np.array([c.t_start_C for c in cycles])
    t_target = np.array([c.t_target_C for c in cycles])
    a = np.array([c.exponent_a_per_min for c in cycles])
    local = times - starts[owner]
    temps = t_target[owner] - (t_target - t_start)[owner] * np.exp(a[owner] * local)
    boundaries = np.searchsorted(times, starts - 1e-9, side="left")
    return TemperatureTrace(float(sample_period_min), temps, boundaries.astype(np.int64), starts)


def generate_profile(spec: ProfileSpec) -> tuple[list[HalfCycle], TemperatureTrace]:
    cycles = draw_half_cycles(spec)
    return cycles, render_trace(cycles, spec.sample_period_min)


def profile_statistics(cycles: list[HalfCycle]) -> dict[str, PropertySummary]:
    if len(cycles) == 0:
        raise EmptyInput("statistics of an empty cycle list")
    columns = {
        "t_target_C": [c.t_target_C for c in cycles],
        "t_dot_max_K_per_min": [c.t_dot_max_K_per_min for c in cycles],
        "delta_t_K": [c.delta_t_K for c in cycles],
        "dwell_min": [c.dwell_min for c in cycles],
    }
    out = {}
    for name, values in columns.items():
        v = np.asarray(values, dtype=float)
        p25, median, p75 = np.percentile(v, [25, 50, 75])
        out[name] = PropertySummary(v.min(), v.max(), v.mean(), median, p25, p75)
    return out


HALF_CYCLE_COLUMNS = ("t_start_C", "t_target_C", "t_dot_max", "delta_t_K", "a_per_min", "dwell_min")


def half_cycles_to_csv(cycles: list[HalfCycle]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HALF_CYCLE_COLUMNS)
    for c in cycles:
        w.writerow([repr(float(v)) for v in (c.t_start_C, c.t_target_C, c.t_dot_max_K_per_min,
                                             c.delta_t_K, c.exponent_a_per_min, c.dwell_min)])
    return buf.getvalue()


def half_cycles_from_csv(text: str) -> list[HalfCycle]:
    rows = csv.DictReader(io.StringIO(text))
    return [
        HalfCycle(float(r["t_start_C"]), float(r["t_target_C"]), float(r["t_dot_max"]),
                  float(r["delta_t_K"]), float(r["a_per_min"]), float(r["dwell_min"]))
        for r in rows
    ]


def trace_to_csv(trace: TemperatureTrace) -> str:
    buf = io.StringIO()
    buf.write("time_min,temp_C,cycle_index\n")
    times = trace.times_min
    owner = trace.cycle_index()
    for t, temp, k in zip(times, trace.temps_C, owner):
        buf.write(f"{float(t)!r},{float(temp)!r},{int(k)}\n")
    return buf.getvalue()


def trace_from_csv(text: str, cycles: list[HalfCycle]) -> TemperatureTrace:
    data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
    times, temps, owner = data[:, 0], data[:, 1], data[:, 2].astype(np.int64)
    period = float(times[1] - times[0]) if len(times) > 1 else 1.0
    boundaries = np.searchsorted(owner, np.arange(len(cycles)), side="left").astype(np.int64)
    dwell = np.array([c.dwell_min for c in cycles])
    starts = np.concatenate([[0.0], np.cumsum(dwell)[:-1]])
    return TemperatureTrace(period, temps, boundaries, starts)
