"""Lumped thermo-mechanical creep oracle for a chip-resistor solder standoff.

Each standoff element carries one equivalent stress. The board/component CTE
mismatch, scaled by a lever-arm ratio, loads the element as the temperature
moves; secondary creep after the hyperbolic-sine (Garofalo) law relaxes it:

    d(sigma)/dt = E(T) * (dalpha * L/h * dT/dt - rate(sigma, T) * sign(sigma))
    rate(sigma, T) = c1 * |sinh(c2 * sigma)|**c3 * exp(c4 / T)

Accumulated creep is the time integral of ``rate``. Per half-cycle increments
are reduced to one scalar by a volume-weighted mean over the elements.

This stands in for a finite element analysis; the default constants are
placeholders chosen for a wide, learnable spread of increments, not measured
SnAg3.5 parameters.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .exceptions import InputValidationError, LengthMismatch, StepTooLarge
from .profilegen import HalfCycle, TemperatureTrace

KELVIN_OFFSET = 273.15
T_COLD_C = -40.0
T_HOT_C = 150.0
STRESS_FLOOR_MPA = 0.1
MAX_RELATIVE_STRESS_CHANGE = 0.1


@dataclass(frozen=True)
class CreepMaterial:
    c1: float = 6.6e10
    c2: float = 0.05
    c3: float = 3.0
    c4: float = -12000.0
    e_mod_cold_GPa: float = 20.9
    e_mod_hot_GPa: float = 11.8
    cte_solder_ppm_per_K: float = 21.1

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0 and self.c3 >= 1):
            raise InputValidationError("Garofalo constants need c1 > 0, c2 > 0, c3 >= 1")
        if not (self.e_mod_cold_GPa > 0 and self.e_mod_hot_GPa > 0):
            raise InputValidationError("elastic moduli must be positive")

    def modulus_MPa(self, temp_C):
        frac = np.clip((np.asarray(temp_C, dtype=float) - T_COLD_C) / (T_HOT_C - T_COLD_C), 0.0, 1.0)
        return 1e3 * (self.e_mod_cold_GPa + (self.e_mod_hot_GPa - self.e_mod_cold_GPa) * frac)


def _default_ratios():
    return (9.0, 10.0, 11.0)


def _default_volumes():
    return (1.0, 2.0, 1.0)


@dataclass(frozen=True)
class JointGeometry:
    cte_component_ppm_per_K: float = 7.0
    cte_board_ppm_per_K: float = 14.5
    length_scale_ratio: tuple = field(default_factory=_default_ratios)
    element_volumes: tuple = field(default_factory=_default_volumes)

    def __post_init__(self):
        ratios = np.atleast_1d(np.asarray(self.length_scale_ratio, dtype=float))
        vols = np.asarray(self.element_volumes, dtype=float)
        if vols.ndim != 1 or len(vols) == 0:
            raise InputValidationError("need at least one element volume")
        if np.any(vols <= 0):
            raise InputValidationError("element volumes must be positive")
        if np.any(ratios <= 0):
            raise InputValidationError("length_scale_ratio must be positive")
        if len(ratios) not in (1, len(vols)):
            raise LengthMismatch("one length_scale_ratio per element (or a single shared one)")
        object.__setattr__(self, "length_scale_ratio", tuple(float(r) for r in ratios))
        object.__setattr__(self, "element_volumes", tuple(float(v) for v in vols))

    @property
    def n_elements(self) -> int:
        return len(self.element_volumes)

    @property
    def ratios(self) -> np.ndarray:
        r = np.asarray(self.length_scale_ratio, dtype=float)
        return np.broadcast_to(r, (self.n_elements,)).copy()

    @property
    def cte_mismatch_per_K(self) -> float:
        return 1e-6 * (self.cte_board_ppm_per_K - self.cte_component_ppm_per_K)


@dataclass(frozen=True)
class JointState:
    stress_MPa: np.ndarray
    creep_acc: np.ndarray
    temp_C: float

    @classmethod
    def virgin(cls, geometry: JointGeometry, temp_C: float) -> "JointState":
        n = geometry.n_elements
        return cls(np.zeros(n), np.zeros(n), float(temp_C))


@dataclass(frozen=True)
class CreepRecord:
    cycle_index: int
    increment: float
    running_total: float


def creep_rate(material: CreepMaterial, stress_MPa, temp_K):
    """Equivalent creep strain rate magnitude in 1/s."""
    temp_K = np.asarray(temp_K, dtype=float)
    if np.any(temp_K <= 0):
        raise InputValidationError("absolute temperature must be positive")
    s = np.abs(np.sinh(material.c2 * np.asarray(stress_MPa, dtype=float)))
    out = material.c1 * s ** material.c3 * np.exp(material.c4 / temp_K)
    return float(out) if np.ndim(out) == 0 else out


@njit(cache=True)
def _modulus(temp, e_cold, e_hot):
    frac = (temp - T_COLD_C) / (T_HOT_C - T_COLD_C)
    if frac < 0.0:
        frac = 0.0
    elif frac > 1.0:
        frac = 1.0
    return 1e3 * (e_cold + (e_hot - e_cold) * frac)


@njit(cache=True)
def _signed_rate(sig, c1, c2, c3, arrhenius):
    r = c1 * abs(math.sinh(c2 * sig)) ** c3 * arrhenius
    return -r if sig < 0.0 else r


@njit(cache=True)
def _integrate_kernel(t_target, delta, a_per_s, dwell_s, dt_s, stress, ratios, dalpha,
                      c1, c2, c3, c4, e_cold, e_hot, out_increment):
    """Heun (explicit trapezoid) stepping over one half-cycle.

    Returns -1 on success, else the index of the step that tripped the guard.
    """
    n_steps = int(math.ceil(dwell_s / dt_s - 1e-9))
    if n_steps < 1:
        n_steps = 1
    h = dwell_s / n_steps
    n_el = stress.shape[0]
    temp0 = t_target - delta
    e0 = _modulus(temp0, e_cold, e_hot)
    arr0 = math.exp(c4 / (temp0 + KELVIN_OFFSET))
    for k in range(n_steps):
        temp1 = t_target - delta * math.exp(a_per_s * (k + 1) * h)
        e1 = _modulus(temp1, e_cold, e_hot)
        arr1 = math.exp(c4 / (temp1 + KELVIN_OFFSET))
        d_temp = temp1 - temp0
        for i in range(n_el):
            sig = stress[i]
            r0 = _signed_rate(sig, c1, c2, c3, arr0)
            if e0 * abs(r0) * h > MAX_RELATIVE_STRESS_CHANGE * (abs(sig) + STRESS_FLOOR_MPA):
                return k
            load = dalpha * ratios[i] * d_temp
            pred = sig + e0 * (load - r0 * h)
            r1 = _signed_rate(pred, c1, c2, c3, arr1)
            stress[i] = sig + 0.5 * (e0 + e1) * load - 0.5 * h * (e0 * r0 + e1 * r1)
            out_increment[i] += 0.5 * h * (abs(r0) + abs(r1))
        temp0 = temp1
        e0 = e1
        arr0 = arr1
    return -1


def integrate_half_cycle(state: JointState, hc: HalfCycle, material: CreepMaterial,
                         geometry: JointGeometry, dt_s: float = 1.0):
    """Advance the joint over one half-cycle dwell.

    Returns the new state and the accumulated-creep increment of every element.
    The thermal load is applied with exact temperature differences between
    step ends, so only the creep relaxation carries the explicit-step error;
    :class:`StepTooLarge` is raised when one step would relax more than 10 % of
    ``|sigma| + 0.1 MPa``.
    """
    if not dt_s > 0:
        raise InputValidationError("dt_s must be positive")
    if len(state.stress_MPa) != geometry.n_elements:
        raise LengthMismatch("state does not match the geometry element count")
    stress = np.array(state.stress_MPa, dtype=float)
    inc = np.zeros(geometry.n_elements)
    failed = _integrate_kernel(
        float(hc.t_target_C), float(hc.delta_t_K), hc.exponent_a_per_min / 60.0,
        hc.dwell_min * 60.0, float(dt_s), stress, geometry.ratios, geometry.cte_mismatch_per_K,
        material.c1, material.c2, material.c3, material.c4,
        material.e_mod_cold_GPa, material.e_mod_hot_GPa, inc,
    )
    if failed >= 0:
        raise StepTooLarge(f"creep relaxation exceeds the stress-change guard at step {failed}; reduce dt_s")
    end_temp = float(hc.temperature(hc.dwell_min))
    return JointState(stress, np.asarray(state.creep_acc) + inc, end_temp), inc


def volume_average(per_element, geometry: JointGeometry) -> float:
    """Volume-weighted mean of per-element values."""
    values = np.asarray(per_element, dtype=float)
    vols = np.asarray(geometry.element_volumes, dtype=float)
    if values.shape != vols.shape:
        raise LengthMismatch(f"{values.shape[0] if values.ndim else 0} values for {len(vols)} elements")
    return float(np.dot(values, vols) / vols.sum())


def simulate_profile(trace: TemperatureTrace | None, cycles: list[HalfCycle],
                     material: CreepMaterial | None = None, geometry: JointGeometry | None = None,
                     dt_s: float = 1.0) -> list[CreepRecord]:
    """Integrate all half-cycles in order, carrying stress across boundaries."""
    material = material or CreepMaterial()
    geometry = geometry or JointGeometry()
    if not cycles:
        return []
    if trace is not None and len(trace.cycle_boundaries) != len(cycles):
        raise LengthMismatch(
            f"trace has {len(trace.cycle_boundaries)} half-cycles, cycle list has {len(cycles)}"
        )
    state = JointState.virgin(geometry, cycles[0].t_start_C)
    records = []
    total = 0.0
    for k, hc in enumerate(cycles):
        state, inc = integrate_half_cycle(state, hc, material, geometry, dt_s)
        increment = volume_average(inc, geometry)
        total += increment
        records.append(CreepRecord(k, increment, total))
    return records


def increment_array(records: list[CreepRecord]) -> np.ndarray:
    return np.array([r.increment for r in records], dtype=float)


def decade_span(records: list[CreepRecord], floor: float = 0.0) -> float:
    inc = increment_array(records)
    inc = inc[inc > floor]
    if len(inc) == 0:
        return 0.0
    return float(np.log10(inc.max() / inc.min()))


def records_to_csv(records: list[CreepRecord]) -> str:
    buf = io.StringIO()
    buf.write("cycle_index,increment,running_total\n")
    for r in records:
        buf.write(f"{r.cycle_index},{r.increment:.17g},{r.running_total:.17g}\n")
    return buf.getvalue()


def records_from_csv(text: str) -> list[CreepRecord]:
    return [
        CreepRecord(int(r["cycle_index"]), float(r["increment"]), float(r["running_total"]))
        for r in csv.DictReader(io.StringIO(text))
    ]
