"""Heat/radiation energy partitioning and the sweeps built on it.

Every switching transient dissipates a fixed total: in discharge mode the
initial capacitor energy E0 = C*V0^2/2 is lost entirely to Joule heat and EM
radiation, and in step-charge mode the source supplies C*V^2 of which half is
stored and half lost the same way.  What varies with circuit topology and
element values is the split:

* series RC / series RLC: one loop current flows through both resistances, so
  E_heat/E_rad = R/R_rad exactly and E_heat = E0*R/(R + R_rad),
* parallel RC: the branch conductances swap the roles, E_heat =
  E0*R_rad/(R + R_rad).

Ramped (adiabatic) charging spreads the transition over a time T; the heat
loss then falls off as 1/T and, in the current-acceleration radiation model,
the radiated loss as 1/T^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from . import transient
from .circuit import CircuitSpec, Topology, derive_params, spec_to_mapping, validate_spec
from .errors import NumericalAccuracyError, SpecValidationError, SweepPointError
from ._parallel import parallel_map
from .transient import DriveKind, DriveMode, TimeGrid, Waveform, default_grid

#: Maximum allowed |v(t_end) - v(final)| / drive, see integrate_power.
RESIDUAL_BOUND = 2.1e-9

#: Sample-count cap for adiabatic integration grids (long ramps are nearly
#: linear away from the ends, so coarser steps lose no accuracy there).
_ADIABATIC_MAX_SAMPLES = 2_000_001


@dataclass(frozen=True)
class EnergyPartition:
    """Energies in joules plus loss fractions.

    ``e0_j`` is the reference energy C*V0^2/2.  Fractions are defined over
    the total loss (heat + radiation) so charge and discharge modes share one
    definition; they are NaN when the total loss is zero.
    """

    e_supplied_j: float
    e_stored_j: float
    e_heat_j: float
    e_rad_j: float
    e0_j: float
    heat_frac: float
    rad_frac: float


def _partition(heat, rad, stored, supplied, e0) -> EnergyPartition:
    loss = heat + rad
    if loss > 0.0:
        heat_frac = heat / loss
        rad_frac = rad / loss
    else:
        heat_frac = math.nan
        rad_frac = math.nan
    return EnergyPartition(
        e_supplied_j=supplied,
        e_stored_j=stored,
        e_heat_j=heat,
        e_rad_j=rad,
        e0_j=e0,
        heat_frac=heat_frac,
        rad_frac=rad_frac,
    )


def integrate_power(w: Waveform, spec: CircuitSpec) -> EnergyPartition:
    """Trapezoidal energy integrals over a sampled waveform.

    Raises when the horizon is incomplete, i.e. the capacitor voltage has not
    settled to within ``RESIDUAL_BOUND`` (relative) of its final value; an
    incomplete horizon would silently understate the losses.
    """
    validate_spec(spec)
    dt = w.grid.dt_s
    v_end = float(w.v_cap[-1])
    v0 = spec.v0_volt
    if w.mode.kind is DriveKind.DISCHARGE:
        residual = abs(v_end) / v0
    else:
        residual = abs(v_end - v0) / v0
    if residual > RESIDUAL_BOUND:
        raise NumericalAccuracyError(
            f"waveform horizon incomplete: terminal voltage residual {residual:.3e} "
            f"exceeds {RESIDUAL_BOUND:.1e}; extend the grid",
            residual=residual,
        )

    if spec.topology is Topology.PARALLEL_RC:
        v2 = float(np.trapezoid(w.v_cap * w.v_cap, dx=dt))
        heat = v2 / spec.r_ohm
        rad = v2 / spec.r_rad_ohm
    else:
        i2 = float(np.trapezoid(w.i_total * w.i_total, dx=dt))
        heat = spec.r_ohm * i2
        rad = spec.r_rad_ohm * i2

    stored = 0.5 * spec.c_farad * v_end * v_end
    if w.mode.kind is DriveKind.DISCHARGE:
        supplied = 0.0
    else:
        src = transient.source_voltage(spec, w.mode, w.times())
        supplied = float(np.trapezoid(src * w.i_total, dx=dt))
    e0 = 0.5 * spec.c_farad * v0 * v0
    return _partition(heat, rad, stored, supplied, e0)


def closed_form_partition(spec: CircuitSpec) -> EnergyPartition:
    """Exact discharge-mode partition of E0 = C*V0^2/2.

    Series topologies split E0 in proportion R : R_rad (one shared loop
    current); the parallel topology swaps the two, since the lower branch
    resistance carries the larger share of the current.
    """
    validate_spec(spec)
    e0 = 0.5 * spec.c_farad * spec.v0_volt * spec.v0_volt
    denom = spec.r_ohm + spec.r_rad_ohm
    if spec.topology is Topology.PARALLEL_RC:
        heat = e0 * spec.r_rad_ohm / denom
        rad = e0 * spec.r_ohm / denom
    else:
        heat = e0 * spec.r_ohm / denom
        rad = e0 * spec.r_rad_ohm / denom
    return _partition(heat, rad, 0.0, 0.0, e0)


# --- adiabatic (ramped) charging -------------------------------------------------


class RadiationLaw(Enum):
    #: radiated power = R_rad * I(t)^2
    RESISTANCE = "resistance"
    #: radiated power = k_rad * (dI/dt)^2
    ACCELERATION = "acceleration"


@dataclass(frozen=True)
class AdiabaticModel:
    """Radiation model used when evaluating ramped charging.

    ``k_rad`` (ohm*s^2) applies to the acceleration law only; when None it is
    calibrated per spec via :func:`default_k_rad` so that the step-charge
    radiated energy matches the resistance law on the same circuit.
    """

    law: RadiationLaw = RadiationLaw.ACCELERATION
    k_rad: float | None = None

    def __post_init__(self):
        if self.k_rad is not None and not self.k_rad > 0.0:
            raise SpecValidationError("k_rad must be positive")


def default_k_rad(spec: CircuitSpec) -> float:
    """Acceleration-law coefficient anchored to the step-charge reference.

    For a series RC step, integral(I^2) = C^2 V^2 / (2 tau) and
    integral((dI/dt)^2) = C^2 V^2 / (2 tau^3), so k_rad = R_rad * tau^2 makes
    the acceleration-law radiated energy equal the resistance-law one on the
    reference step transition.
    """
    validate_spec(spec)
    if spec.topology is not Topology.SERIES_RC:
        raise SpecValidationError("adiabatic charging model applies to series_rc only")
    tau = derive_params(spec).tau_s
    return spec.r_rad_ohm * tau * tau


def _adiabatic_grid(spec: CircuitSpec, ramp_T_s: float) -> TimeGrid:
    tau = derive_params(spec).tau_s
    horizon = ramp_T_s + 20.0 * tau
    dt = tau / 1000.0
    n = int(math.ceil(horizon / dt)) + 1
    if n > _ADIABATIC_MAX_SAMPLES:
        n = _ADIABATIC_MAX_SAMPLES
        dt = horizon / (n - 1)
    return TimeGrid(dt_s=dt, n_samples=n)


def adiabatic_partition(
    spec: CircuitSpec, ramp_T_s: float, model: AdiabaticModel = AdiabaticModel()
) -> EnergyPartition:
    """Losses for a linear source ramp 0 -> V over ``ramp_T_s``, then held.

    Integrates the exact ramp waveform.  Heat is always R * integral(I^2);
    the radiated term follows the selected law.  A ramp shorter than 10
    integration steps is rejected: it is numerically indistinguishable from a
    step, so the caller should use step charge instead.
    """
    validate_spec(spec)
    if spec.topology is not Topology.SERIES_RC:
        raise SpecValidationError("adiabatic charging model applies to series_rc only")
    if not ramp_T_s > 0.0:
        raise SpecValidationError("ramp_T_s must be positive")
    grid = _adiabatic_grid(spec, ramp_T_s)
    if ramp_T_s < 10.0 * grid.dt_s:
        raise SpecValidationError(
            f"ramp_T_s={ramp_T_s:.3g} s is below 10 integration steps "
            f"({10.0 * grid.dt_s:.3g} s); this is effectively a step, use step charge"
        )
    mode = DriveMode.ramp_charge(ramp_T_s)
    w = transient.solve_analytic(spec, mode, grid)
    base = integrate_power(w, spec)
    if model.law is RadiationLaw.RESISTANCE:
        return base
    k_rad = model.k_rad if model.k_rad is not None else default_k_rad(spec)
    di2 = float(np.trapezoid(w.di_dt * w.di_dt, dx=grid.dt_s))
    return _partition(base.e_heat_j, k_rad * di2, base.e_stored_j, base.e_supplied_j, base.e0_j)


# --- sweeps ----------------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    axis_name: str
    axis: np.ndarray
    partitions: list[EnergyPartition]
    normalization: str
    meta: dict


def _check_axis(values, name) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise SpecValidationError(f"{name} values must be a non-empty 1-D sequence")
    if not np.all(np.diff(arr) > 0.0):
        raise SpecValidationError(f"{name} values must be strictly increasing")
    return arr


def sweep_resistance(
    template: CircuitSpec,
    r_values,
    method: str = "closed_form",
    threads: int | None = None,
) -> SweepResult:
    """Partition at each ohmic resistance, other elements fixed.

    ``method`` is "closed_form" or "numeric" (fixed-step integration of the
    discharge transient on the default grid).  Per-point failures carry the
    offending resistance.
    """
    if method not in ("closed_form", "numeric"):
        raise SpecValidationError(f"unknown sweep method {method!r}")
    axis = _check_axis(r_values, "resistance")
    mode = DriveMode.discharge()

    def point(r: float) -> EnergyPartition:
        try:
            spec = validate_spec(template.with_r(float(r)))
            if method == "closed_form":
                return closed_form_partition(spec)
            grid = default_grid(spec, mode)
            return integrate_power(transient.solve_numeric(spec, mode, grid), spec)
        except Exception as exc:
            raise SweepPointError(float(r), exc) from exc

    parts = parallel_map(point, axis.tolist(), threads)
    meta = {
        "spec": spec_to_mapping(template),
        "swept": "r_ohm",
        "method": method,
        "mode": "discharge",
    }
    return SweepResult("r_ohm", axis, parts, "absolute", meta)


def sweep_ramp_time(
    spec: CircuitSpec,
    t_values,
    model: AdiabaticModel = AdiabaticModel(),
    threads: int | None = None,
) -> SweepResult:
    """Adiabatic losses at each ramp time.

    ``meta["rad_norm_ref_j"]`` records the radiated energy at the smallest
    ramp time; plots show E_rad normalized to that value (the absolute
    radiated scale is model-dependent, the 1/T^2 falloff is not).
    """
    axis = _check_axis(t_values, "ramp time")

    def point(t_ramp: float) -> EnergyPartition:
        try:
            return adiabatic_partition(spec, float(t_ramp), model)
        except Exception as exc:
            raise SweepPointError(float(t_ramp), exc) from exc

    parts = parallel_map(point, axis.tolist(), threads)
    k_rad = model.k_rad
    if model.law is RadiationLaw.ACCELERATION and k_rad is None:
        k_rad = default_k_rad(spec)
    meta = {
        "spec": spec_to_mapping(spec),
        "swept": "ramp_T_s",
        "radiation_law": model.law.value,
        "k_rad_ohm_s2": k_rad,
        "rad_norm_ref_j": parts[0].e_rad_j,
        "rad_norm_note": "normalized radiation curves divide e_rad_j by its value "
        "at the smallest ramp time",
    }
    return SweepResult("ramp_T_s", axis, parts, "absolute", meta)


_SLOPE_FIELDS = {
    "heat": lambda p: p.e_heat_j,
    "rad": lambda p: p.e_rad_j,
}


def loglog_slope(sweep: SweepResult, field: str, axis_min: float, axis_max: float) -> float:
    """Least-squares slope of log(value) vs log(axis) inside [axis_min, axis_max]."""
    if field not in _SLOPE_FIELDS:
        raise SpecValidationError(f"field must be one of {sorted(_SLOPE_FIELDS)}")
    getter = _SLOPE_FIELDS[field]
    mask = (sweep.axis >= axis_min) & (sweep.axis <= axis_max)
    x = sweep.axis[mask]
    y = np.array([getter(p) for p, m in zip(sweep.partitions, mask) if m])
    if x.size < 3:
        raise SpecValidationError(
            f"need at least 3 sweep points in [{axis_min:g}, {axis_max:g}], have {x.size}"
        )
    if np.any(y <= 0.0):
        raise SpecValidationError("log-log slope requires strictly positive values")
    design = np.column_stack([np.ones_like(x), np.log(x)])
    coef, *_ = np.linalg.lstsq(design, np.log(y), rcond=None)
    return float(coef[1])


# --- export ----------------------------------------------------------------------

SWEEP_CSV_HEADER = "axis,e_heat_j,e_rad_j,e_stored_j,e_supplied_j,heat_frac,rad_frac"


def sweep_to_csv(sweep: SweepResult) -> str:
    lines = [SWEEP_CSV_HEADER]
    for x, p in zip(sweep.axis, sweep.partitions):
        lines.append(
            ",".join(
                "%.17g" % v
                for v in (
                    x,
                    p.e_heat_j,
                    p.e_rad_j,
                    p.e_stored_j,
                    p.e_supplied_j,
                    p.heat_frac,
                    p.rad_frac,
                )
            )
        )
    return "\n".join(lines) + "\n"


def sweep_to_json(sweep: SweepResult) -> dict:
    from . import __version__

    points = [
        {
            "axis": float(x),
            "e_heat_j": p.e_heat_j,
            "e_rad_j": p.e_rad_j,
            "e_stored_j": p.e_stored_j,
            "e_supplied_j": p.e_supplied_j,
            "heat_frac": p.heat_frac,
            "rad_frac": p.rad_frac,
        }
        for x, p in zip(sweep.axis, sweep.partitions)
    ]
    meta = dict(sweep.meta)
    meta["tool_version"] = __version__
    return {
        "schema": 1,
        "axis_name": sweep.axis_name,
        "normalization": sweep.normalization,
        "meta": meta,
        "points": points,
    }


def write_sweep_csv(sweep: SweepResult, path: str | Path) -> None:
    Path(path).write_text(sweep_to_csv(sweep), encoding="utf-8")
