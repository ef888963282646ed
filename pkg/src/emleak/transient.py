"""Transient voltage/current waveforms for the supported circuits and drives.

Two independent solution paths are provided:

* :func:`solve_analytic` evaluates closed-form solutions per topology and
  drive mode,
* :func:`solve_numeric` integrates the state equations with a classical
  fixed-step 4th-order Runge-Kutta scheme (fixed step keeps golden outputs
  reproducible).

Both return the same :class:`Waveform` shape, so either can cross-check the
other.  Drive modes:

* discharge: capacitor starts at V0, no source,
* step charge: ideal step source to V_DD at t = 0,
* ramp charge: linear source ramp 0 -> V_DD over ``ramp_T_s``, then held; the
  current decays from its ramp-end value with the circuit time constant.

Time derivative of the loop current is always populated from closed forms
(analytic path) or from the state equations (numeric path), never by
differencing, so downstream integrals of (dI/dt)^2 are not dominated by
differencing noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .circuit import CircuitSpec, Topology, derive_params, validate_spec
from .errors import SpecValidationError, StabilityError, UnsupportedModeError

#: |zeta - 1| below which the repeated-root (critically damped) form is used.
CRITICAL_ZETA_TOL = 1e-9


class DriveKind(Enum):
    DISCHARGE = "discharge"
    STEP_CHARGE = "step"
    RAMP_CHARGE = "ramp"


@dataclass(frozen=True)
class DriveMode:
    kind: DriveKind
    ramp_T_s: float | None = None

    def __post_init__(self):
        if self.kind is DriveKind.RAMP_CHARGE:
            if self.ramp_T_s is None or not self.ramp_T_s > 0.0:
                raise SpecValidationError("ramp_T_s must be positive for ramp charge")
        elif self.ramp_T_s is not None:
            raise SpecValidationError(f"ramp_T_s is only valid for ramp charge, not {self.kind.value}")

    @classmethod
    def discharge(cls) -> "DriveMode":
        return cls(DriveKind.DISCHARGE)

    @classmethod
    def step_charge(cls) -> "DriveMode":
        return cls(DriveKind.STEP_CHARGE)

    @classmethod
    def ramp_charge(cls, ramp_T_s: float) -> "DriveMode":
        return cls(DriveKind.RAMP_CHARGE, ramp_T_s)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling grid: samples at k * dt_s for k in [0, n_samples)."""

    dt_s: float
    n_samples: int

    def __post_init__(self):
        errors = []
        if not self.dt_s > 0.0:
            errors.append("dt_s must be positive")
        if self.n_samples < 2:
            errors.append("n_samples must be >= 2")
        if errors:
            raise SpecValidationError(errors)

    @property
    def t_end_s(self) -> float:
        return self.dt_s * (self.n_samples - 1)

    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt_s


@dataclass(frozen=True)
class Waveform:
    grid: TimeGrid
    mode: DriveMode
    v_cap: np.ndarray
    i_total: np.ndarray
    di_dt: np.ndarray
    i_branch_r: np.ndarray | None = None
    i_branch_rad: np.ndarray | None = None
    method: str = "analytic"

    def times(self) -> np.ndarray:
        return self.grid.times()


def characteristic_times(spec: CircuitSpec) -> tuple[float, float, float | None]:
    """(fastest, slowest, oscillation period or None) of the free response.

    First-order circuits have a single time constant.  For RLC the fastest
    scale is 1/omega0 when underdamped (or the fast real mode when
    overdamped) and the slowest is the envelope/slow-mode decay time; the
    period is reported for underdamped circuits only.
    """
    d = derive_params(spec)
    if spec.topology is not Topology.SERIES_RLC:
        return d.tau_s, d.tau_s, None
    omega0, zeta = d.omega0_rad_s, d.zeta
    if zeta < 1.0 - CRITICAL_ZETA_TOL:
        omega_d = omega0 * math.sqrt(1.0 - zeta * zeta)
        return 1.0 / omega0, 1.0 / (zeta * omega0), 2.0 * math.pi / omega_d
    if abs(zeta - 1.0) <= CRITICAL_ZETA_TOL:
        return 1.0 / omega0, 1.0 / omega0, None
    root = omega0 * math.sqrt(zeta * zeta - 1.0)
    s_fast = zeta * omega0 + root
    s_slow = zeta * omega0 - root
    return 1.0 / s_fast, 1.0 / s_slow, None


def _envelope_margin(spec: CircuitSpec) -> float:
    """Extra decay (in units of the slowest time scale) needed so that the
    free response at the horizon is bounded by exp(-20) times the initial
    value.

    The RLC free response is not a bare exponential: the underdamped
    envelope carries a 1/sqrt(1-zeta^2) factor, the repeated-root form grows
    linearly before decaying, and near-critical overdamped responses have
    coefficients ~zeta/sqrt(zeta^2-1).  First-order circuits need no margin.
    """
    if spec.topology is not Topology.SERIES_RLC:
        return 0.0
    zeta = derive_params(spec).zeta
    if zeta < 1.0 - CRITICAL_ZETA_TOL:
        return math.log(1.0 / math.sqrt(1.0 - zeta * zeta)) if zeta > 0 else 0.0
    if abs(zeta - 1.0) <= CRITICAL_ZETA_TOL:
        return 3.5  # (1 + x) * exp(-x) <= exp(-20) needs x >= 23.3
    return math.log(max(1.0, zeta / math.sqrt(zeta * zeta - 1.0)))


def default_grid(spec: CircuitSpec, mode: DriveMode) -> TimeGrid:
    """Grid covering >= 20x the slowest decay (and >= 20 periods when
    oscillatory) at a step of at most 1/1000 of the fastest time scale.

    The horizon is stretched slightly beyond 20 decay times where the free
    response envelope exceeds a bare exponential, so the remaining voltage at
    the horizon is always <= 2.1e-9 of the drive amplitude.
    """
    validate_spec(spec)
    _check_supported(spec, mode)
    fast, slow, period = characteristic_times(spec)
    horizon = (20.0 + _envelope_margin(spec)) * slow
    if period is not None:
        horizon = max(horizon, 20.0 * period)
    if mode.kind is DriveKind.RAMP_CHARGE:
        horizon += mode.ramp_T_s
    dt = fast / 1000.0
    n = int(math.ceil(horizon / dt)) + 1
    return TimeGrid(dt_s=dt, n_samples=n)


def source_voltage(spec: CircuitSpec, mode: DriveMode, t: np.ndarray) -> np.ndarray | None:
    """Source voltage samples, or None in discharge mode."""
    if mode.kind is DriveKind.DISCHARGE:
        return None
    if mode.kind is DriveKind.STEP_CHARGE:
        return np.full_like(t, spec.v0_volt)
    return spec.v0_volt * np.minimum(t / mode.ramp_T_s, 1.0)


def _check_supported(spec: CircuitSpec, mode: DriveMode) -> None:
    if spec.topology is Topology.PARALLEL_RC and mode.kind is not DriveKind.DISCHARGE:
        raise UnsupportedModeError(
            "parallel_rc supports discharge only (no source drives the parallel tank)"
        )


# --- closed forms --------------------------------------------------------------


def _rlc_free(omega0: float, zeta: float, x0: float, xd0: float, t: np.ndarray):
    """Free response of x'' + 2*zeta*omega0*x' + omega0^2*x = 0.

    Returns (x, x') sampled on ``t`` for x(0) = x0, x'(0) = xd0, selecting the
    underdamped, repeated-root, or overdamped form by zeta.
    """
    sigma = zeta * omega0
    if zeta < 1.0 - CRITICAL_ZETA_TOL:
        omega_d = omega0 * math.sqrt(1.0 - zeta * zeta)
        env = np.exp(-sigma * t)
        c = np.cos(omega_d * t)
        s = np.sin(omega_d * t)
        a = x0
        b = (xd0 + sigma * x0) / omega_d
        x = env * (a * c + b * s)
        xd = env * ((b * omega_d - sigma * a) * c - (a * omega_d + sigma * b) * s)
        return x, xd
    if abs(zeta - 1.0) <= CRITICAL_ZETA_TOL:
        env = np.exp(-omega0 * t)
        a = x0
        b = xd0 + omega0 * x0
        x = (a + b * t) * env
        xd = (b - omega0 * (a + b * t)) * env
        return x, xd
    root = omega0 * math.sqrt(zeta * zeta - 1.0)
    s1 = -sigma + root
    s2 = -sigma - root
    c1 = (xd0 - s2 * x0) / (s1 - s2)
    c2 = (s1 * x0 - xd0) / (s1 - s2)
    e1 = np.exp(s1 * t)
    e2 = np.exp(s2 * t)
    x = c1 * e1 + c2 * e2
    xd = c1 * s1 * e1 + c2 * s2 * e2
    return x, xd


def solve_analytic(spec: CircuitSpec, mode: DriveMode, grid: TimeGrid) -> Waveform:
    """Closed-form waveform for any supported (topology, mode) pair."""
    validate_spec(spec)
    _check_supported(spec, mode)
    t = grid.times()
    v0 = spec.v0_volt
    cap = spec.c_farad

    if spec.topology is Topology.PARALLEL_RC:
        tau = derive_params(spec).tau_s
        v = v0 * np.exp(-t / tau)
        i_r = v / spec.r_ohm
        i_rad = v / spec.r_rad_ohm
        i_total = i_r + i_rad
        di = -i_total / tau
        return Waveform(grid, mode, v, i_total, di, i_branch_r=i_r, i_branch_rad=i_rad)

    if spec.topology is Topology.SERIES_RC:
        tau = derive_params(spec).tau_s
        if mode.kind is DriveKind.DISCHARGE:
            decay = np.exp(-t / tau)
            v = v0 * decay
            i = (cap * v0 / tau) * decay
            return Waveform(grid, mode, v, i, -i / tau)
        if mode.kind is DriveKind.STEP_CHARGE:
            decay = np.exp(-t / tau)
            v = v0 * (1.0 - decay)
            i = (cap * v0 / tau) * decay
            return Waveform(grid, mode, v, i, -i / tau)
        big_t = mode.ramp_T_s
        v = np.empty_like(t)
        i = np.empty_like(t)
        di = np.empty_like(t)
        on = t <= big_t
        t1 = t[on]
        e1 = np.exp(-t1 / tau)
        v[on] = (v0 / big_t) * (t1 - tau * (1.0 - e1))
        i[on] = (cap * v0 / big_t) * (1.0 - e1)
        di[on] = (cap * v0 / (big_t * tau)) * e1
        off = ~on
        if np.any(off):
            v_t = (v0 / big_t) * (big_t - tau * (1.0 - math.exp(-big_t / tau)))
            deficit = v_t - v0  # negative: remaining gap to the supply
            e2 = np.exp(-(t[off] - big_t) / tau)
            v[off] = v0 + deficit * e2
            i[off] = -(cap * deficit / tau) * e2
            di[off] = (cap * deficit / (tau * tau)) * e2
        return Waveform(grid, mode, v, i, di)

    # series RLC
    d = derive_params(spec)
    omega0, zeta = d.omega0_rad_s, d.zeta
    sigma = zeta * omega0

    def free_accel(x, xd):
        return -2.0 * sigma * xd - omega0 * omega0 * x

    if mode.kind is DriveKind.DISCHARGE:
        v, vd = _rlc_free(omega0, zeta, v0, 0.0, t)
        i = -cap * vd
        di = -cap * free_accel(v, vd)
        return Waveform(grid, mode, v, i, di)
    if mode.kind is DriveKind.STEP_CHARGE:
        h, hd = _rlc_free(omega0, zeta, -v0, 0.0, t)
        v = v0 + h
        i = cap * hd
        di = cap * free_accel(h, hd)
        return Waveform(grid, mode, v, i, di)

    big_t = mode.ramp_T_s
    slope = v0 / big_t
    lag = 2.0 * zeta / omega0  # equals (R + R_rad) * C
    v = np.empty_like(t)
    i = np.empty_like(t)
    di = np.empty_like(t)
    on = t <= big_t
    t1 = t[on]
    h, hd = _rlc_free(omega0, zeta, slope * lag, -slope, t1)
    v[on] = slope * (t1 - lag) + h
    i[on] = cap * (slope + hd)
    di[on] = cap * free_accel(h, hd)
    off = ~on
    if np.any(off):
        h_t, hd_t = _rlc_free(omega0, zeta, slope * lag, -slope, np.array([big_t]))
        v_t = slope * (big_t - lag) + float(h_t[0])
        vd_t = slope + float(hd_t[0])
        h2, h2d = _rlc_free(omega0, zeta, v_t - v0, vd_t, t[off] - big_t)
        v[off] = v0 + h2
        i[off] = cap * h2d
        di[off] = cap * free_accel(h2, h2d)
    return Waveform(grid, mode, v, i, di)


# --- fixed-step RK4 -------------------------------------------------------------


@njit(cache=True)
def _drive_value(kind: int, v_drive: float, ramp_t: float, t: float) -> float:
    # kind: 0 none, 1 step, 2 ramp
    if kind == 0:
        return 0.0
    if kind == 1:
        return v_drive
    if t < ramp_t:
        return v_drive * t / ramp_t
    return v_drive


@njit(cache=True)
def _rk4_first_order(v_init, tau, kind, v_drive, ramp_t, dt, n):
    # dv/dt = (s(t) - v) / tau
    v = np.empty(n)
    v[0] = v_init
    for k in range(n - 1):
        t = k * dt
        x = v[k]
        s0 = _drive_value(kind, v_drive, ramp_t, t)
        sh = _drive_value(kind, v_drive, ramp_t, t + 0.5 * dt)
        s1 = _drive_value(kind, v_drive, ramp_t, t + dt)
        k1 = (s0 - x) / tau
        k2 = (sh - (x + 0.5 * dt * k1)) / tau
        k3 = (sh - (x + 0.5 * dt * k2)) / tau
        k4 = (s1 - (x + dt * k3)) / tau
        v[k + 1] = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return v


@njit(cache=True)
def _rk4_rlc(q_init, i_init, el, r_total, cap, kind, v_drive, ramp_t, dt, n):
    # State (q, i): dq/dt = i, di/dt = (s(t) - q/C - R_total*i) / L
    # with i the current flowing into the capacitor.
    q = np.empty(n)
    cur = np.empty(n)
    q[0] = q_init
    cur[0] = i_init
    for k in range(n - 1):
        t = k * dt
        qa = q[k]
        ia = cur[k]
        s0 = _drive_value(kind, v_drive, ramp_t, t)
        sh = _drive_value(kind, v_drive, ramp_t, t + 0.5 * dt)
        s1 = _drive_value(kind, v_drive, ramp_t, t + dt)
        k1q = ia
        k1i = (s0 - qa / cap - r_total * ia) / el
        q2 = qa + 0.5 * dt * k1q
        i2 = ia + 0.5 * dt * k1i
        k2q = i2
        k2i = (sh - q2 / cap - r_total * i2) / el
        q3 = qa + 0.5 * dt * k2q
        i3 = ia + 0.5 * dt * k2i
        k3q = i3
        k3i = (sh - q3 / cap - r_total * i3) / el
        q4 = qa + dt * k3q
        i4 = ia + dt * k3i
        k4q = i4
        k4i = (s1 - q4 / cap - r_total * i4) / el
        q[k + 1] = qa + (dt / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        cur[k + 1] = ia + (dt / 6.0) * (k1i + 2.0 * k2i + 2.0 * k3i + k4i)
    return q, cur


_KIND_CODE = {
    DriveKind.DISCHARGE: 0,
    DriveKind.STEP_CHARGE: 1,
    DriveKind.RAMP_CHARGE: 2,
}


def solve_numeric(spec: CircuitSpec, mode: DriveMode, grid: TimeGrid) -> Waveform:
    """Fixed-step RK4 integration of the state equations.

    Refuses to integrate when ``grid.dt_s`` exceeds a tenth of the fastest
    time scale (results would be silently inaccurate).  Currents and their
    derivatives are recovered from the state equations, not by differencing.
    """
    validate_spec(spec)
    _check_supported(spec, mode)
    fast, _, _ = characteristic_times(spec)
    if grid.dt_s > fast / 10.0:
        raise StabilityError(
            f"dt_s={grid.dt_s:.6g} s exceeds a tenth of the fastest time scale "
            f"({fast:.6g} s); use dt_s <= {fast / 10.0:.6g} s",
            residual=grid.dt_s / fast,
        )

    t = grid.times()
    kind = _KIND_CODE[mode.kind]
    ramp_t = mode.ramp_T_s if mode.ramp_T_s is not None else 0.0
    v_drive = spec.v0_volt if kind != 0 else 0.0
    cap = spec.c_farad
    charging = kind != 0

    if spec.topology is Topology.SERIES_RLC:
        q0 = cap * spec.v0_volt if not charging else 0.0
        q, cur = _rk4_rlc(
            q0, 0.0, spec.l_henry, spec.r_ohm + spec.r_rad_ohm, cap,
            kind, v_drive, ramp_t, grid.dt_s, grid.n_samples,
        )
        v = q / cap
        src = source_voltage(spec, mode, t)
        forcing = src if src is not None else 0.0
        didt_cap = (forcing - v - (spec.r_ohm + spec.r_rad_ohm) * cur) / spec.l_henry
        sign = 1.0 if charging else -1.0
        return Waveform(grid, mode, v, sign * cur, sign * didt_cap, method="numeric")

    d = derive_params(spec)
    tau = d.tau_s
    v_init = spec.v0_volt if not charging else 0.0
    v = _rk4_first_order(v_init, tau, kind, v_drive, ramp_t, grid.dt_s, grid.n_samples)

    if spec.topology is Topology.PARALLEL_RC:
        i_r = v / spec.r_ohm
        i_rad = v / spec.r_rad_ohm
        i_total = i_r + i_rad
        di = -i_total / tau
        return Waveform(grid, mode, v, i_total, di, i_branch_r=i_r, i_branch_rad=i_rad,
                        method="numeric")

    src = source_voltage(spec, mode, t)
    forcing = src if src is not None else np.zeros_like(t)
    vdot = (forcing - v) / tau
    if mode.kind is DriveKind.RAMP_CHARGE:
        sdot = np.where(t <= mode.ramp_T_s, spec.v0_volt / mode.ramp_T_s, 0.0)
    else:
        sdot = 0.0
    vddot = (sdot - vdot) / tau
    sign = 1.0 if charging else -1.0
    return Waveform(grid, mode, v, sign * cap * vdot, sign * cap * vddot, method="numeric")


# --- CSV export -----------------------------------------------------------------


def waveform_to_csv(w: Waveform) -> str:
    """CSV text with full double precision (17 significant digits)."""
    parallel = w.i_branch_r is not None
    if parallel:
        header = "t_s,v_cap_V,i_total_A,i_r_A,i_rad_A,di_dt_A_per_s"
        cols = (w.times(), w.v_cap, w.i_total, w.i_branch_r, w.i_branch_rad, w.di_dt)
    else:
        header = "t_s,v_cap_V,i_total_A,di_dt_A_per_s"
        cols = (w.times(), w.v_cap, w.i_total, w.di_dt)
    lines = [header]
    for row in zip(*cols):
        lines.append(",".join("%.17g" % x for x in row))
    return "\n".join(lines) + "\n"
