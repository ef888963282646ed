"""Circuit specifications, validation, and derived small-signal parameters.

Supported lumped models of a switching output stage:

* series RC: ohmic resistance R and radiation resistance R_rad in one loop
  with the load capacitor,
* parallel RC: the capacitor discharges through two parallel branches, a
  conductive one (R) and a radiative one (R_rad),
* series RLC: loop inductance L added to the series path.

The radiation resistance is the equivalent lumped resistance whose dissipated
power equals the power radiated as EM waves; for a short dipole of effective
current path length l at wavelength lambda it is 80*pi^2*(l/lambda)^2.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from .errors import SpecValidationError

C_LIGHT_M_S = 299_792_458.0  # exact SI value

#: l/lambda above which the short-dipole formula loses accuracy.
SHORT_DIPOLE_LIMIT = 0.1


class Topology(Enum):
    SERIES_RC = "series_rc"
    PARALLEL_RC = "parallel_rc"
    SERIES_RLC = "series_rlc"


class RadiationOverrideWarning(UserWarning):
    """A directly given radiation resistance overrides geometry-derived one."""


@dataclass(frozen=True)
class RadiationGeometry:
    """Radiator geometry: effective current path length and switching frequency."""

    path_length_m: float
    frequency_hz: float

    @property
    def wavelength_m(self) -> float:
        return C_LIGHT_M_S / self.frequency_hz

    @property
    def length_over_wavelength(self) -> float:
        return self.path_length_m / self.wavelength_m

    @property
    def short_dipole_valid(self) -> bool:
        """False when l/lambda exceeds the short-dipole validity limit.

        Computation proceeds either way; this flag only marks degraded
        formula accuracy.
        """
        return self.length_over_wavelength <= SHORT_DIPOLE_LIMIT


def validate_geometry(geom: RadiationGeometry) -> RadiationGeometry:
    errors = []
    if not geom.path_length_m >= 0.0:
        errors.append("path_length_m must be >= 0")
    if not geom.frequency_hz > 0.0:
        errors.append("frequency_hz must be positive")
    if errors:
        raise SpecValidationError(errors)
    return geom


def radiation_resistance(geom: RadiationGeometry) -> float:
    """Short-dipole radiation resistance 80*pi^2*(l/lambda)^2 in ohms."""
    validate_geometry(geom)
    ratio = geom.path_length_m * geom.frequency_hz / C_LIGHT_M_S
    return 80.0 * math.pi**2 * ratio * ratio


@dataclass(frozen=True)
class CircuitSpec:
    """Element values of one lumped circuit.

    ``v0_volt`` is the initial capacitor voltage in discharge mode and the
    supply voltage in charge modes.  ``l_henry`` must be present exactly for
    the series RLC topology.  ``geometry`` records the radiator geometry when
    the radiation resistance was derived from it; it carries no further
    physics.
    """

    topology: Topology
    r_ohm: float
    c_farad: float
    r_rad_ohm: float
    v0_volt: float
    l_henry: float | None = None
    geometry: RadiationGeometry | None = None

    def with_r(self, r_ohm: float) -> "CircuitSpec":
        return replace(self, r_ohm=r_ohm)


def validate_spec(spec: CircuitSpec) -> CircuitSpec:
    """Return ``spec`` unchanged if valid, else raise with every violation."""
    errors = []
    if not isinstance(spec.topology, Topology):
        errors.append(f"unknown topology {spec.topology!r}")
        raise SpecValidationError(errors)
    if not spec.c_farad > 0.0:
        errors.append("capacitance must be positive")
    if not spec.v0_volt > 0.0:
        errors.append("v0_volt must be positive")
    if spec.r_ohm < 0.0:
        errors.append("r_ohm must be >= 0")
    if spec.r_rad_ohm < 0.0:
        errors.append("r_rad_ohm must be >= 0")
    if spec.r_ohm >= 0.0 and spec.r_rad_ohm >= 0.0 and spec.r_ohm + spec.r_rad_ohm <= 0.0:
        errors.append("r_ohm + r_rad_ohm must be positive")
    if spec.topology is Topology.SERIES_RLC:
        if spec.l_henry is None:
            errors.append("l_henry is required for series_rlc topology")
        elif not spec.l_henry > 0.0:
            errors.append("l_henry must be positive")
    elif spec.l_henry is not None:
        errors.append(f"l_henry is only valid for series_rlc, not {spec.topology.value}")
    if spec.topology is Topology.PARALLEL_RC:
        if not spec.r_ohm > 0.0:
            errors.append("parallel_rc requires r_ohm > 0 (conductive branch must conduct)")
        if not spec.r_rad_ohm > 0.0:
            errors.append("parallel_rc requires r_rad_ohm > 0 (radiative branch must conduct)")
    if errors:
        raise SpecValidationError(errors)
    return spec


@dataclass(frozen=True)
class DerivedParams:
    """Derived small-signal parameters; fields inapplicable to the topology are None.

    * series RC:   tau_s = (R + R_rad) * C
    * parallel RC: r_parallel_ohm = (1/R + 1/R_rad)^-1, tau_s = R_p * C
    * series RLC:  omega0_rad_s = 1/sqrt(L*C), zeta = ((R + R_rad)/2) * sqrt(C/L)
    """

    tau_s: float | None = None
    omega0_rad_s: float | None = None
    zeta: float | None = None
    r_parallel_ohm: float | None = None


def derive_params(spec: CircuitSpec) -> DerivedParams:
    validate_spec(spec)
    if spec.topology is Topology.SERIES_RC:
        return DerivedParams(tau_s=(spec.r_ohm + spec.r_rad_ohm) * spec.c_farad)
    if spec.topology is Topology.PARALLEL_RC:
        r_p = 1.0 / (1.0 / spec.r_ohm + 1.0 / spec.r_rad_ohm)
        return DerivedParams(tau_s=r_p * spec.c_farad, r_parallel_ohm=r_p)
    omega0 = 1.0 / math.sqrt(spec.l_henry * spec.c_farad)
    zeta = 0.5 * (spec.r_ohm + spec.r_rad_ohm) * math.sqrt(spec.c_farad / spec.l_henry)
    return DerivedParams(omega0_rad_s=omega0, zeta=zeta)


# --- plain-text / JSON config -------------------------------------------------

_SPEC_KEYS = frozenset(
    {
        "topology",
        "r_ohm",
        "l_henry",
        "c_farad",
        "r_rad_ohm",
        "v0_volt",
        "path_length_m",
        "frequency_hz",
    }
)

_TOPOLOGY_TOKENS = {t.value: t for t in Topology}


def spec_from_mapping(data: dict) -> CircuitSpec:
    """Build and validate a spec from config keys.

    The radiation resistance may be given directly (``r_rad_ohm``) or derived
    from geometry (``path_length_m`` + ``frequency_hz``).  When both are
    present the direct value wins and a :class:`RadiationOverrideWarning` is
    emitted.  A missing ``r_rad_ohm`` with no geometry defaults to 0.
    """
    errors = []
    unknown = sorted(set(data) - _SPEC_KEYS)
    if unknown:
        errors.append(f"unknown config keys: {', '.join(unknown)}")

    token = data.get("topology")
    topology = _TOPOLOGY_TOKENS.get(str(token).strip().lower()) if token is not None else None
    if topology is None:
        valid = ", ".join(sorted(_TOPOLOGY_TOKENS))
        errors.append(f"topology must be one of {valid} (got {token!r})")

    def fnum(key):
        if key not in data:
            return None
        try:
            return float(data[key])
        except (TypeError, ValueError):
            errors.append(f"{key} must be a number (got {data[key]!r})")
            return None

    r_ohm = fnum("r_ohm")
    l_henry = fnum("l_henry")
    c_farad = fnum("c_farad")
    r_rad = fnum("r_rad_ohm")
    v0 = fnum("v0_volt")
    path_length = fnum("path_length_m")
    frequency = fnum("frequency_hz")

    for key, val in (("r_ohm", r_ohm), ("c_farad", c_farad), ("v0_volt", v0)):
        if key not in data:
            errors.append(f"missing required key {key}")

    geometry = None
    if path_length is not None or frequency is not None:
        if path_length is None or frequency is None:
            errors.append("path_length_m and frequency_hz must be given together")
        else:
            geometry = RadiationGeometry(path_length_m=path_length, frequency_hz=frequency)

    if errors:
        raise SpecValidationError(errors)

    if geometry is not None:
        derived_r_rad = radiation_resistance(geometry)
        if r_rad is not None:
            warnings.warn(
                f"r_rad_ohm={r_rad} given directly; ignoring geometry-derived "
                f"value {derived_r_rad:.6g}",
                RadiationOverrideWarning,
                stacklevel=2,
            )
        else:
            r_rad = derived_r_rad
    if r_rad is None:
        r_rad = 0.0

    spec = CircuitSpec(
        topology=topology,
        r_ohm=r_ohm,
        c_farad=c_farad,
        r_rad_ohm=r_rad,
        v0_volt=v0,
        l_henry=l_henry,
        geometry=geometry,
    )
    return validate_spec(spec)


def parse_spec_text(text: str) -> CircuitSpec:
    """Parse the ``key = value`` config format (``#`` starts a comment)."""
    data = {}
    errors = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in data:
            errors.append(f"line {lineno}: duplicate key {key}")
            continue
        data[key] = value
    if errors:
        raise SpecValidationError(errors)
    return spec_from_mapping(data)


def load_spec(path: str | Path) -> CircuitSpec:
    """Load a spec from a plain-text config file, or JSON with the same keys."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecValidationError([f"invalid JSON spec: {exc}"]) from exc
        if not isinstance(data, dict):
            raise SpecValidationError(["JSON spec must be an object"])
        return spec_from_mapping(data)
    return parse_spec_text(text)


def spec_to_mapping(spec: CircuitSpec) -> dict:
    """Plain-dict form of a spec (for JSON metadata)."""
    out = {
        "topology": spec.topology.value,
        "r_ohm": spec.r_ohm,
        "c_farad": spec.c_farad,
        "r_rad_ohm": spec.r_rad_ohm,
        "v0_volt": spec.v0_volt,
    }
    if spec.l_henry is not None:
        out["l_henry"] = spec.l_henry
    if spec.geometry is not None:
        out["path_length_m"] = spec.geometry.path_length_m
        out["frequency_hz"] = spec.geometry.frequency_hz
    return out
