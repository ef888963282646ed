"""Synthetic EM trace sets for a one-byte first-round AES workload.

A trace models the EM amplitude a near-field probe would pick up while the
device computes ``SBox(plaintext ^ key)``.  The radiated pulse of one
switching event is the normalized |dI/dt| of a reference series RC step
transition, so trace morphology inherits the circuit physics; the pulse is
scaled by the Hamming weight of the intermediate (each set bit is one load
capacitor charging) and buried in Gaussian noise:

    trace = beta + alpha_eff * HW(SBox(pt ^ key)) * pulse@poi + N(0, sigma)

With the adiabatic countermeasure active (``countermeasure_T_s``), the step
transition is replaced by a ramp of length T and the pulse amplitude shrinks
by (T_ref / T)^2 under the current-acceleration radiation law (radiation goes
as 1/T^2); the resistance law with a 1/T falloff is available behind the
``attenuation_law`` flag.

All randomness flows from one 64-bit seed through per-unit substreams
(:func:`emleak.rng.derive_stream`): trace i of a plain set uses stream
``(seed, i)``; trace i of grid cell k uses ``(seed, k, i)``.  Stream draw
order per trace: the plaintext byte (random mode only, exhaustive mode draws
none), the interference byte (grid cells only), then one Gaussian per sample
in ascending sample order.  Results are therefore bit-identical for any
execution order or thread count.

Binary trace-set format ``EMLK`` (all little-endian):

    offset  size  field
    0       4     magic b"EMLK"
    4       2     version, u16 (currently 1)
    6       4     n_traces, u32
    10      4     n_samples, u32
    14      4     poi_index, u32
    18      8     seed, u64
    26      1     true key byte, u8
    27      64    8 x f64: alpha, beta, sigma, t_ref_s,
                  countermeasure_T_s (0 = none), attenuation exponent
                  (2 = acceleration law, 1 = resistance law), reserved, reserved
    91      n     plaintext bytes, u8 each
    91+n    4*n*m trace samples, f32 row-major (trace-major)

The pulse shape is not serialized; traces already embody it, and analysis
never needs it.  A read-back set carries ``pulse=None``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .circuit import CircuitSpec, Topology, derive_params
from .errors import SpecValidationError
from ._parallel import parallel_map
from .rng import Rng, derive_stream

# FIPS-197 AES substitution table.
SBOX = np.array([
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
], dtype=np.uint8)

HAMMING_WEIGHT = np.array([bin(b).count("1") for b in range(256)], dtype=np.uint8)


def sbox_intermediate(pt_byte: int, key_byte: int) -> int:
    """First-round intermediate SBox(pt ^ key)."""
    return int(SBOX[(pt_byte ^ key_byte) & 0xFF])


def hamming_weight(byte: int) -> int:
    """Number of set bits, 0..8."""
    return int(HAMMING_WEIGHT[byte & 0xFF])


# --- reference transition ---------------------------------------------------------

#: Series RC stage the pulse shape and T_ref are derived from.
REFERENCE_SPEC = CircuitSpec(
    topology=Topology.SERIES_RC,
    r_ohm=50.0,
    c_farad=1e-9,
    r_rad_ohm=5.0,
    v0_volt=1.0,
)

#: Effective transition time of the reference step: its time constant.
T_REF_S = derive_params(REFERENCE_SPEC).tau_s


def default_pulse() -> np.ndarray:
    """Normalized |dI/dt| of the reference step transition, 7 samples.

    |dI/dt| of a step is a one-sided exponential peaking at the switching
    instant.  Sampled one time constant apart with three silent pre-switch
    samples, giving a unit-peak pulse with the peak at index 3.
    """
    tail = np.exp(-np.arange(4.0))
    return np.concatenate([np.zeros(3), tail])


_ATTENUATION_EXPONENT = {"acceleration": 2.0, "resistance": 1.0}


@dataclass(eq=False)
class LeakageParams:
    """Leakage model parameters.

    alpha:  volts per switched bit (scales the radiated pulse)
    beta:   constant baseline voltage
    sigma:  additive Gaussian noise standard deviation
    pulse:  unit-peak pulse shape; None means "use default_pulse()"
            (trace files do not record the shape)
    countermeasure_T_s: adiabatic ramp time replacing the reference step
    t_ref_s: effective transition time of the uncountered reference step
    attenuation_law: "acceleration" (amplitude x (T_ref/T)^2) or
            "resistance" (x (T_ref/T))
    """

    alpha: float
    beta: float = 0.0
    sigma: float = 0.0
    pulse: np.ndarray | None = None
    countermeasure_T_s: float | None = None
    t_ref_s: float = T_REF_S
    attenuation_law: str = "acceleration"

    def __post_init__(self):
        errors = []
        if self.alpha < 0.0:
            errors.append("alpha must be >= 0")
        if self.sigma < 0.0:
            errors.append("sigma must be >= 0")
        if self.pulse is not None:
            self.pulse = np.asarray(self.pulse, dtype=float)
            if self.pulse.ndim != 1 or self.pulse.size == 0:
                errors.append("pulse must be a non-empty 1-D array")
            elif float(np.max(self.pulse)) != 1.0:
                errors.append("pulse peak must be exactly 1")
        if not self.t_ref_s > 0.0:
            errors.append("t_ref_s must be positive")
        if self.countermeasure_T_s is not None and not self.countermeasure_T_s > 0.0:
            errors.append("countermeasure_T_s must be positive")
        if self.attenuation_law not in _ATTENUATION_EXPONENT:
            errors.append(
                f"attenuation_law must be one of {sorted(_ATTENUATION_EXPONENT)}"
            )
        if errors:
            raise SpecValidationError(errors)

    def attenuation(self) -> float:
        """Amplitude attenuation factor of the countermeasure (1.0 when off)."""
        if self.countermeasure_T_s is None:
            return 1.0
        exponent = _ATTENUATION_EXPONENT[self.attenuation_law]
        return (self.t_ref_s / self.countermeasure_T_s) ** exponent

    def effective_alpha(self) -> float:
        return self.alpha * self.attenuation()

    def resolved_pulse(self) -> np.ndarray:
        return self.pulse if self.pulse is not None else default_pulse()


class Trace(NamedTuple):
    samples: np.ndarray
    plaintext_byte: int


@dataclass(eq=False)
class TraceSet:
    """A matrix of traces plus everything needed to reproduce it."""

    samples: np.ndarray  # (n_traces, n_samples) float32
    plaintexts: np.ndarray  # (n_traces,) uint8
    true_key_byte: int
    leakage: LeakageParams
    seed: int
    poi_index: int

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    def trace(self, i: int) -> Trace:
        return Trace(self.samples[i], int(self.plaintexts[i]))


def _place_pulse(pulse: np.ndarray, poi_index: int, n_samples: int) -> np.ndarray:
    peak = int(np.argmax(pulse))
    start = poi_index - peak
    if start < 0 or start + pulse.size > n_samples:
        raise SpecValidationError(
            f"pulse (len {pulse.size}, peak {peak}) does not fit at poi {poi_index} "
            f"in {n_samples} samples"
        )
    placed = np.zeros(n_samples)
    placed[start : start + pulse.size] = pulse
    return placed


def _plaintext(i: int, n: int, stream: Rng) -> int:
    # Exhaustive 0..255 cycling when n is a multiple of 256 (all leakage
    # classes populated with exact counts); uniform random otherwise.
    # Exhaustive mode consumes no RNG draws.
    if n % 256 == 0:
        return i % 256
    return stream.next_byte()


def synth_traceset(
    n: int,
    key_byte: int,
    params: LeakageParams,
    seed: int,
    n_samples: int = 32,
    poi_index: int = 16,
) -> TraceSet:
    """Synthesize ``n`` traces leaking HW(SBox(pt ^ key)) at ``poi_index``."""
    if n < 1:
        raise SpecValidationError("n must be >= 1")
    if not 0 <= key_byte <= 255:
        raise SpecValidationError("key_byte must be in 0..255")
    pulse = _place_pulse(params.resolved_pulse(), poi_index, n_samples)
    alpha_eff = params.effective_alpha()

    samples = np.empty((n, n_samples))
    plaintexts = np.empty(n, dtype=np.uint8)
    for i in range(n):
        stream = Rng(derive_stream(seed, i))
        pt = _plaintext(i, n, stream)
        plaintexts[i] = pt
        hw = hamming_weight(sbox_intermediate(pt, key_byte))
        row = params.beta + alpha_eff * hw * pulse
        if params.sigma > 0.0:
            row = row + params.sigma * stream.gaussians(n_samples)
        samples[i] = row
    return TraceSet(
        samples=samples.astype(np.float32),
        plaintexts=plaintexts,
        true_key_byte=key_byte,
        leakage=params,
        seed=seed,
        poi_index=poi_index,
    )


# --- spatial grid ------------------------------------------------------------------


@dataclass(eq=False)
class GridSpec:
    """Per-cell gains of a scan grid.

    ``g_signal`` scales the key-dependent crypto signal, ``g_interference``
    scales key-independent activity with the same pulse shape, and ``sigma``
    is the per-cell noise floor.  All three are (rows, cols) arrays.
    """

    g_signal: np.ndarray
    g_interference: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        self.g_signal = np.asarray(self.g_signal, dtype=float)
        self.g_interference = np.asarray(self.g_interference, dtype=float)
        self.sigma = np.asarray(self.sigma, dtype=float)
        errors = []
        if self.g_signal.ndim != 2 or self.g_signal.size == 0:
            errors.append("g_signal must be a non-empty 2-D array")
        if self.g_interference.shape != self.g_signal.shape:
            errors.append("g_interference shape must match g_signal")
        if self.sigma.shape != self.g_signal.shape:
            errors.append("sigma shape must match g_signal")
        if not errors:
            if np.any(self.g_signal < 0) or np.any(self.g_interference < 0):
                errors.append("gains must be >= 0")
            if np.any(self.sigma < 0):
                errors.append("sigma must be >= 0")
        if errors:
            raise SpecValidationError(errors)

    @property
    def rows(self) -> int:
        return self.g_signal.shape[0]

    @property
    def cols(self) -> int:
        return self.g_signal.shape[1]


@dataclass(eq=False)
class GridTraceSets:
    grid: GridSpec
    cells: list  # rows x cols nested lists of TraceSet

    def cell(self, row: int, col: int) -> TraceSet:
        return self.cells[row][col]


def _synth_cell(
    grid: GridSpec,
    cell_index: int,
    base: LeakageParams,
    n: int,
    key_byte: int,
    seed: int,
    n_samples: int,
    poi_index: int,
) -> TraceSet:
    row, col = divmod(cell_index, grid.cols)
    g_s = float(grid.g_signal[row, col])
    g_i = float(grid.g_interference[row, col])
    sigma = float(grid.sigma[row, col])
    pulse = _place_pulse(base.resolved_pulse(), poi_index, n_samples)
    alpha_eff = base.effective_alpha()

    samples = np.empty((n, n_samples))
    plaintexts = np.empty(n, dtype=np.uint8)
    for i in range(n):
        stream = Rng(derive_stream(seed, cell_index, i))
        pt = _plaintext(i, n, stream)
        plaintexts[i] = pt
        hw = hamming_weight(sbox_intermediate(pt, key_byte))
        hw_interf = hamming_weight(stream.next_byte())
        row_v = base.beta + (g_s * alpha_eff * hw + g_i * base.alpha * hw_interf) * pulse
        if sigma > 0.0:
            row_v = row_v + sigma * stream.gaussians(n_samples)
        samples[i] = row_v
    cell_leakage = replace_leakage(base, sigma=sigma)
    return TraceSet(
        samples=samples.astype(np.float32),
        plaintexts=plaintexts,
        true_key_byte=key_byte,
        leakage=cell_leakage,
        seed=seed,
        poi_index=poi_index,
    )


def replace_leakage(params: LeakageParams, **changes) -> LeakageParams:
    """Dataclass ``replace`` that revalidates."""
    return replace(params, **changes)


def grid_traceset(
    grid: GridSpec,
    base: LeakageParams,
    n: int,
    key_byte: int,
    seed: int,
    n_samples: int = 32,
    poi_index: int = 16,
    threads: int | None = None,
) -> GridTraceSets:
    """Per-cell trace sets for every cell of the grid.

    Each cell derives its own RNG streams from (seed, cell_index, trace
    index); cells are independent work units and synthesize in parallel with
    identical results for any thread count.
    """
    if n < 1:
        raise SpecValidationError("n must be >= 1")

    def work(cell_index: int) -> TraceSet:
        return _synth_cell(grid, cell_index, base, n, key_byte, seed, n_samples, poi_index)

    flat = parallel_map(work, range(grid.rows * grid.cols), threads)
    cells = [flat[r * grid.cols : (r + 1) * grid.cols] for r in range(grid.rows)]
    return GridTraceSets(grid=grid, cells=cells)


#: Canonical parameters of the committed demo run (seed chosen once for
#: stable rank statistics; the grid itself works with any seed).
FIG2_DEMO_SEED = 2
FIG2_DEMO_N = 1280
FIG2_DEMO_CHECKPOINTS = [8, 10, 12, 16, 20, 24, 32, 40, 48, 64, 80, 96, 128,
                         160, 192, 256, 320, 384, 512, 640, 768, 1024, 1280]
FIG2_DEMO_WINDOW = 3


def fig2_demo_grid() -> GridSpec:
    """Fixed 5x5 demo grid exhibiting amplitude/SNR decorrelation.

    Synthetic, not measured.  The signal-gain bump (a "crypto block" near the
    top right) and the much stronger interference bump (unrelated activity
    below it) overlap, so raw amplitude ranks cells very differently from
    leakage SNR, while every cell still discloses the key within
    FIG2_DEMO_N traces.  Values were tuned once and are frozen; tests pin the
    resulting rank statistics.
    """
    g_signal = np.array(
        [
            [0.392, 0.551, 0.833, 1.079, 1.064],
            [0.409, 0.612, 0.968, 1.278, 1.260],
            [0.394, 0.564, 0.863, 1.122, 1.106],
            [0.363, 0.456, 0.621, 0.764, 0.756],
            [0.339, 0.373, 0.432, 0.485, 0.482],
        ]
    )
    g_interference = np.array(
        [
            [0.650, 0.661, 0.695, 0.736, 0.737],
            [0.658, 0.711, 0.873, 1.074, 1.081],
            [0.673, 0.812, 1.232, 1.756, 1.773],
            [0.682, 0.876, 1.458, 2.187, 2.210],
            [0.674, 0.818, 1.249, 1.791, 1.808],
        ]
    )
    sigma = np.full((5, 5), 0.9)
    return GridSpec(g_signal=g_signal, g_interference=g_interference, sigma=sigma)


# --- binary and CSV I/O -------------------------------------------------------------

_MAGIC = b"EMLK"
_VERSION = 1
_HEADER = struct.Struct("<4sHIIIQB8d")


def write_traceset(ts: TraceSet, path: str | Path) -> None:
    """Write the EMLK binary format (see module docstring)."""
    params = ts.leakage
    exponent = _ATTENUATION_EXPONENT[params.attenuation_law]
    header = _HEADER.pack(
        _MAGIC,
        _VERSION,
        len(ts),
        ts.n_samples,
        ts.poi_index,
        ts.seed & 0xFFFFFFFFFFFFFFFF,
        ts.true_key_byte,
        params.alpha,
        params.beta,
        params.sigma,
        params.t_ref_s,
        params.countermeasure_T_s if params.countermeasure_T_s is not None else 0.0,
        exponent,
        0.0,
        0.0,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(ts.plaintexts.astype("<u1").tobytes())
        fh.write(ts.samples.astype("<f4").tobytes())


def read_traceset(path: str | Path) -> TraceSet:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SpecValidationError(f"{path}: truncated trace file")
    (magic, version, n, m, poi, seed, key, alpha, beta, sigma, t_ref, cm_t,
     exponent, _r0, _r1) = _HEADER.unpack_from(raw, 0)
    if magic != _MAGIC:
        raise SpecValidationError(f"{path}: bad magic {magic!r}, expected {_MAGIC!r}")
    if version != _VERSION:
        raise SpecValidationError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + n + 4 * n * m
    if len(raw) != expected:
        raise SpecValidationError(
            f"{path}: size mismatch, expected {expected} bytes, got {len(raw)}"
        )
    law = {2.0: "acceleration", 1.0: "resistance"}.get(exponent)
    if law is None:
        raise SpecValidationError(f"{path}: unknown attenuation exponent {exponent}")
    plaintexts = np.frombuffer(raw, dtype="<u1", count=n, offset=_HEADER.size).copy()
    samples = (
        np.frombuffer(raw, dtype="<f4", count=n * m, offset=_HEADER.size + n)
        .reshape(n, m)
        .copy()
    )
    params = LeakageParams(
        alpha=alpha,
        beta=beta,
        sigma=sigma,
        pulse=None,
        countermeasure_T_s=cm_t if cm_t > 0.0 else None,
        t_ref_s=t_ref,
        attenuation_law=law,
    )
    return TraceSet(
        samples=samples,
        plaintexts=plaintexts,
        true_key_byte=key,
        leakage=params,
        seed=seed,
        poi_index=poi,
    )


def traceset_to_csv(ts: TraceSet) -> str:
    """CSV mirror of the binary format.

    Metadata rides in ``# key=value`` comment lines; samples are printed with
    9 significant digits, which round-trips float32 exactly.
    """
    p = ts.leakage
    cm = p.countermeasure_T_s if p.countermeasure_T_s is not None else 0.0
    lines = [
        "# emlk_csv=1",
        f"# n_traces={len(ts)} n_samples={ts.n_samples} poi={ts.poi_index}",
        f"# seed={ts.seed} key=0x{ts.true_key_byte:02x}",
        f"# alpha={p.alpha:.17g} beta={p.beta:.17g} sigma={p.sigma:.17g}",
        f"# t_ref_s={p.t_ref_s:.17g} countermeasure_T_s={cm:.17g} law={p.attenuation_law}",
        "plaintext," + ",".join(f"s{j}" for j in range(ts.n_samples)),
    ]
    for i in range(len(ts)):
        row = ",".join("%.9g" % x for x in ts.samples[i])
        lines.append(f"{int(ts.plaintexts[i])},{row}")
    return "\n".join(lines) + "\n"
