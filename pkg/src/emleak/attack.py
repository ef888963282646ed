"""Correlation key recovery, side-channel SNR, and traces-to-disclosure.

Key recovery correlates traces against the Hamming-weight-of-SBox-output
leakage model for each of the 256 key guesses (Pearson r per sample, guess
scored by max |r| over samples, ties broken toward the smaller guess value).

Correlations are computed from one-pass accumulators (sums of x, y, x^2, y^2,
xy) added in ascending trace order, so scores at every checkpoint fall out of
one cumulative pass and any two implementations that follow the same order
agree bit for bit; :func:`cpa_bruteforce` is exactly that reference, a naive
O(guesses * traces * samples) re-computation used as an oracle.

Conventions, fixed so results are reproducible:

* a zero-variance trace column or model column yields correlation 0 for the
  affected (guess, sample) cells; "zero" means the centered sum of squares is
  at most 1e-12 of the uncentered one (guards catastrophic cancellation on
  constant-plus-rounding columns),
* |r| is clamped to 1.0 (roundoff can land a hair above),
* SNR per sample is the variance of the leakage-class means over the mean
  within-class variance, using classes with at least two traces; zero noise
  reports +inf where the signal variance is positive, else 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientClassesError, SpecValidationError
from .tracegen import HAMMING_WEIGHT, SBOX, GridTraceSets, TraceSet

#: Centered-over-uncentered sum-of-squares ratio below which a column is
#: treated as constant (correlation 0).
_VAR_EPS = 1e-12


@dataclass(frozen=True)
class AttackResult:
    """Per-guess |r| trajectories over trace-count checkpoints.

    ``corr`` has shape (256, len(checkpoints)); ``ranking`` is the guess
    permutation sorted by final score (descending, ties by ascending guess).
    """

    checkpoints: list[int]
    corr: np.ndarray
    ranking: np.ndarray
    recovered_key: int
    true_key: int
    success: bool


@dataclass(frozen=True)
class SnrReport:
    per_sample: np.ndarray
    poi_index: int
    poi_snr: float
    class_counts: dict[int, int]


@dataclass(frozen=True)
class MtdResult:
    """Smallest checkpoint from which the true key stays rank 1 for
    ``window`` consecutive checkpoints; None when never disclosed."""

    mtd: int | None
    checkpoints: list[int]
    window: int
    true_key_ranks: list[int]

    @property
    def disclosed(self) -> bool:
        return self.mtd is not None


def model_matrix(plaintexts: np.ndarray) -> np.ndarray:
    """(256, n_traces) float64 matrix of HW(SBox(pt ^ guess))."""
    pts = np.asarray(plaintexts, dtype=np.uint8)
    guesses = np.arange(256, dtype=np.uint8)[:, None]
    return HAMMING_WEIGHT[SBOX[np.bitwise_xor(guesses, pts[None, :])]].astype(np.float64)


def _check_checkpoints(checkpoints, n_available: int) -> list[int]:
    cps = [int(c) for c in checkpoints]
    if not cps:
        raise SpecValidationError("checkpoints must be non-empty")
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise SpecValidationError("checkpoints must be strictly increasing")
    if cps[0] < 2:
        raise SpecValidationError("correlation needs at least 2 traces per checkpoint")
    if cps[-1] > n_available:
        raise SpecValidationError(
            f"largest checkpoint {cps[-1]} exceeds available traces {n_available}"
        )
    return cps


def _scores_at_checkpoints(
    samples: np.ndarray,
    plaintexts: np.ndarray,
    checkpoints: list[int],
    poi_index: int,
    poi_only: bool,
) -> np.ndarray:
    """(256, k) max-|r| scores via cumulative ascending-order sums."""
    x = samples.astype(np.float64)
    if poi_only:
        x = x[:, poi_index : poi_index + 1]
    rows = np.asarray(checkpoints) - 1
    counts = np.asarray(checkpoints, dtype=np.float64)[:, None]

    cum_x = np.cumsum(x, axis=0)[rows]  # (k, m)
    cum_xx = np.cumsum(x * x, axis=0)[rows]
    vy = counts * cum_xx - cum_x * cum_x
    y_ok = vy > _VAR_EPS * (counts * cum_xx)

    models = model_matrix(plaintexts[: x.shape[0]])
    scores = np.empty((256, len(checkpoints)))
    for g in range(256):
        m = models[g]
        sm = np.cumsum(m)[rows][:, None]  # (k, 1)
        smm = np.cumsum(m * m)[rows][:, None]
        smx = np.cumsum(m[:, None] * x, axis=0)[rows]  # (k, m)
        vx = counts * smm - sm * sm
        x_ok = vx > _VAR_EPS * (counts * smm)
        num = counts * smx - sm * cum_x
        valid = x_ok & y_ok
        r = np.zeros_like(num)
        denom = np.sqrt(np.where(valid, vx * vy, 1.0))
        np.divide(num, denom, out=r, where=valid)
        score = np.minimum(np.max(np.abs(r), axis=1), 1.0)
        scores[g] = score
    return scores


def _ranking(final_scores: np.ndarray) -> np.ndarray:
    return np.lexsort((np.arange(256), -final_scores))


def cpa_curve(ts: TraceSet, checkpoints, poi_only: bool = False) -> AttackResult:
    """Correlation attack evaluated at several trace counts in one pass."""
    cps = _check_checkpoints(checkpoints, len(ts))
    scores = _scores_at_checkpoints(ts.samples, ts.plaintexts, cps, ts.poi_index, poi_only)
    ranking = _ranking(scores[:, -1])
    recovered = int(ranking[0])
    return AttackResult(
        checkpoints=cps,
        corr=scores,
        ranking=ranking,
        recovered_key=recovered,
        true_key=ts.true_key_byte,
        success=recovered == ts.true_key_byte,
    )


def cpa(ts: TraceSet, n_used: int | None = None, poi_only: bool = False) -> AttackResult:
    """Correlation attack using the first ``n_used`` traces (default: all)."""
    if n_used is None:
        n_used = len(ts)
    return cpa_curve(ts, [n_used], poi_only=poi_only)


def cpa_bruteforce(ts: TraceSet, n_used: int | None = None, poi_only: bool = False) -> np.ndarray:
    """Naive per-guess scores; the reference the fast path must equal bitwise.

    Accumulates the same one-pass sums in the same ascending trace order as
    the fast path, one explicit addition per trace.
    """
    if n_used is None:
        n_used = len(ts)
    if n_used < 2 or n_used > len(ts):
        raise SpecValidationError("n_used must be in [2, len(ts)]")
    x = ts.samples.astype(np.float64)
    if poi_only:
        x = x[:, ts.poi_index : ts.poi_index + 1]
    n, m = n_used, x.shape[1]
    nf = float(n)

    sx = np.zeros(m)
    sxx = np.zeros(m)
    for i in range(n):
        xi = x[i]
        sx = sx + xi
        sxx = sxx + xi * xi
    vy = nf * sxx - sx * sx
    y_ok = vy > _VAR_EPS * (nf * sxx)

    models = model_matrix(ts.plaintexts[:n])
    scores = np.empty(256)
    for g in range(256):
        mg = models[g]
        sm = 0.0
        smm = 0.0
        smx = np.zeros(m)
        for i in range(n):
            mi = mg[i]
            sm += mi
            smm += mi * mi
            smx = smx + mi * x[i]
        vx = nf * smm - sm * sm
        x_ok = vx > _VAR_EPS * (nf * smm)
        best = 0.0
        for j in range(m):
            if x_ok and y_ok[j]:
                r = (nf * smx[j] - sm * sx[j]) / math.sqrt(vx * vy[j])
            else:
                r = 0.0
            a = abs(r)
            if a > best:
                best = a
        scores[g] = min(best, 1.0)
    return scores


# --- SNR ---------------------------------------------------------------------------


def snr(ts: TraceSet, n_used: int | None = None) -> SnrReport:
    """Leakage SNR per sample over Hamming-weight classes of the true-key
    intermediate: Var(class means) / mean(within-class variances)."""
    if n_used is None:
        n_used = len(ts)
    x = ts.samples[:n_used].astype(np.float64)
    pts = ts.plaintexts[:n_used]
    classes = HAMMING_WEIGHT[SBOX[np.bitwise_xor(pts, np.uint8(ts.true_key_byte))]]

    means = []
    variances = []
    counts = {}
    for h in range(9):
        mask = classes == h
        c = int(np.count_nonzero(mask))
        if c >= 2:
            counts[h] = c
            means.append(x[mask].mean(axis=0))
            variances.append(x[mask].var(axis=0, ddof=1))
    if len(counts) < 2:
        raise InsufficientClassesError(
            f"need >= 2 leakage classes with >= 2 traces each, have {len(counts)}"
        )
    means = np.array(means)
    noise = np.array(variances).mean(axis=0)
    signal = means.var(axis=0, ddof=0)

    per_sample = np.zeros(x.shape[1])
    noisy = noise > 0.0
    per_sample[noisy] = signal[noisy] / noise[noisy]
    per_sample[~noisy & (signal > 0.0)] = np.inf
    return SnrReport(
        per_sample=per_sample,
        poi_index=ts.poi_index,
        poi_snr=float(per_sample[ts.poi_index]),
        class_counts=counts,
    )


# --- minimum traces to disclosure -----------------------------------------------------


def _true_key_ranks(result: AttackResult) -> list[int]:
    guesses = np.arange(256)
    true = result.true_key
    ranks = []
    for col in range(result.corr.shape[1]):
        s = result.corr[:, col]
        above = (s > s[true]) | ((s == s[true]) & (guesses < true))
        ranks.append(1 + int(np.count_nonzero(above)))
    return ranks


def mtd_from_result(result: AttackResult, window: int = 5) -> MtdResult:
    """Disclosure point of an already-computed correlation curve."""
    if window < 1:
        raise SpecValidationError("window must be >= 1")
    ranks = _true_key_ranks(result)
    found = None
    for i in range(len(ranks) - window + 1):
        if all(r == 1 for r in ranks[i : i + window]):
            found = result.checkpoints[i]
            break
    return MtdResult(
        mtd=found,
        checkpoints=result.checkpoints,
        window=window,
        true_key_ranks=ranks,
    )


def mtd(ts: TraceSet, checkpoints, window: int = 5, poi_only: bool = False) -> MtdResult:
    """Smallest checkpoint where the true key ranks first and keeps rank 1
    for ``window`` consecutive checkpoints (a transient lucky rank-1 does not
    count as disclosure).  Returns ``mtd=None`` when never disclosed."""
    if window < 1:
        raise SpecValidationError("window must be >= 1")
    return mtd_from_result(cpa_curve(ts, checkpoints, poi_only=poi_only), window)


# --- grid maps --------------------------------------------------------------------


@dataclass(frozen=True)
class GridMaps:
    """Amplitude / SNR / MTD matrices; NaN marks absent cells (errors or
    never-disclosed keys)."""

    amplitude: np.ndarray
    snr: np.ndarray
    mtd: np.ndarray


def grid_maps(grid_ts: GridTraceSets, checkpoints, window: int = 5) -> GridMaps:
    rows, cols = grid_ts.grid.rows, grid_ts.grid.cols
    amp = np.full((rows, cols), np.nan)
    snr_map = np.full((rows, cols), np.nan)
    mtd_map = np.full((rows, cols), np.nan)
    for r in range(rows):
        for c in range(cols):
            ts = grid_ts.cell(r, c)
            amp[r, c] = float(np.mean(np.abs(ts.samples[:, ts.poi_index].astype(np.float64))))
            try:
                snr_map[r, c] = snr(ts).poi_snr
            except InsufficientClassesError:
                pass
            try:
                m = mtd(ts, checkpoints, window=window)
                if m.mtd is not None:
                    mtd_map[r, c] = float(m.mtd)
            except SpecValidationError:
                pass
    return GridMaps(amplitude=amp, snr=snr_map, mtd=mtd_map)


# --- export ----------------------------------------------------------------------


def _json_float(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def attack_to_json(result: AttackResult) -> dict:
    return {
        "schema": 1,
        "checkpoints": result.checkpoints,
        "recovered_key": result.recovered_key,
        "true_key": result.true_key,
        "success": result.success,
        "ranking": [int(g) for g in result.ranking],
        "final_scores": [_json_float(v) for v in result.corr[:, -1]],
    }


def snr_to_json(report: SnrReport) -> dict:
    return {
        "schema": 1,
        "poi_index": report.poi_index,
        "poi_snr": _json_float(report.poi_snr),
        "per_sample": [_json_float(v) for v in report.per_sample],
        "class_counts": {str(k): v for k, v in sorted(report.class_counts.items())},
    }


def mtd_to_json(result: MtdResult) -> dict:
    return {
        "schema": 1,
        "mtd": result.mtd if result.mtd is not None else "not disclosed",
        "checkpoints": result.checkpoints,
        "window": result.window,
        "true_key_ranks": result.true_key_ranks,
    }


def corr_curve_csv(result: AttackResult) -> str:
    """Rows of ``n_traces,guess,abs_r`` for every checkpoint and guess."""
    lines = ["n_traces,guess,abs_r"]
    for col, n in enumerate(result.checkpoints):
        for g in range(256):
            lines.append(f"{n},{g},%.17g" % result.corr[g, col])
    return "\n".join(lines) + "\n"
