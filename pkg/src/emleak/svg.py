"""Minimal deterministic SVG plots: polyline charts and grid heatmaps.

No plotting dependency; output bytes depend only on the data and options, so
golden-file comparisons work (pass ``timestamp=False`` where byte-stability
matters).  Palette follows the convention used throughout: heat red #d62728,
radiation blue #1f77b4.
"""

from __future__ import annotations

import datetime
import math

import numpy as np

HEAT_RED = "#d62728"
RAD_BLUE = "#1f77b4"
GRAY = "#7f7f7f"

_W, _H = 720, 480
_ML, _MR, _MT, _MB = 76, 24, 46, 56  # margins


def _fmt(v: float) -> str:
    return "%.6g" % v


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if not (hi > lo):
        return [lo]
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = 10.0 * mag
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _log_ticks(lo: float, hi: float) -> list[float]:
    lo_e = math.ceil(math.log10(lo) - 1e-9)
    hi_e = math.floor(math.log10(hi) + 1e-9)
    ticks = [10.0**e for e in range(lo_e, hi_e + 1)]
    if len(ticks) >= 2:
        return ticks
    return [lo, hi]


class _Axis:
    def __init__(self, lo: float, hi: float, pix_lo: float, pix_hi: float, log: bool):
        if log:
            lo = max(lo, 1e-300)
            hi = max(hi, lo * 10.0)
        if hi <= lo:
            hi = lo + (abs(lo) if lo != 0 else 1.0)
        self.lo, self.hi, self.log = lo, hi, log
        self.pix_lo, self.pix_hi = pix_lo, pix_hi

    def to_pix(self, v: float) -> float:
        if self.log:
            a = (math.log10(v) - math.log10(self.lo)) / (math.log10(self.hi) - math.log10(self.lo))
        else:
            a = (v - self.lo) / (self.hi - self.lo)
        return self.pix_lo + a * (self.pix_hi - self.pix_lo)

    def ticks(self) -> list[float]:
        return _log_ticks(self.lo, self.hi) if self.log else _nice_ticks(self.lo, self.hi)


def _header(title: str, timestamp: bool) -> list[str]:
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif">',
    ]
    if timestamp:
        now = datetime.datetime.now(datetime.timezone.utc).replace(microsecond=0)
        out.append(f"<!-- generated {now.isoformat()} -->")
    out.append(f'<rect width="{_W}" height="{_H}" fill="white"/>')
    out.append(f'<text x="{_W / 2:.0f}" y="24" text-anchor="middle" font-size="15">{_esc(title)}</text>')
    return out


def line_plot(
    series: list[dict],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    xlog: bool = False,
    ylog: bool = False,
    annotations: list[str] | None = None,
    timestamp: bool = True,
) -> str:
    """SVG line chart.

    Each series is a dict with keys ``x``, ``y`` (sequences), ``color``, and
    ``label``.  On log axes, non-positive points are dropped from the line.
    """
    xs, ys = [], []
    for s in series:
        x = np.asarray(s["x"], dtype=float)
        y = np.asarray(s["y"], dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if xlog:
            keep &= x > 0
        if ylog:
            keep &= y > 0
        xs.append(x[keep])
        ys.append(y[keep])
    all_x = np.concatenate([v for v in xs if v.size]) if any(v.size for v in xs) else np.array([0.0, 1.0])
    all_y = np.concatenate([v for v in ys if v.size]) if any(v.size for v in ys) else np.array([0.0, 1.0])
    ax_x = _Axis(float(all_x.min()), float(all_x.max()), _ML, _W - _MR, xlog)
    ax_y = _Axis(float(all_y.min()), float(all_y.max()), _H - _MB, _MT, ylog)

    out = _header(title, timestamp)
    # frame and ticks
    out.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" height="{_H - _MT - _MB}" '
        f'fill="none" stroke="black" stroke-width="1"/>'
    )
    for t in ax_x.ticks():
        if not (ax_x.lo <= t <= ax_x.hi):
            continue
        px = ax_x.to_pix(t)
        out.append(f'<line x1="{px:.2f}" y1="{_H - _MB}" x2="{px:.2f}" y2="{_H - _MB + 5}" stroke="black"/>')
        out.append(
            f'<text x="{px:.2f}" y="{_H - _MB + 18}" text-anchor="middle" font-size="11">{_fmt(t)}</text>'
        )
    for t in ax_y.ticks():
        if not (ax_y.lo <= t <= ax_y.hi):
            continue
        py = ax_y.to_pix(t)
        out.append(f'<line x1="{_ML - 5}" y1="{py:.2f}" x2="{_ML}" y2="{py:.2f}" stroke="black"/>')
        out.append(
            f'<text x="{_ML - 8}" y="{py + 4:.2f}" text-anchor="end" font-size="11">{_fmt(t)}</text>'
        )
    out.append(
        f'<text x="{(_ML + _W - _MR) / 2:.0f}" y="{_H - 14}" text-anchor="middle" font-size="13">{_esc(xlabel)}</text>'
    )
    out.append(
        f'<text x="18" y="{(_MT + _H - _MB) / 2:.0f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {(_MT + _H - _MB) / 2:.0f})">{_esc(ylabel)}</text>'
    )
    # series
    for s, x, y in zip(series, xs, ys):
        if x.size == 0:
            continue
        pts = " ".join(f"{ax_x.to_pix(a):.2f},{ax_y.to_pix(b):.2f}" for a, b in zip(x, y))
        width = s.get("width", 1.6)
        opacity = s.get("opacity", 1.0)
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{s["color"]}" '
            f'stroke-width="{width}" stroke-opacity="{opacity}"/>'
        )
    # legend
    ly = _MT + 14
    for s in series:
        label = s.get("label")
        if not label:
            continue
        out.append(f'<line x1="{_W - _MR - 150}" y1="{ly - 4}" x2="{_W - _MR - 122}" y2="{ly - 4}" stroke="{s["color"]}" stroke-width="2"/>')
        out.append(f'<text x="{_W - _MR - 116}" y="{ly}" font-size="12">{_esc(label)}</text>')
        ly += 16
    for note in annotations or []:
        out.append(f'<text x="{_ML + 10}" y="{ly}" font-size="12" fill="#333333">{_esc(note)}</text>')
        ly += 16
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _cell_color(frac: float) -> str:
    """Blue (low) to red (high) through near-white."""
    frac = min(max(frac, 0.0), 1.0)
    lo = (31, 119, 180)
    mid = (247, 247, 247)
    hi = (214, 39, 40)
    if frac < 0.5:
        a, b, t = lo, mid, frac * 2.0
    else:
        a, b, t = mid, hi, (frac - 0.5) * 2.0
    rgb = tuple(round(ca + (cb - ca) * t) for ca, cb in zip(a, b))
    return "#%02x%02x%02x" % rgb


def heatmap(
    matrix: np.ndarray,
    title: str = "",
    value_fmt: str = "%.3g",
    invert: bool = False,
    timestamp: bool = True,
) -> str:
    """SVG heatmap; NaN cells are hatched and labeled ``n/d``.

    ``invert=True`` colors small values hot (used for traces-to-disclosure
    maps, where a smaller count means stronger leakage).
    """
    m = np.asarray(matrix, dtype=float)
    rows, cols = m.shape
    finite = m[np.isfinite(m)]
    lo = float(finite.min()) if finite.size else 0.0
    hi = float(finite.max()) if finite.size else 1.0
    span = hi - lo if hi > lo else 1.0

    out = _header(title, timestamp)
    out.append(
        '<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse">'
        '<rect width="6" height="6" fill="#e0e0e0"/>'
        '<line x1="0" y1="6" x2="6" y2="0" stroke="#999999" stroke-width="1"/>'
        "</pattern></defs>"
    )
    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB
    cw = plot_w / cols
    ch = plot_h / rows
    for r in range(rows):
        for c in range(cols):
            x = _ML + c * cw
            y = _MT + r * ch
            v = m[r, c]
            if math.isnan(v):
                fill = "url(#hatch)"
                label = "n/d"
            else:
                frac = (v - lo) / span
                if invert:
                    frac = 1.0 - frac
                fill = _cell_color(frac)
                label = value_fmt % v
            out.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw:.2f}" height="{ch:.2f}" '
                f'fill="{fill}" stroke="white" stroke-width="1"/>'
            )
            out.append(
                f'<text x="{x + cw / 2:.2f}" y="{y + ch / 2 + 4:.2f}" text-anchor="middle" '
                f'font-size="11">{_esc(label)}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
