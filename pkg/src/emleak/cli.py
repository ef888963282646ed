"""``emleak`` command-line frontend.

Subcommands: ``transient``, ``fig3``, ``fig4``, ``synth``, ``attack``,
``evaluate``, ``grid``.  Every subcommand takes the shared flags ``--out``,
``--seed``, ``--threads``, ``--force``, ``--format`` (repeatable), and
``--no-timestamp``; outputs land only in the designated output directory and
existing files are never overwritten without ``--force``.

Exit codes: 0 success, 2 validation/usage error, 3 I/O error, 4 numerical
accuracy or stability error.  Runs are deterministic given (flags, seed) at
any ``--threads`` setting; with ``--no-timestamp`` outputs are byte-identical
across runs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, attack as attack_mod, energy, svg, tracegen, transient
from .circuit import derive_params, load_spec, spec_to_mapping
from .errors import (
    InsufficientClassesError,
    NumericalAccuracyError,
    SpecValidationError,
    StabilityError,
    SweepPointError,
    UnsupportedModeError,
)
from .rng import derive_stream
from .tracegen import LeakageParams, replace_leakage

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

_MODES = {
    "discharge": transient.DriveMode.discharge,
    "step": transient.DriveMode.step_charge,
}


class OutputDir:
    """Output sink that refuses to overwrite without ``--force``.

    ``claim`` reserves all target names up front so a refused overwrite never
    leaves partial outputs behind.
    """

    def __init__(self, root: Path, force: bool):
        self.root = root
        self.force = force
        root.mkdir(parents=True, exist_ok=True)

    def claim(self, *names: str) -> None:
        if self.force:
            return
        clashes = [n for n in names if (self.root / n).exists()]
        if clashes:
            raise FileExistsError(
                f"refusing to overwrite {', '.join(clashes)} in {self.root} (use --force)"
            )

    def write_text(self, name: str, text: str) -> Path:
        path = self.root / name
        path.write_text(text, encoding="utf-8")
        return path

    def write_json(self, name: str, obj) -> Path:
        return self.write_text(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _resolve_out(args) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get("EMLEAK_OUT")
    return Path(env) if env else Path("emleak-out")


def _formats(args) -> set[str]:
    return set(args.format) if args.format else {"csv", "json", "svg"}


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise SpecValidationError(f"{what} must be a comma-separated integer list") from exc


def _parse_float_list(text: str, what: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise SpecValidationError(f"{what} must be a comma-separated number list") from exc


def _default_checkpoints(n: int) -> list[int]:
    if n < 10:
        return [max(n, 2)]
    pts = {int(round(10.0 * (n / 10.0) ** (k / 7.0))) for k in range(8)}
    pts.add(n)
    return sorted(p for p in pts if 2 <= p <= n)


def _checkpoints_from_args(args, n: int) -> list[int]:
    if args.checkpoints:
        return _parse_int_list(args.checkpoints, "--checkpoints")
    return _default_checkpoints(n)


def _leakage_from_args(args) -> LeakageParams:
    return LeakageParams(
        alpha=args.alpha,
        beta=args.beta,
        sigma=args.sigma,
        countermeasure_T_s=args.countermeasure_t,
        t_ref_s=args.t_ref,
        attenuation_law=args.law,
    )


def _synth_from_args(args) -> tracegen.TraceSet:
    return tracegen.synth_traceset(
        args.n, args.key, _leakage_from_args(args), args.seed,
        n_samples=args.n_samples, poi_index=args.poi,
    )


# --- subcommands ------------------------------------------------------------------


def cmd_transient(args, out: OutputDir) -> None:
    spec = load_spec(args.spec)
    if args.mode == "ramp":
        if args.ramp_t is None:
            raise SpecValidationError("--ramp-t is required with --mode ramp")
        mode = transient.DriveMode.ramp_charge(args.ramp_t)
    else:
        mode = _MODES[args.mode]()
    grid = transient.default_grid(spec, mode)
    if args.dt is not None or args.t_end is not None:
        dt = args.dt if args.dt is not None else grid.dt_s
        t_end = args.t_end if args.t_end is not None else grid.t_end_s
        fast, _, _ = transient.characteristic_times(spec)
        if dt > fast / 10.0:
            raise StabilityError(
                f"--dt {dt:.6g} s is too coarse for the fastest time scale "
                f"{fast:.6g} s; use dt <= {fast / 10.0:.6g} s"
            )
        grid = transient.TimeGrid(dt_s=dt, n_samples=int(math.ceil(t_end / dt)) + 1)
    solver = transient.solve_numeric if args.method == "numeric" else transient.solve_analytic
    w = solver(spec, mode, grid)

    formats = _formats(args)
    names = ["waveform.csv"] + (["waveform.svg"] if "svg" in formats else [])
    out.claim(*names)
    out.write_text("waveform.csv", transient.waveform_to_csv(w))
    if "svg" in formats:
        t = w.times()
        series = [
            {"x": t, "y": w.v_cap, "color": svg.RAD_BLUE, "label": "v_cap (V)"},
            {"x": t, "y": w.i_total, "color": svg.HEAT_RED, "label": "i_total (A)"},
        ]
        out.write_text(
            "waveform.svg",
            svg.line_plot(
                series,
                title=f"{spec.topology.value} {args.mode} transient ({w.method})",
                xlabel="time (s)",
                ylabel="voltage / current",
                timestamp=not args.no_timestamp,
            ),
        )


def _two_curve_svg(sweep, title, xlabel, ylabel, xlog, ylog, annotations, timestamp,
                   rad_scale: float = 1.0, rad_label: str = "E_rad (J)"):
    heat = [p.e_heat_j for p in sweep.partitions]
    rad = [p.e_rad_j / rad_scale for p in sweep.partitions]
    series = [
        {"x": sweep.axis, "y": heat, "color": svg.HEAT_RED, "label": "E_heat (J)"},
        {"x": sweep.axis, "y": rad, "color": svg.RAD_BLUE, "label": rad_label},
    ]
    return svg.line_plot(
        series, title=title, xlabel=xlabel, ylabel=ylabel,
        xlog=xlog, ylog=ylog, annotations=annotations, timestamp=timestamp,
    )


def cmd_fig3(args, out: OutputDir) -> None:
    template = load_spec(args.spec)
    r_rad = template.r_rad_ohm
    r_min = args.r_min if args.r_min is not None else (r_rad * 1e-3 if r_rad > 0 else 1e-3)
    r_max = args.r_max if args.r_max is not None else (r_rad * 1e3 if r_rad > 0 else 1e3)
    if not (0.0 < r_min < r_max):
        raise SpecValidationError("need 0 < --r-min < --r-max")
    axis = np.geomspace(r_min, r_max, args.points)
    if r_min <= r_rad <= r_max:
        axis = np.unique(np.append(axis, r_rad))  # put the crossing point on the axis
    sweep = energy.sweep_resistance(template, axis, method=args.method, threads=args.threads)

    stem = f"fig3_{template.topology.value}"
    formats = _formats(args)
    names = [f"{stem}.{ext}" for ext in ("csv", "json", "svg") if ext in formats]
    out.claim(*names)
    if "csv" in formats:
        out.write_text(f"{stem}.csv", energy.sweep_to_csv(sweep))
    if "json" in formats:
        out.write_json(f"{stem}.json", energy.sweep_to_json(sweep))
    if "svg" in formats:
        out.write_text(
            f"{stem}.svg",
            _two_curve_svg(
                sweep,
                title=f"Energy partition vs resistance ({template.topology.value})",
                xlabel="R (ohm)", ylabel="energy (J)",
                xlog=True, ylog=False,
                annotations=[f"curves cross at R = R_rad = {r_rad:g} ohm"],
                timestamp=not args.no_timestamp,
            ),
        )


def cmd_fig4(args, out: OutputDir) -> None:
    spec = load_spec(args.spec)
    tau = derive_params(spec).tau_s
    t_min = args.t_min if args.t_min is not None else 10.0 * tau
    t_max = args.t_max if args.t_max is not None else 1e4 * tau
    if not (0.0 < t_min < t_max):
        raise SpecValidationError("need 0 < --t-min < --t-max")
    model = energy.AdiabaticModel(law=energy.RadiationLaw(args.law), k_rad=args.k_rad)
    axis = np.geomspace(t_min, t_max, args.points)
    sweep = energy.sweep_ramp_time(spec, axis, model, threads=args.threads)

    slopes = {}
    lo, hi = max(t_min, 100.0 * tau), min(t_max, 1e4 * tau)
    annotations = []
    if np.count_nonzero((sweep.axis >= lo) & (sweep.axis <= hi)) >= 3:
        for field in ("heat", "rad"):
            slopes[field] = energy.loglog_slope(sweep, field, lo, hi)
            annotations.append(
                f"log-log slope ({field}) = {slopes[field]:.3f} over T in [{lo:.3g}, {hi:.3g}] s"
            )

    formats = _formats(args)
    names = [f"fig4.{ext}" for ext in ("csv", "json", "svg") if ext in formats]
    out.claim(*names)
    if "csv" in formats:
        out.write_text("fig4.csv", energy.sweep_to_csv(sweep))
    if "json" in formats:
        doc = energy.sweep_to_json(sweep)
        doc["loglog_slopes"] = slopes
        out.write_json("fig4.json", doc)
    if "svg" in formats:
        ref = sweep.meta["rad_norm_ref_j"]
        out.write_text(
            "fig4.svg",
            _two_curve_svg(
                sweep,
                title="Losses vs charging time (ramped charging)",
                xlabel="ramp time T (s)", ylabel="E_heat (J) / normalized E_rad",
                xlog=True, ylog=True,
                annotations=annotations,
                timestamp=not args.no_timestamp,
                rad_scale=ref if ref > 0 else 1.0,
                rad_label="E_rad / E_rad(T_min)",
            ),
        )


def cmd_synth(args, out: OutputDir) -> None:
    ts = _synth_from_args(args)
    formats = _formats(args)
    names = ["traces.emlk"] + (["traces.csv"] if "csv" in formats else [])
    out.claim(*names)
    tracegen.write_traceset(ts, out.root / "traces.emlk")
    if "csv" in formats:
        out.write_text("traces.csv", tracegen.traceset_to_csv(ts))


def cmd_attack(args, out: OutputDir) -> None:
    if args.traces:
        ts = tracegen.read_traceset(args.traces)
        source = {"traces_file": str(args.traces)}
    else:
        ts = _synth_from_args(args)
        source = {"synth": {"n": args.n, "key": args.key, "alpha": args.alpha,
                            "beta": args.beta, "sigma": args.sigma,
                            "countermeasure_T_s": args.countermeasure_t,
                            "law": args.law, "seed": args.seed}}
    cps = _checkpoints_from_args(args, len(ts))
    result = attack_mod.cpa_curve(ts, cps, poi_only=args.poi_only)
    snr_report = attack_mod.snr(ts)
    mtd_result = attack_mod.mtd_from_result(result, window=args.window)

    oracle_match = None
    if args.oracle:
        brute = attack_mod.cpa_bruteforce(ts, cps[-1], poi_only=args.poi_only)
        oracle_match = bool(np.array_equal(result.corr[:, -1], brute))
        if not oracle_match:
            raise NumericalAccuracyError(
                "fast CPA scores disagree with the brute-force oracle"
            )

    bundle = {
        "schema": 1,
        "tool_version": __version__,
        "source": source,
        "attack": attack_mod.attack_to_json(result),
        "snr": attack_mod.snr_to_json(snr_report),
        "mtd": attack_mod.mtd_to_json(mtd_result),
    }
    if oracle_match is not None:
        bundle["oracle_match"] = oracle_match

    formats = _formats(args)
    names = ["attack.json"]
    if "csv" in formats:
        names.append("corr_curve.csv")
    if "svg" in formats:
        names.append("corr_curve.svg")
    out.claim(*names)
    out.write_json("attack.json", bundle)
    if "csv" in formats:
        out.write_text("corr_curve.csv", attack_mod.corr_curve_csv(result))
    if "svg" in formats:
        series = []
        for g in range(256):
            if g == ts.true_key_byte:
                continue
            series.append({"x": cps, "y": result.corr[g], "color": svg.GRAY,
                           "width": 0.6, "opacity": 0.35})
        series.append({"x": cps, "y": result.corr[ts.true_key_byte],
                       "color": svg.HEAT_RED, "label": "true key", "width": 2.0})
        out.write_text(
            "corr_curve.svg",
            svg.line_plot(
                series, title="CPA correlation vs traces",
                xlabel="traces", ylabel="|r|",
                timestamp=not args.no_timestamp,
            ),
        )


def cmd_evaluate(args, out: OutputDir) -> None:
    base = _leakage_from_args(args)
    if base.countermeasure_T_s is not None:
        raise SpecValidationError("--countermeasure-t is not valid here; use --t-list")
    t_list = _parse_float_list(args.t_list, "--t-list")
    if not t_list or any(t <= 0 for t in t_list):
        raise SpecValidationError("--t-list needs at least one positive ramp time")

    cps = _checkpoints_from_args(args, args.n)
    rows = []
    for t_ramp in [base.t_ref_s] + sorted(t_list):
        params = replace_leakage(base, countermeasure_T_s=t_ramp)
        snrs = []
        mtds = []
        for rep in range(args.repeats):
            seed_rep = derive_stream(args.seed, rep)
            ts = tracegen.synth_traceset(
                args.n, args.key, params, seed_rep,
                n_samples=args.n_samples, poi_index=args.poi,
            )
            snrs.append(attack_mod.snr(ts).poi_snr)
            m = attack_mod.mtd(ts, cps, window=args.window)
            mtds.append(float(m.mtd) if m.mtd is not None else math.inf)
        rows.append(
            {
                "ramp_T_s": t_ramp,
                "attenuation": params.attenuation(),
                "poi_snr_median": float(np.median(snrs)),
                "mtd_median": float(np.median(mtds)),
            }
        )

    formats = _formats(args)
    names = []
    if "csv" in formats:
        names.append("evaluate.csv")
    names.append("evaluate.json")
    if "svg" in formats:
        names.append("evaluate_mtd.svg")
    out.claim(*names)
    if "csv" in formats:
        lines = ["ramp_T_s,attenuation,poi_snr_median,mtd_median"]
        for r in rows:
            lines.append(
                "%.17g,%.17g,%.17g,%.17g"
                % (r["ramp_T_s"], r["attenuation"], r["poi_snr_median"], r["mtd_median"])
            )
        out.write_text("evaluate.csv", "\n".join(lines) + "\n")
    doc = {
        "schema": 1,
        "tool_version": __version__,
        "baseline_t_ref_s": base.t_ref_s,
        "law": base.attenuation_law,
        "n": args.n,
        "repeats": args.repeats,
        "checkpoints": cps,
        "rows": [
            {**r, "mtd_median": (r["mtd_median"] if math.isfinite(r["mtd_median"]) else "not disclosed")}
            for r in rows
        ],
    }
    out.write_json("evaluate.json", doc)
    if "svg" in formats:
        xs = [r["ramp_T_s"] for r in rows]
        ys = [r["mtd_median"] for r in rows]
        finite = [(x, y) for x, y in zip(xs, ys) if math.isfinite(y)]
        series = [
            {
                "x": [x for x, _ in finite],
                "y": [y for _, y in finite],
                "color": svg.HEAT_RED,
                "label": "median MTD",
            }
        ]
        out.write_text(
            "evaluate_mtd.svg",
            svg.line_plot(
                series, title="Traces to disclosure vs ramp time",
                xlabel="ramp time T (s)", ylabel="median MTD (traces)",
                xlog=True,
                timestamp=not args.no_timestamp,
            ),
        )


def _grid_from_file(path: str) -> tracegen.GridSpec:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        return tracegen.GridSpec(
            g_signal=np.asarray(data["g_signal"], dtype=float),
            g_interference=np.asarray(data["g_interference"], dtype=float),
            sigma=np.asarray(data["sigma"], dtype=float),
        )
    except KeyError as exc:
        raise SpecValidationError(f"grid file missing key {exc}") from exc


def cmd_grid(args, out: OutputDir) -> None:
    demo = False
    if args.grid_file:
        grid_spec = _grid_from_file(args.grid_file)
    elif args.preset == "fig2-demo":
        grid_spec = tracegen.fig2_demo_grid()
        demo = True
    else:
        raise SpecValidationError(f"unknown grid preset {args.preset!r}")
    n = args.n if args.n is not None else (tracegen.FIG2_DEMO_N if demo else 1024)
    base = _leakage_from_args(args)
    gts = tracegen.grid_traceset(
        grid_spec, base, n, args.key, args.seed,
        n_samples=args.n_samples, poi_index=args.poi, threads=args.threads,
    )
    if args.checkpoints:
        cps = _parse_int_list(args.checkpoints, "--checkpoints")
    elif demo:
        cps = [c for c in tracegen.FIG2_DEMO_CHECKPOINTS if c <= n]
    else:
        cps = _default_checkpoints(n)
    maps = attack_mod.grid_maps(gts, cps, window=args.window)

    formats = _formats(args)
    names = []
    if "csv" in formats:
        names.append("grid_maps.csv")
    if "json" in formats:
        names.append("grid_maps.json")
    if "svg" in formats:
        names += ["grid_amplitude.svg", "grid_snr.svg", "grid_mtd.svg"]
    out.claim(*names)

    def dump(mat):
        return [[(None if math.isnan(v) else v) for v in row] for row in mat.tolist()]

    if "csv" in formats:
        lines = ["map,row,col,value"]
        for name, mat in (("amplitude", maps.amplitude), ("snr", maps.snr), ("mtd", maps.mtd)):
            for r in range(grid_spec.rows):
                for c in range(grid_spec.cols):
                    lines.append(f"{name},{r},{c},%.17g" % mat[r, c])
        out.write_text("grid_maps.csv", "\n".join(lines) + "\n")
    if "json" in formats:
        out.write_json(
            "grid_maps.json",
            {
                "schema": 1,
                "tool_version": __version__,
                "rows": grid_spec.rows,
                "cols": grid_spec.cols,
                "n": n,
                "checkpoints": cps,
                "window": args.window,
                "amplitude": dump(maps.amplitude),
                "snr": dump(maps.snr),
                "mtd": dump(maps.mtd),
            },
        )
    if "svg" in formats:
        ts_flag = not args.no_timestamp
        out.write_text("grid_amplitude.svg",
                       svg.heatmap(maps.amplitude, title="Signal amplitude map", timestamp=ts_flag))
        out.write_text("grid_snr.svg",
                       svg.heatmap(maps.snr, title="Side-channel SNR map", timestamp=ts_flag))
        out.write_text("grid_mtd.svg",
                       svg.heatmap(maps.mtd, title="Traces-to-disclosure map", invert=True,
                                   timestamp=ts_flag))


# --- parser -----------------------------------------------------------------------


def _add_synth_args(p: argparse.ArgumentParser, n_default: int | None = 1000) -> None:
    p.add_argument("--n", type=int, default=n_default, help="number of traces")
    p.add_argument("--key", type=lambda s: int(s, 0), default=0x2B, help="true key byte")
    p.add_argument("--alpha", type=float, default=1.0, help="volts per switched bit")
    p.add_argument("--beta", type=float, default=0.0, help="baseline level (V)")
    p.add_argument("--sigma", type=float, default=0.5, help="noise std (V)")
    p.add_argument("--n-samples", type=int, default=32, help="samples per trace")
    p.add_argument("--poi", type=int, default=16, help="leaking sample index")
    p.add_argument("--countermeasure-t", type=float, default=None,
                   help="adiabatic ramp time (s); omit for the uncountered baseline")
    p.add_argument("--t-ref", type=float, default=tracegen.T_REF_S,
                   help="reference step transition time (s)")
    p.add_argument("--law", choices=("acceleration", "resistance"), default="acceleration",
                   help="countermeasure attenuation law")


def _add_checkpoint_args(p: argparse.ArgumentParser, window_default: int = 5) -> None:
    p.add_argument("--checkpoints", default=None,
                   help="comma-separated trace counts (default: log-spaced)")
    p.add_argument("--window", type=int, default=window_default,
                   help="consecutive rank-1 checkpoints required for disclosure")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None,
                        help="output directory (default: $EMLEAK_OUT or ./emleak-out)")
    common.add_argument("--seed", type=lambda s: int(s, 0), default=1,
                        help="64-bit RNG seed")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: machine parallelism)")
    common.add_argument("--force", action="store_true",
                        help="overwrite existing output files")
    common.add_argument("--format", action="append", choices=("csv", "json", "svg"),
                        default=None, help="output formats (repeatable; default: all)")
    common.add_argument("--no-timestamp", action="store_true",
                        help="omit timestamps from SVG output (for byte-stable files)")

    top = argparse.ArgumentParser(
        prog="emleak",
        description="Switching-energy partition simulation and synthetic EM "
        "side-channel evaluation.",
    )
    top.add_argument("--version", action="version", version=f"emleak {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transient", parents=[common],
                       help="solve one transient and export the waveform")
    p.add_argument("--spec", required=True, help="circuit spec file (key=value or JSON)")
    p.add_argument("--mode", choices=("discharge", "step", "ramp"), default="discharge")
    p.add_argument("--ramp-t", type=float, default=None, help="ramp duration (s)")
    p.add_argument("--method", choices=("analytic", "numeric"), default="analytic")
    p.add_argument("--dt", type=float, default=None, help="sample interval override (s)")
    p.add_argument("--t-end", type=float, default=None, help="horizon override (s)")
    p.set_defaults(func=cmd_transient)

    p = sub.add_parser("fig3", parents=[common],
                       help="heat/radiation partition vs resistance sweep")
    p.add_argument("--spec", required=True)
    p.add_argument("--r-min", type=float, default=None)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--points", type=int, default=61)
    p.add_argument("--method", choices=("closed_form", "numeric"), default="closed_form")
    p.set_defaults(func=cmd_fig3)

    p = sub.add_parser("fig4", parents=[common],
                       help="losses vs ramp time (adiabatic charging) sweep")
    p.add_argument("--spec", required=True)
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--law", choices=("acceleration", "resistance"), default="acceleration")
    p.add_argument("--k-rad", type=float, default=None,
                   help="acceleration-law coefficient (ohm*s^2); default: calibrated")
    p.set_defaults(func=cmd_fig4)

    p = sub.add_parser("synth", parents=[common], help="synthesize a trace set")
    _add_synth_args(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("attack", parents=[common],
                       help="run CPA + SNR + MTD on a trace file or synthesized set")
    p.add_argument("--traces", default=None, help="EMLK trace file (default: synthesize)")
    _add_synth_args(p, n_default=2000)
    _add_checkpoint_args(p)
    p.add_argument("--poi-only", action="store_true",
                   help="score guesses at the poi sample only")
    p.add_argument("--oracle", action="store_true",
                   help="recompute with the brute-force oracle and require a bit-exact match")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("evaluate", parents=[common],
                       help="compare SNR/MTD across countermeasure ramp times")
    _add_synth_args(p, n_default=2000)
    _add_checkpoint_args(p)
    p.add_argument("--t-list", required=True,
                   help="comma-separated countermeasure ramp times (s)")
    p.add_argument("--repeats", type=int, default=5,
                   help="paired seeds per ramp time (medians are reported)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("grid", parents=[common],
                       help="amplitude/SNR/MTD maps over a scan grid")
    _add_synth_args(p, n_default=None)
    _add_checkpoint_args(p, window_default=3)
    p.add_argument("--preset", default="fig2-demo", help="built-in grid preset")
    p.add_argument("--grid-file", default=None,
                   help="JSON file with g_signal/g_interference/sigma matrices")
    p.set_defaults(func=cmd_grid)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = OutputDir(_resolve_out(args), args.force)
        args.func(args, out)
        return EXIT_OK
    except NumericalAccuracyError as exc:
        print(f"emleak: numerical accuracy error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SweepPointError as exc:
        code = EXIT_NUMERIC if isinstance(exc.cause, NumericalAccuracyError) else EXIT_USAGE
        print(f"emleak: {exc}", file=sys.stderr)
        return code
    except (SpecValidationError, UnsupportedModeError, InsufficientClassesError) as exc:
        print(f"emleak: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"emleak: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
