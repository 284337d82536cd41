"""Command-line entry point.

    qmemsim run --config sample.cfg --experiment fock-decay --out results/
    qmemsim validate --config sample.cfg

`run` executes one named experiment and writes results.csv, fits.json and
manifest.json into the output directory.  Reruns with identical
configuration and seed are byte-identical, and `run --from-manifest
<manifest.json>` reproduces a previous run.  Physics or fit failures exit
with status 1, usage errors (unknown experiment, missing config) with 2.
"""

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, analysis, protocol, tomography
from .config import (device_params_to_config, load_run_settings,
                     parse_config_text, write_sample_config, SAMPLE_CONFIG)
from .device import DeviceParams, bsb_frequency, purcell_limit
from .errors import ConfigError, QmemError
from .lindblad import effective_bsb_check
from .qsys import SubsystemDims
from .units import GHZ, MHZ, TWO_PI

EXPERIMENTS = ("memory-protocol", "fock-decay", "memory-ramsey", "ringdown",
               "zfidelity-sweep", "bsb-check", "qpt", "fit")

FIT_MODELS = {
    "exponential": analysis.fit_exponential,
    "decaying-cosine": analysis.fit_decaying_cosine,
    "lorentzian": analysis.fit_lorentzian,
    "leakage": analysis.fit_leakage,
}


def _parse_sweep(text):
    """VAR=start:stop:steps -> (name, numpy grid)."""
    try:
        name, spec = text.split("=", 1)
        start, stop, steps = spec.split(":")
        grid = np.linspace(float(start), float(stop), int(steps))
    except ValueError as exc:
        raise ConfigError(f"cannot parse sweep {text!r}: "
                          "expected VAR=start:stop:steps") from exc
    if grid.size < 1:
        raise ConfigError("sweep needs at least one point")
    return name.strip(), grid


def _write_json(path, payload):
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_results_csv(path, header, rows):
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(f"{v:.17g}" for v in row) + "\n")


# module-level workers so process pools can pickle them
def _protocol_point(args):
    p, angle, delay, options = args
    return protocol.run_memory_protocol(p, angle, delay, options)


def _pmap(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _options_from_args(p, dims, run_kw, args):
    kw = dict(dims=dims)
    if "frame" in run_kw:
        kw["frame"] = run_kw["frame"]
    if "dt_pulse" in run_kw:
        kw["dt_pulse"] = run_kw["dt_pulse"]
    if "dt_idle" in run_kw:
        kw["dt_idle"] = run_kw["dt_idle"]
    if args.dt is not None:
        kw["dt_pulse"] = args.dt * 1e-3  # flag is in ns
    if args.shots is not None:
        kw["shots"] = args.shots
    kw["seed"] = args.seed
    return protocol.ProtocolOptions(**kw)


def run_experiment(p, options, args, sweep):
    """Dispatch one experiment; returns (csv_header, csv_rows, fits, extra)."""
    name = args.experiment

    if name == "memory-protocol":
        var, grid = sweep if sweep else ("prep_angle", np.linspace(0, 2 * math.pi, 13))
        if var in ("prep_angle", "prep_angle_rad"):
            items = [(p, a, args.delay, options) for a in grid]
        elif var in ("delay", "delay_us"):
            items = [(p, args.prep_angle, d, options) for d in grid]
        else:
            raise ConfigError(f"memory-protocol cannot sweep {var!r}")
        pgs = _pmap(_protocol_point, items, args.jobs)
        rows = [(x, y, 0.0) for x, y in zip(grid, pgs)]
        return ([var, "p_g", "uncertainty"], rows, {}, {})

    if name == "fock-decay":
        delays = sweep[1] if sweep else None
        rec = protocol.fock_decay_experiment(p, delays, options)
        rows = [(x, y, 0.0) for x, y in zip(rec.xs, rec.ys)]
        return (["delay_us", "p_g", "uncertainty"], rows, rec.fit_summary(), {})

    if name == "memory-ramsey":
        delays = sweep[1] if sweep else None
        rec = protocol.memory_ramsey_experiment(p, delays, args.detuning, options)
        rows = [(x, y, 0.0) for x, y in zip(rec.xs, rec.ys)]
        return (["delay_us", "p_g", "uncertainty"], rows, rec.fit_summary(), {})

    if name == "ringdown":
        rec = protocol.mode_ringdown_experiment(p, args.mode, options)
        rows = [(x, y, 0.0, n) for x, y, n in
                zip(rec.xs, rec.ys, rec.columns["n"])]
        return (["t_us", "field_amplitude", "uncertainty", "n"], rows,
                rec.fit_summary(), {"mode": args.mode})

    if name == "zfidelity-sweep":
        wps = None
        if sweep:
            var, grid = sweep
            if var not in ("bsb_amp_ghz",):
                raise ConfigError(f"zfidelity-sweep cannot sweep {var!r}")
            wps = [protocol.WorkingPoint(TWO_PI * 1e3 * a) for a in grid]
        rec = protocol.z_fidelity_sweep(p, wps, options, fit=args.fit_leakage)
        rows = [(x, y, 0.0, c) for x, y, c in
                zip(rec.xs, rec.ys, rec.columns["f_z_corr"])]
        return (["t_p_us", "f_z", "uncertainty", "f_z_corr"], rows,
                rec.fit_summary(), {})

    if name == "bsb-check":
        grid = sweep[1] if sweep else np.array([1.2e3, 2.0e3, 3.4e3]) / 1e3
        rows, rates = [], []
        for amp_ghz in grid:
            chk = effective_bsb_check(p, TWO_PI * 1e3 * amp_ghz,
                                      dims=options.dims, frame=options.frame)
            rows.append((amp_ghz, chk.measured_rate / MHZ, 0.0,
                         chk.predicted_rate / MHZ, chk.ratio))
            rates.append(chk.measured_rate)
        fits = {}
        if len(grid) >= 3:
            slope = float(np.polyfit(np.log(grid), np.log(rates), 1)[0])
            fits["drive_scaling"] = {"log_log_slope": slope}
        return (["omega_drv_ghz", "measured_rate_mhz", "uncertainty",
                 "predicted_rate_mhz", "ratio"], rows, fits, {})

    if name == "qpt":
        out = protocol.qpt_experiment(p, options)
        chi = out["chi"]
        rows = []
        basis = ("I", "X", "Y", "Z")
        for i in range(4):
            for j in range(4):
                rows.append((i * 4 + j, abs(chi.entries[i, j]), 0.0))
        fits = {
            "process_fidelity": {
                "f_qpt": out["f_qpt"], "f_qpt_raw": out["f_qpt_raw"],
                "z_rotation_rad": out["z_rotation_rad"], "f_z": out["f_z"],
                "t_p_us": out["t_p_us"],
            }
        }
        return (["chi_index", "abs_chi", "uncertainty"], rows, fits,
                {"chi": tomography.chi_export_dict(chi)})

    if name == "fit":
        if not args.input:
            raise ConfigError("--experiment fit requires --input CSV")
        data = np.loadtxt(args.input, delimiter=",", skiprows=1)
        fit = FIT_MODELS[args.fit_model](data[:, 0], data[:, 1])
        rows = [(x, y, 0.0) for x, y in zip(data[:, 0], data[:, 1])]
        fits = {args.fit_model: {
            "model": fit.model,
            "params": {k: float(v) for k, v in fit.params.items()},
            "uncertainties": {k: float(v) for k, v in fit.uncertainties.items()},
            "residual_norm": fit.residual_norm,
            "converged": fit.converged,
        }}
        return (["x", "y", "uncertainty"], rows, fits, {})

    raise ConfigError(f"unknown experiment {name!r}")


def cmd_run(args):
    if args.from_manifest:
        with open(args.from_manifest) as f:
            manifest = json.load(f)
        device_kw, run_kw = parse_config_text(manifest["config_text"])
        p = DeviceParams(**device_kw)
        dims = SubsystemDims(*manifest["run"]["dims"])
        ns = argparse.Namespace(**vars(args))
        for key, val in manifest["run"]["args"].items():
            setattr(ns, key, val)
        args = ns
        config_text = manifest["config_text"]
    else:
        if not args.config:
            print("error: --config is required (or --from-manifest)",
                  file=sys.stderr)
            return 2
        if not os.path.exists(args.config):
            print(f"error: config file {args.config!r} not found", file=sys.stderr)
            return 2
        p, dims, run_kw = load_run_settings(args.config)
        with open(args.config) as f:
            config_text = f.read()

    if args.experiment is None:
        print("error: --experiment is required", file=sys.stderr)
        return 2

    sweep = _parse_sweep(args.sweep) if args.sweep else None
    options = _options_from_args(p, dims, run_kw, args)

    header, rows, fits, extra = run_experiment(p, options, args, sweep)

    os.makedirs(args.out, exist_ok=True)
    _write_results_csv(os.path.join(args.out, "results.csv"), header, rows)
    _write_json(os.path.join(args.out, "fits.json"), fits)
    manifest = {
        "version": __version__,
        "experiment": args.experiment,
        "config_text": config_text,
        "run": {
            "dims": dims.as_tuple(),
            "frame": options.frame,
            "dt_pulse_us": options.dt_pulse,
            "dt_idle_us": options.dt_idle,
            "args": {
                "experiment": args.experiment,
                "sweep": args.sweep,
                "seed": args.seed,
                "shots": args.shots,
                "dt": args.dt,
                "mode": args.mode,
                "delay": args.delay,
                "prep_angle": args.prep_angle,
                "detuning": args.detuning,
                "fit_leakage": args.fit_leakage,
                "fit_model": args.fit_model,
                "input": args.input,
            },
        },
    }
    if extra:
        manifest["extra"] = extra
    _write_json(os.path.join(args.out, "manifest.json"), manifest)
    return 0


def cmd_validate(args):
    if not args.config or not os.path.exists(args.config or ""):
        print(f"error: config file {args.config!r} not found", file=sys.stderr)
        return 2
    breaches = []
    try:
        p, dims, run_kw = load_run_settings(args.config)
    except ConfigError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1

    a = p.angular()
    print("normalized device parameters (linear | angular):")
    rows = [
        ("omega_ro", f"{p.omega_ro:.9g} GHz", f"{a.w_ro:.6g} rad/us"),
        ("omega_s", f"{p.omega_s:.9g} GHz", f"{a.w_s:.6g} rad/us"),
        ("omega_q", f"{p.omega_q:.9g} GHz", f"{a.w_q:.6g} rad/us"),
        ("alpha", f"{p.alpha:.9g} MHz", f"{a.alpha:.6g} rad/us"),
        ("g", f"{p.g:.9g} MHz", f"{a.g:.6g} rad/us"),
        ("g_102", f"{p.g_102:.9g} MHz", f"{a.g_102:.6g} rad/us"),
        ("chi_ro", f"{p.chi_ro:.9g} MHz", f"{a.chi_ro:.6g} rad/us"),
        ("chi_s", f"{p.chi_s:.9g} MHz", f"{a.chi_s:.6g} rad/us"),
        ("kappa_ro", f"{p.kappa_ro:.9g} MHz", f"{a.k_ro:.6g} 1/us"),
        ("kappa_s", f"{p.kappa_s:.9g} kHz", f"{a.k_s:.6g} 1/us"),
        ("t1_q", f"{p.t1_q:.9g} us", f"gamma1 {1 / p.t1_q:.6g} 1/us"),
        ("t2_q", f"{p.t2_q:.9g} us", f"gamma2 {1 / p.t2_q:.6g} 1/us"),
        ("bsb carrier", f"{bsb_frequency(p) / 2 / GHZ:.9g} GHz",
         f"{bsb_frequency(p) / 2:.6g} rad/us"),
        ("purcell limit", f"{purcell_limit(p):.4g} us", ""),
    ]
    for name, lin, ang in rows:
        print(f"  {name:14s} {lin:>22s}   {ang}")
    print(f"  truncation     {dims.as_tuple()} (total {dims.total}, cap {dims.cap})")

    frame = run_kw.get("frame", "dispersive")
    dt = run_kw.get("dt_pulse", 1e-4)
    if frame == "bare":
        w_max = max(abs(a.w_q - a.w_s), abs(a.w_q - a.w_ro))
        bound = TWO_PI / (20.0 * w_max)
        if dt > bound:
            breaches.append(
                f"dt_pulse = {dt:.3g} us too large for frame 'bare'; "
                f"need <= {bound:.3g} us")
    if frame not in ("dispersive", "bare", "lab"):
        breaches.append(f"unknown frame {frame!r}")

    if breaches:
        for b in breaches:
            print("breach:", b, file=sys.stderr)
        return 1
    print("config valid")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="qmemsim",
        description="Pulse-level simulator for a multimode-cavity transmon "
                    "quantum memory")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named experiment")
    run.add_argument("--config", help="device config file")
    run.add_argument("--from-manifest", help="reproduce a previous run")
    run.add_argument("--experiment", choices=EXPERIMENTS)
    run.add_argument("--sweep", help="VAR=start:stop:steps")
    run.add_argument("--out", default="qmemsim-out", help="output directory")
    run.add_argument("--jobs", type=int, default=1, help="parallel sweep points")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--dt", type=float, default=None, help="pulse step in ns")
    run.add_argument("--shots", type=int, default=None,
                     help="sampled tomography shots")
    run.add_argument("--mode", choices=("readout", "storage"), default="readout")
    run.add_argument("--delay", type=float, default=0.0, help="storage delay us")
    run.add_argument("--prep-angle", dest="prep_angle", type=float, default=0.0)
    run.add_argument("--detuning", type=float, default=0.35,
                     help="Ramsey software detuning MHz")
    run.add_argument("--fit-leakage", action="store_true",
                     help="fit the leakage model to the Z-fidelity sweep")
    run.add_argument("--fit-model", choices=sorted(FIT_MODELS), default="exponential")
    run.add_argument("--input", help="input CSV for --experiment fit")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="validate a config file")
    val.add_argument("--config", required=True)
    val.set_defaults(func=cmd_validate)

    init = sub.add_parser("init-config", help="write the sample config")
    init.add_argument("path")
    init.set_defaults(func=lambda a: (write_sample_config(a.path), 0)[1])

    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QmemError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
