"""Command-line front end.

Subcommands::

    esdkit simulate   one trajectory -> CSV/JSON
    esdkit sweep      one trajectory per parameter value -> long-format CSV/JSON
    esdkit verify     invariant suites, exit 1 on any failure
    esdkit preset     CSV bundle plus manifest for a figure id (fig1a ... fig11d)

Exit codes: 0 ok, 1 verification failure, 2 invalid input, 3 truncation,
4 solver failure.
"""
from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import EsdkitError, InvalidState, NonPhysicalDensity, TruncationInsufficient
from .model import PRESETS, AtomInitState
from .observables import OBSERVABLES, ObservableSeries
from .runner import RunConfig, SweepConfig, resolve_threads, simulate, sweep

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_TRUNCATION, EXIT_SOLVER = 0, 1, 2, 3, 4

# config-file keys -> RunConfig fields
_ALIASES = {"j": "j_ising", "steps": "tau_steps", "tau-max": "tau_max", "tau-min": "tau_min",
            "n-max": "n_max", "esd-tol": "esd_tol", "min-duration": "min_duration"}
_RUN_KEYS = ("init", "amps", "nbar", "lambda2", "j_ising", "delta", "tau_max", "tau_min",
             "tau_steps", "n_max", "esd_tol", "min_duration", "observables", "normalize")
_OTHER_KEYS = ("threads", "format", "param", "from", "to", "points", "level")
_DEST = {"from": "start", "to": "stop"}
SWEEP_ALIASES = {"j": "j_ising", "j_ising": "j_ising", "lambda2": "lambda2",
                 "delta": "delta", "nbar": "nbar"}


class InputError(Exception):
    """Bad command-line or config-file input (exit code 2)."""


def fmt(x: float) -> str:
    """12 significant digits, ``-0`` folded into ``0``."""
    return f"{float(x) + 0.0:.11e}"


def _columns(observables) -> list[str]:
    return [k for k in OBSERVABLES if k in observables]


def _series_rows(series: ObservableSeries, cols, prefix: str = ""):
    data = [series.tau] + [getattr(series, c) for c in cols]
    for row in zip(*data):
        yield prefix + ",".join(fmt(v) for v in row) + "\n"


def series_csv(series: ObservableSeries, observables=OBSERVABLES) -> str:
    cols = _columns(observables)
    buf = io.StringIO()
    buf.write(",".join(["tau"] + cols) + "\n")
    buf.writelines(_series_rows(series, cols))
    return buf.getvalue()


def sweep_csv(param: str, results, observables=OBSERVABLES) -> str:
    cols = _columns(observables)
    buf = io.StringIO()
    buf.write(",".join([param, "tau"] + cols) + "\n")
    for value, series in results:
        buf.writelines(_series_rows(series, cols, prefix=fmt(value) + ","))
    return buf.getvalue()


def _series_dict(series: ObservableSeries, cols) -> dict:
    out = {"tau": series.tau.tolist()}
    out.update({c: getattr(series, c).tolist() for c in cols})
    out["esd_intervals"] = [list(iv) for iv in series.esd_intervals]
    return out


def _config_dict(cfg: RunConfig) -> dict:
    d = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    if isinstance(cfg.init, AtomInitState):
        d["init"] = "custom"
    d["amps"] = [float(x) for z in cfg.atoms().as_array() for x in (z.real, z.imag)]
    d["observables"] = list(cfg.observables)
    return d


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _write(text: str, out: Optional[str]) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(out)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------- config assembly

def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise InputError("config file must hold a flat JSON object")
    out = {}
    for key, value in raw.items():
        k = _ALIASES.get(key, key)
        if k not in _RUN_KEYS + _OTHER_KEYS:
            raise InputError(f"unknown config key {key!r}")
        if isinstance(value, (dict, list)) and k not in ("amps", "observables"):
            raise InputError(f"config key {key!r} must be a scalar")
        out[k] = value
    return out


def _parse_amps(spec, normalize: bool = False) -> AtomInitState:
    if isinstance(spec, str):
        parts = [p for p in spec.replace(" ", "").split(",") if p]
    else:
        parts = list(spec)
    try:
        vals = [float(p) for p in parts]
    except (TypeError, ValueError):
        raise InputError("--amps needs 8 numbers: a_re,a_im,b_re,...,d_im") from None
    if len(vals) != 8:
        raise InputError(f"--amps needs 8 numbers, got {len(vals)}")
    amps = [complex(vals[i], vals[i + 1]) for i in range(0, 8, 2)]
    return AtomInitState.normalized(*amps) if normalize else AtomInitState(*amps)


def _merged(args: argparse.Namespace) -> dict:
    """Config-file values overridden by any flag given on the command line."""
    merged = _load_config(getattr(args, "config", None))
    for key in _RUN_KEYS + _OTHER_KEYS:
        value = getattr(args, _DEST.get(key, key), None)
        if value is not None:
            merged[key] = value
    return merged


def _run_config(m: dict) -> RunConfig:
    kw = {k: m[k] for k in ("nbar", "lambda2", "j_ising", "delta", "tau_max", "tau_min",
                            "esd_tol", "min_duration") if k in m}
    try:
        kw = {k: float(v) for k, v in kw.items()}
        if "tau_steps" in m:
            kw["tau_steps"] = _as_int(m["tau_steps"], "steps")
        if m.get("n_max") is not None:
            kw["n_max"] = _as_int(m["n_max"], "n-max")
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None
    if "observables" in m:
        obs = m["observables"]
        obs = obs.split(",") if isinstance(obs, str) else list(obs)
        kw["observables"] = tuple(o.strip() for o in obs if o.strip())
    if m.get("amps") is not None:
        kw["init"] = _parse_amps(m["amps"], bool(m.get("normalize")))
    elif m.get("init") is not None:
        if m["init"] not in PRESETS:
            raise InputError(f"unknown initial state {m['init']!r}; "
                             f"choose from {', '.join(PRESETS)}")
        kw["init"] = m["init"]
    if kw.get("n_max") is not None and kw["n_max"] < 0:
        raise InputError("n-max must be >= 0")
    return RunConfig(**kw)


def _as_int(v, name) -> int:
    f = float(v)
    if f != int(f):
        raise ValueError(f"{name} must be an integer")
    return int(f)


def _threads(m: dict) -> int:
    try:
        return resolve_threads(None if m.get("threads") is None else int(m["threads"]))
    except ValueError:
        raise InputError("threads must be an integer (flag or ESDKIT_THREADS)") from None


# ---------------------------------------------------------------- commands

def cmd_simulate(args) -> int:
    m = _merged(args)
    cfg = _run_config(m)
    series = simulate(cfg, threads=_threads(m))
    if m.get("format", "csv") == "json":
        doc = {"config": _config_dict(cfg), **_series_dict(series, _columns(cfg.observables))}
        _write(_dump_json(doc), args.out)
    else:
        _write(series_csv(series, cfg.observables), args.out)
    if args.esd_out:
        _write(_dump_json({"config": _config_dict(cfg),
                           "esd_intervals": [list(iv) for iv in series.esd_intervals]}),
               args.esd_out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    m = _merged(args)
    base = _run_config(m)
    if "param" not in m:
        raise InputError("sweep needs --param")
    param = SWEEP_ALIASES.get(str(m["param"]))
    if param is None:
        raise InputError(f"cannot sweep {m['param']!r}; choose from {sorted(SWEEP_ALIASES)}")
    for key in ("from", "to"):
        if key not in m:
            raise InputError(f"sweep needs --{key}")
    try:
        scfg = SweepConfig(base, param, float(m["from"]), float(m["to"]),
                           _as_int(m.get("points", 11), "points"))
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None
    results = sweep(scfg, threads=_threads(m))
    if m.get("format", "csv") == "json":
        cols = _columns(base.observables)
        doc = {"config": _config_dict(base), "param": param,
               "runs": [{"value": v, **_series_dict(s, cols)} for v, s in results]}
        _write(_dump_json(doc), args.out)
    else:
        _write(sweep_csv(param, results, base.observables), args.out)
    if args.esd_out:
        _write(_dump_json({"param": param,
                           "esd_intervals": [{"value": v, "intervals": [list(i) for i in
                                                                        s.esd_intervals]}
                                             for v, s in results]}), args.esd_out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import verify

    m = _merged(args)
    # a supplied config must at least be valid; it is checked but not run
    if any(k in m for k in _RUN_KEYS):
        _run_config(m)
    report = verify.run(m.get("level", "fast"))
    text = report.format() + "\n"
    if args.out:
        _write(text, args.out)
    sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_preset(args) -> int:
    from . import presets

    try:
        fig = presets.get(args.name)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    m = _merged(args)
    threads = _threads(m)
    out = Path(args.out or fig.name)
    out.mkdir(parents=True, exist_ok=True)
    lo, hi, steps = fig.window
    if args.steps is not None:
        steps = args.steps
    manifest = {"figure": fig.name, "quantity": fig.quantity, "nbar": fig.nbar,
                "tau_min": lo, "tau_max": hi, "tau_steps": steps, "notes": fig.notes,
                "version": __version__, "files": []}
    for curve in fig.curves:
        cfg = RunConfig(init=curve.init, nbar=fig.nbar, lambda2=curve.lambda2,
                        j_ising=curve.j_ising, delta=curve.delta, tau_min=lo, tau_max=hi,
                        tau_steps=steps)
        series = simulate(cfg, threads=threads)
        name = curve.label + ".csv"
        _write(series_csv(series), str(out / name))
        manifest["files"].append({"file": name, "init": curve.init, "lambda2": curve.lambda2,
                                  "j_ising": curve.j_ising, "delta": curve.delta,
                                  "uncertain": curve.uncertain,
                                  "esd_intervals": [list(i) for i in series.esd_intervals]})
    if fig.sweep is not None:
        sw = fig.sweep
        points = args.points if args.points is not None else sw.steps
        base = RunConfig(init=sw.init, nbar=fig.nbar, lambda2=sw.lambda2, delta=sw.delta,
                         tau_min=lo, tau_max=hi, tau_steps=steps)
        results = sweep(SweepConfig(base, sw.param, sw.start, sw.stop, points), threads=threads)
        name = f"{fig.name}_{sw.param}_sweep.csv"
        _write(sweep_csv(sw.param, results), str(out / name))
        manifest["files"].append({"file": name, "init": sw.init, "lambda2": sw.lambda2,
                                  "delta": sw.delta, "sweep": sw.param, "from": sw.start,
                                  "to": sw.stop, "points": points, "uncertain": sw.uncertain})
    _write(_dump_json(manifest), str(out / "manifest.json"))
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_run_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", help="flat JSON file of run settings; flags override it")
    g.add_argument("--init", help=f"initial atomic state: {', '.join(PRESETS)}")
    g.add_argument("--amps", help="custom initial state a_re,a_im,b_re,b_im,c_re,c_im,d_re,d_im")
    g.add_argument("--normalize", action="store_const", const=True,
                   help="rescale --amps to unit norm instead of rejecting it")
    g.add_argument("--nbar", type=float, help="mean photon number (default 100)")
    g.add_argument("--lambda2", type=float, help="dipole-dipole coupling / lambda1")
    g.add_argument("--j", dest="j_ising", type=float, help="Ising coupling / lambda1")
    g.add_argument("--delta", type=float, help="detuning / lambda1")
    g.add_argument("--tau-min", dest="tau_min", type=float, help="first scaled time (default 0)")
    g.add_argument("--tau-max", dest="tau_max", type=float, help="last scaled time (default 50)")
    g.add_argument("--steps", dest="tau_steps", type=int,
                   help="number of grid points, ends included (default 5001)")
    g.add_argument("--n-max", dest="n_max", type=int, help="Fock cutoff (default: from tail)")
    g.add_argument("--observables", help="comma list from concurrence,eof,sigma_z,tangle,esd")
    g.add_argument("--esd-tol", dest="esd_tol", type=float, help="ESD threshold (default 1e-6)")
    g.add_argument("--min-duration", dest="min_duration", type=float,
                   help="shortest ESD interval kept (default 0.5)")


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--esd-out", dest="esd_out", help="write ESD intervals to this JSON sidecar")
    p.add_argument("--threads", type=int, help="worker threads (default $ESDKIT_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esdkit", description="Entanglement dynamics of two coupled atoms in a cavity.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evolve one configuration")
    _add_run_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="scan one parameter")
    _add_run_flags(p)
    _add_output_flags(p)
    p.add_argument("--param", help="lambda2, j, delta or nbar")
    p.add_argument("--from", dest="start", type=float, help="first value")
    p.add_argument("--to", dest="stop", type=float, help="last value")
    p.add_argument("--points", type=int, help="number of values, ends included (default 11)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the invariant suites")
    _add_run_flags(p)
    p.add_argument("--level", choices=("fast", "full"), help="fast (default) or full")
    p.add_argument("--out", help="also write the report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("preset", help="reproduce the curves of a figure")
    p.add_argument("name", help="figure id, fig1a ... fig11d")
    p.add_argument("--out", help="output directory (default: the figure id)")
    p.add_argument("--steps", type=int, help="override the number of time points")
    p.add_argument("--points", type=int, help="override the number of sweep values")
    p.add_argument("--threads", type=int, help="worker threads (default $ESDKIT_THREADS or 1)")
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonPhysicalDensity as exc:
        print(f"esdkit: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InputError, InvalidState, ValueError, KeyError) as exc:
        print(f"esdkit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TruncationInsufficient as exc:
        print(f"esdkit: truncation: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except (EsdkitError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"esdkit: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
