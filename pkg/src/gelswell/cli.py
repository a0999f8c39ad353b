"""Command-line front end: curves, roots, map, simulate, scaling, trace."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import characteristics as ch
from . import constitutive as cst
from . import hyperbolicity as hyp
from . import io
from . import solver as sv
from .errors import ConfigError, GelSwellError
from .params import PRESETS, load_params

log = logging.getLogger("gelswell")


def _params(args):
    return load_params(args.params)


def _manifest(args, command, config=None, **extra):
    # parameters are hashed in canonical form so a preset and its JSON file agree
    canonical = json.dumps(_params(args).to_dict(), sort_keys=True).encode()
    files = [canonical] + ([config] if config else [])
    return io.RunManifest(
        command=command,
        config_path=None if config is None else str(config),
        param_id=Path(args.params).stem if args.params not in PRESETS else args.params,
        out_dir=str(args.out),
        version=__version__,
        input_sha256=io.sha256_inputs(files),
        **extra,
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sim_config(data: dict, extra_keys=()):
    sim = {k: v for k, v in data.items() if k not in extra_keys}
    return sv.SimConfig.from_dict(sim)


def cmd_curves(args):
    p = _params(args)
    if args.n < 2:
        raise ConfigError("n must be at least 2", field="n")
    phi = np.linspace(args.phi_min, args.phi_max, args.n)
    g, dg = cst.G(phi, p), cst.dG(phi, p)
    out = _out_dir(args)
    io.write_csv(out / "curves.csv", io.CURVES_HEADER, zip(phi, g, dg))
    _manifest(args, "curves", outputs=("curves.csv",)).write(out)
    return {"rows": int(args.n), "dG_negative": bool(np.all(dg < 0))}


def cmd_roots(args):
    p = _params(args)
    interval = (args.phi_min, args.phi_max)
    crit = hyp.find_phi_critical(p, interval, args.n)
    stars = hyp.solve_phi_star(p, interval, args.n)
    data = {
        "phi_critical": crit,
        "dG_at_phi_critical": [cst.dG(x, p) for x in crit],
        "phi_star": [s.phi for s in stars],
        "phi_star_residual": [s.residual for s in stars],
        "phi_star_admissible": [s.admissible for s in stars],
    }
    out = _out_dir(args)
    io.write_json(out / "roots.json", data)
    _manifest(args, "roots", outputs=("roots.json",)).write(out)
    return data


def cmd_map(args):
    p = _params(args)
    grid = hyp.scan_region(p, tuple(args.phi_range), tuple(args.u_range), args.n_phi, args.n_u)
    out = _out_dir(args)
    io.write_csv(out / "map.csv", io.MAP_HEADER, grid.rows())
    _manifest(args, "map", outputs=("map.csv",)).write(out)
    return {"rows": int(args.n_phi * args.n_u)}


def _write_record(out, record):
    io.write_csv(out / "snapshots.csv", io.SNAPSHOT_HEADER, io.snapshot_rows(record))
    io.write_csv(out / "diagnostics.csv", io.DIAGNOSTIC_HEADER, io.diagnostic_rows(record))
    io.write_csv(out / "interfaces.csv", io.INTERFACE_HEADER, io.interface_rows(record))
    return ("snapshots.csv", "diagnostics.csv", "interfaces.csv")


def cmd_simulate(args):
    p = _params(args)
    config = _sim_config(io.load_json(args.config))
    record = sv.run(config, p)
    out = _out_dir(args)
    files = _write_record(out, record)
    _manifest(
        args, "simulate", args.config, termination=record.termination, detail=record.detail, outputs=files
    ).write(out)
    return {"termination": record.termination, "t_final": record.final.t, "psi_star": record.psi_star}


def cmd_scaling(args):
    p = _params(args)
    data = io.load_json(args.config)
    if "eps" not in data:
        raise ConfigError("scaling config needs an 'eps' list", field="eps")
    config = _sim_config(data, extra_keys=("eps",))
    table = ch.lifetime_study(p, config, data["eps"])
    out = _out_dir(args)
    io.write_csv(out / "lifetime.csv", io.LIFETIME_HEADER, table.rows())
    fit = {"n": len(table.eps)}
    if len(table.eps) >= 2:
        fit.update(slope=table.slope, intercept=table.intercept)
    if len(table.eps) >= 3:
        fit["correlation"] = table.correlation
    io.write_json(out / "fit.json", fit)
    _manifest(args, "scaling", args.config, outputs=("lifetime.csv", "fit.json")).write(out)
    return fit


def cmd_trace(args):
    p = _params(args)
    data = io.load_json(args.config)
    anchors = data.get("anchors")
    if not anchors:
        raise ConfigError("trace config needs a non-empty 'anchors' list", field="anchors")
    config = _sim_config(data, extra_keys=("anchors",))
    record = sv.run(config, p)
    speed = ch.SpeedField(record)
    out = _out_dir(args)
    files, checks = [], []
    for k, a in enumerate(anchors):
        trace = ch.trace_characteristic(record, int(a["family"]), (a["y"], a["t"]), speed)
        name = f"trace_{k:03d}.csv"
        io.write_csv(out / name, io.TRACE_HEADER, trace.rows())
        files.append(name)
        c = ch.check_reflection_times(trace, speed)
        checks.append({
            "anchor": [trace.anchor[0], trace.anchor[1]],
            "family": trace.family,
            "reflections": [[e[0], e[1], e[2]] for e in trace.events],
            "first_ok": c.first_ok, "second_ok": c.second_ok, "double_ok": c.double_ok,
        })
    summary = {"T1": 1.0 / speed.lambda_max, "T2": 1.0 / speed.lambda_min, "traces": checks}
    io.write_json(out / "reflections.json", summary)
    files.append("reflections.json")
    _manifest(args, "trace", args.config, termination=record.termination, outputs=tuple(files)).write(out)
    return {"all_ok": all(c["first_ok"] and c["second_ok"] and c["double_ok"] for c in checks)}


def build_parser():
    ap = argparse.ArgumentParser(prog="gelswell", description=__doc__)
    ap.add_argument("--params", default="polymer", help="preset name or ParameterSet JSON (default: polymer)")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--seedless", action="store_true", help="reserved; no command uses randomness")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curves", help="tabulate G and G'")
    c.add_argument("--phi-min", type=float, default=0.01)
    c.add_argument("--phi-max", type=float, default=0.99)
    c.add_argument("--n", type=int, default=1000)
    c.set_defaults(func=cmd_curves)

    r = sub.add_parser("roots", help="critical fractions and saturation values")
    r.add_argument("--phi-min", type=float, default=hyp.DEFAULT_INTERVAL[0])
    r.add_argument("--phi-max", type=float, default=hyp.DEFAULT_INTERVAL[1])
    r.add_argument("--n", type=int, default=hyp.DEFAULT_SCAN)
    r.set_defaults(func=cmd_roots)

    m = sub.add_parser("map", help="hyperbolicity / boundary-condition margins on a grid")
    m.add_argument("--phi-range", type=float, nargs=2, default=(0.05, 0.95))
    m.add_argument("--u-range", type=float, nargs=2, default=(-1.0, 1.0))
    m.add_argument("--n-phi", type=int, default=91)
    m.add_argument("--n-u", type=int, default=41)
    m.set_defaults(func=cmd_map)

    for name, func, text in (
        ("simulate", cmd_simulate, "run the fixed-domain solver"),
        ("scaling", cmd_scaling, "lifetime study over an eps list"),
        ("trace", cmd_trace, "trace characteristics through a recorded run"),
    ):
        s = sub.add_parser(name, help=text)
        s.add_argument("config", help="JSON config")
        s.set_defaults(func=func)
    return ap


def _error_payload(exc):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    for key in ("field", "line", "margin"):
        value = getattr(exc, key, None)
        if value is not None:
            payload[key] = value
    return payload


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        summary = args.func(args)
    except (GelSwellError, OSError, KeyError, TypeError) as exc:
        print(json.dumps(_error_payload(exc), sort_keys=True), file=sys.stderr)
        return 2
    print(json.dumps(summary, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
