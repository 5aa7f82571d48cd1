"""Batch driver: one subcommand per analysis, CSV out.

Option values are resolved per field as command-line flag, then environment
variable ``IKEDA_<FLAG>`` (upper case, dashes as underscores), then the
``--config`` file (``key=value`` lines using the flag names), then the
built-in default.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import extremes, orbits, spectrum
from .core import MapParams

EXIT_OK, EXIT_IO, EXIT_USAGE = 0, 1, 2

SHARED = {
    "gamma": (float, 0.8, "gain/loss coefficient"),
    "beta": (float, 1.0, "nonlinear phase coefficient"),
    "eta": (float, 1e-3, "saturation strength"),
    "ein": (float, 0.65, "drive amplitude, used for both inputs"),
    "transient": (int, 1500, "discarded iterations"),
    "keep": (int, 2000, "recorded iterations"),
    "out": (str, "-", "output CSV path, '-' for stdout"),
}

COMMANDS = {
    "eigsweep": {
        "gamma-min": (float, 0.0, None),
        "gamma-max": (float, 1.5, None),
        "steps": (int, 151, "number of gamma samples"),
    },
    "orbit": {},
    "bifurcation": {
        "gamma-min": (float, 0.6, None),
        "gamma-max": (float, 1.0, None),
        "gamma-steps": (int, 400, None),
        "points": (int, 200, "steady-state P4 samples per gamma"),
    },
    "lle": {
        "gamma-min": (float, 0.6, None),
        "gamma-max": (float, 1.0, None),
        "gamma-steps": (int, 400, None),
        "h": (float, 1e-6, "finite-difference step of the Jacobian"),
    },
    "basin": {
        "gamma-min": (float, 0.6, None),
        "gamma-max": (float, 1.1, None),
        "ein-min": (float, 0.3, None),
        "ein-max": (float, 0.9, None),
        "res": (int, 100, "cells per axis"),
        "workers": (int, 1, "worker processes"),
    },
    "ee": {
        "gamma": (float, 0.96, None),
        "keep": (int, 1_000_000, None),
        "multiplier": (float, 8.0, "threshold is mean + multiplier * std"),
        "bins": (int, 200, "histogram bins"),
        "events-out": (str, "", "event index CSV (default: <out>_events.csv)"),
        "hist-out": (str, "", "histogram CSV (default: <out>_hist.csv)"),
    },
    "crisis": {
        "gamma": (float, 0.96, None),
        "keep": (int, 100_000, None),
        "switch-min": (int, 10, "sign switches needed to call the attractors merged"),
        "bins": (int, 200, "Im(E4) histogram bins"),
        "plane-out": (str, "", "Re/Im E4 dump (default: <out>_plane.csv)"),
        "hist-out": (str, "", "Im(E4) histogram (default: <out>_hist.csv)"),
    },
}


class UsageError(Exception):
    pass


def fmt(x) -> str:
    return f"{float(x):.17g}"


def read_config(path) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, val = line.split("=", 1)
        values[key.strip().lstrip("-").replace("_", "-")] = val.strip()
    return values


def options_for(command: str) -> dict:
    opts = dict(SHARED)
    opts.update(COMMANDS[command])
    return opts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptikeda", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key=value file with flag defaults")
        for flag, (typ, default, help_) in options_for(name).items():
            p.add_argument(f"--{flag}", type=typ, default=argparse.SUPPRESS,
                           help=f"{help_ or flag} (default {default!r})")
    return parser


def resolve(command: str, ns: argparse.Namespace, environ=None) -> dict:
    """Merge flag > env > config file > default into one ``{flag: value}`` dict."""
    environ = os.environ if environ is None else environ
    config = read_config(ns.config) if ns.config else {}
    resolved = {}
    for flag, (typ, default, _) in options_for(command).items():
        attr = flag.replace("-", "_")
        env_key = "IKEDA_" + attr.upper()
        try:
            if hasattr(ns, attr):
                value = getattr(ns, attr)
            elif env_key in environ:
                value = typ(environ[env_key])
            elif flag in config:
                value = typ(config[flag])
            else:
                value = default
        except ValueError as exc:
            raise UsageError(f"bad value for {flag}: {exc}") from None
        resolved[flag] = value
    return resolved


def _params(cfg) -> MapParams:
    return MapParams(gamma=cfg["gamma"], beta=cfg["beta"], eta=cfg["eta"],
                     e_in=cfg["ein"], e_in_prime=cfg["ein"])


def _spec(cfg) -> orbits.OrbitSpec:
    return orbits.OrbitSpec(n_transient=cfg["transient"], n_keep=cfg["keep"])


def _side_path(cfg, key, suffix):
    if cfg[key]:
        return cfg[key]
    if cfg["out"] == "-":
        return None
    out = Path(cfg["out"])
    return str(out.with_name(out.stem + suffix + (out.suffix or ".csv")))


def _write(path, header, rows):
    if path is None:
        return
    if path == "-":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def cmd_eigsweep(cfg):
    results = spectrum.eigenspectrum_sweep(cfg["gamma-min"], cfg["gamma-max"], cfg["steps"])
    rows = ([fmt(r.gamma), fmt(r.lambda1.real), fmt(r.lambda1.imag),
             fmt(r.lambda2.real), fmt(r.lambda2.imag), r.regime.value] for r in results)
    _write(cfg["out"], ["gamma", "re_l1", "im_l1", "re_l2", "im_l2", "regime"], rows)


def cmd_orbit(cfg):
    spec = _spec(cfg)
    orbit = orbits.iterate_orbit(_params(cfg), spec)

    def rows():
        for k, (a, b) in enumerate(zip(orbit.e1, orbit.e4)):
            yield [spec.n_transient + k + 1, fmt(a.real), fmt(a.imag), fmt(b.real), fmt(b.imag),
                   fmt(abs(a) ** 2), fmt(abs(b) ** 2)]
        if orbit.diverged:
            yield ["diverged"] * 7

    _write(cfg["out"], ["iter", "re_e1", "im_e1", "re_e4", "im_e4", "p1", "p4"], rows())


def cmd_bifurcation(cfg):
    table = orbits.bifurcation_scan(_params(cfg), cfg["gamma-min"], cfg["gamma-max"],
                                    cfg["gamma-steps"], _spec(cfg), cfg["points"])
    rows = ([fmt(g), "diverged" if v is None else fmt(v)] for g, v in table.rows())
    _write(cfg["out"], ["gamma", "p4"], rows)


def cmd_lle(cfg):
    gammas, lles, diverged = orbits.lle_scan(_params(cfg), cfg["gamma-min"], cfg["gamma-max"],
                                             cfg["gamma-steps"], _spec(cfg), cfg["h"])
    rows = ([fmt(g), "diverged" if bad else fmt(v)] for g, v, bad in zip(gammas, lles, diverged))
    _write(cfg["out"], ["gamma", "lle"], rows)


def cmd_basin(cfg):
    grid = orbits.parameter_basin((cfg["gamma-min"], cfg["gamma-max"]),
                                  (cfg["ein-min"], cfg["ein-max"]), cfg["res"], cfg["res"],
                                  _spec(cfg), _params(cfg), workers=cfg["workers"])
    rows = []
    for g, e, cell in grid.rows():
        lle = "diverged" if cell.label is orbits.PeriodLabel.DIVERGED else fmt(cell.lle)
        rows.append([fmt(g), fmt(e), cell.label.value, lle])
    _write(cfg["out"], ["gamma", "e_in", "label", "lle"], rows)


def _long_orbit(cfg):
    orbit = orbits.iterate_orbit(_params(cfg), _spec(cfg))
    if orbit.diverged:
        raise UsageError(f"orbit diverged at gamma={cfg['gamma']}; nothing to analyse")
    return orbit


def cmd_ee(cfg):
    orbit = _long_orbit(cfg)
    report = extremes.ee_report(orbit.p4, cfg["multiplier"])
    hist = extremes.probability_histogram(orbit.p4, cfg["bins"])
    _write(cfg["out"],
           ["gamma", "n_samples", "mean", "std", "multiplier", "threshold", "n_events",
            "max_value", "hist_mass_above_threshold"],
           [[fmt(cfg["gamma"]), report.n_samples, fmt(report.mean), fmt(report.std),
             fmt(report.multiplier), fmt(report.threshold), report.n_events,
             fmt(report.max_value), fmt(hist.mass_above(report.threshold))]])
    _write(_side_path(cfg, "events-out", "_events"), ["index", "p4"],
           ([int(i), fmt(orbit.p4[i])] for i in report.event_indices))
    _write(_side_path(cfg, "hist-out", "_hist"), ["bin_left", "bin_right", "prob"],
           ([fmt(a), fmt(b), fmt(p)] for a, b, p in zip(hist.edges[:-1], hist.edges[1:], hist.probs)))


def cmd_crisis(cfg):
    orbit = _long_orbit(cfg)
    report = extremes.crisis_report(orbit, cfg["switch-min"])
    gap = "" if np.isnan(report.cluster_gap) else fmt(report.cluster_gap)
    _write(cfg["out"], ["gamma", "frac_positive", "n_sign_switches", "cluster_gap", "merged"],
           [[fmt(cfg["gamma"]), fmt(report.frac_positive), report.n_sign_switches, gap,
             str(report.merged).lower()]])
    plane = extremes.state_plane_dump(orbit)
    _write(_side_path(cfg, "plane-out", "_plane"), ["re_e4", "im_e4"],
           ([fmt(a), fmt(b)] for a, b in plane))
    hist = extremes.probability_histogram(plane[:, 1], cfg["bins"])
    _write(_side_path(cfg, "hist-out", "_hist"), ["bin_left", "bin_right", "prob"],
           ([fmt(a), fmt(b), fmt(p)] for a, b, p in zip(hist.edges[:-1], hist.edges[1:], hist.probs)))


HANDLERS = {
    "eigsweep": cmd_eigsweep,
    "orbit": cmd_orbit,
    "bifurcation": cmd_bifurcation,
    "lle": cmd_lle,
    "basin": cmd_basin,
    "ee": cmd_ee,
    "crisis": cmd_crisis,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)  # exits with 2 on flag errors
    try:
        cfg = resolve(ns.command, ns)
        HANDLERS[ns.command](cfg)
    except (UsageError, ValueError) as exc:
        print(f"ptikeda {ns.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ptikeda {ns.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
