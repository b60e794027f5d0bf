"""Command-line entry point.

`quadtrack run` resolves a configuration from defaults, an optional INI-style
config file, and flag overrides (flags win), certifies the gains, runs the
simulation, and writes three files into the output directory:

* log.csv      the full per-step log, 17-significant-digit text so a parse
               round-trip reproduces the in-memory array exactly
* manifest     the fully resolved configuration plus toolkit version and the
               certification report; feeding it back through --config re-runs
               the simulation bit-identically
* metrics      key = value summary statistics

Exit codes: 0 success, 2 usage, 3 malformed config or invalid values,
4 gain certification failure, 5 envelope abort or integration fault,
6 output I/O error.
"""

import argparse
import configparser
import os
import sys

import numpy as np

from . import __version__
from .controller import CertificationError, validate_gains
from .numerics import IntegrationError
from .simulator import (EnvelopeAbort, LOG_COLUMNS, Metrics, SimConfig,
                        simulate)

_FLOAT_FMT = "%.17g"

_BOOLS = {"on": True, "true": True, "yes": True, "1": True,
          "off": False, "false": False, "no": False, "0": False}


class ConfigError(ValueError):
    """Config file or value rejected; maps to exit code 3."""


def _fmt(v):
    if isinstance(v, bool):
        return "on" if v else "off"
    if isinstance(v, float):
        return _FLOAT_FMT % v
    return str(v)


def _parse_bool(raw, where):
    try:
        return _BOOLS[raw.strip().lower()]
    except KeyError:
        raise ConfigError("%s: expected on/off, got %r" % (where, raw))


def _parse_float(raw, where):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError("%s: expected a number, got %r" % (where, raw))


def _parse_state(raw, where):
    parts = [p for p in raw.replace(",", " ").split() if p]
    if len(parts) != 10:
        raise ConfigError("%s: expected 10 state components, got %d"
                          % (where, len(parts)))
    return np.array([_parse_float(p, where) for p in parts])


# Sections written by the manifest but not consumed when loading.
_INFO_SECTIONS = ("meta", "certification")


def apply_config_file(cfg: SimConfig, path) -> SimConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc))
    except configparser.Error as exc:
        raise ConfigError("malformed config %s: %s" % (path, exc))

    for section in parser.sections():
        if section in _INFO_SECTIONS:
            continue
        if section not in ("simulation", "altitude", "controller",
                           "observer"):
            raise ConfigError("unknown config section [%s]" % section)
        for key, raw in parser.items(section):
            where = "[%s] %s" % (section, key)
            if section == "simulation":
                if key == "scenario":
                    cfg.scenario = raw.strip()
                elif key == "t_final":
                    cfg.t_final = _parse_float(raw, where)
                elif key == "dt_plant":
                    cfg.dt_plant = _parse_float(raw, where)
                elif key == "dt_observer":
                    cfg.dt_observer = _parse_float(raw, where)
                elif key == "g":
                    cfg.g = _parse_float(raw, where)
                elif key == "internal_model":
                    cfg.internal_model = _parse_bool(raw, where)
                elif key == "initial_state":
                    cfg.initial_state = _parse_state(raw, where)
                elif key == "transient_fraction":
                    cfg.transient_fraction = _parse_float(raw, where)
                elif key == "out":
                    cfg.out = raw.strip()
                else:
                    raise ConfigError("unknown key %s" % where)
            elif section == "altitude":
                if key in ("r0", "r1", "ell", "z_star"):
                    setattr(cfg.alt, key, _parse_float(raw, where))
                else:
                    raise ConfigError("unknown key %s" % where)
            elif section == "controller":
                if key in ("k1", "k2", "k3", "k4"):
                    cfg.ctrl.k[int(key[1]) - 1] = _parse_float(raw, where)
                elif key == "nu":
                    cfg.ctrl.nu = _parse_float(raw, where)
                elif key == "sign_convention":
                    cfg.ctrl.sign_convention = raw.strip()
                else:
                    raise ConfigError("unknown key %s" % where)
            else:
                if key == "preset":
                    cfg.observer_preset = raw.strip()
                elif key == "kappa":
                    cfg.kappa = _parse_float(raw, where)
                elif key in ("l1", "l2", "l3", "l4"):
                    ladder = list(cfg.ladder)
                    ladder[int(key[1]) - 1] = _parse_float(raw, where)
                    cfg.ladder = tuple(ladder)
                else:
                    raise ConfigError("unknown key %s" % where)
    return cfg


def build_parser():
    parser = argparse.ArgumentParser(
        prog="quadtrack",
        description="Robust output-feedback trajectory tracking for a "
                    "quadrotor model: simulation and gain certification.")
    sub = parser.add_subparsers(dest="cmd", required=True)
    run = sub.add_parser("run", help="run one simulation")
    run.add_argument("--scenario", choices=("periodic", "polynomial"),
                     default=None, help="reference preset")
    run.add_argument("--config", default=None,
                     help="INI config file or a previous run's manifest")
    run.add_argument("--out", default=None,
                     help="output directory (default: out)")
    run.add_argument("--t-final", type=float, default=None, dest="t_final")
    run.add_argument("--dt", type=float, default=None,
                     help="plant step size in seconds")
    run.add_argument("--kappa", type=float, default=None,
                     help="observer bandwidth override")
    run.add_argument("--preset", choices=("paper", "fast"), default=None,
                     help="observer gain preset")
    run.add_argument("--internal-model", choices=("on", "off"), default=None,
                     dest="internal_model")
    run.add_argument("--seed-state", default=None, dest="seed_state",
                     help="initial plant state, 10 comma-separated values "
                          "(x,vx,y,vy,z,vz,theta,dtheta,psi,dpsi)")
    return parser


def resolve_config(ns) -> SimConfig:
    cfg = SimConfig()
    if ns.config is not None:
        apply_config_file(cfg, ns.config)
    if ns.scenario is not None:
        cfg.scenario = ns.scenario
    if ns.t_final is not None:
        cfg.t_final = ns.t_final
    if ns.dt is not None:
        cfg.dt_plant = ns.dt
    if ns.kappa is not None:
        cfg.kappa = ns.kappa
    if ns.preset is not None:
        cfg.observer_preset = ns.preset
    if ns.internal_model is not None:
        cfg.internal_model = _parse_bool(ns.internal_model,
                                         "--internal-model")
    if ns.seed_state is not None:
        cfg.initial_state = _parse_state(ns.seed_state, "--seed-state")
    if ns.out is not None:
        cfg.out = ns.out
    if not cfg.out:
        cfg.out = "out"
    cfg.validate()
    # Fail fast on gain arguments the simulation would reject later.
    cfg.observer_gains()
    return cfg


def write_log_csv(path, log):
    np.savetxt(path, np.asarray(log, dtype=float), fmt=_FLOAT_FMT,
               delimiter=",", header=",".join(LOG_COLUMNS), comments="")


def read_log_csv(path):
    """Parse a log.csv back into the array written by write_log_csv.

    Validates the exact header; parsing is correctly rounded, so the result
    equals the original array bit for bit.
    """
    with open(path) as fh:
        header = fh.readline().strip()
        if header.split(",") != list(LOG_COLUMNS):
            raise ValueError("unexpected log header in %s" % path)
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != len(LOG_COLUMNS):
        raise ValueError("unexpected column count in %s" % path)
    return data


def write_metrics(path, m: Metrics):
    with open(path, "w") as fh:
        for key, value in m.as_dict().items():
            fh.write("%s = %s\n" % (key, _fmt(value)))


def write_manifest(path, cfg: SimConfig, report, out_paths):
    mp = configparser.ConfigParser()
    mp["meta"] = {
        "toolkit_version": __version__,
        "log_csv": out_paths["log"],
        "metrics": out_paths["metrics"],
    }
    mp["simulation"] = {
        "scenario": cfg.scenario,
        "t_final": _fmt(cfg.t_final),
        "dt_plant": _fmt(cfg.dt_plant),
        "dt_observer": _fmt(cfg.dt_observer if cfg.dt_observer is not None
                            else cfg.dt_plant),
        "g": _fmt(cfg.g),
        "internal_model": _fmt(cfg.internal_model),
        "initial_state": ",".join(_FLOAT_FMT % v for v in cfg.initial_state),
        "transient_fraction": _fmt(cfg.transient_fraction),
        "out": cfg.out,
    }
    mp["altitude"] = {
        "r0": _fmt(cfg.alt.r0),
        "r1": _fmt(cfg.alt.r1),
        "ell": _fmt(cfg.alt.ell),
        "z_star": _fmt(cfg.alt.z_star),
    }
    mp["controller"] = {
        "k1": _fmt(float(cfg.ctrl.k[0])),
        "k2": _fmt(float(cfg.ctrl.k[1])),
        "k3": _fmt(float(cfg.ctrl.k[2])),
        "k4": _fmt(float(cfg.ctrl.k[3])),
        "nu": _fmt(cfg.ctrl.nu),
        "sign_convention": cfg.ctrl.sign_convention,
    }
    gains = cfg.observer_gains()
    mp["observer"] = {
        "preset": cfg.observer_preset,
        "kappa": _fmt(gains.kappa),
        "l1": _fmt(float(cfg.ladder[0])),
        "l2": _fmt(float(cfg.ladder[1])),
        "l3": _fmt(float(cfg.ladder[2])),
        "l4": _fmt(float(cfg.ladder[3])),
    }
    mp["certification"] = {
        "quartic": ",".join(_FLOAT_FMT % c for c in report.quartic),
        "quartic_hurwitz": _fmt(report.quartic_hurwitz),
        "screen_betas": ",".join(_FLOAT_FMT % b
                                 for b in sorted(report.beta_screen)),
        "screen_ok": ",".join(_fmt(report.beta_screen[b])
                              for b in sorted(report.beta_screen)),
        "gain_gap": _fmt(report.gain_gap),
        "gain_gap_theta": _fmt(report.gain_gap_at[0]),
        "gain_gap_psi": _fmt(report.gain_gap_at[1]),
        "grid_n": str(report.grid_n),
        "angle_limit": _fmt(report.angle_limit),
    }
    with open(path, "w") as fh:
        mp.write(fh)


def run_cli(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    try:
        cfg = resolve_config(ns)
    except (ConfigError, ValueError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 3

    try:
        report = validate_gains(cfg.ctrl,
                                beta_bounds=cfg.alt.beta_bounds(cfg.g),
                                g=cfg.g)
        log, m = simulate(cfg)
    except CertificationError as exc:
        print("gain certification failed:\n%s" % exc, file=sys.stderr)
        return 4
    except (EnvelopeAbort, IntegrationError) as exc:
        print("simulation fault: %s" % exc, file=sys.stderr)
        return 5

    out_dir = cfg.out
    paths = {
        "log": os.path.join(out_dir, "log.csv"),
        "manifest": os.path.join(out_dir, "manifest"),
        "metrics": os.path.join(out_dir, "metrics"),
    }
    try:
        os.makedirs(out_dir, exist_ok=True)
        write_log_csv(paths["log"], log)
        write_manifest(paths["manifest"], cfg, report, paths)
        write_metrics(paths["metrics"], m)
    except OSError as exc:
        print("cannot write outputs under %s: %s" % (out_dir, exc),
              file=sys.stderr)
        return 6

    for key, value in m.as_dict().items():
        print("%s = %s" % (key, _fmt(value)))
    print("wrote %s, %s, %s" % (paths["log"], paths["manifest"],
                                paths["metrics"]))
    return 0


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
