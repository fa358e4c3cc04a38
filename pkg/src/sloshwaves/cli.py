"""sloshctl: config-driven runner for simulation, eigenmodes, control, checks.

Configs are INI-like text with [section] headers and key = value lines.
Unknown sections or keys are rejected rather than ignored, every run writes
a report.txt echoing the fully resolved configuration, and numeric output
uses 17 significant digits so repeated runs are byte-identical.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import os
import sys

import numpy as np

from . import chebyshev as cheb
from . import control as ctl
from . import evolution as evo
from . import galerkin
from . import verify as checks


class ConfigError(Exception):
    """Malformed, unknown, or inconsistent configuration input."""


def _fmt(value):
    if isinstance(value, float):
        return "%.17g" % value
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def _p_int(raw, where):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{where}: expected an integer, got {raw!r}") from None


def _p_float(raw, where):
    try:
        val = float(raw)
    except ValueError:
        raise ConfigError(f"{where}: expected a number, got {raw!r}") from None
    if not np.isfinite(val):
        raise ConfigError(f"{where}: value must be finite")
    return val


def _p_str(raw, where):
    return raw


def _p_floats(raw, where):
    parts = [p.strip() for p in raw.split(",")]
    if not parts or any(not p for p in parts):
        raise ConfigError(f"{where}: expected a comma-separated list of numbers")
    return [_p_float(p, where) for p in parts]


def _p_choice(*options):
    def parse(raw, where):
        if raw not in options:
            raise ConfigError(f"{where}: must be one of {', '.join(options)}, "
                              f"got {raw!r}")
        return raw
    return parse


_REQ = object()

# default None means the key is optional and simply absent when not given
_DATA_BLOCK = {
    "kind": (_p_choice("zero", "eigenmode", "gaussian", "coeffs"), "zero"),
    "index": (_p_int, None),
    "amplitude": (_p_float, None),
    "mu": (_p_float, None),
    "sigma": (_p_float, None),
    "values": (_p_floats, None),
}

_TARGET_BLOCK = dict(_DATA_BLOCK)
_TARGET_BLOCK["kind"] = (_p_choice("zero", "eigenmode", "gaussian", "coeffs",
                                   "manufactured"), _REQ)

SCHEMAS = {
    "simulate": {
        "run": {"mode": (_p_str, _REQ), "n": (_p_int, 64), "t": (_p_float, _REQ),
                "dt": (_p_float, _REQ), "seed": (_p_int, 0)},
        "initial": _DATA_BLOCK,
        "initial_velocity": _DATA_BLOCK,
        "rhs": {"kind": (_p_choice("zero", "linear"), "zero"),
                "c": (_p_float, None)},
        "output": {"dir": (_p_str, ".")},
    },
    "eigen": {
        "run": {"mode": (_p_str, _REQ), "n": (_p_int, 128),
                "count": (_p_int, 8), "seed": (_p_int, 0)},
        "output": {"dir": (_p_str, ".")},
    },
    "control": {
        "run": {"mode": (_p_str, _REQ), "n": (_p_int, 24), "t": (_p_float, _REQ),
                "steps": (_p_int, _REQ), "seed": (_p_int, 0)},
        "control": {"window_lo": (_p_float, _REQ), "window_hi": (_p_float, _REQ),
                    "eps": (_p_float, 1e-6), "reg": (_p_float, 0.0),
                    "max_iter": (_p_int, 300)},
        "target": _TARGET_BLOCK,
        "target_velocity": _DATA_BLOCK,
        "initial": _DATA_BLOCK,
        "initial_velocity": _DATA_BLOCK,
        "output": {"dir": (_p_str, ".")},
    },
    "verify": {
        "run": {"mode": (_p_str, _REQ), "seed": (_p_int, 0),
                "checks": (_p_str, None)},
        "output": {"dir": (_p_str, ".")},
    },
}

_KIND_KEYS = {
    "zero": set(),
    "eigenmode": {"index", "amplitude"},
    "gaussian": {"mu", "sigma", "amplitude"},
    "coeffs": {"values", "amplitude"},
    "manufactured": set(),
}
_KIND_REQUIRED = {
    "eigenmode": {"index"},
    "gaussian": {"mu", "sigma"},
    "coeffs": {"values"},
}


def parse_sections(text):
    """Split INI-like text into {section: {key: raw value}}; strict syntax."""
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ConfigError(f"line {lineno}: empty section name")
            if name in sections:
                raise ConfigError(f"line {lineno}: duplicate section [{name}]")
            sections[name] = {}
            current = name
        elif "=" in line:
            if current is None:
                raise ConfigError(f"line {lineno}: key outside any section")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if not key:
                raise ConfigError(f"line {lineno}: empty key")
            if key in sections[current]:
                raise ConfigError(f"line {lineno}: duplicate key {key!r} "
                                  f"in [{current}]")
            sections[current][key] = val
        else:
            raise ConfigError(f"line {lineno}: expected 'key = value' "
                              f"or '[section]', got {line!r}")
    return sections


def resolve_config(mode, sections):
    """Validate raw sections against the schema for mode and apply defaults."""
    schema = SCHEMAS[mode]
    declared = sections.get("run", {}).get("mode")
    if declared is not None and declared != mode:
        raise ConfigError(f"config declares mode={declared} but the "
                          f"subcommand is {mode}")
    for sec in sections:
        if sec not in schema:
            raise ConfigError(f"unknown section [{sec}] for mode {mode}")
    resolved = {}
    for sec, keys in schema.items():
        raw = sections.get(sec, {})
        for key in raw:
            if key not in keys:
                raise ConfigError(f"[{sec}]: unknown key {key!r}")
        block = {}
        for key, (parser, default) in keys.items():
            if key in raw:
                block[key] = parser(raw[key], f"[{sec}] {key}")
            elif default is _REQ:
                raise ConfigError(f"[{sec}]: missing required key {key!r}")
            elif default is not None:
                block[key] = default
        resolved[sec] = block
    for sec in ("initial", "initial_velocity", "target", "target_velocity"):
        if sec in resolved:
            _check_data_block(sec, resolved[sec])
    if "rhs" in resolved:
        block = resolved["rhs"]
        if block["kind"] == "linear":
            if "c" not in block:
                raise ConfigError("[rhs]: kind=linear requires key 'c'")
            if block["c"] == 0.0:
                raise ConfigError("[rhs]: c must be nonzero; use kind=zero")
        elif "c" in block:
            raise ConfigError("[rhs]: key 'c' not allowed for kind=zero")
    return resolved


def _check_data_block(name, block):
    kind = block["kind"]
    allowed = _KIND_KEYS[kind] | {"kind"}
    extra = sorted(set(block) - allowed)
    if extra:
        raise ConfigError(f"[{name}]: key(s) {', '.join(extra)} not allowed "
                          f"for kind={kind}")
    missing = sorted(_KIND_REQUIRED.get(kind, set()) - set(block))
    if missing:
        raise ConfigError(f"[{name}]: kind={kind} requires key(s) "
                          f"{', '.join(missing)}")
    if kind in ("eigenmode", "gaussian", "coeffs") and "amplitude" not in block:
        block["amplitude"] = 1.0


def _echo_lines(resolved):
    lines = []
    for sec in sorted(resolved):
        for key in sorted(resolved[sec]):
            lines.append(f"{sec}.{key}={_fmt(resolved[sec][key])}")
    return lines


def _coeff_vector(name, block, sys_, n):
    kind = block["kind"]
    if kind == "zero":
        return np.zeros(n)
    amp = block["amplitude"]
    if kind == "eigenmode":
        idx = block["index"]
        if not 0 <= idx < n:
            raise ConfigError(f"[{name}]: index must lie in [0, {n - 1}]")
        dec = galerkin.eigenmodes(sys_, idx + 1)
        return amp * dec.vectors[:, idx]
    if kind == "gaussian":
        if block["sigma"] <= 0.0:
            raise ConfigError(f"[{name}]: sigma must be positive")
        grid = cheb.cheb_grid(n)
        vals = amp * np.exp(-((grid.x - block["mu"]) ** 2)
                            / (2.0 * block["sigma"] ** 2))
        return cheb.to_coeffs(cheb.GridFunction(vals, grid))
    vals = np.asarray(block["values"], dtype=float)
    if vals.size > n:
        raise ConfigError(f"[{name}]: {vals.size} coefficients exceed n={n}")
    out = np.zeros(n)
    out[: vals.size] = amp * vals
    return out


def _cmd_simulate(resolved, outdir):
    run = resolved["run"]
    n = run["n"]
    if n < 2:
        raise ConfigError("[run]: n must be at least 2")
    sys_ = galerkin.build_system(n)
    a0 = _coeff_vector("initial", resolved["initial"], sys_, n)
    z0 = _coeff_vector("initial_velocity", resolved["initial_velocity"], sys_, n)
    rhs_block = resolved["rhs"]
    if rhs_block["kind"] == "zero":
        rhs = evo.ZeroRhs()
    else:
        c = rhs_block["c"]
        rhs = evo.LipschitzRhs(lambda s: c * s, abs(c))
    state0 = evo.WaveState(0.0, a0, z0)
    states, energies = evo.simulate(state0, run["t"], run["dt"], rhs, sys_)
    evo.write_trajectory(os.path.join(outdir, "trajectory.csv"), states, energies)
    drift = abs(energies[-1].conserved - energies[0].conserved) \
        / max(abs(energies[0].conserved), np.finfo(float).tiny)
    lines = [
        f"steps={len(states) - 1}",
        f"final_time={_fmt(states[-1].t)}",
        f"energy_initial={_fmt(energies[0].total)}",
        f"energy_final={_fmt(energies[-1].total)}",
        f"conserved_drift_rel={_fmt(drift)}",
        "artifact=trajectory.csv",
    ]
    return "ok", lines


def _cmd_eigen(resolved, outdir):
    run = resolved["run"]
    n = run["n"]
    count = run["count"]
    if n < 2:
        raise ConfigError("[run]: n must be at least 2")
    if not 1 <= count <= n:
        raise ConfigError(f"[run]: count must lie in [1, {n}]")
    sys_ = galerkin.build_system(n)
    dec = galerkin.eigenmodes(sys_, count)
    path = os.path.join(outdir, "modes.csv")
    with open(path, "w", newline="\n") as fh:
        fh.write("lambda," + ",".join(f"a_{i}" for i in range(n)) + "\n")
        for k in range(count):
            row = [_fmt(float(dec.values[k]))]
            row += [_fmt(float(v)) for v in dec.vectors[:, k]]
            fh.write(",".join(row) + "\n")
    lines = [f"count={count}"]
    lines += [f"lambda_{k}={_fmt(float(dec.values[k]))}" for k in range(count)]
    lines.append("artifact=modes.csv")
    return "ok", lines


def _cmd_control(resolved, outdir):
    run = resolved["run"]
    n = run["n"]
    if n < 2:
        raise ConfigError("[run]: n must be at least 2")
    if run["steps"] < 1:
        raise ConfigError("[run]: steps must be positive")
    if run["t"] <= 0.0:
        raise ConfigError("[run]: t must be positive")
    block = resolved["control"]
    if block["eps"] <= 0.0:
        raise ConfigError("[control]: eps must be positive")
    if block["reg"] < 0.0:
        raise ConfigError("[control]: reg must be nonnegative")
    if block["max_iter"] < 1:
        raise ConfigError("[control]: max_iter must be positive")
    sys_ = galerkin.build_system(n)
    try:
        window = ctl.ControlWindow(block["window_lo"], block["window_hi"],
                                   cheb.cheb_grid(n))
    except ValueError as exc:
        raise ConfigError(f"[control]: {exc}") from None
    dt = run["t"] / run["steps"]
    if resolved["target"]["kind"] == "manufactured":
        if resolved["target_velocity"]["kind"] != "zero":
            raise ConfigError("[target_velocity]: not allowed with a "
                              "manufactured target")
        target, _ = ctl.manufactured_target(sys_, window, run["t"],
                                            run["steps"], run["seed"])
    else:
        g0 = _coeff_vector("target", resolved["target"], sys_, n)
        g1 = _coeff_vector("target_velocity", resolved["target_velocity"],
                           sys_, n)
        target = ctl.TargetState(g0, g1)
    a0 = _coeff_vector("initial", resolved["initial"], sys_, n)
    z0 = _coeff_vector("initial_velocity", resolved["initial_velocity"], sys_, n)
    init = evo.WaveState(0.0, a0, z0)
    result = ctl.synthesize(init, target, window, run["t"], dt, sys_,
                            eps=block["eps"], reg=block["reg"],
                            max_iter=block["max_iter"])
    ctl.write_signal(os.path.join(outdir, "control.csv"), result.signal)
    lines = ctl.report_lines(result)
    lines.append("artifact=control.csv")
    return ("ok" if result.converged else "non-convergence"), lines


def _cmd_verify(resolved, outdir):
    run = resolved["run"]
    names = None
    if "checks" in run:
        names = [s.strip() for s in run["checks"].split(",") if s.strip()]
        if not names:
            raise ConfigError("[run]: checks must name at least one check")
    try:
        results = checks.run_checks(names, seed=run["seed"])
    except ValueError as exc:
        raise ConfigError(f"[run]: {exc}") from None
    lines = []
    for res in results:
        lines.append(f"check.{res.name}={'pass' if res.passed else 'fail'}")
        lines.append(f"check.{res.name}.error={_fmt(res.error)}")
        lines.append(f"check.{res.name}.tol={_fmt(res.tol)}")
        if res.detail:
            lines.append(f"check.{res.name}.detail={res.detail}")
    passed = sum(r.passed for r in results)
    lines.append(f"checks_passed={passed}")
    lines.append(f"checks_total={len(results)}")
    return ("ok" if passed == len(results) else "check-failure"), lines


_COMMANDS = {
    "simulate": _cmd_simulate,
    "eigen": _cmd_eigen,
    "control": _cmd_control,
    "verify": _cmd_verify,
}


def _write_report(outdir, status, mode, lines, config_lines):
    path = os.path.join(outdir, "report.txt")
    with open(path, "w", newline="\n") as fh:
        fh.write(f"status={status}\n")
        fh.write(f"mode={mode}\n")
        for line in lines:
            fh.write(line + "\n")
        fh.write("[config]\n")
        for line in config_lines:
            fh.write(line + "\n")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sloshctl",
        description="Spectral solver runs driven by config files.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (("simulate", "integrate the evolution problem"),
                        ("eigen", "solve the discrete eigenproblem"),
                        ("control", "synthesize an interior control signal"),
                        ("verify", "run the named identity checks")):
        cmd = sub.add_parser(name, help=blurb)
        cmd.add_argument("--config", required=True,
                         help="path to the config file")
        cmd.add_argument("--out", default=None,
                         help="output directory (overrides [output] dir)")
    return parser


def run_cli(argv):
    # reserved for a future worker pool; accepted so callers may set it now
    os.environ.get("SLOSHCTL_THREADS")
    args = _build_parser().parse_args(argv)
    mode = args.command
    outdir = args.out
    config_lines = []
    try:
        try:
            with open(args.config, "r") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        resolved = resolve_config(mode, parse_sections(text))
        if outdir is None:
            outdir = resolved["output"]["dir"]
        resolved["output"]["dir"] = outdir
        config_lines = _echo_lines(resolved)
        os.makedirs(outdir, exist_ok=True)
    except ConfigError as exc:
        print(f"sloshctl: {exc}", file=sys.stderr)
        if outdir is not None:
            try:
                os.makedirs(outdir, exist_ok=True)
                _write_report(outdir, "config-error", mode,
                              [f"error={exc}"], config_lines)
            except OSError:
                pass
        return 2

    try:
        status, lines = _COMMANDS[mode](resolved, outdir)
    except (ConfigError, ValueError) as exc:
        print(f"sloshctl: {exc}", file=sys.stderr)
        _write_report(outdir, "config-error", mode, [f"error={exc}"],
                      config_lines)
        return 2
    except evo.StepConvergenceError as exc:
        lines = ["error=time step fixed point did not converge",
                 f"residual={_fmt(exc.residual)}",
                 f"iterations={exc.iterations}"]
        _write_report(outdir, "step-failure", mode, lines, config_lines)
        print(f"sloshctl: {exc}", file=sys.stderr)
        return 3
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        _write_report(outdir, "numerical-failure", mode,
                      [f"error={exc}"], config_lines)
        print(f"sloshctl: {exc}", file=sys.stderr)
        return 3

    _write_report(outdir, status, mode, lines, config_lines)
    return 0 if status == "ok" else 3


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
