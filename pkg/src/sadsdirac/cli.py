"""Command-line interface: ``sadsdirac <command> [options]``.

Configuration comes from an optional flat ``key = value`` file (``--config``)
overridden by command-line flags.  Every numeric field is validated before any
solve starts.  Exit codes: 0 success, 1 invalid configuration, 2 solver
failure, 3 spectral point at a resonance; failures print one JSON line on
stderr.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import __version__
from .boundary_solver import BoundarySeed, boundary_solution, check_boundary_condition
from .errors import (
    AtResonanceError,
    DomainError,
    InvalidParameterError,
    OutOfStripError,
    SadsError,
    SeedMismatchError,
)
from .geometry import BlackHoleParams, TortoiseMap
from .jost_solver import KINDS, check_strip, jost_solution
from .potentials import ModeParams, PotentialEvaluator
from .resolvent import ResolventKernel, resolvent_residual
from .resonance_finder import DeterminantFunction, ScanRegion, find_resonances

__all__ = ["RunConfig", "load_config", "main", "run"]

COMMANDS = ("horizon", "potentials", "jost", "boundary", "resolvent", "resonances")

# key: (type, default, help)
SCHEMA = {
    "M": (float, 1.0, "black-hole mass"),
    "l": (float, 1.0, "AdS radius"),
    "s": (float, 0.0, "angular index, 2s a non-negative integer"),
    "m": (float, 0.3, "field mass"),
    "lambda_re": (float, 0.0, "real part of the spectral parameter"),
    "lambda_im": (float, 1.0, "imaginary part of the spectral parameter"),
    "re_min": (float, 0.0, "scan rectangle, smallest real part"),
    "re_max": (float, 6.0, "scan rectangle, largest real part"),
    "im_min": (float, -0.4, "scan rectangle, smallest imaginary part"),
    "im_max": (float, -1e-3, "scan rectangle, largest imaginary part"),
    "nx": (int, 13, "scan points along the real axis"),
    "ny": (int, 5, "scan points along the imaginary axis"),
    "epsilon": (float, None, "weight exponent in (0, kappa/2); default 0.45 kappa"),
    "ode_rtol": (float, 1e-10, "relative integrator tolerance"),
    "ode_atol": (float, None, "absolute integrator tolerance (solver default if unset)"),
    "x_min": (float, None, "start of the horizon-side march; default -30/kappa"),
    "x0": (float, -1e-4, "series hand-over point of the boundary solution"),
    "x_match": (float, -1.0, "matching point of alpha and beta"),
    "x_lo": (float, -8.0, "left end of the output grid"),
    "x_hi": (float, -0.2, "right end of the output grid"),
    "n_grid": (int, 401, "number of output grid points"),
    "kind": (str, "Phi3", "Jost solution kind: Phi1, Phi2, Phi3 or Phi4"),
    "seed_p": (float, 1.0, "first boundary seed coefficient (c or a)"),
    "seed_q": (float, 0.0, "second boundary seed coefficient (d or b)"),
    "input": (str, None, "CSV of f samples for the resolvent (x, f1_re, f1_im, ..., f4_im)"),
    "field": (str, None, "optional CSV path for the scan field of the resonance search"),
    "format": (str, "json", "output format: json or csv"),
    "output": (str, None, "output path; standard output if unset"),
    "threads": (int, None, "worker processes; default all available cores"),
}

HELP = {
    "horizon": "Horizon radius r_SAdS (largest root of F) and surface gravity kappa = F'(r_SAdS)/2.",
    "potentials": "Tabulate A = sqrt(F)/r, B = sqrt(F) and the max-norm of V_m on the tortoise grid.",
    "jost": "Jost solution anchored at the horizon, exp(i lam s_j x) e_j as x -> -inf.",
    "boundary": "Boundary solution selected at the conformal boundary, with its boundary-condition report.",
    "resolvent": "Apply the resolvent (the weighted continuation for Im lam <= 0) to sampled data.",
    "resonances": "Scan D = alpha^2 - beta^2 on a rectangle, refine its zeros and count them by winding.",
}


class ConfigError(InvalidParameterError):
    """Malformed configuration file or flag."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _convert(key: str, raw):
    typ = SCHEMA[key][0]
    if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("", "none")):
        return None
    try:
        if typ is int:
            v = float(raw)
            if not v.is_integer():
                raise ValueError
            return int(v)
        if typ is float:
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError
            return v
        return str(raw).strip()
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value {raw!r} for {key}") from None


def load_config(path: str) -> dict:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key = value")
        key, val = (t.strip() for t in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{path}:{num}: unknown key {key!r}")
        out[key] = _convert(key, val)
    return out


@dataclass
class RunConfig:
    """Resolved configuration: defaults, then file, then flags."""

    command: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def as_dict(self) -> dict:
        return {"command": self.command, **self.values}


def resolve_config(command: str, file_values: dict, flag_values: dict) -> RunConfig:
    values = {k: spec[1] for k, spec in SCHEMA.items()}
    values.update(file_values)
    values.update({k: v for k, v in flag_values.items() if v is not None})
    return RunConfig(command, values)


# validation, run before any solve


@dataclass
class _Setup:
    cfg: RunConfig
    params: BlackHoleParams
    ev: PotentialEvaluator | None = None
    lam: complex | None = None
    grid: np.ndarray | None = None
    seed: BoundarySeed | None = None
    region: ScanRegion | None = None
    epsilon: float | None = None
    f: np.ndarray | None = None


def _grid(cfg: RunConfig) -> np.ndarray:
    lo, hi, n = cfg["x_lo"], cfg["x_hi"], cfg["n_grid"]
    if not lo < hi < 0:
        raise InvalidParameterError("need x_lo < x_hi < 0")
    if n < 8:
        raise InvalidParameterError("n_grid must be at least 8")
    return np.linspace(lo, hi, n)


def _read_f(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
        if lines and any(ch.isalpha() and ch not in "eE" for ch in lines[0]):
            lines = lines[1:]  # column header
        data = np.loadtxt(lines, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read input CSV: {exc}") from None
    if data.shape[1] != 9 or data.shape[0] < 8:
        raise ConfigError("input CSV needs >= 8 rows of x, f1_re, f1_im, ..., f4_im")
    x = data[:, 0]
    if np.any(np.diff(x) <= 0) or not x[-1] < 0:
        raise ConfigError("input grid must be increasing and negative")
    f = data[:, 1::2] + 1j * data[:, 2::2]
    return x, f


def default_bump(x: np.ndarray) -> np.ndarray:
    """Smooth bump supported in ``[-5, -1]`` in every component."""
    out = np.zeros((len(x), 4), dtype=complex)
    t = (x + 3.0) / 2.0
    inside = np.abs(t) < 1
    b = np.zeros_like(x)
    b[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    out[:] = b[:, None] * np.array([1.0, 0.5j, -0.25, 1.0 + 0.5j])
    return out


def validate(cfg: RunConfig) -> _Setup:
    """Check every field needed by ``cfg.command``; build the light objects."""
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg["format"] not in ("json", "csv"):
        raise ConfigError("format must be json or csv")
    if cfg["threads"] is not None and cfg["threads"] < 1:
        raise ConfigError("threads must be positive")
    if not 0 < cfg["ode_rtol"] < 1:
        raise InvalidParameterError("ode_rtol must lie in (0, 1)")
    if cfg["ode_atol"] is not None and not cfg["ode_atol"] > 0:
        raise InvalidParameterError("ode_atol must be positive")
    params = BlackHoleParams(cfg["M"], cfg["l"])
    st = _Setup(cfg, params)
    if cfg.command == "horizon":
        return st
    mode = ModeParams(cfg["s"], cfg["m"])
    st.ev = PotentialEvaluator(params, mode, TortoiseMap(params))
    kappa = params.kappa
    if cfg["x_min"] is not None and not cfg["x_min"] < -1.0 / kappa:
        raise InvalidParameterError("x_min must lie well inside the horizon region (x_min < -1/kappa)")
    if not cfg["x0"] < 0 or not cfg["x_match"] < 0:
        raise InvalidParameterError("x0 and x_match must be negative")
    st.lam = complex(cfg["lambda_re"], cfg["lambda_im"])
    eps = cfg["epsilon"] if cfg["epsilon"] is not None else 0.45 * kappa
    if cfg.command in ("resolvent", "resonances") and not 0 < eps < kappa / 2:
        raise InvalidParameterError(f"epsilon must lie in (0, kappa/2) = (0, {kappa / 2:.6g})")
    st.epsilon = eps
    if cfg.command in ("potentials", "jost", "boundary", "resolvent"):
        st.grid = _grid(cfg)
    if cfg.command == "jost":
        if cfg["kind"] not in KINDS:
            raise ConfigError(f"kind must be one of {sorted(KINDS)}")
        check_strip(st.ev, st.lam, cfg["kind"])
        if cfg["x_min"] is not None and not cfg["x_min"] < st.grid[0]:
            raise InvalidParameterError("x_min must lie left of x_lo")
    if cfg.command in ("boundary", "resolvent"):
        st.seed = BoundarySeed(st.ev.regime, (cfg["seed_p"], cfg["seed_q"]))
    if cfg.command == "resolvent":
        if st.seed.twist_degenerate:
            raise InvalidParameterError("boundary seed with |p| = |q| is a twist eigenvector")
        if cfg["input"] is not None:
            st.grid, st.f = _read_f(cfg["input"])
        else:
            st.f = default_bump(st.grid)
        h = np.diff(st.grid)
        if not np.allclose(h, h[0], rtol=1e-9, atol=0):
            raise ConfigError("the resolvent grid must be uniform")
        if st.lam.imag <= 0:
            check_strip(st.ev, st.lam, "Phi3")
            if not st.lam.imag > -eps + 1e-3 * kappa:
                raise OutOfStripError(f"Im(lambda) must exceed -epsilon = {-eps:.6g}")
    if cfg.command == "resonances":
        st.region = ScanRegion(cfg["re_min"], cfg["re_max"], cfg["im_min"], cfg["im_max"], cfg["nx"], cfg["ny"], eps)
        st.region.validate(st.ev)
    return st


# commands


def _curve_table(x, values):
    cols = ["x"]
    for i in range(1, 5):
        cols += [f"re{i}", f"im{i}"]
    data = np.empty((len(x), 9))
    data[:, 0] = x
    data[:, 1::2] = values.real
    data[:, 2::2] = values.imag
    return cols, data


def cmd_horizon(st: _Setup):
    p = st.params
    return {"r_sads": p.r_sads, "kappa": p.kappa}, (["r_sads", "kappa"], np.array([[p.r_sads, p.kappa]]))


def cmd_potentials(st: _Setup):
    x = st.grid
    ev = st.ev
    cols = ["x", "A", "B", "norm_Vm"]
    data = np.column_stack([x, ev.potential_A(x), ev.potential_B(x), ev.norm_Vm(x)])
    return {"regime": ev.regime}, (cols, data)


def cmd_jost(st: _Setup):
    cfg = st.cfg
    curve = jost_solution(st.ev, st.lam, cfg["kind"], grid=st.grid, x_min=cfg["x_min"],
                          rtol=cfg["ode_rtol"], atol=cfg["ode_atol"])
    meta = {"kind": cfg["kind"], "x_min": curve.meta["x_min"], "nfev": curve.meta["nfev"]}
    return meta, _curve_table(st.grid, curve.values)


def cmd_boundary(st: _Setup):
    cfg = st.cfg
    curve = boundary_solution(st.ev, st.lam, st.seed, grid=st.grid, x0=cfg["x0"],
                              rtol=cfg["ode_rtol"], atol=cfg["ode_atol"])
    report = check_boundary_condition(curve, st.ev)
    return {"report": report.as_dict()}, _curve_table(st.grid, curve.values)


def cmd_resolvent(st: _Setup):
    cfg = st.cfg
    x, f = st.grid, st.f
    lam = st.lam
    weighted = lam.imag <= 0
    k = ResolventKernel(st.ev, lam, float(x[0]), float(x[-1]), seed=st.seed, x_match=cfg["x_match"],
                        continued=True if weighted else None, rtol=cfg["ode_rtol"], x0=cfg["x0"])
    if weighted:
        w = np.exp(st.epsilon * x)[:, None]
        u = w * k.apply(x, w * f)
        meta = {"weighted": True, "epsilon": st.epsilon}
    else:
        u = k.apply(x, f)
        meta = {"weighted": False, "residual": resolvent_residual(st.ev, lam, x, u, f)}
    meta.update({"alpha": [k.pair.alpha.real, k.pair.alpha.imag], "beta": [k.pair.beta.real, k.pair.beta.imag]})
    return meta, _curve_table(x, u)


def cmd_resonances(st: _Setup):
    cfg = st.cfg
    fn = DeterminantFunction(st.ev, x_match=cfg["x_match"], rtol=cfg["ode_rtol"], x0=cfg["x0"])
    found, fld, notes = find_resonances(fn, st.region, threads=cfg["threads"])
    meta = {
        "resonances": [r.as_dict() for r in found],
        "notes": notes,
        "failed_cells": len(fld.failures),
        "epsilon": st.epsilon,
    }
    cols = ["re", "im", "D_re", "D_im", "abs_D", "scale"]
    return meta, (cols, fld.rows()), "field"


RUNNERS = {
    "horizon": cmd_horizon,
    "potentials": cmd_potentials,
    "jost": cmd_jost,
    "boundary": cmd_boundary,
    "resolvent": cmd_resolvent,
    "resonances": cmd_resonances,
}


# serialization


def _header(cfg: RunConfig) -> dict:
    return {
        "program": "sadsdirac",
        "version": __version__,
        "config": cfg.as_dict(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def _csv(cols, data, comments=()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write("# " + c + "\n")
    buf.write(",".join(cols) + "\n")
    np.savetxt(buf, np.asarray(data, dtype=float), fmt="%.16e", delimiter=",")
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=True) + "\n"


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".sadsdirac-")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def render(cfg: RunConfig, meta: dict, table) -> dict:
    """Map output path -> text for the command result."""
    cols, data = table[0], table[1]
    head = _header(cfg)
    out = {}
    if cfg.command == "resonances":
        out[cfg["output"]] = _json({"header": head, **meta})
        if cfg["field"] is not None:
            out[cfg["field"]] = _csv(cols, data, [json.dumps(head, sort_keys=True)])
        return out
    if cfg["format"] == "json":
        doc = {"header": head, **meta, "columns": cols, "data": np.asarray(data).tolist()}
        out[cfg["output"]] = _json(doc)
        return out
    comments = [json.dumps(head, sort_keys=True), json.dumps(meta, sort_keys=True)]
    out[cfg["output"]] = _csv(cols, data, comments)
    return out


def run(cfg: RunConfig) -> dict:
    """Validate and execute; return the rendered outputs without writing them."""
    st = validate(cfg)
    res = RUNNERS[cfg.command](st)
    return render(cfg, res[0], res[1])


# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sadsdirac", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"sadsdirac {__version__}")
    common = _Parser(add_help=False, allow_abbrev=False)
    common.add_argument("--config", help="flat key = value configuration file; flags override it")
    for key, (typ, default, text) in SCHEMA.items():
        flag = "--" + key.replace("_", "-")
        common.add_argument(flag, dest=key, default=None, metavar=key.upper() if len(key) > 1 else key,
                            help=f"{text} (default: {default})")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=HELP[name], description=HELP[name], allow_abbrev=False)
    return parser


def _fail(code: int, exc: BaseException) -> int:
    kind = getattr(exc, "code", type(exc).__name__)
    sys.stderr.write(json.dumps({"exit": code, "error": kind, "message": str(exc)}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        flags = {k: _convert(k, getattr(args, k)) for k in SCHEMA if getattr(args, k) is not None}
        file_values = load_config(args.config) if args.config else {}
        cfg = resolve_config(args.command, file_values, flags)
        outputs = run(cfg)
    except (ConfigError, InvalidParameterError, DomainError, OutOfStripError, SeedMismatchError) as exc:
        return _fail(1, exc)
    except AtResonanceError as exc:
        return _fail(3, exc)
    except (SadsError, ArithmeticError, RuntimeError, MemoryError) as exc:
        return _fail(2, exc)
    for path, text in outputs.items():
        _write(path, text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
