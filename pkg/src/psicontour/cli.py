"""Batch front-end: ``psicontour run <config.json>`` and ``psicontour schema``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from .evaluator import extend, extend_tube, kernel_K, op_deformed, op_distribution, op_standard
from .geometry import Ball, DeformationParams, DomainError, ParameterError, TubeDomain, validate_params
from .inputs import distribution_from_spec, input_from_spec
from .plotting import render_figure, write_plot_tables
from .quadrature import DecayError, QuadratureError, QuadratureSpec, RegularizationSchedule
from .reports import _plain
from .symbols import symbol_from_spec
from . import verify

SCHEMA_VERSION = "1.0"

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_NUMERIC = 0, 1, 2, 3

_DEFAULT_LAMBDAS = [0.5 * 2.0 ** (-k) for k in range(7)]

_axis = {
    "type": "array", "prefixItems": [{"type": "number"}, {"type": "number"}, {"type": "integer", "minimum": 1}],
    "minItems": 3, "maxItems": 3,
    "description": "[lo, hi, count] of an evenly spaced axis",
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "psicontour run configuration",
    "version": SCHEMA_VERSION,
    "type": "object",
    "required": ["version", "action", "symbol", "params"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "action": {"enum": ["evaluate", "extend", "kernel", "distribution", "verify", "tube"]},
        "dimension": {"type": "integer", "minimum": 1, "default": 1},
        "symbol": {
            "type": "object", "required": ["kind"],
            "properties": {
                "kind": {"enum": ["constant", "monomial", "resolvent", "bracket_power", "modulated"]},
                "params": {"type": "object", "default": {}},
            },
        },
        "input": {
            "type": "object", "required": ["kind"],
            "description": "smooth input recipe",
            "properties": {
                "kind": {"enum": ["gaussian", "sine", "bump_resolvent", "zero"]},
                "params": {"type": "object", "default": {}},
            },
        },
        "distribution": {
            "type": "object",
            "description": "compactly supported distribution: optional smooth part plus Dirac terms",
            "properties": {
                "smooth": {"$ref": "#/properties/input"},
                "diracs": {
                    "type": "array",
                    "items": {
                        "type": "object", "required": ["point"],
                        "properties": {
                            "point": {"type": "array", "items": {"type": "number"}},
                            "gamma": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                            "coef": {"oneOf": [{"type": "number"},
                                               {"type": "array", "items": {"type": "number"},
                                                "minItems": 2, "maxItems": 2}],
                                     "default": 1.0},
                        },
                    },
                    "default": [],
                },
            },
        },
        "params": {
            "type": "object",
            "required": ["r", "r_prime", "r_dprime", "delta", "delta_prime", "epsilon", "R"],
            "additionalProperties": False,
            "properties": {
                "r": {"type": "number"}, "r_prime": {"type": "number"}, "r_dprime": {"type": "number"},
                "delta": {"type": "number"}, "delta_prime": {"type": "number"},
                "epsilon": {"type": "number"}, "R": {"type": "number", "default": 2.0},
                "r0": {"type": ["number", "null"], "default": None},
                "delta0": {"type": ["number", "null"], "default": None},
            },
        },
        "grid": {
            "type": "object",
            "description": "x-grid: complex rectangle z = re + i im placed along 'direction', or explicit points",
            "properties": {
                "re": {**_axis, "default": [0.0, 0.0, 1]},
                "im": {**_axis, "default": [0.0, 0.0, 1]},
                "direction": {"type": "array", "items": {"type": "number"},
                              "description": "unit direction in R^n (default e_1)"},
                "points": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"}},
                    "description": "explicit points as [re_1..re_n, im_1..im_n]",
                },
            },
        },
        "t": {"type": "number", "minimum": 0, "maximum": 1, "default": 1.0,
              "description": "contour parameter for action=evaluate with a deformed contour"},
        "reference": {"type": "boolean", "default": False,
                      "description": "action=evaluate: use the undeformed regularized integral (real points)"},
        "quadrature": {
            "type": "object",
            "properties": {
                "preset": {"enum": ["default", "coarse"], "default": "default"},
                "order": {"type": "integer", "minimum": 2, "default": 16},
                "y_panel": {"type": "number", "default": 0.5},
                "core_panel": {"type": "number", "default": 1.0},
                "tail_ratio": {"type": "number", "default": 2.0},
                "n_theta": {"type": "integer", "minimum": 4, "default": 64},
                "tol": {"type": "number", "default": 1e-13},
                "rho_max": {"type": ["number", "null"], "default": None},
                "transition_splits": {"type": "integer", "minimum": 1, "default": 4},
                "estimate_error": {"type": "boolean", "default": True},
            },
        },
        "regularization": {
            "type": "object",
            "properties": {
                "lambdas": {"type": "array", "items": {"type": "number"}, "default": _DEFAULT_LAMBDAS,
                            "description": "Gaussian widths 0.5 * 2^-k, k = 0..6"},
                "richardson": {"type": "boolean", "default": True},
                "depth": {"type": "integer", "minimum": 1, "default": 3},
            },
        },
        "kernel": {
            "type": "object",
            "properties": {"y": {"type": "array", "items": {"type": "number"}}},
            "description": "action=kernel: the y point of K(x, y)",
        },
        "tube": {
            "type": "object",
            "properties": {
                "balls": {
                    "type": "array",
                    "items": {"type": "object", "required": ["center", "radius"],
                              "properties": {"center": {"type": "array", "items": {"type": "number"}},
                                             "radius": {"type": "number"}}},
                },
                "epsilon": {"type": "number", "default": 0.5},
            },
        },
        "verify": {
            "type": "object",
            "properties": {
                "samples": {"type": "integer", "minimum": 10, "default": 100000},
                "stokes_rho": {"type": "number", "default": 40.0},
                "x": {"type": "array", "items": {"type": "number"}, "default": [0.0]},
            },
        },
        "tolerances": {
            "type": "object",
            "properties": {"divergence": {"type": "boolean", "default": True,
                                          "description": "treat a divergence flag as a numerical failure"}},
        },
        "output": {
            "type": "object",
            "properties": {
                "dir": {"type": "string", "default": "out"},
                "prefix": {"type": "string", "default": "run"},
                "plots": {"type": "boolean", "default": True},
                "figures": {"type": "boolean", "default": True},
            },
        },
        "seed": {"type": "integer", "default": 0},
        "threads": {"type": "integer", "minimum": 1, "default": 1},
    },
}


class ConfigError(ValueError):
    """The configuration does not validate or is inconsistent."""


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------


def load_config(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"schema violation at {where}: {e.message}") from e
    return cfg


def build_params(cfg):
    n = cfg.get("dimension", 1)
    pr = dict(cfg["params"])
    for k in ("r0", "delta0"):
        if pr.get(k) is None:
            pr[k] = np.inf
    return validate_params(DeformationParams(dimension=n, **pr))


def build_spec(cfg):
    q = dict(cfg.get("quadrature", {}))
    preset = q.pop("preset", "default")
    q.pop("estimate_error", None)
    return QuadratureSpec.coarse(**q) if preset == "coarse" else QuadratureSpec(**q)


def build_points(cfg):
    """Returns ``(points (N, n), re_axis, im_axis)``; the axes are None for explicit points."""
    n = cfg.get("dimension", 1)
    g = cfg.get("grid", {})
    if "points" in g:
        pts = np.asarray(g["points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 * n:
            raise ConfigError(f"grid.points rows must have 2n = {2 * n} entries")
        return pts[:, :n] + 1j * pts[:, n:], None, None
    re = np.linspace(*g.get("re", [0.0, 0.0, 1])[:2], int(g.get("re", [0, 0, 1])[2]))
    im = np.linspace(*g.get("im", [0.0, 0.0, 1])[:2], int(g.get("im", [0, 0, 1])[2]))
    e = np.asarray(g.get("direction", [1.0] + [0.0] * (n - 1)), dtype=float)
    if e.shape != (n,) or not np.isclose(np.linalg.norm(e), 1.0):
        raise ConfigError("grid.direction must be a unit vector in R^n")
    z = (re[:, None] + 1j * im[None, :]).ravel()
    return z[:, None] * e[None, :], re, im


def _input(cfg):
    n = cfg.get("dimension", 1)
    if "input" not in cfg:
        raise ConfigError(f"action {cfg['action']!r} needs an 'input'")
    return input_from_spec(cfg["input"], n)


# ---------------------------------------------------------------------------
# actions
# ---------------------------------------------------------------------------


def _rows(pts, values, margin=None, rho=None, err=None):
    N = len(pts)
    nan = np.full(N, np.nan)
    return {
        "points": pts, "values": np.asarray(values, dtype=complex),
        "decay_margin": nan if margin is None else np.asarray(margin, float),
        "rho_max": nan if rho is None else np.asarray(rho, float),
        "err_estimate": nan if err is None else np.asarray(err, float),
    }


def act_evaluate(cfg, p, params, spec, pts, threads):
    u = _input(cfg)
    reg = cfg.get("regularization", {})
    if cfg.get("reference", False):
        sched = RegularizationSchedule(tuple(reg.get("lambdas", _DEFAULT_LAMBDAS)), reg.get("richardson", True))
        res = [op_standard(p, u, x, sched, spec, params, reg.get("depth", 3)) for x in pts]
        out = _rows(pts, [r.value for r in res], err=[r.error for r in res])
        out["diverging"] = any(r.diverging for r in res)
        out["extra"] = {"lambdas": list(sched.lambda_values),
                        "lambda_values": [r.values for r in res],
                        "monotone": [r.monotone for r in res]}
        return out
    t = cfg.get("t", 1.0)
    vals, mar, rho = [], [], []
    for x in pts:
        v, d = op_deformed(p, u, params, t, x, spec)
        vals.append(v)
        mar.append(d.decay_margin)
        rho.append(d.rho_max)
    return _rows(pts, vals, mar, rho)


def act_extend(cfg, p, params, spec, pts, threads):
    u = _input(cfg)
    est = cfg.get("quadrature", {}).get("estimate_error", True)
    res = extend(p, u, params, pts, spec, threads=threads, estimate_error=est)
    out = _rows(pts, res.values, res.decay_margin, res.rho_max, res.err_estimate)
    out["point_errors"] = {int(k): v for k, v in res.errors.items()}
    out["extra"] = {"t0": res.t0}
    return out


def act_kernel(cfg, p, params, spec, pts, threads):
    y = cfg.get("kernel", {}).get("y")
    if y is None:
        raise ConfigError("action 'kernel' needs kernel.y")
    vals = [kernel_K(p, params, None, x, y, spec=spec) for x in pts]
    return _rows(pts, vals)


def act_distribution(cfg, p, params, spec, pts, threads):
    if "distribution" not in cfg:
        raise ConfigError("action 'distribution' needs a 'distribution'")
    dist = distribution_from_spec(cfg["distribution"], cfg.get("dimension", 1))
    return _rows(pts, [op_distribution(p, dist, params, x, spec) for x in pts])


def act_tube(cfg, p, params, spec, pts, threads):
    u = _input(cfg)
    tc = cfg.get("tube")
    if not tc or not tc.get("balls"):
        raise ConfigError("action 'tube' needs tube.balls")
    U = TubeDomain(tuple(Ball(tuple(b["center"]), b["radius"]) for b in tc["balls"]), tc.get("epsilon", 0.5))
    vals, mar, rho, errs, shrink = [], [], [], {}, {}
    for i, x in enumerate(pts):
        try:
            v, d, choice = extend_tube(p, u, U, U.epsilon, x, spec, params.R)
            vals.append(v)
            mar.append(d.decay_margin)
            rho.append(d.rho_max)
            shrink[i] = choice.shrink
        except DomainError as e:
            vals.append(np.nan + 0j)
            mar.append(np.nan)
            rho.append(np.nan)
            errs[i] = str(e)
    out = _rows(pts, vals, mar, rho)
    out["point_errors"] = errs
    out["extra"] = {"shrink": shrink}
    return out


def act_verify(cfg, p, params, spec, seed):
    u = _input(cfg)
    vc = cfg.get("verify", {})
    n = params.dimension
    x = np.asarray(vc.get("x", [0.0] * n), dtype=float)
    if x.size == 1:
        x = np.full(n, float(x[0]))
    return verify.run_all(p, u, params, x, seed=seed, spec=spec, count=vc.get("samples", 100_000),
                          stokes_rho=vc.get("stokes_rho", 40.0))


ACTIONS = {
    "evaluate": act_evaluate, "extend": act_extend, "kernel": act_kernel,
    "distribution": act_distribution, "tube": act_tube,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def write_csv(path, n, rows):
    pts = rows["points"]
    header = [f"re_x_{k + 1}" for k in range(n)] + [f"im_x_{k + 1}" for k in range(n)]
    header += ["re_value", "im_value", "decay_margin", "rho_max", "err_estimate"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, x in enumerate(pts):
            v = rows["values"][i]
            nums = [*x.real, *x.imag, v.real, v.imag,
                    rows["decay_margin"][i], rows["rho_max"][i], rows["err_estimate"][i]]
            w.writerow([repr(float(a)) for a in nums])
    return path


def run(config_path, out_dir=None, threads=None, seed=None):
    """Execute one configuration; returns the exit status. Artifacts are written at the end."""
    t_start = time.perf_counter()
    cfg = load_config(config_path)
    n = cfg.get("dimension", 1)
    seed = cfg.get("seed", 0) if seed is None else seed
    threads = cfg.get("threads", 1) if threads is None else threads
    oc = cfg.get("output", {})
    out = Path(out_dir or oc.get("dir", "out"))
    prefix = oc.get("prefix", "run")
    params = build_params(cfg)
    spec = build_spec(cfg)
    p = symbol_from_spec(cfg["symbol"], n)
    diag = {
        "config": cfg, "schema_version": SCHEMA_VERSION, "seed": seed, "threads": threads,
        "params": params.as_dict(), "quadrature": spec.as_dict(), "symbol": p.name,
    }
    status = EXIT_OK
    artifacts = []
    if cfg["action"] == "verify":
        reports = act_verify(cfg, p, params, spec, seed)
        diag["checks"] = [r.to_dict() for r in reports]
        for r in reports:
            print(r.line())
        if not all(r.passed for r in reports):
            status = EXIT_NUMERIC
        out.mkdir(parents=True, exist_ok=True)
    else:
        pts, re_axis, im_axis = build_points(cfg)
        rows = ACTIONS[cfg["action"]](cfg, p, params, spec, pts, threads)
        errs = rows.get("point_errors", {})
        diag["point_errors"] = errs
        diag.update(rows.get("extra", {}))
        finite = np.isfinite(rows["values"])
        bad = [i for i in range(len(pts)) if not finite[i] and i not in errs]
        diag["non_finite"] = bad
        out.mkdir(parents=True, exist_ok=True)
        artifacts.append(str(write_csv(out / f"{prefix}.csv", n, rows)))
        if im_axis is not None and re_axis.size > 1 and im_axis.size > 1 and oc.get("plots", True):
            F = rows["values"].reshape(re_axis.size, im_axis.size)
            artifacts += [str(pth) for pth in write_plot_tables(out, prefix, re_axis, im_axis, F)]
            if oc.get("figures", True) and np.all(np.isfinite(F)):
                artifacts.append(str(render_figure(out / f"{prefix}.png", re_axis, im_axis, F, cfg["action"])))
        if errs:
            status = EXIT_DOMAIN
            for i, msg in sorted(errs.items()):
                print(f"DomainError at point {i}: {msg}", file=sys.stderr)
        if bad or (rows.get("diverging") and cfg.get("tolerances", {}).get("divergence", True)):
            status = max(status, EXIT_NUMERIC)
            print("QuadratureError: non-finite values or divergence flag", file=sys.stderr)
    diag["artifacts"] = artifacts
    diag["exit_status"] = status
    diag["elapsed_seconds"] = time.perf_counter() - t_start
    (out / f"{prefix}_diagnostics.json").write_text(json.dumps(_plain(diag), indent=2))
    return status


def schema_text():
    return json.dumps(SCHEMA, indent=2)


def main(argv=None):
    ap = argparse.ArgumentParser(prog="psicontour", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    rp = sub.add_parser("run", help="execute a run configuration")
    rp.add_argument("config")
    rp.add_argument("--threads", type=int, default=None)
    rp.add_argument("--seed", type=int, default=None)
    rp.add_argument("--out", default=None)
    sub.add_parser("schema", help="print the configuration schema")
    args = ap.parse_args(argv)
    if args.command == "schema":
        print(schema_text())
        return EXIT_OK
    try:
        return run(args.config, args.out, args.threads, args.seed)
    except (ConfigError, ParameterError) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, DecayError) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except (QuadratureError, FloatingPointError, ArithmeticError) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"ConfigError: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
