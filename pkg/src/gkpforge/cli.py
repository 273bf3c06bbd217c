"""Command-line front end: run, sweep, wigner, validate, preset-list."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from . import metrics as M
from . import protocols as P
from . import validation as V
from ._backend import BACKEND, thread_cap
from .electron import EDGE_TOL
from .errors import ConfigError, GkpForgeError, ValidationFailure
from .fock import LEAK_TOL, wigner

EXIT_OK = 0


# --------------------------------------------------------------------------
# config assembly
# --------------------------------------------------------------------------

def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"cannot parse complex number {text!r}") from None


def config_from_args(args) -> dict:
    """Config document from ``--config`` and/or ``--preset`` flags (flags override the file)."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    if getattr(args, "preset", None):
        cfg["preset"] = args.preset
    for key in ("m", "N", "k"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "g", None) is not None:
        g = _parse_complex(args.g)
        cfg["g"] = [g.real, g.imag]
    if getattr(args, "engine", None):
        cfg["engine"] = args.engine
    if getattr(args, "cutoff", None) is not None:
        cfg["cutoff"] = args.cutoff
    if not cfg:
        raise ConfigError("give --config or --preset")
    return cfg


def _references(protocol: P.Protocol, cfg: dict):
    if cfg.get("preset") == "cat":
        step = protocol.steps[0]
        return [("cat", step.post.N, step.post.k, step.g)]
    return M.default_references(protocol.lattice)


def _defaults_echo() -> dict:
    return {
        "norm_leak_tol": LEAK_TOL,
        "comb_edge_tol": EDGE_TOL,
        "peak_threshold": M.PEAK_THRESHOLD,
        "quadrature_grid_step": M.GRID_STEP,
        "delta_search_bounds": list(M.DELTA_BOUNDS),
        "delta_search_xatol": 1e-3,
        "cutoff_policy": "ceil(A + 6 sqrt(A) + 10), A = (sum|g| + seed radius)^2",
        "theta_samples_policy": "next_fast_len(max(8 (2W+1), 2W+1+2 cutoff))",
    }


def _two_mode_summary(outcome) -> dict:
    psi = outcome.state
    summary = {"probability": outcome.probability, "step_probabilities": outcome.step_probabilities}
    fids = []
    for pair, label in (((("+", "+"), ("-", "-")), "bell(++,--)"), ((("+", "-"), ("-", "+")), "bell(+-,-+)")):
        f, d = V.bell_fidelity(psi, ["".join(a) for a in pair])
        fids.append({"reference": label, "fidelity": f, "delta": d})
    summary["fidelities"] = fids
    return summary


def build_report(cfg: dict, seed: int | None = None, jitter: float | None = None, samples: int = 100,
                 with_metrics: bool = True) -> dict:
    """Execute one config; the report is deterministic apart from the ``timing`` block."""
    t0 = time.perf_counter()
    protocol = P.protocol_from_config(cfg)
    outcome = P.run_protocol(protocol, strict=True)
    t_run = time.perf_counter() - t0
    if protocol.modes == 2:
        summary = _two_mode_summary(outcome)
    else:
        summary = {"probability": outcome.probability, "step_probabilities": outcome.step_probabilities,
                   "purity": outcome.purity, "mean_photon": outcome.state.mean_photon()}
        if with_metrics:
            squeeze = cfg.get("preset") != "cat"
            mb = M.evaluate(outcome, protocol, _references(protocol, cfg), squeeze=squeeze)
            summary.update(mb.to_dict())
            summary["probability"] = outcome.probability
        if jitter is not None:
            mean, std = M.jitter_robustness(protocol, jitter, samples, seed or 0)
            summary["jitter"] = {"delta_g": jitter, "samples": samples, "mean_fidelity": mean, "std": std}
    windows = [s.comb.build().window for s in protocol.steps] if protocol.engine != "analytic" else []
    report = {
        "schema_version": P.SCHEMA_VERSION,
        "config": P.protocol_to_config(protocol),
        "input": cfg,
        "outcome": summary,
        "provenance": {
            "package_version": __version__,
            "engine": outcome.engine,
            "backend": BACKEND,
            "cutoff": outcome.cutoff,
            "window_max": max(windows) if windows else None,
            "norm_leak": outcome.norm_leak,
            "converged": outcome.converged,
            "n_electrons": len(protocol.steps),
            "seed": seed,
            "defaults": _defaults_echo(),
        },
        "timing": {"run_seconds": t_run, "total_seconds": time.perf_counter() - t0},
    }
    return report


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    return obj


def dump_json(obj) -> str:
    return json.dumps(_to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_run(args) -> int:
    cfg = config_from_args(args)
    report = build_report(cfg, seed=args.seed, jitter=args.jitter, samples=args.samples,
                          with_metrics=not args.no_metrics)
    _emit(dump_json(report), args.out)
    return EXIT_OK


def _parse_values(text: str, param: str) -> list:
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ".." in tok:
            a, b = tok.split("..")
            vals.extend(range(int(a), int(b) + 1))
        elif param == "g":
            g = _parse_complex(tok)
            vals.append([g.real, g.imag])
        else:
            try:
                vals.append(int(tok))
            except ValueError:
                vals.append(float(tok))
    if not vals:
        raise ConfigError("sweep needs at least one value")
    for v in vals:
        if isinstance(v, float) and not math.isfinite(v):
            raise ConfigError("sweep values must be finite")
    return vals


SWEEP_PARAMS = ("m", "g", "N", "k", "cutoff")


def _sweep_point(cfg: dict) -> dict:
    try:
        rep = build_report(cfg)
        out = rep["outcome"]
        axes = out.get("squeezing_db", [])
        best = max(out.get("fidelities", []), key=lambda f: f["fidelity"], default=None)
        return {"status": "ok", "probability": out["probability"],
                "squeezing_db": ";".join(f"{a['axis']:.6f}:{a['db']:.6f}" for a in axes),
                "squeezing_db_worst_axis": out.get("squeezing_db_worst_axis"),
                "best_reference": best["reference"] if best else "",
                "best_fidelity": best["fidelity"] if best else None,
                "best_delta": best["delta"] if best else None,
                "n_electrons": rep["provenance"]["n_electrons"], "error": ""}
    except GkpForgeError as exc:
        return {"status": "error", "error": f"{type(exc).__name__}: {exc}"}


SWEEP_COLUMNS = ["param", "value", "status", "n_electrons", "probability", "squeezing_db_worst_axis",
                 "squeezing_db", "best_reference", "best_fidelity", "best_delta", "error"]


def run_sweep(cfg: dict, param: str, values: list) -> list:
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"sweep parameter must be one of {SWEEP_PARAMS}")
    points = [dict(cfg, **{param: v}) for v in values]
    if param != "m":
        # a malformed config fails the whole sweep before any work starts
        for pt in points:
            P.protocol_from_config(pt)
    workers = min(thread_cap(), len(points))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, points))
    else:
        rows = [_sweep_point(pt) for pt in points]
    out = []
    for v, r in zip(values, rows):
        val = complex(*v) if param == "g" else v
        out.append({"param": param, "value": val, **r})
    return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, complex):
        return f"{v.real!r}{v.imag:+}j"
    return str(v)


def cmd_sweep(args) -> int:
    cfg = config_from_args(args)
    rows = run_sweep(cfg, args.param, _parse_values(args.values, args.param))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in SWEEP_COLUMNS])
    _emit(buf.getvalue(), args.out)
    if args.report:
        _emit(dump_json({"schema_version": P.SCHEMA_VERSION, "input": cfg, "param": args.param,
                         "rows": rows, "defaults": _defaults_echo()}), args.report)
    return EXIT_OK


def _parse_grid(text: str) -> np.ndarray:
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise ConfigError(f"grid must look like start:stop:count, got {text!r}") from None
    if n < 2 or not (math.isfinite(a) and math.isfinite(b)) or b <= a:
        raise ConfigError("grid needs count >= 2 and start < stop")
    return np.linspace(a, b, n)


def wigner_csv(state, x, p) -> tuple:
    grid = wigner(state, x, p)
    buf = io.StringIO()
    buf.write(f"# wigner rows=p cols=x x={float(x[0])!r}:{float(x[-1])!r}:{x.size} "
              f"p={float(p[0])!r}:{float(p[-1])!r}:{p.size}\n")
    np.savetxt(buf, grid.values, delimiter=",", fmt="%.17e")
    return buf.getvalue(), grid


def cmd_wigner(args) -> int:
    cfg = config_from_args(args)
    protocol = P.protocol_from_config(cfg)
    if protocol.modes != 1:
        raise ConfigError("wigner export is single-mode only")
    outcome = P.run_protocol(protocol, strict=True)
    x = _parse_grid(args.grid)
    p = _parse_grid(args.pgrid) if args.pgrid else x
    text, grid = wigner_csv(outcome.state, x, p)
    _emit(text, args.out)
    integral = grid.integral()
    summary = {"schema_version": P.SCHEMA_VERSION, "integral": integral, "warnings": []}
    if abs(integral - 1.0) > 1e-3:
        summary["warnings"].append(f"grid integral {integral:.6f} differs from 1; widen or refine the grid")
    if args.out:
        sys.stdout.write(dump_json(summary))
    elif summary["warnings"]:
        sys.stderr.write(dump_json(summary))
    return EXIT_OK


def cmd_validate(args) -> int:
    only = args.only.split(",") if args.only else None
    try:
        V.select(args.tier, only)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    results = V.run_checks(args.tier, only, echo=print)
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    if args.out:
        _emit(dump_json({"schema_version": P.SCHEMA_VERSION, "tier": args.tier,
                         "results": [r.to_dict() for r in results]}), args.out)
    if n_fail:
        raise ValidationFailure(f"{n_fail} check(s) failed")
    return EXIT_OK


def cmd_preset_list(args) -> int:
    for name in P.preset_names():
        print(name)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _add_protocol_flags(sp):
    sp.add_argument("--config", help="protocol config (JSON)")
    sp.add_argument("--preset", help="preset name (see preset-list)")
    sp.add_argument("--m", type=int, help="protocol length parameter for table1-rowN presets")
    sp.add_argument("--N", type=int, help="comb spacing for the cat preset")
    sp.add_argument("--g", help="coupling for the cat preset, e.g. 1.2533 or 0.5+1j")
    sp.add_argument("--k", type=int, help="residue class for cat/bell presets")
    sp.add_argument("--engine", choices=["analytic", "ladder", "fourier"])
    sp.add_argument("--cutoff", type=int, help="Fock cutoff (default: automatic)")
    sp.add_argument("--out", help="output path (default: stdout)")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gkpforge", description="Free-electron heralded optical state synthesis")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("run", help="run one protocol and write a JSON report")
    _add_protocol_flags(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jitter", type=float, help="also estimate robustness to |g| jitter of this size")
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--no-metrics", action="store_true", help="skip squeezing and fidelity evaluation")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="sweep one parameter and write a CSV table")
    _add_protocol_flags(sp)
    sp.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sp.add_argument("--values", required=True, help="comma list; integer ranges as a..b")
    sp.add_argument("--report", help="also write a JSON report here")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("wigner", help="export the output Wigner function as CSV")
    _add_protocol_flags(sp)
    sp.add_argument("--grid", default="-6:6:121", help="x grid start:stop:count (also p unless --pgrid)")
    sp.add_argument("--pgrid", help="p grid start:stop:count")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_wigner)

    sp = sub.add_parser("validate", help="run the acceptance suite")
    sp.add_argument("--tier", choices=["default", "extended"], default="default")
    sp.add_argument("--only", help="comma list of check ids, e.g. c01,c04")
    sp.add_argument("--out", help="write a JSON summary here")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("preset-list", help="list preset names")
    sp.set_defaults(func=cmd_preset_list)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except GkpForgeError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                                     "exit_code": exc.exit_code}, sort_keys=True) + "\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
