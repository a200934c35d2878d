"""Command-line front end: run experiments, check oracles, audit traces.

Subcommands:

- ``run``    solve a configured problem, write <prefix>.trace.csv and
             <prefix>.summary.json (plus a baseline trace when configured)
- ``check``  finite-difference, minimizer-consistency, and Lipschitz-probe
             oracle checks for a configured problem
- ``report`` re-read a trace CSV, refold the certificate, verify the
             telescoped and rate bounds at every prefix, fit the decay slope

Exit codes: 0 success and certified, 1 operational error (bad config,
missing oracle, solver breakdown), 2 certificate or verification failure.

Config files are INI-style with sections [problem], [solver], [output] and
optionally [baseline]; unknown sections or keys are errors, not warnings.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import math
import re
import sys

import numpy as np

from .certificate import min_grad_bound
from .errors import (
    BcdcertError,
    ConfigError,
    SchemaMismatch,
    SufficientDecreaseViolated,
    TamperDetected,
)
from .numerics import fd_check_gradients, probe_lipschitz_x
from .problem import BlockPoint
from .problems import (
    FAMILY_NAMES,
    LipschitzOverride,
    ProblemSpec,
    make_problem,
    random_start,
)
from .solver import SolverConfig, StopReason, solve, solve_gd_baseline
from .strategies import BacktrackParams
from .traceio import read_trace, verify_trace, write_json, write_trace, write_trace_json

_SECTIONS = ("problem", "solver", "output", "baseline")

_FAMILY_KEYS = {
    "tight_quadratic": {"l": "float", "anchor": "vector", "g": "vector", "c": "float"},
    "coupled_quadratic": {"n_x": "int", "n_y": "int"},
    "matrix_factorization": {"m": "int", "n": "int", "r": "int"},
    "two_block_rosenbrock": {"scale": "float"},
}

_SOLVER_KEYS = (
    "x_strategy",
    "grad_tol",
    "y_tol",
    "check_tol",
    "max_iters",
    "seed",
    "start_x",
    "start_y",
    "backtrack_l_init",
    "backtrack_growth",
    "backtrack_max_rejects",
)

# Errors that mean the certificate itself failed, as opposed to the run
# being unable to proceed; they map to exit 2 instead of 1.
_CERT_ERRORS = (SufficientDecreaseViolated, TamperDetected)


def _parse_vector(text: str) -> list[float]:
    toks = [tok for tok in re.split(r"[,\s]+", text.strip()) if tok]
    if not toks:
        raise ValueError("empty vector")
    return [float(tok) for tok in toks]


def _convert(kind: str, raw: str):
    if kind == "float":
        return float(raw)
    if kind == "int":
        return int(raw)
    if kind == "vector":
        return _parse_vector(raw)
    return raw


def _take(section: dict, name: str, key: str, kind: str, default=None):
    if key not in section:
        return default
    raw = section.pop(key)
    try:
        return _convert(kind, raw)
    except ValueError:
        raise ConfigError(f"[{name}] {key}: cannot parse {raw!r} as {kind}") from None


@dataclasses.dataclass
class RunConfig:
    """A fully parsed config file; every field already validated."""

    spec: ProblemSpec
    lipschitz_override: float | None
    solver: SolverConfig
    start_x: list[float] | None
    start_y: list[float] | None
    out_prefix: str
    out_format: str
    baseline_step: float | None
    baseline_iters: int


def parse_config(path: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        read = cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
    if not cp.has_section("problem"):
        raise ConfigError("missing required section [problem]")

    prob = dict(cp.items("problem"))
    family = prob.pop("family", None)
    if family is None:
        raise ConfigError("[problem] family is required")
    if family not in FAMILY_NAMES:
        raise ConfigError(
            f"[problem] family {family!r} unknown; choose from {', '.join(FAMILY_NAMES)}"
        )
    prob_seed = _take(prob, "problem", "seed", "int", 0)
    override = _take(prob, "problem", "lipschitz_override", "float")
    params = {}
    for key, kind in _FAMILY_KEYS[family].items():
        if key in prob:
            params[key] = _take(prob, "problem", key, kind)
    if prob:
        raise ConfigError(f"[problem] unknown keys for {family}: {', '.join(sorted(prob))}")
    spec = ProblemSpec(family=family, seed=prob_seed, params=params)

    sol = dict(cp.items("solver")) if cp.has_section("solver") else {}
    for key in sol:
        if key not in _SOLVER_KEYS:
            raise ConfigError(f"[solver] unknown key {key!r}")
    start_x = _take(sol, "solver", "start_x", "vector")
    start_y = _take(sol, "solver", "start_y", "vector")
    bt = BacktrackParams(
        l_init=_take(sol, "solver", "backtrack_l_init", "float", 1.0),
        growth=_take(sol, "solver", "backtrack_growth", "float", 2.0),
        max_rejects=_take(sol, "solver", "backtrack_max_rejects", "int", 60),
    )
    try:
        scfg = SolverConfig(
            x_strategy=sol.pop("x_strategy", "fixed_step"),
            y_tol=_take(sol, "solver", "y_tol", "float"),
            grad_tol=_take(sol, "solver", "grad_tol", "float", 1e-9),
            max_iters=_take(sol, "solver", "max_iters", "int", 1000),
            backtrack=bt,
            check_tol=_take(sol, "solver", "check_tol", "float"),
            seed=_take(sol, "solver", "seed", "int", 0),
        )
    except ValueError as exc:
        raise ConfigError(f"[solver] {exc}") from None

    out = dict(cp.items("output")) if cp.has_section("output") else {}
    prefix = out.pop("prefix", "run")
    fmt = out.pop("format", "csv")
    if fmt not in ("csv", "json", "both"):
        raise ConfigError(f"[output] format must be csv, json, or both, got {fmt!r}")
    if out:
        raise ConfigError(f"[output] unknown keys: {', '.join(sorted(out))}")

    baseline_step = None
    baseline_iters = 1000
    if cp.has_section("baseline"):
        base = dict(cp.items("baseline"))
        baseline_step = _take(base, "baseline", "step", "float")
        baseline_iters = _take(base, "baseline", "max_iters", "int", 1000)
        if base:
            raise ConfigError(f"[baseline] unknown keys: {', '.join(sorted(base))}")
        if baseline_step is None:
            raise ConfigError("[baseline] step is required when the section is present")

    return RunConfig(
        spec=spec,
        lipschitz_override=override,
        solver=scfg,
        start_x=start_x,
        start_y=start_y,
        out_prefix=prefix,
        out_format=fmt,
        baseline_step=baseline_step,
        baseline_iters=baseline_iters,
    )


def _build_objective(cfg: RunConfig):
    obj = make_problem(cfg.spec)
    if cfg.lipschitz_override is not None:
        obj = LipschitzOverride(obj, cfg.lipschitz_override)
    return obj


def _resolve_start(obj, cfg: RunConfig) -> BlockPoint:
    if cfg.start_x is None and cfg.start_y is None:
        return random_start(obj, cfg.solver.seed)
    x = cfg.start_x
    y = cfg.start_y
    if x is None and obj.n_x > 0:
        raise ConfigError("[solver] start_x required when start_y is set")
    if y is None:
        if obj.n_y > 0:
            raise ConfigError("[solver] start_y required when start_x is set")
        y = []
    return BlockPoint(x if x is not None else [], y)


def _num(v):
    """Floats for JSON: None stands in for undefined (inf/nan) aggregates."""
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _e_growth_flag(history) -> bool:
    """True when e_t grew strictly monotonically over a run of 10+ steps."""
    es = [rec.e_t for rec in history]
    return len(es) >= 10 and all(b > a for a, b in zip(es, es[1:]))


def _error_payload(err: BcdcertError | None):
    if err is None:
        return None
    return {"type": type(err).__name__, "message": str(err)}


def _summarize(cfg: RunConfig, result) -> dict:
    cert = result.certificate
    obj_lower = None
    summary = {
        "family": cfg.spec.family,
        "x_strategy": cfg.solver.x_strategy,
        "problem_seed": cfg.spec.seed,
        "solver_seed": cfg.solver.seed,
        "f0": cert.f0,
        "f_final": cert.f_final,
        "T": cert.num_steps,
        "e_min": _num(cert.e_min),
        "e_max": _num(cert.e_max),
        "min_grad_sq": _num(cert.min_grad_sq),
        "rate_bound": _num(cert.rate_bound),
        "telescope_ok": cert.telescope_ok,
        "all_steps_ok": cert.all_steps_ok,
        "certified": cert.passed(),
        "max_gy_residual": cert.max_gy_residual,
        "init_y_residual": result.init_y_residual,
        "stop_reason": result.stop_reason.value,
        "wall_time": result.wall_time,
        "check_tol": result.check_tol,
        "y_tol": _num(result.y_tol),
        "e_growth_flag": _e_growth_flag(result.history),
        "error": _error_payload(result.error),
    }
    return summary


def cmd_run(cfg: RunConfig, quiet: bool = False) -> int:
    try:
        obj = _build_objective(cfg)
        start = _resolve_start(obj, cfg)
    except BcdcertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, _CERT_ERRORS) else 1

    result = solve(obj, start, cfg.solver)
    summary = _summarize(cfg, result)

    lower = obj.lower_bound()
    summary["gap_to_lower_bound"] = (
        _num(result.certificate.f_final - lower) if lower is not None else None
    )

    trace_files = []
    if cfg.out_format in ("csv", "both"):
        path = cfg.out_prefix + ".trace.csv"
        write_trace(path, result.history, result.check_tol)
        trace_files.append(path)
    if cfg.out_format in ("json", "both"):
        path = cfg.out_prefix + ".trace.json"
        write_trace_json(path, result.history, result.check_tol)
        trace_files.append(path)

    if cfg.baseline_step is not None:
        base = solve_gd_baseline(obj, start, cfg.baseline_step, cfg.baseline_iters)
        base_path = cfg.out_prefix + ".baseline.trace.csv"
        write_trace(base_path, base.history, base.check_tol)
        trace_files.append(base_path)
        summary["baseline"] = {
            "step": cfg.baseline_step,
            "f0": base.certificate.f0,
            "f_final": base.certificate.f_final,
            "T": base.certificate.num_steps,
            "stop_reason": base.stop_reason.value,
            "error": _error_payload(base.error),
        }

    summary["trace_files"] = trace_files
    summary_path = cfg.out_prefix + ".summary.json"
    write_json(summary_path, summary)

    if result.stop_reason is StopReason.ERROR:
        print(f"error: {result.error}", file=sys.stderr)
        code = 2 if isinstance(result.error, _CERT_ERRORS) else 1
    else:
        code = 0 if result.certificate.passed() else 2
    if not quiet:
        cert = result.certificate
        print(
            f"{cfg.spec.family} [{cfg.solver.x_strategy}] "
            f"T={cert.num_steps} f: {cert.f0:.6g} -> {cert.f_final:.6g} "
            f"certified={cert.passed()} stop={result.stop_reason.value} "
            f"-> {summary_path}"
        )
    return code


def run_oracle_checks(obj, points: int = 20, seed: int = 0) -> tuple[bool, dict]:
    """Oracle cross-checks for one objective; returns (all_passed, payload).

    Three groups: central finite differences against both gradient blocks,
    declared exact minimizers actually zeroing their block gradient (and not
    increasing f), and the sampled secant-ratio probe never exceeding the
    declared Lipschitz oracle by more than a factor 1 + 1e-6.
    """
    checks = []
    starts = [random_start(obj, seed + i) for i in range(points)]

    worst = None
    for p in starts:
        rep = fd_check_gradients(obj, p)
        if worst is None or rep.max_rel_err > worst.max_rel_err:
            worst = rep
    fd_ok = worst.max_rel_err <= 1e-6
    checks.append(
        {
            "name": "fd_gradients",
            "status": "ok" if fd_ok else "fail",
            "max_rel_err": worst.max_rel_err,
            "worst_coordinate": list(worst.worst_index),
            "points": points,
        }
    )

    for block in ("y", "x"):
        size = obj.n_y if block == "y" else obj.n_x
        if size == 0:
            checks.append(
                {"name": f"exact_min_{block}", "status": "skipped (empty block)"}
            )
            continue
        probe_points = starts[: min(5, len(starts))]

        def fixed(p):
            return p.x if block == "y" else p.y

        minimize = obj.exact_min_y if block == "y" else obj.exact_min_x
        grad = obj.grad_y if block == "y" else obj.grad_x
        if minimize(fixed(probe_points[0])) is None:
            checks.append({"name": f"exact_min_{block}", "status": "skipped (no oracle)"})
            continue
        worst_res = 0.0
        ok = True
        for p in probe_points:
            star = minimize(fixed(p))
            q = p.with_y(star) if block == "y" else p.with_x(star)
            res = float(np.linalg.norm(grad(q)))
            base = max(1.0, float(np.linalg.norm(grad(p))))
            worst_res = max(worst_res, res / base)
            f_p = float(obj.value(p))
            if res > 1e-10 * base or float(obj.value(q)) > f_p + 1e-10 * max(1.0, abs(f_p)):
                ok = False
        checks.append(
            {
                "name": f"exact_min_{block}",
                "status": "ok" if ok else "fail",
                "max_rel_residual": worst_res,
            }
        )

    if obj.n_x == 0:
        checks.append({"name": "lipschitz_probe", "status": "skipped (empty block)"})
    else:
        declared = obj.lipschitz_x(starts[0].y) if starts else None
        if declared is None:
            checks.append({"name": "lipschitz_probe", "status": "skipped (no oracle)"})
        else:
            ok = True
            worst_ratio = 0.0
            for p in starts[: min(3, len(starts))]:
                declared = float(obj.lipschitz_x(p.y))
                probe = probe_lipschitz_x(obj, p.y, (-2.0, 2.0), samples=100, seed=seed)
                worst_ratio = max(worst_ratio, probe / declared if declared else math.inf)
                if probe > declared * (1.0 + 1e-6):
                    ok = False
            checks.append(
                {
                    "name": "lipschitz_probe",
                    "status": "ok" if ok else "fail",
                    "max_probe_over_declared": worst_ratio,
                }
            )

    passed = all(c["status"] != "fail" for c in checks)
    return passed, {"checks": checks, "passed": passed}


def cmd_check(cfg: RunConfig, points: int, seed: int, quiet: bool = False) -> int:
    try:
        obj = _build_objective(cfg)
        passed, payload = run_oracle_checks(obj, points=points, seed=seed)
    except BcdcertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    payload["family"] = cfg.spec.family
    if not quiet:
        for chk in payload["checks"]:
            status = chk["status"]
            tag = "ok" if status == "ok" else ("--" if status.startswith("skipped") else "FAIL")
            detail = ", ".join(
                f"{k}={v}" for k, v in chk.items() if k not in ("name", "status")
            )
            print(f"[{tag:>4}] {chk['name']}: {status}" + (f" ({detail})" if detail else ""))
    print(json.dumps(payload, indent=1, sort_keys=True))
    return 0 if passed else 2


def cmd_report(trace_path: str, quiet: bool = False) -> int:
    try:
        rows = read_trace(trace_path)
        verdict = verify_trace(rows)
    except (OSError, SchemaMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TamperDetected as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not quiet:
        slope = f"{verdict.slope:.4f}" if verdict.slope is not None else verdict.slope_note
        print(f"rows: {verdict.num_rows}")
        print(f"all steps certified: {verdict.all_steps_ok}")
        print(f"telescope bound at every prefix: {verdict.telescope_ok}")
        print(f"rate bound at every prefix: {verdict.rate_bound_ok}")
        print(f"min-grad decay slope: {slope}")
        if verdict.certificate is not None:
            mg, rb = min_grad_bound(verdict.certificate)
            print(f"min_grad_sq: {mg!r} <= rate_bound: {rb!r}")
    return 0 if verdict.passed() else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bcdcert",
        description="Two-block coordinate descent with a runtime convergence certificate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="solve a configured problem and write trace + summary")
    p_run.add_argument("--config", required=True, help="INI config path")
    p_run.add_argument("--seed", type=int, default=None, help="override problem and solver seeds")
    p_run.add_argument("--out", default=None, help="override output prefix")
    p_run.add_argument("--format", choices=("csv", "json", "both"), default=None)
    p_run.add_argument("--quiet", action="store_true")

    p_check = sub.add_parser("check", help="run oracle cross-checks for a configured problem")
    p_check.add_argument("--config", required=True, help="INI config path ([problem] section)")
    p_check.add_argument("--points", type=int, default=20)
    p_check.add_argument("--seed", type=int, default=None, help="override check seed")
    p_check.add_argument("--quiet", action="store_true")

    p_rep = sub.add_parser("report", help="refold and audit a trace CSV")
    p_rep.add_argument("trace", help="path to a .trace.csv file")
    p_rep.add_argument("--quiet", action="store_true")

    args = parser.parse_args(argv)

    if args.command == "report":
        return cmd_report(args.trace, quiet=args.quiet)

    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(
            cfg,
            spec=dataclasses.replace(cfg.spec, seed=args.seed),
            solver=dataclasses.replace(cfg.solver, seed=args.seed),
        )
    if args.command == "check":
        seed = args.seed if args.seed is not None else cfg.solver.seed
        return cmd_check(cfg, points=args.points, seed=seed, quiet=args.quiet)

    if args.out is not None:
        cfg = dataclasses.replace(cfg, out_prefix=args.out)
    if args.format is not None:
        cfg = dataclasses.replace(cfg, out_format=args.format)
    return cmd_run(cfg, quiet=args.quiet)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
