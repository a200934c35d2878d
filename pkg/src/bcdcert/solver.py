"""Outer BCD loop: exact y-stationarity, certified x-step, repeat.

One initial ``stationary_y`` call makes the certificate's standing hypothesis
(grad_y = 0 at every measured iterate) true by construction; after that each
iteration measures gradients at (x_t, y_t), applies the configured x-strategy,
re-solves the y block, records the step, and folds it into the certificate.

A strategy error mid-run does not discard the work: the partial history and
an invalidated certificate come back on the RunResult with
``stop_reason = ERROR`` and the exception attached.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .certificate import Certificate, IterationRecord, accumulate, check_step, verify_telescope
from .errors import BcdcertError, NonFiniteValue
from .problem import BlockPoint, Objective, evaluate
from .strategies import (
    BacktrackParams,
    backtracking_gradient_x,
    exact_min_x,
    fixed_step_gradient_x,
    full_gradient_step,
    stationary_y,
)

X_STRATEGIES = ("fixed_step", "exact_min", "backtracking")


class StopReason(str, enum.Enum):
    GRAD_TOL = "grad_tol_met"
    MAX_ITERS = "max_iters"
    ERROR = "error"


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for one run.

    ``y_tol=None`` resolves to 1e-10 * max(1, ||grad_y|| at the start) and
    ``check_tol=None`` to 1e-10 * max(1, |f0|); both are recorded on the
    result. ``seed`` only labels the run (the loop itself is deterministic).
    """

    x_strategy: str = "fixed_step"
    y_tol: float | None = None
    grad_tol: float = 1e-9
    max_iters: int = 1000
    backtrack: BacktrackParams = field(default_factory=BacktrackParams)
    check_tol: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.x_strategy not in X_STRATEGIES:
            raise ValueError(
                f"x_strategy {self.x_strategy!r} not one of {X_STRATEGIES}"
            )
        if self.y_tol is not None and not self.y_tol > 0:
            raise ValueError("y_tol must be positive")
        if self.check_tol is not None and not self.check_tol > 0:
            raise ValueError("check_tol must be positive")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class RunResult:
    """Everything one run produced; immutable by convention once returned."""

    final: BlockPoint
    certificate: Certificate
    history: list[IterationRecord]
    stop_reason: StopReason
    wall_time: float
    y_tol: float
    check_tol: float
    init_y_residual: float = 0.0
    error: BcdcertError | None = None

    @property
    def iterations(self) -> int:
        return len(self.history)


def _resolve_y_tol(obj, start, cfg):
    if cfg.y_tol is not None:
        return cfg.y_tol
    gy0 = float(np.linalg.norm(np.asarray(obj.grad_y(start), dtype=float)))
    if not math.isfinite(gy0):
        gy0 = 1.0
    return 1e-10 * max(1.0, gy0)


def solve(obj: Objective, start: BlockPoint, cfg: SolverConfig) -> RunResult:
    """Run certified BCD from ``start`` until grad_tol, max_iters, or error."""
    t_start = time.perf_counter()
    obj.check_point(start)
    y_tol = _resolve_y_tol(obj, start, cfg)

    def abort(err, cert, history, point, check_tol):
        cert.invalidated = True
        verify_telescope(cert, check_tol)
        return RunResult(
            final=point,
            certificate=cert,
            history=history,
            stop_reason=StopReason.ERROR,
            wall_time=time.perf_counter() - t_start,
            y_tol=y_tol,
            check_tol=check_tol,
            init_y_residual=init_residual,
            error=err,
        )

    init_residual = 0.0
    try:
        y0, init_residual = stationary_y(obj, start, y_tol)
    except BcdcertError as err:
        f0 = float(obj.value(start))
        check_tol = cfg.check_tol or 1e-10 * max(1.0, abs(f0))
        return abort(err, Certificate.fresh(f0), [], start, check_tol)

    point = BlockPoint(start.x, y0)
    f_cur, gx, gy = evaluate(obj, point)
    check_tol = cfg.check_tol if cfg.check_tol is not None else 1e-10 * max(1.0, abs(f_cur))
    cert = Certificate.fresh(f_cur)
    history: list[IterationRecord] = []
    stop = StopReason.MAX_ITERS
    l_carry = cfg.backtrack.l_init

    for t in range(cfg.max_iters):
        if t > 0:
            _, gx, gy = evaluate(obj, point)
        grad_norm = math.sqrt(float(gx @ gx) + float(gy @ gy))
        if grad_norm <= cfg.grad_tol:
            stop = StopReason.GRAD_TOL
            break
        try:
            if cfg.x_strategy == "fixed_step":
                upd = fixed_step_gradient_x(obj, point)
            elif cfg.x_strategy == "exact_min":
                upd = exact_min_x(obj, point)
            else:
                # Monotone per-run estimate: never let the accepted constant
                # shrink between outer iterations.
                params = dataclasses.replace(cfg.backtrack, l_init=l_carry)
                upd = backtracking_gradient_x(obj, point, params)
                l_carry = upd.e_t
            mid = point.with_x(upd.x_next)
            f_after_x = float(obj.value(mid))
            y_next, residual = stationary_y(obj, mid, y_tol)
        except BcdcertError as err:
            return abort(err, cert, history, point, check_tol)
        point = mid.with_y(y_next)
        f_after_y = float(obj.value(point))
        rec = IterationRecord(
            t=t,
            f_before=f_cur,
            f_after_x=f_after_x,
            f_after_y=f_after_y,
            gx_norm_sq=float(gx @ gx),
            gy_residual=residual,
            e_t=upd.e_t,
        )
        check_step(rec, check_tol)
        cert = accumulate(cert, rec)
        history.append(rec)
        f_cur = f_after_y

    verify_telescope(cert, check_tol)
    return RunResult(
        final=point,
        certificate=cert,
        history=history,
        stop_reason=stop,
        wall_time=time.perf_counter() - t_start,
        y_tol=y_tol,
        check_tol=check_tol,
        init_y_residual=init_residual,
    )


def solve_gd_baseline(
    obj: Objective, start: BlockPoint, step: float, max_iters: int
) -> RunResult:
    """Plain joint gradient descent, recorded in the same trace schema.

    Baseline for side-by-side reporting only. Records use the full gradient
    norm and e_t = 1/step (the constant a 1/L-style step would certify);
    nothing here is asserted, and divergence with a too-large step is an
    expected outcome that comes back as stop_reason = ERROR.
    """
    if step < 0:
        raise ValueError("step must be nonnegative")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    t_start = time.perf_counter()
    obj.check_point(start)
    e_t = 1.0 / step if step > 0 else 1.0

    point = start
    f_cur, gx, gy = evaluate(obj, point)
    f0 = f_cur
    check_tol = 1e-10 * max(1.0, abs(f0))
    cert = Certificate.fresh(f0)
    history: list[IterationRecord] = []
    stop = StopReason.MAX_ITERS
    error: BcdcertError | None = None

    for t in range(max_iters):
        try:
            if t > 0:
                _, gx, gy = evaluate(obj, point)
                f_cur = history[-1].f_after_y
            nxt = full_gradient_step(obj, point, step)
            f_next = float(obj.value(nxt))
            if not math.isfinite(f_next):
                raise NonFiniteValue(f"baseline diverged at iteration {t}")
        except BcdcertError as err:
            error = err
            stop = StopReason.ERROR
            cert.invalidated = True
            break
        g_sq = float(gx @ gx) + float(gy @ gy)
        rec = IterationRecord(
            t=t,
            f_before=f_cur,
            f_after_x=f_next,
            f_after_y=f_next,
            gx_norm_sq=g_sq,
            gy_residual=float(np.linalg.norm(gy)),
            e_t=e_t,
        )
        check_step(rec, check_tol)
        cert = accumulate(cert, rec)
        history.append(rec)
        point = nxt

    verify_telescope(cert, check_tol)
    return RunResult(
        final=point,
        certificate=cert,
        history=history,
        stop_reason=stop,
        wall_time=time.perf_counter() - t_start,
        y_tol=math.nan,
        check_tol=check_tol,
        error=error,
    )
