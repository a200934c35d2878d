"""Independent numerical oracles.

These routines deliberately avoid the analytic code paths they are used to
check: gradients are probed by central differences, Lipschitz constants by
sampled secant ratios, and the spectral norm by power iteration. The Lipschitz
probe can only certify violations (it is a lower estimate of the true region
constant), never validate an oracle exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRegion, NoConvergence, NonFiniteValue
from .problem import BlockPoint, Objective


@dataclass
class FiniteDiffReport:
    """Worst-case central-difference vs analytic-gradient discrepancy."""

    max_rel_err: float
    max_abs_err: float
    worst_index: tuple  # (block, coordinate), e.g. ("x", 3)
    h: float


def _central_diff(obj, p, block, i, h):
    base = p.x if block == "x" else p.y
    e = np.zeros(base.size)
    e[i] = h
    if block == "x":
        hi, lo = p.with_x(base + e), p.with_x(base - e)
    else:
        hi, lo = p.with_y(base + e), p.with_y(base - e)
    f_hi, f_lo = obj.value(hi), obj.value(lo)
    if not (np.isfinite(f_hi) and np.isfinite(f_lo)):
        raise NonFiniteValue(f"objective non-finite while probing {block}[{i}]")
    return (f_hi - f_lo) / (2.0 * h)


def fd_check_gradients(obj: Objective, p: BlockPoint, h: float | None = None) -> FiniteDiffReport:
    """Compare grad_x/grad_y against central differences, coordinate by coordinate.

    With ``h=None``, each coordinate uses 1e-5 * max(1, |coordinate|), which
    balances truncation and rounding in double precision. Relative error is
    denominated by max(1, |analytic|) so it degrades gracefully to absolute
    error near zero.
    """
    if h is not None and not h > 0:
        raise ValueError("h must be positive")
    obj.check_point(p)
    gx = np.asarray(obj.grad_x(p), dtype=float).ravel()
    gy = np.asarray(obj.grad_y(p), dtype=float).ravel()

    max_rel = 0.0
    max_abs = 0.0
    worst = ("x", -1) if p.n_x else ("y", -1)
    h_worst = h if h is not None else 1e-5
    for block, grad, base in (("x", gx, p.x), ("y", gy, p.y)):
        for i in range(base.size):
            h_i = h if h is not None else 1e-5 * max(1.0, abs(base[i]))
            fd = _central_diff(obj, p, block, i, h_i)
            abs_err = abs(fd - grad[i])
            rel_err = abs_err / max(1.0, abs(grad[i]))
            if abs_err > max_abs:
                max_abs = abs_err
            if rel_err >= max_rel:
                max_rel = rel_err
                worst = (block, i)
                h_worst = h_i
    return FiniteDiffReport(max_rel, max_abs, worst, h_worst)


def probe_lipschitz_x(
    obj: Objective,
    y,
    region,
    samples: int = 100,
    seed: int = 0,
) -> float:
    """Empirical lower estimate of the block-x Lipschitz constant at fixed y.

    Draws ``samples`` point pairs (x, x') uniformly from the box
    ``region=(lo, hi)`` and returns the largest secant ratio
    ||grad_x(x', y) - grad_x(x, y)|| / ||x' - x||. Deterministic given seed.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    y = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
    lo = np.broadcast_to(np.asarray(region[0], dtype=float), (obj.n_x,)).astype(float)
    hi = np.broadcast_to(np.asarray(region[1], dtype=float), (obj.n_x,)).astype(float)
    if obj.n_x == 0 or not np.all(hi > lo):
        raise DegenerateRegion("sampling box has zero volume")

    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(samples):
        xa = lo + (hi - lo) * rng.random(obj.n_x)
        xb = lo + (hi - lo) * rng.random(obj.n_x)
        dist = float(np.linalg.norm(xb - xa))
        if dist == 0.0:
            continue
        ga = obj.grad_x(BlockPoint(xa, y))
        gb = obj.grad_x(BlockPoint(xb, y))
        ratio = float(np.linalg.norm(gb - ga)) / dist
        if ratio > best:
            best = ratio
    return best


def _power_iterate(gram, v, tol, max_iter):
    """Run power iteration on a PSD matrix from v; Rayleigh-quotient estimate."""
    lam = float(v @ gram @ v)
    for _ in range(max_iter):
        w = gram @ v
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            return 0.0, v, True
        v = w / norm_w
        lam_new = float(v @ gram @ v)
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new, v, True
        lam = lam_new
    return lam, v, False


def spectral_norm(mat, tol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Largest singular value via power iteration on the Gram matrix.

    Start vector is all-ones normalized; after the first stagnation the
    iterate is perturbed with a fixed ramp and re-converged, which recovers
    from starts orthogonal to the top singular direction. Deterministic.
    """
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if not np.all(np.isfinite(mat)):
        raise NonFiniteValue("matrix contains NaN/Inf entries")
    if mat.size == 0:
        return 0.0
    # Same nonzero spectrum either way; iterate on the smaller Gram matrix.
    gram = mat @ mat.T if mat.shape[0] <= mat.shape[1] else mat.T @ mat
    k = gram.shape[0]

    v0 = np.ones(k) / np.sqrt(k)
    lam1, v1, ok1 = _power_iterate(gram, v0, tol, max_iter)
    ramp = np.arange(1, k + 1, dtype=float)
    ramp /= np.linalg.norm(ramp)
    v_pert = v1 + ramp
    v_pert /= np.linalg.norm(v_pert)
    lam2, _, ok2 = _power_iterate(gram, v_pert, tol, max_iter)
    if not (ok1 and ok2):
        raise NoConvergence(f"power iteration did not settle in {max_iter} iterations")
    return float(np.sqrt(max(lam1, lam2, 0.0)))
