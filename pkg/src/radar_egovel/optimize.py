"""Velocity solvers over a masked scan.

The objective is ``f(v) = sum_i w_i * rho(r_i)`` with residual
``r_i = doppler_i + u_i . v``, so ``df/dv = sum_i w_i * rho'(r_i) * u_i``.
Plain L2 is solved in closed form through a QR factorization; every other
kernel goes through BFGS with a strong-Wolfe line search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NonFiniteObjective, NotEnoughDetections, RankDeficient
from .losses import LossSpec, evaluate, evaluate_grad, snr_weights
from .types import RadarScan

#: Minimum singular value of the stacked (weighted) directions.
RANK_TOL = 1e-6
#: Curvature below which the BFGS inverse-Hessian is reset to identity.
CURVATURE_EPS = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    grad_tolerance: float = 1e-8
    step_tolerance: float = 1e-10
    max_iterations: int = 100
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9

    def __post_init__(self):
        if not 0 < self.wolfe_c1 < self.wolfe_c2 < 1:
            raise ValueError(
                f"need 0 < wolfe_c1 < wolfe_c2 < 1, got {self.wolfe_c1}, {self.wolfe_c2}"
            )
        if self.grad_tolerance <= 0 or self.step_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class SolveResult:
    velocity: np.ndarray
    objective: float
    gradient_norm: float
    iterations: int
    converged: bool
    residual_rms: float
    stop_reason: str = "gradient"
    objective_history: tuple = field(default=(), repr=False)


def _masked(scan: RadarScan, mask, weights):
    n = len(scan)
    mask = np.ones(n, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if mask.shape != (n,):
        raise ValueError(f"mask has shape {mask.shape}, scan has {n} detections")
    if weights is None:
        weights = np.ones(n)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n,):
        raise ValueError(f"weights have shape {weights.shape}, scan has {n} detections")
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    if mask.sum() < 3:
        raise NotEnoughDetections(f"{int(mask.sum())} selected detections, need at least 3")
    return scan.directions[mask], scan.dopplers[mask], weights[mask]


def _check_rank(U, w):
    sv = np.linalg.svd(U * np.sqrt(w)[:, None], compute_uv=False)
    if sv[-1] < RANK_TOL:
        raise RankDeficient(f"selected directions span < 3 dimensions (min singular value {sv[-1]:.3g})")


def weighted_lstsq(U, d, w) -> np.ndarray:
    """Minimize ``sum w_i (d_i + u_i . v)^2`` via QR. Raises RankDeficient."""
    sw = np.sqrt(w)
    A = U * sw[:, None]
    b = -d * sw
    Q, R = np.linalg.qr(A)
    sv = np.linalg.svd(R, compute_uv=False)
    if sv[-1] < RANK_TOL:
        raise RankDeficient(f"selected directions span < 3 dimensions (min singular value {sv[-1]:.3g})")
    return solve_triangular(R, Q.T @ b)


def _rms(U, d, v) -> float:
    r = d + U @ v
    return float(np.sqrt(np.mean(r * r)))


def solve_linear_ls(scan: RadarScan, mask=None, weights=None) -> SolveResult:
    """Closed-form (weighted) least squares over the masked detections."""
    U, d, w = _masked(scan, mask, weights)
    v = weighted_lstsq(U, d, w)
    r = d + U @ v
    g = U.T @ (w * r)
    f = 0.5 * float(np.sum(w * r * r))
    return SolveResult(
        velocity=v,
        objective=f,
        gradient_norm=float(np.linalg.norm(g)),
        iterations=1,
        converged=True,
        residual_rms=float(np.sqrt(np.mean(r * r))),
        stop_reason="closed_form",
        objective_history=(f,),
    )


def objective_and_gradient(scan: RadarScan, mask, loss: LossSpec, v, weights=None):
    """Return ``(f, grad f)`` of the weighted robust objective at ``v``."""
    n = len(scan)
    mask = np.ones(n, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    U, d, w = scan.directions[mask], scan.dopplers[mask], w[mask]
    return _objective(U, d, w, loss, np.asarray(v, dtype=float))


def _objective(U, d, w, loss, v):
    r = d + U @ v
    f = float(np.sum(evaluate(loss, r, w)))
    g = U.T @ np.atleast_1d(evaluate_grad(loss, r, w))
    return f, g


def _flat_accept(f_a, d_a, f0, d0, c2):
    # approximate Wolfe: near the optimum f stops resolving decrease, so
    # accept a non-increasing step whose slope meets the curvature condition
    return f0 - 1e-12 * max(1.0, abs(f0)) <= f_a <= f0 and abs(d_a) <= -c2 * d0


def _zoom(phi, a_lo, a_hi, f_lo, d_lo, f0, d0, c1, c2, max_iter=30):
    for _ in range(max_iter):
        width = a_hi - a_lo
        # quadratic interpolation through f_lo, d_lo, f_hi, safeguarded
        f_hi = phi(a_hi)[0]
        denom = 2.0 * (f_hi - f_lo - d_lo * width)
        a = a_lo - d_lo * width * width / denom if denom > 0 else a_lo + 0.5 * width
        lo, hi = min(a_lo, a_hi), max(a_lo, a_hi)
        margin = 0.1 * (hi - lo)
        if not (lo + margin <= a <= hi - margin):
            a = 0.5 * (a_lo + a_hi)
        f_a, d_a, g_a = phi(a)
        if _flat_accept(f_a, d_a, f0, d0, c2):
            return a, f_a, g_a
        if f_a > f0 + c1 * a * d0 or f_a >= f_lo:
            a_hi = a
        else:
            if abs(d_a) <= -c2 * d0:
                return a, f_a, g_a
            if d_a * (a_hi - a_lo) >= 0:
                a_hi = a_lo
            a_lo, f_lo, d_lo = a, f_a, d_a
        if abs(a_hi - a_lo) < 1e-16 * max(1.0, abs(a_lo)):
            break
    return None


def line_search_wolfe(fg, x, p, f0, g0, c1=1e-4, c2=0.9, a_max=1e8, max_iter=40):
    """Strong-Wolfe step length along ``p``.

    Returns ``(alpha, f, g)`` or ``None``. When the curvature condition cannot
    be met the best point satisfying sufficient decrease is returned instead,
    so a successful return never increases ``f``.
    """
    d0 = float(g0 @ p)
    cache = {}

    def phi(a):
        if a not in cache:
            f, g = fg(x + a * p)
            cache[a] = (f, float(g @ p), g)
        return cache[a]

    a_prev, f_prev, d_prev = 0.0, f0, d0
    a = 1.0
    result = None
    for i in range(max_iter):
        f_a, d_a, g_a = phi(a)
        if not math.isfinite(f_a):
            a *= 0.5
            continue
        if _flat_accept(f_a, d_a, f0, d0, c2):
            return a, f_a, g_a
        if f_a > f0 + c1 * a * d0 or (i > 0 and f_a >= f_prev):
            result = _zoom(phi, a_prev, a, f_prev, d_prev, f0, d0, c1, c2)
            break
        if abs(d_a) <= -c2 * d0:
            return a, f_a, g_a
        if d_a >= 0:
            result = _zoom(phi, a, a_prev, f_a, d_a, f0, d0, c1, c2)
            break
        a_prev, f_prev, d_prev = a, f_a, d_a
        a = min(2.0 * a, a_max)
    if result is not None:
        return result
    # fall back to the best Armijo point seen
    best = None
    for a, (f_a, _, g_a) in cache.items():
        if a > 0 and math.isfinite(f_a) and f_a <= f0 + c1 * a * d0 and f_a <= f0:
            if best is None or f_a < best[1]:
                best = (a, f_a, g_a)
    return best


def minimize_bfgs(fg, x0, config: SolverConfig = SolverConfig()):
    """BFGS on ``fg(x) -> (f, g)`` starting from the identity inverse-Hessian.

    Returns ``(x, f, g, iterations, stop_reason, history)``.
    """
    x = np.array(x0, dtype=float)
    f, g = fg(x)
    if not (math.isfinite(f) and np.all(np.isfinite(g))):
        raise NonFiniteObjective(f"non-finite objective at the initial point {x}")
    n = x.size
    eye = np.eye(n)
    H = eye.copy()
    history = [f]
    reason = "max_iterations"
    k = 0
    while k < config.max_iterations:
        if np.linalg.norm(g) < config.grad_tolerance:
            reason = "gradient"
            break
        p = -H @ g
        if g @ p >= 0:
            H = eye.copy()
            p = -g
        step = line_search_wolfe(fg, x, p, f, g, config.wolfe_c1, config.wolfe_c2)
        if step is None and not np.array_equal(H, eye):
            H = eye.copy()
            p = -g
            step = line_search_wolfe(fg, x, p, f, g, config.wolfe_c1, config.wolfe_c2)
        if step is None:
            reason = "line_search"
            break
        alpha, f_new, g_new = step
        if not (math.isfinite(f_new) and np.all(np.isfinite(g_new))):
            raise NonFiniteObjective("objective became non-finite during BFGS")
        s = alpha * p
        y = g_new - g
        x = x + s
        f, g = f_new, g_new
        history.append(f)
        k += 1
        if np.linalg.norm(g) < config.grad_tolerance:
            reason = "gradient"
            break
        if np.linalg.norm(s) < config.step_tolerance:
            reason = "step"
            break
        sy = float(y @ s)
        if sy <= CURVATURE_EPS:
            H = eye.copy()
        else:
            rho = 1.0 / sy
            V = eye - rho * np.outer(s, y)
            H = V @ H @ V.T + rho * np.outer(s, s)
    else:
        if np.linalg.norm(g) < config.grad_tolerance:
            reason = "gradient"
    return x, f, g, k, reason, tuple(history)


def solve_robust(
    scan: RadarScan,
    mask,
    loss: LossSpec,
    solver: SolverConfig = SolverConfig(),
    initial=None,
    weights=None,
) -> SolveResult:
    """Minimize the robust objective with BFGS.

    ``weights`` default to the loss's SNR weighting. Without ``initial`` the
    plain least-squares solution over the mask is used as the start point.
    """
    if weights is None:
        weights = snr_weights(scan.snrs, loss)
    U, d, w = _masked(scan, mask, weights)
    _check_rank(U, w)
    if initial is None:
        initial = weighted_lstsq(U, d, w)
    initial = np.asarray(initial, dtype=float).reshape(3)
    if not np.all(np.isfinite(initial)):
        raise ValueError("initial velocity must be finite")

    def fg(v):
        return _objective(U, d, w, loss, v)

    v, f, g, iters, reason, history = minimize_bfgs(fg, initial, solver)
    gnorm = float(np.linalg.norm(g))
    return SolveResult(
        velocity=v,
        objective=f,
        gradient_norm=gnorm,
        iterations=iters,
        converged=gnorm < solver.grad_tolerance,
        residual_rms=_rms(U, d, v),
        stop_reason=reason,
        objective_history=history,
    )
