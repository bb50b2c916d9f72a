"""Certified inexact proximal oracle for lam * TV + nonnegativity.

The prox subproblem at a shifted point ybar in a diagonal metric D is solved
through its Fenchel dual: accelerated projected ascent on per-pixel balls of
radius lam, with the primal iterate recovered in closed form from the dual
field.  The primal-dual gap at the returned pair certifies how far the
iterate is from the exact prox in function value, which is exactly the
inexactness notion the outer solver budgets for.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k


@dataclass(frozen=True)
class EpsilonSchedule:
    """Inexactness budget per outer iteration.

    variant "geometric": c0 * a^k, for backtracking with delta < 1; requires
    0 < a < delta so the budget decays faster than the steps.  variant
    "polynomial": k^(-b_exponent) / (k + t0)^2, for delta = 1; requires
    b_exponent > 2 for a summable weighted tail.
    """

    variant: str
    a: float = 0.49
    c0: float = 1.0
    b_exponent: float = 2.1
    t0: float = 1.0

    def __post_init__(self):
        if self.variant not in ("geometric", "polynomial"):
            raise ValueError("variant must be 'geometric' or 'polynomial'")
        if self.variant == "geometric":
            if not 0.0 < self.a < 1.0:
                raise ValueError("geometric ratio must lie in (0, 1)")
            if self.c0 <= 0:
                raise ValueError("c0 must be positive")
        else:
            if self.b_exponent <= 2.0:
                raise ValueError("b_exponent must exceed 2")
            if self.t0 < 1.0:
                raise ValueError("t0 must be at least 1")


def epsilon_k(sched, k):
    """Budget for outer iteration k >= 1."""
    if k < 1:
        raise ValueError("iteration index must be at least 1")
    if sched.variant == "geometric":
        return sched.c0 * sched.a ** k
    return k ** (-sched.b_exponent) / (k + sched.t0) ** 2


@dataclass(frozen=True)
class ProxRequest:
    """One prox subproblem: shifted point, step, metric, weight, budget."""

    ybar: np.ndarray
    tau: float
    metric: object
    lam: float
    epsilon: float
    max_inner: int = 500


@dataclass(frozen=True)
class ProxCertificate:
    """Returned iterate with its dual field and the certifying gap."""

    x: np.ndarray
    w: np.ndarray
    gap: float
    inner_iters: int
    converged: bool


def primal_value(req, x):
    """lam * TV(x) plus the scaled squared metric distance to ybar; +inf off the orthant."""
    x = np.asarray(x, dtype=np.float64)
    if np.min(x) < 0:
        return float("inf")
    dist = _k.weighted_sq_dist(x, req.ybar, req.metric.d)
    return req.lam * _k.tv_value(x) + dist / (2.0 * req.tau)


def primal_from_dual(req, w):
    """Closed-form primal point paired with a dual field."""
    ratio = req.tau / req.metric.d
    return np.maximum(req.ybar - ratio * _k.grad_adjoint(w), 0.0)


def dual_value(req, w):
    """Concave dual objective at a feasible field.

    Raises if any per-pixel vector exceeds the radius lam beyond float slack.
    """
    w = np.asarray(w, dtype=np.float64)
    norms = np.sqrt(w[:, :, 0] ** 2 + w[:, :, 1] ** 2)
    if norms.max() > req.lam * (1.0 + 1e-9):
        raise ValueError("dual field is infeasible")
    ratio = req.tau / req.metric.d
    mtw = _k.grad_adjoint(w)
    x = np.maximum(req.ybar - ratio * mtw, 0.0)
    dist = _k.weighted_sq_dist(x, req.ybar, req.metric.d)
    return _k.dot2(mtw, x) + dist / (2.0 * req.tau)


def inexact_prox(req, warm_start=None):
    """Solve the prox subproblem until the primal-dual gap meets the budget.

    The dual ascent step is metric.lower / (8 * tau), which covers the dual
    curvature since the squared norm of the difference operator is at most 8.
    The warm start is projected onto the feasible balls before use.  The gap
    is evaluated after every sweep and the first iterate meeting the budget
    is returned; at least one sweep always runs, so a loose budget cannot
    freeze the dual at its warm start.  If the budget is not met within
    max_inner sweeps the best pair seen (warm start included) is returned
    with ``converged`` False.

    Returns a ProxCertificate; ``gap <= epsilon`` iff ``converged``.
    """
    ybar = np.ascontiguousarray(req.ybar, dtype=np.float64)
    d = np.ascontiguousarray(req.metric.d, dtype=np.float64)
    tau = float(req.tau)
    lam = float(req.lam)
    if tau <= 0:
        raise ValueError("tau must be positive")
    if req.epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    ratio = tau / d
    sigma = req.metric.lower / (8.0 * tau)

    if warm_start is None:
        w = np.zeros(ybar.shape + (2,))
    else:
        w = _k.ball_project(np.ascontiguousarray(warm_start, dtype=np.float64), lam)
    w_prev = w

    mtw = _k.grad_adjoint(w)
    x = np.maximum(ybar - ratio * mtw, 0.0)
    dist = _k.weighted_sq_dist(x, ybar, d)
    p = lam * _k.tv_value(x) + dist / (2.0 * tau)
    q = _k.dot2(mtw, x) + dist / (2.0 * tau)
    best_x, best_w, best_gap = x, w, p - q

    for it in range(1, req.max_inner + 1):
        alpha = (it - 1.0) / (it + 2.0)
        x, w_new, tv, bilinear, dist = _k.dual_update(
            ybar, d, ratio, w, w_prev, alpha, sigma, lam)
        w_prev, w = w, w_new
        p = lam * tv + dist / (2.0 * tau)
        q = bilinear + dist / (2.0 * tau)
        gap = p - q
        if gap <= req.epsilon:
            return ProxCertificate(x=x, w=w, gap=gap, inner_iters=it,
                                   converged=True)
        if gap < best_gap:
            best_x, best_w, best_gap = x, w, gap

    return ProxCertificate(x=best_x, w=best_w, gap=best_gap,
                           inner_iters=req.max_inner, converged=False)
