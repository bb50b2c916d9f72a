"""Scaled, inexact, adaptive FISTA outer loop.

Each outer iteration tentatively grows the step (tau / delta), builds the
iteration's diagonal metric at the tentatively extrapolated point, then
backtracks geometrically until the smooth part's Bregman distance at the
prox output is covered by the scaled squared metric distance.  The momentum
parameter follows the step-ratio-corrected recurrence, so acceleration
survives step changes.  Inexact prox certificates are budgeted by an
epsilon schedule and logged per iteration.
"""

import time
from dataclasses import dataclass, replace

import numpy as np

from .metrics import (GammaSchedule, apply_inverse, gamma_k, identity_metric,
                      metric_norm_sq, project_nonneg_scaled,
                      split_gradient_metric)
from .prox import EpsilonSchedule, ProxRequest, epsilon_k, inexact_prox


@dataclass(frozen=True)
class SolverConfig:
    """Outer-loop parameters.

    tau0 is the initial step (1 / initial curvature guess); delta < 1 grows
    the step each iteration and delta = 1 keeps it monotone; rho in (0, 1)
    shrinks it within an iteration on rejection.  metric_enabled switches the
    split-gradient scaling on; the gamma schedule controls its clamp band.
    """

    tau0: float
    eps_schedule: EpsilonSchedule
    rho: float = 0.85
    delta: float = 0.98
    t0: float = 1.0
    max_outer: int = 200
    max_backtracks: int = 10
    max_inner: int = 500
    metric_enabled: bool = False
    gamma_schedule: GammaSchedule = GammaSchedule(0.0, 2.0)
    stall_tol: float = 0.0

    def __post_init__(self):
        if self.tau0 <= 0:
            raise ValueError("tau0 must be positive")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")
        if self.t0 < 1.0:
            raise ValueError("t0 must be at least 1")
        if self.max_outer < 1 or self.max_backtracks < 0 or self.max_inner < 1:
            raise ValueError("iteration limits out of range")
        if (self.eps_schedule.variant == "geometric"
                and self.eps_schedule.a >= self.delta):
            raise ValueError("geometric ratio must stay below delta")
        if self.stall_tol < 0:
            raise ValueError("stall_tol must be nonnegative")


@dataclass
class SolverState:
    """Moving parts between outer iterations."""

    x_curr: np.ndarray
    x_prev: np.ndarray
    t: float
    tau: float
    metric: object
    k: int
    warm_dual: np.ndarray


@dataclass(frozen=True)
class IterationRecord:
    """Telemetry for one accepted outer iteration."""

    k: int
    objective: float
    tau: float
    l_estimate: float
    lbar: float
    backtracks: int
    inner_iters: int
    epsilon: float
    gap: float
    prox_converged: bool
    bt_condition_satisfied: bool
    descent_lemma_ok: bool
    f_bregman: float
    metric_dist_sq: float
    t_value: float
    elapsed_s: float


class BacktrackingExhaustedError(RuntimeError):
    """Raised when no trial step passes the acceptance test.

    Carries the last rejected trial's record for post-mortems.
    """

    def __init__(self, message, record):
        super().__init__(message)
        self.record = record


def t_update(t_prev, tau_prev, tau_next):
    """Momentum recurrence corrected by the step ratio.

    The new t solves t^2 - t = (tau_prev / tau_next) * t_prev^2, taking the
    positive root.
    """
    if tau_prev <= 0 or tau_next <= 0:
        raise ValueError("steps must be positive")
    r = tau_prev / tau_next
    return 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * r * t_prev * t_prev))


def extrapolate(x_curr, x_prev, t_prev, t_next, metric):
    """Momentum point projected back onto the nonnegative orthant."""
    coeff = (t_prev - 1.0) / t_next
    return project_nonneg_scaled(metric, x_curr + coeff * (x_curr - x_prev))


def backtracking_accept(f_bregman, x_next, y, metric, tau):
    """Acceptance test: Bregman distance of the smooth part at the prox
    output, against the scaled squared metric distance to the momentum point."""
    return f_bregman <= metric_norm_sq(metric, x_next - y) / (2.0 * tau)


def descent_lemma_probe(problem, x_tilde, x_bar, x_ref, tau, metric, epsilon,
                        slack=1e-8):
    """Runtime check of the inexact scaled descent inequality.

    With x_tilde the (inexact) prox output at the point x_bar, step tau and
    budget epsilon, the objective at x_tilde must be covered, up to epsilon
    and a sqrt(2 epsilon tau)-sized cross term, by the objective at any
    reference point x_ref plus scaled distances.  Everything is recomputed
    from scratch; ``slack`` absorbs float roundoff.
    """
    f_tilde = problem.smooth_value(x_tilde)
    total_tilde = f_tilde + problem.nonsmooth_value(x_tilde)
    total_ref = problem.smooth_value(x_ref) + problem.nonsmooth_value(x_ref)
    f_bar, grad_bar = problem.smooth_value_and_gradient(x_bar)
    breg = f_tilde - f_bar - float(np.vdot(grad_bar, x_tilde - x_bar))
    d_ref_tilde = metric_norm_sq(metric, x_ref - x_tilde)
    lhs = (total_tilde + d_ref_tilde / (2.0 * tau)
           + metric_norm_sq(metric, x_tilde - x_bar) / (2.0 * tau) - breg)
    rhs = (total_ref + metric_norm_sq(metric, x_ref - x_bar) / (2.0 * tau)
           + epsilon + np.sqrt(2.0 * epsilon * tau) / tau * np.sqrt(d_ref_tilde))
    return bool(lhs <= rhs + slack)


def outer_step(problem, state, config, prox_oracle=None):
    """One outer iteration: tentative step growth, metric build, backtracking.

    Returns ``(new_state, record)``; raises BacktrackingExhaustedError when
    max_backtracks trial shrinks never pass the acceptance test.
    """
    if prox_oracle is None:
        prox_oracle = inexact_prox
    started = time.perf_counter()
    k = state.k
    eps_next = epsilon_k(config.eps_schedule, k + 1)
    tau_tent = state.tau / config.delta

    if config.metric_enabled:
        # the metric for this iteration is frozen before backtracking, built
        # at the extrapolation the tentative step would produce (the
        # projection itself does not depend on the metric)
        t_tent = t_update(state.t, state.tau, tau_tent)
        y_tent = extrapolate(state.x_curr, state.x_prev, state.t, t_tent,
                             state.metric)
        g = gamma_k(config.gamma_schedule, k + 1)
        metric_next = split_gradient_metric(y_tent, problem.split_vector, g)
    else:
        metric_next = identity_metric(state.x_curr.shape)

    last_record = None
    for trial in range(config.max_backtracks + 1):
        tau_next = config.rho ** trial * tau_tent
        t_next = t_update(state.t, state.tau, tau_next)
        y = extrapolate(state.x_curr, state.x_prev, state.t, t_next,
                        metric_next)
        f_y, grad_y = problem.smooth_value_and_gradient(y)
        ybar = y - tau_next * apply_inverse(metric_next, grad_y)
        req = ProxRequest(ybar=ybar, tau=tau_next, metric=metric_next,
                          lam=problem.lam, epsilon=eps_next,
                          max_inner=config.max_inner)
        cert = prox_oracle(req, warm_start=state.warm_dual)
        f_x = problem.smooth_value(cert.x)
        f_breg = f_x - f_y - float(np.vdot(grad_y, cert.x - y))
        dist = metric_norm_sq(metric_next, cert.x - y)
        accepted = f_breg <= dist / (2.0 * tau_next)
        g_x = problem.nonsmooth_value(cert.x)
        eps_probe = eps_next if cert.converged else max(eps_next, cert.gap)
        last_record = IterationRecord(
            k=k + 1, objective=f_x + g_x, tau=tau_next,
            l_estimate=1.0 / tau_next, lbar=float("nan"), backtracks=trial,
            inner_iters=cert.inner_iters, epsilon=eps_next, gap=cert.gap,
            prox_converged=cert.converged, bt_condition_satisfied=accepted,
            descent_lemma_ok=descent_lemma_probe(
                problem, cert.x, y, state.x_curr, tau_next, metric_next,
                eps_probe),
            f_bregman=f_breg, metric_dist_sq=dist, t_value=t_next,
            elapsed_s=0.0)
        if accepted:
            new_state = SolverState(
                x_curr=cert.x, x_prev=state.x_curr, t=float(t_next),
                tau=tau_next, metric=metric_next, k=k + 1,
                warm_dual=cert.w)
            record = replace(last_record,
                             elapsed_s=time.perf_counter() - started)
            return new_state, record
    raise BacktrackingExhaustedError(
        "no step accepted after %d backtracks at iteration %d"
        % (config.max_backtracks, k + 1), last_record)


def run(problem, x0, config, prox_oracle=None, callback=None):
    """Run the outer loop from x0; returns the final image and the records.

    The warm dual field carries across iterations and backtracking retries.
    A positive stall_tol stops early once the relative objective decrease
    falls below it.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if np.any(x0 < 0) or not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite and nonnegative")
    state = SolverState(x_curr=x0.copy(), x_prev=x0.copy(),
                        t=float(config.t0), tau=float(config.tau0),
                        metric=identity_metric(x0.shape), k=0,
                        warm_dual=np.zeros(x0.shape + (2,)))
    records = []
    sqrt_tau_sum = np.sqrt(config.tau0)
    prev_obj = None
    for _ in range(config.max_outer):
        state, rec = outer_step(problem, state, config, prox_oracle=prox_oracle)
        sqrt_tau_sum += np.sqrt(rec.tau)
        count = rec.k + 1  # initial step plus one per accepted iteration
        rec = replace(rec, lbar=float((count / sqrt_tau_sum) ** 2))
        records.append(rec)
        if callback is not None:
            callback(state, rec)
        if (config.stall_tol > 0 and prev_obj is not None
                and abs(prev_obj - rec.objective)
                <= config.stall_tol * max(1.0, abs(rec.objective))):
            break
        prev_obj = rec.objective
    return state.x_curr, records


def average_lipschitz(records):
    """Reciprocal-square of the mean sqrt step over a trace's records."""
    if not records:
        raise ValueError("empty trace")
    m = float(np.mean(np.sqrt([r.tau for r in records])))
    return 1.0 / (m * m)
