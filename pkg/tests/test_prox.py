"""Certified prox oracle: gap soundness, budgets, dual machinery."""

import numpy as np
import pytest

from sfista.metrics import DiagonalMetric, identity_metric
from sfista.prox import (EpsilonSchedule, ProxRequest, dual_value, epsilon_k,
                         inexact_prox, primal_from_dual, primal_value)

import oracles


def random_request(rng, rows=8, cols=8, lam=0.1, epsilon=1e-6,
                   max_inner=2000, scaled=False):
    ybar = rng.uniform(-1.0, 2.0, (rows, cols))
    tau = float(rng.uniform(0.1, 1.5))
    if scaled:
        d = rng.uniform(0.4, 2.5, (rows, cols))
        metric = DiagonalMetric(d=d, lower=float(d.min()),
                                upper=float(d.max()))
    else:
        metric = identity_metric((rows, cols))
    return ProxRequest(ybar=ybar, tau=tau, metric=metric, lam=lam,
                       epsilon=epsilon, max_inner=max_inner)


def test_epsilon_schedule_validation():
    EpsilonSchedule(variant="geometric", a=0.4, c0=2.0)
    EpsilonSchedule(variant="polynomial", b_exponent=2.5, t0=1.0)
    with pytest.raises(ValueError):
        EpsilonSchedule(variant="harmonic")
    with pytest.raises(ValueError):
        EpsilonSchedule(variant="geometric", a=1.0)
    with pytest.raises(ValueError):
        EpsilonSchedule(variant="geometric", a=0.5, c0=0.0)
    with pytest.raises(ValueError):
        EpsilonSchedule(variant="polynomial", b_exponent=2.0)
    with pytest.raises(ValueError):
        EpsilonSchedule(variant="polynomial", b_exponent=3.0, t0=0.5)


def test_epsilon_k_formulas():
    geo = EpsilonSchedule(variant="geometric", a=0.4, c0=3.0)
    assert epsilon_k(geo, 1) == pytest.approx(1.2)
    assert epsilon_k(geo, 5) == pytest.approx(3.0 * 0.4 ** 5)
    poly = EpsilonSchedule(variant="polynomial", b_exponent=2.1, t0=1.0)
    assert epsilon_k(poly, 1) == pytest.approx(1.0 / 4.0)
    assert epsilon_k(poly, 7) == pytest.approx(7.0 ** -2.1 / 64.0)
    with pytest.raises(ValueError):
        epsilon_k(geo, 0)
    # budgets decay
    for sched in (geo, poly):
        vals = [epsilon_k(sched, k) for k in range(1, 40)]
        assert all(a > b for a, b in zip(vals, vals[1:]))


def test_primal_value_off_orthant():
    rng = np.random.default_rng(51)
    req = random_request(rng)
    x = np.abs(rng.standard_normal(req.ybar.shape))
    assert np.isfinite(primal_value(req, x))
    x[2, 3] = -1e-12
    assert primal_value(req, x) == float("inf")


def test_primal_from_dual_is_feasible():
    rng = np.random.default_rng(52)
    req = random_request(rng, scaled=True)
    w = 0.05 * rng.standard_normal(req.ybar.shape + (2,))
    x = primal_from_dual(req, w)
    assert np.all(x >= 0)


def test_dual_value_rejects_infeasible_fields():
    rng = np.random.default_rng(53)
    req = random_request(rng, lam=0.1)
    w = np.zeros(req.ybar.shape + (2,))
    w[0, 0, 0] = 0.2  # above the 0.1 radius
    with pytest.raises(ValueError):
        dual_value(req, w)
    assert np.isfinite(dual_value(req, 0.5 * w * 0.0))


def test_weak_duality():
    rng = np.random.default_rng(54)
    for _ in range(20):
        req = random_request(rng, scaled=bool(rng.integers(2)))
        w = req.lam * 0.7 * np.ones(req.ybar.shape + (2,)) / np.sqrt(2.0)
        x = np.abs(rng.standard_normal(req.ybar.shape))
        assert dual_value(req, w) <= primal_value(req, x) + 1e-12


def test_converged_certificates_meet_budget():
    rng = np.random.default_rng(55)
    for trial in range(15):
        req = random_request(rng, lam=float(rng.uniform(0.01, 0.5)),
                             epsilon=10.0 ** float(rng.uniform(-8, -3)),
                             scaled=bool(rng.integers(2)))
        cert = inexact_prox(req)
        assert cert.converged
        assert cert.gap <= req.epsilon
        assert cert.gap >= -1e-9
        assert np.all(cert.x >= 0)
        # the certificate is re-derivable from the returned pair
        p = primal_value(req, cert.x)
        q = dual_value(req, cert.w)
        assert p - q == pytest.approx(cert.gap, rel=1e-9, abs=1e-12)
        assert np.array_equal(primal_from_dual(req, cert.w), cert.x)


def test_gap_bounds_suboptimality():
    # h(x) - h(exact prox) <= gap for every certificate, by weak duality;
    # cross-check against a conic solve on small instances
    cvxpy = pytest.importorskip("cvxpy")
    del cvxpy
    rng = np.random.default_rng(56)
    for scaled in (False, True):
        req = random_request(rng, rows=6, cols=6,
                             lam=float(rng.uniform(0.05, 0.3)),
                             epsilon=1e-9, scaled=scaled)
        cert = inexact_prox(req)
        assert cert.converged
        x_exact = oracles.cvxpy_prox(req.ybar, req.tau, req.metric.d, req.lam)
        h_mine = primal_value(req, cert.x)
        h_exact = oracles.prox_objective(np.maximum(x_exact, 0.0), req.ybar,
                                         req.tau, req.metric.d, req.lam)
        assert h_mine <= h_exact + cert.gap + 1e-6
        assert abs(h_mine - h_exact) <= 1e-5 * max(1.0, abs(h_exact))


def test_agrees_with_independent_dual_ascent():
    rng = np.random.default_rng(57)
    req = random_request(rng, rows=10, cols=10, lam=0.15, epsilon=1e-10,
                         max_inner=20000, scaled=True)
    cert = inexact_prox(req)
    x_oracle = oracles.fgp_prox(req.ybar, req.tau, req.metric.d, req.lam,
                                sweeps=8000)
    assert np.allclose(cert.x, x_oracle, rtol=0, atol=5e-5)
    h_gap = primal_value(req, cert.x) \
        - oracles.prox_objective(x_oracle, req.ybar, req.tau, req.metric.d,
                                 req.lam)
    assert abs(h_gap) <= 1e-8


def test_lam_zero_closed_form():
    rng = np.random.default_rng(58)
    for scaled in (False, True):
        req = random_request(rng, lam=0.0, epsilon=1e-14, scaled=scaled)
        cert = inexact_prox(req)
        assert cert.converged
        assert cert.inner_iters == 1  # one sweep settles the zero-radius dual
        assert cert.gap == 0.0
        assert np.array_equal(cert.x, np.maximum(req.ybar, 0.0))


def test_at_least_one_sweep_runs():
    # a loose budget must not freeze the dual at its warm start
    rng = np.random.default_rng(59)
    req = random_request(rng, lam=0.2, epsilon=1e6)
    warm = 0.05 * rng.standard_normal(req.ybar.shape + (2,))
    cert = inexact_prox(req, warm_start=warm)
    assert cert.converged
    assert cert.inner_iters == 1
    assert not np.array_equal(cert.w, warm)


def test_warm_start_projected_before_use():
    rng = np.random.default_rng(60)
    req = random_request(rng, lam=0.05, epsilon=1e-7)
    warm = 5.0 * rng.standard_normal(req.ybar.shape + (2,))  # infeasible
    cert = inexact_prox(req, warm_start=warm)
    dual_value(req, cert.w)  # returned field is feasible: no raise


def test_exhaustion_returns_best_iterate():
    rng = np.random.default_rng(61)
    req = random_request(rng, lam=0.3, epsilon=0.0, max_inner=6)
    cert = inexact_prox(req)
    assert not cert.converged
    assert cert.inner_iters == 6
    assert cert.gap > 0.0
    # the reported pair really is the recomputed best gap
    p = primal_value(req, cert.x)
    q = dual_value(req, cert.w)
    assert p - q == pytest.approx(cert.gap, rel=1e-9, abs=1e-15)


def test_prox_deterministic():
    rng = np.random.default_rng(62)
    req = random_request(rng, lam=0.1, epsilon=1e-8, scaled=True)
    a = inexact_prox(req)
    b = inexact_prox(req)
    assert np.array_equal(a.x, b.x)
    assert a.gap == b.gap
    assert a.inner_iters == b.inner_iters


def test_request_validation():
    rng = np.random.default_rng(63)
    good = random_request(rng)
    with pytest.raises(ValueError):
        inexact_prox(ProxRequest(ybar=good.ybar, tau=0.0, metric=good.metric,
                                 lam=0.1, epsilon=1e-6))
    with pytest.raises(ValueError):
        inexact_prox(ProxRequest(ybar=good.ybar, tau=1.0, metric=good.metric,
                                 lam=0.1, epsilon=-1e-9))
