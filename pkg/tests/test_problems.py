"""Objective pieces: KL fit, TV, curvature bound, data synthesis."""

import numpy as np
import pytest

from sfista.linops import apply_blur, gaussian_psf, psf_to_spectrum
from sfista.problems import (kl_gradient, kl_value, kl_value_and_gradient,
                             lf_estimate, make_phantom, make_problem,
                             objective, poisson_corrupt, tv_value)

import oracles
from conftest import make_small_problem


def test_make_problem_validation():
    op = psf_to_spectrum(gaussian_psf(1.2), 10, 10)
    data = np.ones((10, 10))
    with pytest.raises(ValueError):
        make_problem(op, 0.0, data, 0.01)
    with pytest.raises(ValueError):
        make_problem(op, 1.0, -data, 0.01)
    with pytest.raises(ValueError):
        make_problem(op, 1.0, data, 0.0)
    with pytest.raises(ValueError):
        make_problem(op, 1.0, np.ones((9, 10)), 0.01)
    with pytest.raises(ValueError):
        make_problem(op, np.zeros((10, 10)), data, 0.01)
    array_bg = make_problem(op, np.full((10, 10), 2.0), data, 0.01)
    assert np.ndim(array_bg.background) == 2


def test_split_vector_is_ones_for_normalized_psf():
    problem, _, _ = make_small_problem()
    assert np.allclose(problem.split_vector, 1.0, rtol=0, atol=1e-12)
    assert problem.he_max == pytest.approx(1.0, abs=1e-12)


def test_kl_value_matches_loops():
    problem, _, z = make_small_problem(seed=101)
    rng = np.random.default_rng(41)
    for _ in range(5):
        x = rng.uniform(0.0, 150.0, problem.shape)
        v = apply_blur(problem.blur, x) + problem.background
        assert kl_value(problem, x) == pytest.approx(
            oracles.kl_loops(z, v), rel=1e-11)


def test_kl_value_zero_at_perfect_fit():
    # when the model intensity equals the counts the divergence vanishes
    op = psf_to_spectrum(gaussian_psf(1.0), 12, 12)
    b = 3.0
    x = np.full((12, 12), 5.0)
    z = apply_blur(op, x) + b
    problem = make_problem(op, b, z, 0.01)
    assert kl_value(problem, x) == pytest.approx(0.0, abs=1e-9)
    # and it is positive anywhere else
    assert kl_value(problem, x + 1.0) > 0.0


def test_kl_nonnegative_with_zero_counts():
    problem, _, z = make_small_problem(seed=102, peak=5.0, background=0.1)
    assert np.any(problem.data == 0.0)  # low counts produce empty pixels
    rng = np.random.default_rng(42)
    for _ in range(5):
        x = rng.uniform(0.0, 5.0, problem.shape)
        assert kl_value(problem, x) >= 0.0


def test_kl_gradient_matches_central_differences():
    problem, _, _ = make_small_problem(seed=103)
    rng = np.random.default_rng(43)
    x = rng.uniform(1.0, 100.0, problem.shape)
    g = kl_gradient(problem, x)
    for _ in range(10):
        direction = rng.standard_normal(problem.shape)
        direction /= np.linalg.norm(direction)
        h = 1e-4 * (1.0 + float(np.abs(x).max()))

        def fun(pt):
            return kl_value(problem, pt)

        fd = oracles.central_difference(fun, x, direction, h)
        exact = float(np.vdot(g, direction))
        assert fd == pytest.approx(exact, rel=1e-6, abs=1e-8)


def test_value_and_gradient_consistent():
    problem, _, _ = make_small_problem(seed=104)
    rng = np.random.default_rng(44)
    x = rng.uniform(0.0, 80.0, problem.shape)
    val, g = kl_value_and_gradient(problem, x)
    assert val == kl_value(problem, x)
    assert np.array_equal(g, kl_gradient(problem, x))


def test_kl_convexity_along_segments():
    problem, _, _ = make_small_problem(seed=105)
    rng = np.random.default_rng(45)
    for _ in range(10):
        a = rng.uniform(0.0, 60.0, problem.shape)
        b = rng.uniform(0.0, 60.0, problem.shape)
        mid = kl_value(problem, 0.5 * (a + b))
        assert mid <= 0.5 * kl_value(problem, a) + 0.5 * kl_value(problem, b) \
            + 1e-9


def test_lf_estimate_formula():
    problem, _, _ = make_small_problem(seed=106)
    z = problem.data
    expected = float(z.max()) / problem.background ** 2 \
        * float(problem.hte.max()) * problem.he_max
    assert lf_estimate(problem) == expected
    op = psf_to_spectrum(gaussian_psf(1.0), 10, 10)
    array_bg = make_problem(op, np.full((10, 10), 2.0), np.ones((10, 10)),
                            0.01)
    with pytest.raises(ValueError):
        lf_estimate(array_bg)


def test_tv_value_matches_oracle():
    rng = np.random.default_rng(46)
    x = rng.uniform(0.0, 9.0, (11, 13))
    assert tv_value(x) == pytest.approx(oracles.tv_loops(x), rel=1e-12)
    with pytest.raises(ValueError):
        tv_value(np.zeros(4))


def test_objective_flags_infeasible_points():
    problem, _, _ = make_small_problem(seed=107)
    rng = np.random.default_rng(47)
    x = rng.uniform(0.0, 50.0, problem.shape)
    val = objective(problem, x)
    assert val.feasible
    assert val.total == pytest.approx(val.f_val + val.g_val)
    assert val.g_val == pytest.approx(problem.lam * tv_value(x), rel=1e-13)
    bad = x.copy()
    bad[0, 0] = -1.0
    flagged = objective(problem, bad)
    assert not flagged.feasible
    assert flagged.total == float("inf")


def test_poisson_corrupt_seeded():
    clean = make_phantom(16, 16, 40.0)
    a = poisson_corrupt(clean + 2.0, 9)
    b = poisson_corrupt(clean + 2.0, 9)
    c = poisson_corrupt(clean + 2.0, 10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.all(a >= 0)
    assert np.all(a == np.round(a))
    with pytest.raises(ValueError):
        poisson_corrupt(-clean, 0)
    # mean of the counts tracks the intensity on a large sample
    big = poisson_corrupt(np.full((200, 200), 37.0), 11)
    assert big.mean() == pytest.approx(37.0, rel=0.01)


def test_make_phantom_shape_and_peak():
    img = make_phantom(64, 64, 878.0)
    assert img.shape == (64, 64)
    assert img.max() == 878.0
    assert img.min() == 0.0
    # piecewise constant: few distinct levels
    assert len(np.unique(img)) <= 10
    # coarse grids may miss the brightest ellipse but stay bounded by peak
    small = make_phantom(8, 8, 2.0)
    assert 0.0 < small.max() <= 2.0
    with pytest.raises(ValueError):
        make_phantom(7, 12)
    with pytest.raises(ValueError):
        make_phantom(16, 16, 0.0)
