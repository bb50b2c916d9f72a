"""Shared fixtures: the desk-scale benchmark problem, its long reference
run, and the small grid of 200-iteration solver runs reused across tests.

Session scope keeps the expensive pieces (the 5000-iteration reference,
the four benchmark runs) computed once per pytest invocation; the
reference additionally persists in an on-disk cache between invocations.
"""

from pathlib import Path
from types import SimpleNamespace

import pytest

from sfista.config import ProblemSection, SolverSection, solver_config_from
from sfista.harness import build_problem, compute_reference
from sfista.problems import lf_estimate, make_phantom, make_problem, \
    poisson_corrupt
from sfista.linops import apply_blur, gaussian_psf, psf_to_spectrum
from sfista.solver import run

CACHE_DIR = Path(__file__).resolve().parent.parent / ".sfista_cache"

DESK_SECTION = ProblemSection(source="synthetic", rows=64, cols=64,
                              peak=878.0, psf_sigma=1.4, psf_support=0,
                              background=10.0, lam=0.004, seed=42)

SOLVER_DEFAULTS = dict(l0=0.0, rho=0.85, delta=0.98, t0=1.0, max_outer=200,
                       max_backtracks=10, max_inner=500, epsilon="auto",
                       epsilon_a=0.0, epsilon_c0=1.0, epsilon_b=2.1,
                       epsilon_t0=-1.0, s1=0.0, s2=3.0)

# the four benchmark configurations: delta grid crossed with metric grid
DESK_POINTS = ((1.0, 0.0, 3.0), (1.0, 1e10, 3.0),
               (0.98, 0.0, 3.0), (0.98, 1e10, 3.0))


def solver_section(**overrides):
    return SolverSection(**{**SOLVER_DEFAULTS, **overrides})


def make_small_problem(rows=16, cols=16, seed=7, lam=0.01, peak=150.0,
                       background=2.0, sigma=1.4):
    """Small synthetic instance for module-level tests."""
    clean = make_phantom(rows, cols, peak)
    op = psf_to_spectrum(gaussian_psf(sigma), rows, cols)
    z = poisson_corrupt(apply_blur(op, clean) + background, seed)
    return make_problem(op, background, z, lam), clean, z


@pytest.fixture(scope="session")
def desk_bundle():
    return build_problem(DESK_SECTION)


@pytest.fixture(scope="session")
def desk_lf(desk_bundle):
    return lf_estimate(desk_bundle.problem)


@pytest.fixture(scope="session")
def desk_reference(desk_bundle):
    x_star, f_star = compute_reference(desk_bundle.problem, desk_bundle.x0,
                                       5000, cache_dir=str(CACHE_DIR))
    return SimpleNamespace(x=x_star, f_star=f_star)


def run_desk_point(bundle, lf, delta, s1, s2, l0=0.0, capture=False):
    """One benchmark run; optionally records per-iteration solver states."""
    section = solver_section(l0=l0)
    cfg = solver_config_from(section, lf, delta=delta, s1=s1, s2=s2)
    states = []

    def keep(state, rec):
        states.append(SimpleNamespace(x_curr=state.x_curr,
                                      x_prev=state.x_prev,
                                      t=state.t, metric=state.metric))

    x, records = run(bundle.problem, bundle.x0, cfg,
                     callback=keep if capture else None)
    return SimpleNamespace(x=x, records=records, config=cfg,
                           states=states if capture else None,
                           delta=delta, s1=s1, s2=s2)


@pytest.fixture(scope="session")
def desk_runs(desk_bundle, desk_lf):
    """The four 200-iteration benchmark runs, flagship with state capture."""
    runs = {}
    for delta, s1, s2 in DESK_POINTS:
        capture = (delta == 0.98 and s1 > 0)
        runs[(delta, s1)] = run_desk_point(desk_bundle, desk_lf, delta, s1,
                                           s2, capture=capture)
    return runs


@pytest.fixture(scope="session")
def desk_misspecified_runs(desk_bundle, desk_lf):
    """Identity-metric runs started from a 100x underestimated curvature."""
    l0 = 0.01 * desk_lf
    return {delta: run_desk_point(desk_bundle, desk_lf, delta, 0.0, 3.0,
                                  l0=l0)
            for delta in (0.98, 1.0)}
