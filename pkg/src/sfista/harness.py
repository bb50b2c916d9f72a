"""Experiment harness: problem assembly, cached reference, sweeps, artifacts.

A sweep runs the solver over the delta grid times the metric grid, writes
one trace CSV per run (deterministic body: timing lives in a sidecar so
identical configurations produce byte-identical traces), emits PGM images,
and summarizes everything in a plain-text manifest.
"""

import hashlib
import os
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .config import solver_config_from
from .linops import apply_blur, gaussian_psf, psf_to_spectrum
from .pgm import read_pgm, write_pgm
from .problems import lf_estimate, make_phantom, make_problem, poisson_corrupt
from .prox import EpsilonSchedule
from .solver import (BacktrackingExhaustedError, SolverConfig, run)

OUTPUT_ROOT_ENV = "SFISTA_OUTPUT_ROOT"
CACHE_DIR_ENV = "SFISTA_CACHE_DIR"

TRACE_COLUMNS = ("k", "F", "rel_error", "tau", "L_k", "Lbar_k", "backtracks",
                 "inner_iters", "epsilon", "gap", "converged")


@dataclass(frozen=True)
class ProblemBundle:
    """A problem with the images that built it."""

    problem: object
    clean: np.ndarray
    x0: np.ndarray


@dataclass(frozen=True)
class ConvergenceTrace:
    """One run's records with the reference-relative error column."""

    name: str
    records: list
    rel_error: np.ndarray
    clamped_rows: int
    f_star: float
    x_final: np.ndarray


def build_problem(psec):
    """Realize a problem section: synthesize or load, blur, corrupt."""
    if psec.source == "synthetic":
        clean = make_phantom(psec.rows, psec.cols, psec.peak)
    else:
        clean = np.asarray(read_pgm(psec.source), dtype=np.float64)
        if clean.ndim != 2:
            raise ValueError("source image must be 2-D")
        if psec.peak > 0 and clean.max() > 0:
            clean = clean * (psec.peak / clean.max())
    psf = gaussian_psf(psec.psf_sigma,
                       psec.psf_support if psec.psf_support > 0 else None)
    op = psf_to_spectrum(psf, clean.shape[0], clean.shape[1])
    intensity = apply_blur(op, clean) + psec.background
    data = poisson_corrupt(intensity, psec.seed)
    problem = make_problem(op, psec.background, data, psec.lam)
    return ProblemBundle(problem=problem, clean=clean, x0=data.copy())


def problem_fingerprint(problem):
    """Content hash over everything the reference solution depends on."""
    h = hashlib.sha256()
    h.update(problem.data.tobytes())
    h.update(problem.blur.spectrum.tobytes())
    h.update(repr(problem.background).encode())
    h.update(repr(problem.lam).encode())
    return h.hexdigest()[:16]


def reference_config(problem, iterations):
    """Fixed-step monotone recipe: tau = 1 / curvature bound, tight budget.

    The near-flat geometric schedule keeps the budget at about 1e-11
    throughout, which the warm-started dual meets in a few dozen sweeps.
    """
    lf = lf_estimate(problem)
    sched = EpsilonSchedule(variant="geometric", a=0.999999, c0=1e-11)
    return SolverConfig(tau0=1.0 / lf, eps_schedule=sched, rho=0.5, delta=1.0,
                        max_outer=iterations, max_backtracks=0,
                        max_inner=2000, metric_enabled=False)


def compute_reference(problem, x0, iterations, cache_dir=None):
    """Long fixed-step run; cached on disk keyed by the problem content.

    Returns ``(x_star, f_star)`` with f_star the best objective along the
    trace.  A corrupt or mismatched cache file is recomputed, not trusted.
    """
    if cache_dir is None:
        cache_dir = os.environ.get(CACHE_DIR_ENV, ".sfista_cache")
    cache_dir = Path(cache_dir)
    key = problem_fingerprint(problem)
    path = cache_dir / ("ref_%s_it%d.npz" % (key, iterations))
    if path.exists():
        try:
            with np.load(path) as payload:
                if str(payload["fingerprint"]) == key:
                    return payload["x"], float(payload["f_star"])
                warnings.warn("reference cache %s belongs to a different "
                              "problem; recomputing" % path)
        except Exception:
            warnings.warn("reference cache %s is unreadable; recomputing"
                          % path)
    x_star, records = run(problem, x0, reference_config(problem, iterations))
    f_star = min(r.objective for r in records)
    cache_dir.mkdir(parents=True, exist_ok=True)
    # write-then-rename so concurrent sweeps never see a partial file
    tmp = path.with_name("tmp_%d_%s" % (os.getpid(), path.name))
    np.savez(tmp, x=x_star, f_star=f_star, fingerprint=key)
    os.replace(tmp, path)
    return x_star, f_star


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_trace_csv(path, records, rel_error):
    """Deterministic trace body: no timing column, shortest-roundtrip floats."""
    lines = [",".join(TRACE_COLUMNS)]
    for rec, rel in zip(records, rel_error):
        lines.append(",".join((
            _format(rec.k), _format(rec.objective), _format(rel),
            _format(rec.tau), _format(rec.l_estimate), _format(rec.lbar),
            _format(rec.backtracks), _format(rec.inner_iters),
            _format(rec.epsilon), _format(rec.gap),
            _format(rec.prox_converged))))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_timing_csv(path, records):
    lines = ["k,elapsed_s"]
    for rec in records:
        lines.append("%d,%s" % (rec.k, repr(float(rec.elapsed_s))))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def make_trace(name, records, f_star, x_final):
    """Attach the reference-relative error column to a record list."""
    objectives = np.array([r.objective for r in records])
    raw = (objectives - f_star) / f_star
    clamped = int(np.sum(raw < 0))
    return ConvergenceTrace(name=name, records=records,
                            rel_error=np.maximum(raw, 0.0),
                            clamped_rows=clamped, f_star=f_star,
                            x_final=x_final)


def emit_images(bundle, trace, out_dir):
    """Write the clean, observed, and restored images as 16-bit PGMs."""
    out_dir = Path(out_dir)
    write_pgm(out_dir / "clean.pgm", bundle.clean)
    write_pgm(out_dir / "data.pgm", bundle.problem.data)
    write_pgm(out_dir / ("restored_%s.pgm" % trace.name), trace.x_final)


def resolve_output_dir(osec):
    root = os.environ.get(OUTPUT_ROOT_ENV)
    base = Path(root) / osec.directory if root else Path(osec.directory)
    return base


def run_name(delta, s1, s2):
    return ("d%g_m%gx%g" % (delta, s1, s2)).replace("+", "")


def run_experiment(cfg, points=None):
    """Reference plus a grid of runs; returns the manifest dictionary.

    ``points`` is an iterable of (delta, s1, s2); by default the sweep
    section's delta grid crossed with its metric grid.  A run that exhausts
    backtracking is marked failed in the manifest and the grid continues.
    """
    if points is None:
        points = [(delta, s1, s2) for delta in cfg.sweep.deltas
                  for s1, s2 in cfg.sweep.metrics]
    started = time.perf_counter()
    bundle = build_problem(cfg.problem)
    problem = bundle.problem
    lf = lf_estimate(problem)
    out_dir = resolve_output_dir(cfg.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache_dir = cfg.reference.cache_dir or None
    x_star, f_star = compute_reference(problem, bundle.x0,
                                       cfg.reference.iterations,
                                       cache_dir=cache_dir)
    manifest = {
        "backend": _kernels.BACKEND,
        "fingerprint": problem_fingerprint(problem),
        "lf": repr(float(lf)),
        "f_star": repr(float(f_star)),
        "reference.iterations": str(cfg.reference.iterations),
    }
    for delta, s1, s2 in points:
        name = run_name(delta, s1, s2)
        solver_cfg = solver_config_from(cfg.solver, lf, delta=delta,
                                        s1=s1, s2=s2)
        run_started = time.perf_counter()
        try:
            x_final, records = run(problem, bundle.x0, solver_cfg)
        except BacktrackingExhaustedError as exc:
            manifest["runs.%s.status" % name] = "failed: %s" % exc
            continue
        trace = make_trace(name, records, f_star, x_final)
        csv_path = out_dir / ("%s_%s.csv" % (cfg.output.trace_prefix, name))
        write_trace_csv(csv_path, records, trace.rel_error)
        write_timing_csv(out_dir / ("%s_%s_timing.csv"
                                    % (cfg.output.trace_prefix, name)),
                         records)
        if cfg.output.dump_images:
            emit_images(bundle, trace, out_dir)
        manifest["runs.%s.status" % name] = "ok"
        manifest["runs.%s.csv" % name] = csv_path.name
        manifest["runs.%s.final_rel_error" % name] = repr(
            float(trace.rel_error[-1]))
        manifest["runs.%s.clamped_rows" % name] = str(trace.clamped_rows)
        manifest["runs.%s.elapsed_s" % name] = repr(
            time.perf_counter() - run_started)
    manifest["elapsed_s"] = repr(time.perf_counter() - started)
    with open(out_dir / "manifest.txt", "w") as fh:
        for key in sorted(manifest):
            fh.write("%s = %s\n" % (key, manifest[key]))
    return manifest
