"""Experiment configuration: INI grammar, validation, solver-config assembly.

Sections: [problem] (data synthesis or a PGM source), [solver] (outer-loop
parameters and epsilon schedule), [sweep] (delta and metric grids),
[reference] (baseline iterations and cache), [output].  Unknown sections or
keys are rejected; lam has no default.
"""

import configparser
from dataclasses import dataclass

from .metrics import GammaSchedule
from .prox import EpsilonSchedule
from .solver import SolverConfig


@dataclass(frozen=True)
class ProblemSection:
    source: str
    rows: int
    cols: int
    peak: float
    psf_sigma: float
    psf_support: int
    background: float
    lam: float
    seed: int


@dataclass(frozen=True)
class SolverSection:
    l0: float
    rho: float
    delta: float
    t0: float
    max_outer: int
    max_backtracks: int
    max_inner: int
    epsilon: str
    epsilon_a: float
    epsilon_c0: float
    epsilon_b: float
    epsilon_t0: float
    s1: float
    s2: float


@dataclass(frozen=True)
class SweepSection:
    deltas: tuple
    metrics: tuple


@dataclass(frozen=True)
class ReferenceSection:
    iterations: int
    cache_dir: str


@dataclass(frozen=True)
class OutputSection:
    directory: str
    dump_images: bool
    trace_prefix: str


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemSection
    solver: SolverSection
    sweep: SweepSection
    reference: ReferenceSection
    output: OutputSection


def _metric_pair(text):
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError("metric entries take the form s1:s2")
    return float(parts[0]), float(parts[1])


_SCHEMA = {
    "problem": {
        "source": (str, "synthetic"),
        "rows": (int, 64),
        "cols": (int, 64),
        "peak": (float, 878.0),
        "psf_sigma": (float, 1.4),
        "psf_support": (int, 0),  # 0 means the default ceil(6 sigma) rule
        "background": (float, 10.0),
        "lam": (float, None),  # required
        "seed": (int, 20260822),
    },
    "solver": {
        "l0": (float, 0.0),  # 0 means the problem's curvature bound
        "rho": (float, 0.85),
        "delta": (float, 0.98),
        "t0": (float, 1.0),
        "max_outer": (int, 200),
        "max_backtracks": (int, 10),
        "max_inner": (int, 500),
        "epsilon": (str, "auto"),
        "epsilon_a": (float, 0.0),  # 0 means delta / 2
        "epsilon_c0": (float, 1.0),
        "epsilon_b": (float, 2.1),
        "epsilon_t0": (float, -1.0),  # negative means the solver t0
        "s1": (float, 0.0),
        "s2": (float, 3.0),
    },
    "sweep": {
        "deltas": (str, "1.0, 0.98"),
        "metrics": (str, "0:3, 1e10:3"),
    },
    "reference": {
        "iterations": (int, 5000),
        "cache_dir": (str, ""),
    },
    "output": {
        "directory": (str, "out"),
        "dump_images": (bool, True),
        "trace_prefix": (str, "trace"),
    },
}


def _convert(section, key, kind, raw):
    try:
        if kind is bool:
            lowered = raw.strip().lower()
            if lowered in ("true", "1", "yes", "on"):
                return True
            if lowered in ("false", "0", "no", "off"):
                return False
            raise ValueError("not a boolean")
        return kind(raw)
    except ValueError as exc:
        raise ValueError("%s.%s: %s" % (section, key, exc)) from exc


def load_config(path):
    """Parse and validate an experiment INI file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path) as fh:
        parser.read_file(fh)

    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ValueError("unknown section [%s]" % section)
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ValueError("unknown key %s.%s" % (section, key))
    for section, keys in _SCHEMA.items():
        values[section] = {}
        for key, (kind, default) in keys.items():
            if parser.has_option(section, key):
                values[section][key] = _convert(section, key, kind,
                                                parser.get(section, key))
            else:
                if default is None:
                    raise ValueError("missing required key %s.%s"
                                     % (section, key))
                values[section][key] = default

    problem = ProblemSection(**values["problem"])
    solver = SolverSection(**values["solver"])
    sweep_raw = values["sweep"]
    sweep = SweepSection(
        deltas=tuple(float(tok) for tok in sweep_raw["deltas"].split(",")),
        metrics=tuple(_metric_pair(tok)
                      for tok in sweep_raw["metrics"].split(",")))
    reference = ReferenceSection(**values["reference"])
    output = OutputSection(**values["output"])
    cfg = ExperimentConfig(problem=problem, solver=solver, sweep=sweep,
                           reference=reference, output=output)
    _validate(cfg)
    return cfg


def _validate(cfg):
    p, s = cfg.problem, cfg.solver
    if p.rows < 8 or p.cols < 8:
        raise ValueError("problem.rows/cols must be at least 8")
    if p.peak <= 0:
        raise ValueError("problem.peak must be positive")
    if p.psf_sigma <= 0:
        raise ValueError("problem.psf_sigma must be positive")
    if p.background <= 0:
        raise ValueError("problem.background must be positive")
    if p.lam <= 0:
        raise ValueError("problem.lam must be positive")
    if p.seed < 0:
        raise ValueError("problem.seed must be nonnegative")
    if not 0.0 < s.rho < 1.0:
        raise ValueError("solver.rho must lie in (0, 1)")
    if not 0.0 < s.delta <= 1.0:
        raise ValueError("solver.delta must lie in (0, 1]")
    if s.epsilon not in ("auto", "geometric", "polynomial"):
        raise ValueError("solver.epsilon must be auto, geometric or polynomial")
    if s.l0 < 0:
        raise ValueError("solver.l0 must be nonnegative")
    for delta in cfg.sweep.deltas:
        if not 0.0 < delta <= 1.0:
            raise ValueError("sweep deltas must lie in (0, 1]")
    for s1, s2 in cfg.sweep.metrics:
        GammaSchedule(s1, s2)  # reuses its own validation
    if cfg.reference.iterations < 1:
        raise ValueError("reference.iterations must be positive")


def epsilon_schedule_for(section, delta):
    """Schedule for a given delta, honoring the auto rule.

    auto picks geometric with ratio delta / 2 for delta < 1 and the
    polynomial budget for delta = 1.
    """
    variant = section.epsilon
    if variant == "auto":
        variant = "geometric" if delta < 1.0 else "polynomial"
    if variant == "geometric":
        a = section.epsilon_a if section.epsilon_a > 0 else delta / 2.0
        return EpsilonSchedule(variant="geometric", a=a, c0=section.epsilon_c0)
    t0 = section.epsilon_t0 if section.epsilon_t0 >= 0 else section.t0
    return EpsilonSchedule(variant="polynomial", b_exponent=section.epsilon_b,
                           t0=t0)


def solver_config_from(section, lf, delta=None, s1=None, s2=None):
    """Assemble a SolverConfig, taking the step from the curvature guess.

    ``lf`` is the problem's curvature bound, used when l0 is left at 0.
    delta / s1 / s2 override the section values (for sweep points).
    """
    delta = section.delta if delta is None else float(delta)
    s1 = section.s1 if s1 is None else float(s1)
    s2 = section.s2 if s2 is None else float(s2)
    l0 = section.l0 if section.l0 > 0 else float(lf)
    if l0 <= 0:
        raise ValueError("initial curvature must be positive")
    return SolverConfig(
        tau0=1.0 / l0,
        eps_schedule=epsilon_schedule_for(section, delta),
        rho=section.rho, delta=delta, t0=section.t0, max_outer=section.max_outer,
        max_backtracks=section.max_backtracks, max_inner=section.max_inner,
        metric_enabled=s1 > 0, gamma_schedule=GammaSchedule(s1, s2))
