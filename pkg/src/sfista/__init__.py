"""Scaled, inexact, adaptive FISTA for TV-regularized Poisson deblurring."""

from ._kernels import BACKEND
from .metrics import DiagonalMetric, GammaSchedule
from .problems import (PoissonDeblurProblem, make_phantom, make_problem,
                       objective, poisson_corrupt)
from .prox import EpsilonSchedule, ProxCertificate, ProxRequest, inexact_prox
from .solver import (IterationRecord, SolverConfig, SolverState, run)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DiagonalMetric", "GammaSchedule", "PoissonDeblurProblem",
    "make_phantom", "make_problem", "objective", "poisson_corrupt",
    "EpsilonSchedule", "ProxCertificate", "ProxRequest", "inexact_prox",
    "IterationRecord", "SolverConfig", "SolverState", "run", "__version__",
]
