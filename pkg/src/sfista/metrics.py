"""Variable diagonal metrics with split-gradient scaling.

A metric is a per-pixel positive diagonal D with recorded eigenvalue bounds.
The split-gradient choice scales each pixel by the ratio of the current
point to the positive part of the gradient split, clamped to a band
[1/gamma, gamma] that tightens toward the identity as iterations proceed.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DiagonalMetric:
    """Diagonal weights ``d`` (shape of the image) with eigenvalue bounds."""

    d: np.ndarray
    lower: float
    upper: float


@dataclass(frozen=True)
class GammaSchedule:
    """Clamp-band schedule gamma_k = sqrt(1 + s1 / (k + 1)^s2).

    s1 = 0 freezes the band at 1 (identity metric); s1 > 0 requires s2 > 1
    so that the band contracts summably.
    """

    s1: float
    s2: float

    def __post_init__(self):
        if self.s1 < 0:
            raise ValueError("s1 must be nonnegative")
        if self.s1 > 0 and self.s2 <= 1:
            raise ValueError("s2 must exceed 1 when s1 > 0")


def gamma_k(sched, k):
    """Clamp bound at outer iteration k (k >= 0)."""
    if k < 0:
        raise ValueError("iteration index must be nonnegative")
    return float(np.sqrt(1.0 + sched.s1 / (k + 1.0) ** sched.s2))


def identity_metric(shape):
    """The identity metric on a grid."""
    return DiagonalMetric(d=np.ones(shape), lower=1.0, upper=1.0)


def split_gradient_metric(y, split_vector, gamma):
    """Split-gradient diagonal scaling at the point y.

    Parameters
    ----------
    y : ndarray
        Current (nonnegative) image.
    split_vector : ndarray
        Positive part of the gradient split, same shape as y; for the
        Kullback-Leibler fit this is the adjoint of the blur applied to the
        all-ones image.
    gamma : float
        Clamp bound, >= 1.  The per-pixel ratio y / split_vector is clamped
        to [1/gamma, gamma] and the metric weight is its reciprocal.
    """
    y = np.asarray(y, dtype=np.float64)
    split_vector = np.asarray(split_vector, dtype=np.float64)
    if y.shape != split_vector.shape:
        raise ValueError("point and split vector shapes differ")
    if np.any(split_vector <= 0):
        raise ValueError("split vector must be strictly positive")
    if gamma < 1.0:
        raise ValueError("gamma must be at least 1")
    ratio = np.clip(y / split_vector, 1.0 / gamma, gamma)
    return DiagonalMetric(d=1.0 / ratio, lower=1.0 / gamma, upper=float(gamma))


def loewner_chain_check(prev, nxt, growth):
    """True when nxt.d <= (1 + growth) * prev.d holds pixelwise."""
    if prev.d.shape != nxt.d.shape:
        raise ValueError("metric shapes differ")
    return bool(np.all(nxt.d <= (1.0 + growth) * prev.d))


def metric_norm_sq(metric, x):
    """Squared norm of x in the metric."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != metric.d.shape:
        raise ValueError("array shape does not match the metric")
    return float(np.sum(metric.d * x * x))


def apply_inverse(metric, x):
    """D^{-1} x, pixelwise."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != metric.d.shape:
        raise ValueError("array shape does not match the metric")
    return x / metric.d


def project_nonneg_scaled(metric, x):
    """Projection onto the nonnegative orthant in the metric.

    For a diagonal metric the scaled projection coincides with the pixelwise
    positive part; the metric argument is kept for the operator's signature.
    """
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)
