"""Poisson deblurring with total-variation regularization.

The smooth part is the Kullback-Leibler divergence between the counts z and
the model intensity Hx + b; the nonsmooth part is lam * TV plus the
nonnegativity constraint.  The problem object carries the blur, the data,
and the precomputed pieces the solver and the metric need.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from . import _kernels as _k
from .linops import apply_blur, apply_blur_adjoint


@dataclass(frozen=True)
class ObjectiveValue:
    """Composite objective split into smooth and nonsmooth parts.

    ``g_val`` and ``total`` are +inf when the point is infeasible.
    """

    f_val: float
    g_val: float
    total: float
    feasible: bool


@dataclass(frozen=True)
class PoissonDeblurProblem:
    blur: object
    background: object
    data: np.ndarray
    lam: float
    hte: np.ndarray
    he_max: float

    @property
    def shape(self):
        return self.data.shape

    @property
    def split_vector(self):
        """Positive part of the gradient split: H^T applied to the ones image."""
        return self.hte

    def smooth_value(self, x):
        return kl_value(self, x)

    def smooth_value_and_gradient(self, x):
        return kl_value_and_gradient(self, x)

    def nonsmooth_value(self, x):
        return self.lam * tv_value(x)


def make_problem(blur, background, data, lam):
    """Assemble a deblurring problem and its precomputed operator sums.

    Parameters
    ----------
    blur : BlurOperator
    background : float or ndarray
        Strictly positive; a scalar means a uniform background.
    data : ndarray
        Nonnegative counts, same shape as the operator grid.
    lam : float
        TV weight, > 0.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.shape != (blur.rows, blur.cols):
        raise ValueError("data shape does not match the operator grid")
    if not np.all(np.isfinite(data)) or np.any(data < 0):
        raise ValueError("data must be finite and nonnegative")
    if np.ndim(background) == 0:
        background = float(background)
        if background <= 0:
            raise ValueError("background must be strictly positive")
    else:
        background = np.asarray(background, dtype=np.float64)
        if background.shape != data.shape:
            raise ValueError("background shape does not match the data")
        if np.any(background <= 0):
            raise ValueError("background must be strictly positive")
    if lam <= 0:
        raise ValueError("lam must be positive")
    ones = np.ones(data.shape)
    hte = apply_blur_adjoint(blur, ones)
    if np.any(hte <= 0):
        raise ValueError("adjoint of the ones image must be strictly positive")
    he_max = float(apply_blur(blur, ones).max())
    return PoissonDeblurProblem(blur=blur, background=background, data=data,
                                lam=float(lam), hte=hte, he_max=he_max)


def _model_intensity(problem, x):
    v = apply_blur(problem.blur, x) + problem.background
    if np.any(v <= 0):
        raise ValueError("model intensity must stay strictly positive")
    return v


def kl_value(problem, x):
    """Kullback-Leibler divergence of the counts from the model intensity.

    Zero counts contribute only their model intensity (0 log 0 = 0).
    """
    z = problem.data
    v = _model_intensity(problem, x)
    return float(np.sum(xlogy(z, z / v) + v - z))


def kl_gradient(problem, x):
    """Gradient H^T e - H^T (z / (Hx + b))."""
    v = _model_intensity(problem, x)
    return problem.hte - apply_blur_adjoint(problem.blur, problem.data / v)


def kl_value_and_gradient(problem, x):
    """Value and gradient sharing one blur evaluation."""
    z = problem.data
    v = _model_intensity(problem, x)
    val = float(np.sum(xlogy(z, z / v) + v - z))
    g = problem.hte - apply_blur_adjoint(problem.blur, z / v)
    return val, g


def lf_estimate(problem):
    """Global curvature bound (max z / b^2) * max(H^T e) * max(H e).

    Requires a uniform (scalar) background.
    """
    if np.ndim(problem.background) != 0:
        raise ValueError("curvature bound requires a uniform background")
    zmax = float(problem.data.max())
    return zmax / problem.background ** 2 * float(problem.hte.max()) * problem.he_max


def tv_value(x):
    """Isotropic total variation with forward differences."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a 2-D image")
    return _k.tv_value(x)


def objective(problem, x):
    """Full objective at x, with infeasibility flagged rather than raised."""
    x = np.asarray(x, dtype=np.float64)
    feasible = bool(np.all(np.isfinite(x)) and np.all(x >= 0))
    try:
        f_val = kl_value(problem, x)
    except ValueError:
        f_val = float("inf")
    if not feasible:
        return ObjectiveValue(f_val=f_val, g_val=float("inf"),
                              total=float("inf"), feasible=False)
    g_val = problem.lam * tv_value(x)
    return ObjectiveValue(f_val=f_val, g_val=g_val, total=f_val + g_val,
                          feasible=True)


def poisson_corrupt(clean, seed):
    """Draw Poisson counts at the given intensities with a seeded generator."""
    clean = np.asarray(clean, dtype=np.float64)
    if np.any(clean < 0) or not np.all(np.isfinite(clean)):
        raise ValueError("intensities must be finite and nonnegative")
    rng = np.random.default_rng(int(seed))
    return rng.poisson(clean).astype(np.float64)


def make_phantom(rows, cols, peak=1.0):
    """Deterministic piecewise-constant test image with maximum exactly ``peak``.

    An assortment of nested ellipses and blocks on a zero background; the
    brightest region is painted last so the stated peak survives overlap.
    """
    if rows < 8 or cols < 8:
        raise ValueError("phantom needs at least an 8x8 grid")
    if peak <= 0:
        raise ValueError("peak must be positive")
    yy = (np.arange(rows, dtype=np.float64)[:, None] + 0.5) / rows
    xx = (np.arange(cols, dtype=np.float64)[None, :] + 0.5) / cols
    img = np.zeros((rows, cols))

    def ellipse(cy, cx, ry, rx, value):
        mask = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
        img[mask] = value

    def block(y0, y1, x0, x1, value):
        mask = (yy >= y0) & (yy < y1) & (xx >= x0) & (xx < x1)
        img[mask] = value

    ellipse(0.50, 0.50, 0.42, 0.40, 0.55)
    ellipse(0.50, 0.50, 0.34, 0.32, 0.30)
    block(0.26, 0.42, 0.34, 0.66, 0.70)
    ellipse(0.64, 0.36, 0.10, 0.09, 0.15)
    ellipse(0.58, 0.64, 0.12, 0.08, 0.85)
    block(0.68, 0.80, 0.44, 0.56, 0.45)
    ellipse(0.44, 0.50, 0.07, 0.06, 1.0)
    img *= peak
    return img
