"""Pure-numpy implementations of the per-pixel kernels.

These are the reference semantics for the compiled core.  The fused
``dual_update`` is built from the same module-level functions, so the value
pieces it reports are bitwise identical to what a caller gets by recomputing
them with the standalone kernels of this backend.
"""

import numpy as np


def grad(x):
    """Forward-difference gradient field of a 2-D image.

    Returns an array of shape ``(rows, cols, 2)``: channel 0 holds horizontal
    (column) differences, channel 1 vertical (row) differences.  The last
    column / last row of the respective channel is zero.
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.zeros(x.shape + (2,))
    w[:, :-1, 0] = x[:, 1:] - x[:, :-1]
    w[:-1, :, 1] = x[1:, :] - x[:-1, :]
    return w


def grad_adjoint(w):
    """Adjoint of ``grad`` (a negative divergence), mapping a field to an image."""
    w = np.asarray(w, dtype=np.float64)
    wh = w[:, :, 0]
    wv = w[:, :, 1]
    out = np.zeros(w.shape[:2])
    out[:, :-1] -= wh[:, :-1]
    out[:, 1:] += wh[:, :-1]
    out[:-1, :] -= wv[:-1, :]
    out[1:, :] += wv[:-1, :]
    return out


def tv_value(x):
    """Isotropic total variation: sum of per-pixel difference magnitudes."""
    w = grad(x)
    return float(np.sqrt(w[:, :, 0] ** 2 + w[:, :, 1] ** 2).sum())


def ball_project(w, radius):
    """Project each per-pixel 2-vector of a field onto the ball of the given radius."""
    w = np.asarray(w, dtype=np.float64)
    norms = np.sqrt(w[:, :, 0] ** 2 + w[:, :, 1] ** 2)
    scale = np.ones_like(norms)
    np.divide(radius, norms, out=scale, where=norms > radius)
    return w * scale[:, :, None]


def weighted_sq_dist(x, y, d):
    """Squared distance between two images in the diagonal metric d."""
    return float(np.sum(d * (x - y) ** 2))


def dot2(a, b):
    """Euclidean inner product of two images."""
    return float(np.vdot(a, b))


def dual_update(ybar, d, ratio, w, w_prev, alpha, sigma, lam):
    """One inertial projected-ascent sweep on the dual field.

    ``ratio`` is the precomputed per-pixel step ``tau / d``.  Extrapolates the
    dual iterate, takes one ascent step, projects onto the radius-``lam``
    balls, and evaluates the paired primal point.

    Returns ``(x, w_new, tv, bilinear, dist)`` where ``tv`` is the total
    variation of ``x``, ``bilinear`` the inner product of ``x`` with the
    adjoint of ``w_new``, and ``dist`` the squared d-distance from ``x`` to
    ``ybar``.  The caller assembles primal / dual values from these.
    """
    v = w + alpha * (w - w_prev)
    xv = np.maximum(ybar - ratio * grad_adjoint(v), 0.0)
    w_new = ball_project(v + sigma * grad(xv), lam)
    mtw = grad_adjoint(w_new)
    x = np.maximum(ybar - ratio * mtw, 0.0)
    tv = tv_value(x)
    bilinear = dot2(mtw, x)
    dist = weighted_sq_dist(x, ybar, d)
    return x, w_new, tv, bilinear, dist
