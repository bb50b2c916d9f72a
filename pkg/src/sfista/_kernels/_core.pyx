# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-pixel kernels for the inner dual loop.

Same semantics as the numpy fallback.  Elementwise operations follow the
same per-pixel arithmetic order as the fallback; reductions accumulate
sequentially in row-major order and may differ from numpy's pairwise
summation in the last bits.
"""

from libc.math cimport sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef void _grad(const double[:, ::1] x, double[:, :, ::1] out) noexcept nogil:
    cdef Py_ssize_t r = x.shape[0], c = x.shape[1], i, j
    for i in range(r):
        for j in range(c - 1):
            out[i, j, 0] = x[i, j + 1] - x[i, j]
        out[i, c - 1, 0] = 0.0
    for i in range(r - 1):
        for j in range(c):
            out[i, j, 1] = x[i + 1, j] - x[i, j]
    for j in range(c):
        out[r - 1, j, 1] = 0.0


cdef void _grad_adjoint(const double[:, :, ::1] w, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t r = w.shape[0], c = w.shape[1], i, j
    cdef double acc
    for i in range(r):
        for j in range(c):
            acc = 0.0
            if j < c - 1:
                acc = acc - w[i, j, 0]
            if j > 0:
                acc = acc + w[i, j - 1, 0]
            if i < r - 1:
                acc = acc - w[i, j, 1]
            if i > 0:
                acc = acc + w[i - 1, j, 1]
            out[i, j] = acc


cdef double _tv(const double[:, ::1] x) noexcept nogil:
    cdef Py_ssize_t r = x.shape[0], c = x.shape[1], i, j
    cdef double s = 0.0, dh, dv
    for i in range(r):
        for j in range(c):
            dh = x[i, j + 1] - x[i, j] if j < c - 1 else 0.0
            dv = x[i + 1, j] - x[i, j] if i < r - 1 else 0.0
            s += sqrt(dh * dh + dv * dv)
    return s


cdef double _wdist(const double[:, ::1] x, const double[:, ::1] y,
                   const double[:, ::1] d) noexcept nogil:
    cdef Py_ssize_t r = x.shape[0], c = x.shape[1], i, j
    cdef double s = 0.0, diff
    for i in range(r):
        for j in range(c):
            diff = x[i, j] - y[i, j]
            s += d[i, j] * diff * diff
    return s


cdef double _dot2(const double[:, ::1] a, const double[:, ::1] b) noexcept nogil:
    cdef Py_ssize_t r = a.shape[0], c = a.shape[1], i, j
    cdef double s = 0.0
    for i in range(r):
        for j in range(c):
            s += a[i, j] * b[i, j]
    return s


def grad(x):
    """Forward-difference gradient field, shape (rows, cols, 2)."""
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty((xv.shape[0], xv.shape[1], 2))
    cdef double[:, :, ::1] ov = out
    with nogil:
        _grad(xv, ov)
    return out


def grad_adjoint(w):
    """Adjoint of ``grad`` (a negative divergence), mapping a field to an image."""
    cdef double[:, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    out = np.empty((wv.shape[0], wv.shape[1]))
    cdef double[:, ::1] ov = out
    with nogil:
        _grad_adjoint(wv, ov)
    return out


def tv_value(x):
    """Isotropic total variation: sum of per-pixel difference magnitudes."""
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double s
    with nogil:
        s = _tv(xv)
    return s


def ball_project(w, radius):
    """Project each per-pixel 2-vector of a field onto the ball of the given radius."""
    cdef double[:, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double rad = radius
    cdef Py_ssize_t r = wv.shape[0], c = wv.shape[1], i, j
    out = np.empty((r, c, 2))
    cdef double[:, :, ::1] ov = out
    cdef double n, s
    with nogil:
        for i in range(r):
            for j in range(c):
                n = sqrt(wv[i, j, 0] * wv[i, j, 0] + wv[i, j, 1] * wv[i, j, 1])
                s = rad / n if n > rad else 1.0
                ov[i, j, 0] = wv[i, j, 0] * s
                ov[i, j, 1] = wv[i, j, 1] * s
    return out


def weighted_sq_dist(x, y, d):
    """Squared distance between two images in the diagonal metric d."""
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, ::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[:, ::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef double s
    with nogil:
        s = _wdist(xv, yv, dv)
    return s


def dot2(a, b):
    """Euclidean inner product of two images."""
    cdef double[:, ::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef double s
    with nogil:
        s = _dot2(av, bv)
    return s


def dual_update(ybar, d, ratio, w, w_prev, double alpha, double sigma, double lam):
    """One inertial projected-ascent sweep on the dual field, fused.

    Same contract as the fallback: returns ``(x, w_new, tv, bilinear, dist)``
    with the value pieces computed by the same reduction helpers the
    standalone kernels of this backend use.
    """
    cdef double[:, ::1] ybv = np.ascontiguousarray(ybar, dtype=np.float64)
    cdef double[:, ::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef double[:, ::1] rv = np.ascontiguousarray(ratio, dtype=np.float64)
    cdef double[:, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[:, :, ::1] wpv = np.ascontiguousarray(w_prev, dtype=np.float64)
    cdef Py_ssize_t r = ybv.shape[0], c = ybv.shape[1], i, j

    x = np.empty((r, c))
    w_new = np.empty((r, c, 2))
    cdef double[:, ::1] xv = x
    cdef double[:, :, ::1] wnv = w_new
    ext = np.empty((r, c, 2))
    img = np.empty((r, c))
    fld = np.empty((r, c, 2))
    cdef double[:, :, ::1] ev = ext
    cdef double[:, ::1] iv = img
    cdef double[:, :, ::1] fv = fld
    cdef double a0, a1, n, s, t, tv, bilinear, dist

    with nogil:
        for i in range(r):
            for j in range(c):
                ev[i, j, 0] = wv[i, j, 0] + alpha * (wv[i, j, 0] - wpv[i, j, 0])
                ev[i, j, 1] = wv[i, j, 1] + alpha * (wv[i, j, 1] - wpv[i, j, 1])
        _grad_adjoint(ev, iv)
        for i in range(r):
            for j in range(c):
                t = ybv[i, j] - rv[i, j] * iv[i, j]
                iv[i, j] = t if t > 0.0 else 0.0
        _grad(iv, fv)
        for i in range(r):
            for j in range(c):
                a0 = ev[i, j, 0] + sigma * fv[i, j, 0]
                a1 = ev[i, j, 1] + sigma * fv[i, j, 1]
                n = sqrt(a0 * a0 + a1 * a1)
                s = lam / n if n > lam else 1.0
                wnv[i, j, 0] = a0 * s
                wnv[i, j, 1] = a1 * s
        _grad_adjoint(wnv, iv)
        for i in range(r):
            for j in range(c):
                t = ybv[i, j] - rv[i, j] * iv[i, j]
                xv[i, j] = t if t > 0.0 else 0.0
        tv = _tv(xv)
        bilinear = _dot2(iv, xv)
        dist = _wdist(xv, ybv, dv)
    return x, w_new, tv, bilinear, dist
