"""Linear operators for the imaging model.

Gaussian blur under reflexive (half-sample symmetric) boundary conditions,
diagonalized by the orthonormal DCT-II, plus the forward-difference image
gradient and its adjoint.  Images are 2-D float64 arrays; gradient fields
are ``(rows, cols, 2)`` arrays with horizontal differences in channel 0 and
vertical differences in channel 1.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as _fft

from . import _kernels as _k


@dataclass(frozen=True)
class GaussianPsf:
    """Truncated, renormalized Gaussian point-spread function on an odd square support."""

    sigma: float
    support: int
    weights: np.ndarray


@dataclass(frozen=True)
class BlurOperator:
    """Blur fixed to one image size: the DCT-II spectrum of the PSF under reflexive boundaries."""

    spectrum: np.ndarray
    rows: int
    cols: int


def gaussian_psf(sigma, support=None):
    """Build a normalized Gaussian PSF.

    Parameters
    ----------
    sigma : float
        Standard deviation in pixels, > 0.
    support : int, optional
        Odd side length of the square support.  Defaults to ceil(6 * sigma),
        rounded up to odd.

    Returns
    -------
    GaussianPsf
        Weights are nonnegative, symmetric under both axis flips, and sum
        to 1 after truncation.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if support is None:
        support = math.ceil(6.0 * sigma)
        if support % 2 == 0:
            support += 1
    support = int(support)
    if support <= 0 or support % 2 == 0:
        raise ValueError("support must be a positive odd integer")
    half = support // 2
    ax = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-0.5 * (ax / sigma) ** 2)
    w = np.outer(g, g)
    w /= w.sum()
    return GaussianPsf(sigma=float(sigma), support=support, weights=w)


def _reflexive_correlate(x, weights):
    # direct correlation with half-sample symmetric padding; O(support^2) shifted adds
    half = weights.shape[0] // 2
    r, c = x.shape
    pad = np.pad(x, half, mode="symmetric") if half else x
    out = np.zeros_like(x)
    for p in range(weights.shape[0]):
        for q in range(weights.shape[1]):
            out += weights[p, q] * pad[p:p + r, q:q + c]
    return out


def psf_to_spectrum(psf, rows, cols):
    """Diagonalize the reflexive-boundary blur on a rows-by-cols grid.

    A symmetric PSF with half-sample symmetric boundaries is diagonal in the
    orthonormal DCT-II basis; the eigenvalues are the transformed response to
    a corner impulse divided by the transformed impulse.
    """
    if rows < 1 or cols < 1:
        raise ValueError("grid must be at least 1x1")
    if psf.support > min(rows, cols):
        raise ValueError("PSF support exceeds the image size")
    impulse = np.zeros((rows, cols))
    impulse[0, 0] = 1.0
    response = _reflexive_correlate(impulse, psf.weights)
    spectrum = _dct2(response) / _dct2(impulse)
    return BlurOperator(spectrum=spectrum, rows=rows, cols=cols)


def _dct2(x):
    return _fft.dctn(x, type=2, norm="ortho")


def _idct2(x):
    return _fft.idctn(x, type=2, norm="ortho")


def apply_blur(op, x):
    """Apply the blur to an image via its DCT spectrum."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (op.rows, op.cols):
        raise ValueError("image shape does not match the operator grid")
    return _idct2(op.spectrum * _dct2(x))


def apply_blur_adjoint(op, x):
    """Apply the adjoint blur.

    The spectrum is real and the DCT-II basis orthonormal, so the operator
    is self-adjoint and this is the same map as ``apply_blur``.
    """
    return apply_blur(op, x)


def grad(x):
    """Forward-difference gradient field, zero across the last row / column."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a 2-D image")
    return _k.grad(x)


def grad_adjoint(w):
    """Adjoint of ``grad``; the squared operator norm of the pair is at most 8."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 3 or w.shape[2] != 2:
        raise ValueError("expected a gradient field of shape (rows, cols, 2)")
    return _k.grad_adjoint(w)
