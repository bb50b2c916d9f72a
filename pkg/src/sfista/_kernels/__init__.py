"""Per-pixel kernels for the inner dual loop, with backend selection.

The compiled core is preferred when the extension built; otherwise the
pure-numpy fallback is used.  Both expose the same functions with the same
semantics, so everything above this package is backend-agnostic.  BACKEND
names the one in use ("compiled" or "numpy").
"""

try:
    from . import _core as _impl

    BACKEND = "compiled"
except ImportError:
    from . import _fallback as _impl

    BACKEND = "numpy"

grad = _impl.grad
grad_adjoint = _impl.grad_adjoint
tv_value = _impl.tv_value
ball_project = _impl.ball_project
weighted_sq_dist = _impl.weighted_sq_dist
dot2 = _impl.dot2
dual_update = _impl.dual_update
