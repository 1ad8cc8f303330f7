"""Backend selection for the hot loops.

The compiled module is used when it imports; setting ``LIFS_PURE_PYTHON=1``
forces the numpy fallback.
"""

import os

import numpy as np

from lifs import _pykernels

try:
    if os.environ.get("LIFS_PURE_PYTHON"):
        raise ImportError("pure-python backend requested")
    from lifs import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"
_impl = _ckernels if _ckernels is not None else _pykernels


def rb_iterate(lam, src, s, f, tol, max_iter):
    """Run ``f <- lam + s * f[src]`` in place; return ``(iterations, last_step)``."""
    return _impl.rb_iterate(
        np.ascontiguousarray(lam, dtype=np.float64),
        np.ascontiguousarray(src, dtype=np.intp),
        np.ascontiguousarray(s, dtype=np.float64),
        f,
        float(tol),
        int(max_iter),
    )


def directed_hausdorff(a, b):
    return float(_impl.directed_hausdorff(
        np.ascontiguousarray(a, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64),
    ))


def qtt_eval_grid(lam1, lam2, s1, s2, f0, d):
    return np.asarray(_impl.qtt_eval_grid(
        float(lam1), float(lam2), float(s1), float(s2), float(f0), int(d)))
