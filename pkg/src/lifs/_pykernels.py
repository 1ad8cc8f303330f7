"""Pure numpy implementations of the hot loops (fallback backend)."""

import numpy as np


def rb_iterate(lam, src, s, f, tol, max_iter):
    it = 0
    step = np.inf
    while it < max_iter:
        g = lam + s * f[src]
        step = float(np.max(np.abs(g - f))) if g.size else 0.0
        f[:] = g
        it += 1
        if step <= tol:
            break
    return it, step


def directed_hausdorff(a, b, chunk=2048):
    best = 0.0
    for start in range(0, a.shape[0], chunk):
        block = a[start:start + chunk]
        d2 = ((block[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1)
        best = max(best, float(d2.min(axis=1).max()))
    return float(np.sqrt(best))


def qtt_eval_grid(lam1, lam2, s1, s2, f0, d):
    n = np.arange(1 << d)
    v = np.full(n.shape, f0, dtype=np.float64)
    for k in range(d):
        bit = (n >> k) & 1
        v = np.where(bit == 1, lam2 + s2 * v, lam1 + s1 * v)
    return v
