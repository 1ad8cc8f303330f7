"""Rank-2 matrix-product form of two-map fractal functions.

For ``f(x/2) = λ_1 + S_1 f(x)`` and ``f((x+1)/2) = λ_2 + S_2 f(x)`` and
``x = Σ_{k=1}^{d} d_k 2^-k`` (``d_1`` most significant)

    f(x) = [1 0] G_{d_1} G_{d_2} … G_{d_d} [f(0); 1],   G_i = [[S_{i+1}, λ_{i+1}], [0, 1]].

The leftmost core acts last, matching ``f(0.d_1 d_2…) = v_{d_1}(f(0.d_2…))``.
A grid index ``n`` of ``N_d`` (``x = n/2^d``) has ``d_k = (n >> (d-k)) & 1``.
"""

from dataclasses import dataclass
import json

import numpy as np

from lifs import kernels
from lifs.errors import NotContractive, ValidationError
from lifs.io import write_csv, write_json


@dataclass(frozen=True, eq=False)
class QTTCore:
    s: tuple
    lam: tuple
    f0: float

    @property
    def mats(self):
        return [np.array([[self.s[i], self.lam[i]], [0.0, 1.0]]) for i in (0, 1)]

    @property
    def boundary_left(self):
        return np.array([1.0, 0.0])

    @property
    def boundary_right(self):
        return np.array([self.f0, 1.0])

    def to_dict(self):
        return {"S": list(self.s), "lambda": list(self.lam), "f0": self.f0}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc):
        return build_qtt(doc["lambda"][0], doc["lambda"][1], doc["S"][0], doc["S"][1])


def build_qtt(lambda1, lambda2, s1, s2):
    if abs(s1) >= 1 or abs(s2) >= 1:
        raise NotContractive(f"|S| must be below 1, got {s1}, {s2}")
    s = (float(s1), float(s2))
    lam = (float(lambda1), float(lambda2))
    return QTTCore(s, lam, lam[0] / (1.0 - s[0]))


def qtt_eval(core, digits):
    """Matrix product over ``digits`` (most significant first)."""
    v = core.boundary_right
    mats = core.mats
    for bit in reversed(list(digits)):
        if bit not in (0, 1):
            raise ValidationError("digits must be 0 or 1")
        v = mats[bit] @ v
    return float(core.boundary_left @ v)


def partial_products(core, digits):
    """Running products ``G_{d_1} … G_{d_k}``, k = 1..d."""
    out, p = [], np.eye(2)
    for bit in digits:
        p = p @ core.mats[bit]
        out.append(p)
    return out


def digits_of(n, d):
    return [(n >> (d - k)) & 1 for k in range(1, d + 1)]


def qtt_eval_grid(core, d):
    """Values at ``x = n/2^d`` for ``n = 0..2^d-1``."""
    if d < 0:
        raise ValidationError("d must be nonnegative")
    # the kernel consumes bits least-significant first, i.e. the innermost core first
    return kernels.qtt_eval_grid(core.lam[0], core.lam[1], core.s[0], core.s[1], core.f0, d)


def qtt_rank_report(core):
    if (core.s[0] == 0 and core.s[1] == 0) or (core.lam[0] == 0 and core.lam[1] == 0):
        return 1
    return 2


def write_grid(path, core, d):
    x = np.arange(2 ** d) / 2 ** d
    write_csv(path, ["x", "value"], [x, qtt_eval_grid(core, d)])


def write_core(path, core):
    write_json(path, core.to_dict())
