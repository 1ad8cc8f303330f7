"""Binary subdivision driven by the two maps ``v_1``, ``v_2`` of a local IFS.

Level ``k`` lives on ``N_k = 2^-k {0, …, 2^k - 1}``.  One refinement step sets
``f(ξ) = v_1(2ξ, f(2ξ))`` on the left half and ``v_2(2ξ-1, f(2ξ-1))`` on the
right half; both arguments are points of ``N_k``.
"""

from dataclasses import dataclass

import numpy as np

from lifs.errors import IncompatibleBoundary, ValidationError
from lifs.interp import make_rng
from lifs.io import write_csv
from lifs.local_ifs import binary_ifs
from lifs.rb import Grid, GridFunction, RBSpec, SampledFunction

PROBES = np.linspace(-4.0, 4.0, 16)


@dataclass(frozen=True, eq=False)
class RefinementLevel:
    k: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (2 ** self.k,):
            raise ValidationError(f"level {self.k} needs {2 ** self.k} values, got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def mesh(self):
        return np.arange(2 ** self.k) / 2 ** self.k

    def coarse(self):
        """Values on ``N_{k-1}`` (every second point)."""
        return self.values[::2]


def check_compatible(v1, v2, tol=1e-12):
    a = np.asarray(v1(np.ones_like(PROBES), PROBES), dtype=float)
    b = np.asarray(v2(np.zeros_like(PROBES), PROBES), dtype=float)
    scale = max(1.0, float(np.max(np.abs(a))))
    bad = np.abs(a - b) > tol * scale
    if np.any(bad):
        raise IncompatibleBoundary(f"v_1(1, y) != v_2(0, y) at y = {PROBES[bad][0]:.4g}")


def refine(level, v1, v2, check=True):
    if check:
        check_compatible(v1, v2)
    x, f = level.mesh, level.values
    out = np.concatenate([v1(x, f), v2(x, f)])
    return RefinementLevel(level.k + 1, out)


def fixed_point_seed(v1, iters=200):
    """Fixed point of ``y ↦ v_1(0, y)`` (closed form when ``v_1`` is affine in ``y``)."""
    c = float(v1(np.zeros(1), np.zeros(1))[0])
    s = float(v1(np.zeros(1), np.ones(1))[0]) - c
    if abs(s) < 1:
        y = c / (1.0 - s)
        if abs(float(v1(np.zeros(1), np.array([y]))[0]) - y) <= 1e-12 * max(1.0, abs(y)):
            return RefinementLevel(0, [y])
    y = 0.0
    for _ in range(iters):
        y = float(v1(np.zeros(1), np.array([y]))[0])
    return RefinementLevel(0, [y])


def subdivide(v1, v2, seed=None, levels=12):
    """All levels ``0..levels``; ``seed`` defaults to the exact value at 0."""
    check_compatible(v1, v2)
    cur = seed if seed is not None else fixed_point_seed(v1)
    if cur.k != 0:
        raise ValidationError("the seed must be a level-0 value")
    out = [cur]
    for _ in range(levels):
        cur = refine(cur, v1, v2, check=False)
        out.append(cur)
    return out


def subdivision_limit(v1, v2, seed=None, levels=12):
    last = subdivide(v1, v2, seed, levels)[-1]
    return GridFunction(Grid(last.mesh, binary_ifs()), last.values)


def cauchy_differences(history):
    """``‖level_{k+1}|_{N_k} - level_k‖_∞`` for consecutive levels."""
    return np.array([np.max(np.abs(b.coarse() - a.values)) for a, b in zip(history, history[1:])])


def v_maps(spec):
    """``v_1``, ``v_2`` of a two-map affine RB specification."""
    if spec.ifs.n != 2:
        raise ValidationError("subdivision needs exactly two maps")
    return (lambda x, y: spec.v(0, x, y)), (lambda x, y: spec.v(1, x, y))


def random_compatible_spec(seed, s_bound=0.9):
    """Affine ``λ_i``, ``S_i`` on the binary IFS with ``λ_1(1) = λ_2(0)`` and ``S_1(1) = S_2(0)``."""
    rng = make_rng(seed)
    ifs = binary_ifs()
    s_mid = rng.uniform(-s_bound, s_bound)
    s0, s1 = rng.uniform(-s_bound, s_bound, 2)
    l_mid = rng.uniform(-1, 1)
    l0, l1 = rng.uniform(-1, 1, 2)
    dom = ifs.domains[0]
    lam = [SampledFunction.affine(l0, l_mid - l0, dom), SampledFunction.affine(l_mid, l1 - l_mid, dom)]
    sca = [SampledFunction.affine(s0, s_mid - s0, dom), SampledFunction.affine(s_mid, s1 - s_mid, dom)]
    return RBSpec(ifs, lam, sca)


def write_levels(path, history):
    cols = [[], [], []]
    for lev in history:
        cols[0] += [lev.k] * len(lev.values)
        cols[1] += lev.mesh.tolist()
        cols[2] += lev.values.tolist()
    write_csv(path, ["level", "x", "value"], [np.array(cols[0], dtype=float), cols[1], cols[2]])
