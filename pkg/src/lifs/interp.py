"""Random fractal functions, fractal interpolants and convergence-order studies.

All constructions use the paired layout: maps ``2j-1`` and ``2j`` halve the
domain ``[(j-1)h, jh)``, ``h = 2/N``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from lifs import rb
from lifs.errors import (
    ContractivityViolated,
    DegenerateFit,
    SingularConditions,
    ValidationError,
)
from lifs.local_ifs import paired_ifs
from lifs.rb import SampledFunction

MODES = ("endpoint", "endpoint-continuous", "hermite")


def make_rng(seed):
    """PCG64 generator; same seed, same stream on every platform."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class InterpolationProblem:
    target: object
    n_domains: int
    s_odd: tuple
    mode: str = "endpoint"
    s_even: tuple = None

    def __post_init__(self):
        if self.n_domains < 2 or self.n_domains % 2:
            raise ValidationError("the number of maps must be even and at least 2")
        if self.mode not in MODES:
            raise ValidationError(f"unknown mode {self.mode!r}")
        s_odd = tuple(float(s) for s in np.broadcast_to(self.s_odd, (self.n_domains // 2,)))
        object.__setattr__(self, "s_odd", s_odd)
        if self.s_even is not None:
            s_even = tuple(float(s) for s in np.broadcast_to(self.s_even, (self.n_domains // 2,)))
            object.__setattr__(self, "s_even", s_even)

    @property
    def h(self):
        return 2.0 / self.n_domains


def build_random_spec(n, seed, s_bound=0.9):
    """Constant ``λ_i ~ U(-1,1)`` and ``S_i ~ U(-s_bound, s_bound)`` on the paired layout."""
    if not 0 <= s_bound < 1:
        raise ValidationError(f"s_bound must lie in [0, 1), got {s_bound}")
    ifs = paired_ifs(n)
    rng = make_rng(seed)
    lam = rng.uniform(-1.0, 1.0, n)
    s = rng.uniform(-s_bound, s_bound, n)
    return rb.constant_spec(ifs, lam, s)


def pair_scalings(p):
    """The ``(S_{2j-1}, S_{2j})`` pairs implied by the problem's mode."""
    s_odd = np.array(p.s_odd)
    if p.mode == "endpoint-continuous":
        s_even = 1.0 - s_odd
    elif p.s_even is not None:
        s_even = np.array(p.s_even)
    else:
        s_even = s_odd.copy()
    return s_odd, s_even


def build_endpoint_interpolant(p):
    """Constant ``λ`` making the fixed point interpolate the target at the domain ends.

    At ``(j-1)h`` the first map of the pair is fixed, so ``f* = λ/(1-S)`` there;
    likewise at ``jh`` for the second map.
    """
    if p.mode == "hermite":
        raise ValidationError("use build_hermite_interpolant for the hermite mode")
    s_odd, s_even = pair_scalings(p)
    s = np.empty(p.n_domains)
    s[0::2], s[1::2] = s_odd, s_even
    if np.any(np.abs(s) >= 1.0):
        raise ContractivityViolated(f"|S_i| >= 1 for maps {(np.flatnonzero(np.abs(s) >= 1) + 1).tolist()}")
    h = p.h
    j = np.arange(p.n_domains // 2)
    left = np.asarray(p.target(j * h), dtype=float)
    right = np.asarray(p.target(np.minimum((j + 1) * h, 1.0)), dtype=float)
    lam = np.empty(p.n_domains)
    lam[0::2] = (1.0 - s_odd) * left
    lam[1::2] = (1.0 - s_even) * right
    return rb.constant_spec(paired_ifs(p.n_domains), lam, s)


def build_hermite_interpolant(target, dtarget, n_domains, s=0.25):
    """Affine ``λ_i = α_i + β_i x`` matching value and slope at every domain end.

    Differentiating ``f*(u(x)) = λ(x) + S f*(x)`` at the fixed point ``x0`` of
    ``u(x) = (x + x0)/2`` gives ``(1/2 - S) f'(x0) = β`` and
    ``(1 - S) f(x0) = α + β x0``.
    """
    if abs(0.5 - s) < 1e-12 or abs(1.0 - s) < 1e-12:
        raise SingularConditions(f"value/slope conditions are singular for S = {s}")
    if abs(s) >= 1.0:
        raise ContractivityViolated(f"|S| = {abs(s)} >= 1")
    ifs = paired_ifs(n_domains)
    lams, scal = [], []
    for i, dom in enumerate(ifs.domains):
        x0 = dom[0] if i % 2 == 0 else dom[1]
        beta = (0.5 - s) * float(dtarget(x0))
        alpha = (1.0 - s) * float(target(x0)) - beta * x0
        lams.append(SampledFunction.affine(alpha, beta, dom))
        scal.append(SampledFunction.constant(s, dom))
    return rb.RBSpec(ifs, lams, scal)


def solve_on_grid(spec, n_g, tol=1e-13, max_iter=10_000):
    grid = rb.make_admissible_grid(spec.ifs, n_g)
    return rb.solve_fixed_point(rb.assemble(spec, grid), tol=tol, max_iter=max_iter)


def max_error(spec, target, factor=16, tol=1e-13):
    """Max error of the fixed point on a grid ``factor`` times finer than the knot grid."""
    res = solve_on_grid(spec, factor * spec.ifs.n, tol=tol)
    x = res.f_star.grid.points
    return float(np.max(np.abs(res.f_star.values - target(x))))


def error_sweep(spec_builder, target, h_list, factor=16, threads=None):
    def one(h):
        return max_error(spec_builder(h), target, factor)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, h_list))
    return [one(h) for h in h_list]


def fit_order(h_list, errors, scale=1.0):
    h = np.asarray(h_list, dtype=float)
    e = np.asarray(errors, dtype=float)
    if len(h) < 3:
        raise ValidationError("an order fit needs at least three step sizes")
    if np.any(e <= 1e-12 * max(1.0, scale)):
        raise DegenerateFit("errors vanish; the target is reproduced exactly")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def estimate_order(spec_builder, target, h_list, factor=16, threads=None):
    """Least-squares slope of ``log(max error)`` against ``log(h)``."""
    if len(h_list) < 3:
        raise ValidationError("an order fit needs at least three step sizes")
    errors = error_sweep(spec_builder, target, h_list, factor, threads)
    scale = float(np.max(np.abs(target(np.linspace(0, 1, 33)))))
    return fit_order(h_list, errors, scale)


def n_from_h(h):
    n = 2.0 / h
    if abs(n - round(n)) > 1e-9 or round(n) % 2:
        raise ValidationError(f"h = {h} does not give an even number of maps")
    return int(round(n))


def linear_builder(target, s=0.5):
    return lambda h: build_endpoint_interpolant(InterpolationProblem(target, n_from_h(h), (s,)))


def hermite_builder(target, dtarget, s=0.25):
    return lambda h: build_hermite_interpolant(target, dtarget, n_from_h(h), s)


def check_self_referential_basis(psi, ifs, probes=97, tol=1e-8):
    """Find ``A_i, b_i`` with ``ψ∘u_i = b_i + A_i ψ`` on ``X_i``, or ``None``.

    Solved by least squares on probe points, first with ``b_i = 0`` and then
    with a free ``b_i``.
    """
    if not 1 <= len(psi) <= 10:
        raise ValidationError("basis size must be between 1 and 10")
    out = []
    t = (np.arange(probes) + 0.5) / probes
    for i, u in enumerate(ifs.maps):
        lo, hi = ifs.domains[i]
        x = lo + t * (hi - lo)
        base = np.column_stack([np.broadcast_to(np.asarray(f(x), dtype=float), x.shape) for f in psi])
        img = np.column_stack([np.broadcast_to(np.asarray(f(u(x)), dtype=float), x.shape) for f in psi])
        found = None
        for design in (base, np.column_stack([base, np.ones(len(x))])):
            coef, *_ = np.linalg.lstsq(design, img, rcond=None)
            if np.max(np.abs(design @ coef - img)) <= tol:
                a = coef[: len(psi)].T
                b = coef[len(psi)] if design.shape[1] > len(psi) else np.zeros(len(psi))
                found = (a, b)
                break
        if found is None:
            return None
        out.append(found)
    return out


def midpoint_jumps(f_star, ifs):
    """``|f*(m) - f*(m - h_g)|`` at every domain midpoint ``m`` of the paired layout."""
    pts, vals = f_star.grid.points, f_star.values
    mids = np.array(ifs.partition.knots[1:-1:2])
    j = f_star.grid.index_of(mids)
    if np.any(j <= 0):
        raise ValidationError("midpoints must be interior grid points")
    return np.abs(vals[j] - vals[j - 1])


def knot_values(f_star, ifs):
    """Grid values at the domain boundaries ``jh`` below 1."""
    ends = sorted({d[0] for d in ifs.domains})
    return np.array(ends), f_star.values[f_star.grid.index_of(ends)]

