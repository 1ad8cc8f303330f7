"""Independent reference implementations used by the tests."""

import math

import numpy as np

from lifs import rb
from lifs.local_ifs import binary_ifs, paired_ifs
from lifs.rb import SampledFunction


def rb_pointwise(spec, f, x):
    """Continuous RB operator at one point, by scanning the image intervals."""
    for i, (u, (lo, hi)) in enumerate(zip(spec.ifs.maps, spec.ifs.domains)):
        a, b = sorted((u.a * lo + u.b, u.a * hi + u.b))
        last = i == spec.ifs.n - 1
        if a - 1e-15 <= x < b - 1e-15 or (last and x >= b - 1e-15):
            z = (x - u.b) / u.a
            return float(spec.lambdas[i](z) + spec.scalings[i](z) * f(z))
    raise AssertionError(f"{x} not covered")


def _affine_between(v0, v1, dom):
    lo, hi = dom
    beta = (v1 - v0) / (hi - lo)
    return SampledFunction.affine(v0 - beta * lo, beta, dom)


def random_affine_spec(rng, n=8, s_bound=0.9):
    """Affine λ_i and S_i on the paired layout, |S_i| < s_bound on the closed domain."""
    ifs = paired_ifs(n)
    lam, sca = [], []
    for dom in ifs.domains:
        lam.append(_affine_between(*rng.uniform(-1, 1, 2), dom))
        sca.append(_affine_between(*rng.uniform(-s_bound, s_bound, 2), dom))
    return rb.RBSpec(ifs, lam, sca)


def random_binary_spec(rng, s_bound=0.9):
    ifs = binary_ifs()
    return rb.constant_spec(ifs, rng.uniform(-1, 1, 2), rng.uniform(-s_bound, s_bound, 2))


def pl_interpolant(target, knots, x):
    return np.interp(x, knots, target(np.asarray(knots)))


def poly_derivative_jet(coeffs, x):
    """Jet from numpy's polynomial class: p = Σ a_k x^k / k!."""
    a = np.asarray(coeffs, dtype=float)
    mono = np.polynomial.Polynomial([a[k] / math.factorial(k) for k in range(len(a))])
    out = []
    p = mono
    for _ in range(len(a)):
        out.append(p(x))
        p = p.deriv()
    return np.array(out)


def random_tight_poly(rng, max_degree=6):
    deg = int(rng.integers(0, max_degree + 1))
    c = rng.uniform(-2, 2, deg + 1)
    c[-1] = rng.choice([-1, 1]) * rng.uniform(0.5, 2.0)
    return c
