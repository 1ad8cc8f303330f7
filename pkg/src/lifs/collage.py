"""Collage fitting: fixed points of ``G(u) = argmin_{v ∈ W(u)} Ψ(v)``.

``H`` is ``R^n`` (grid values) with the inner product ``⟨u, v⟩ = uᵀ N v``.  The
quadratic form is ``Ψ(v) = ½ vᵀ K v - loadᵀ v``.  A parametric RB family is
``F(u; α) = M u + B α``; its fixed points span ``V_N``.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh, LinAlgError

from lifs import rb
from lifs.errors import (
    GammaNotLessThanOne,
    MaxIterExceeded,
    SingularNormalEquations,
    ValidationError,
)
from lifs.interp import InterpolationProblem, make_rng, pair_scalings
from lifs.local_ifs import paired_ifs


def _generalized_extremes(a, n):
    w = eigh(a, n, eigvals_only=True)
    return float(w[0]), float(w[-1])


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """``Ψ(v) = ½ vᵀ K v - loadᵀ v`` with ``c1 ‖v‖ ≤ ‖v‖_E ≤ c2 ‖v‖`` in the ``N`` norm."""

    gram: np.ndarray
    load: np.ndarray
    norm: np.ndarray
    c1: float = None
    c2: float = None

    def __post_init__(self):
        k = np.asarray(self.gram, dtype=float)
        n = np.asarray(self.norm, dtype=float)
        for name, m in (("gram", k), ("norm", n)):
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValidationError(f"{name} must be a square matrix")
            if np.max(np.abs(m - m.T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
                raise ValidationError(f"{name} is not symmetric; only symmetric forms are supported")
        if k.shape != n.shape or len(self.load) != k.shape[0]:
            raise ValidationError("gram, norm and load sizes differ")
        if np.linalg.eigvalsh(n)[0] <= 0:
            raise ValidationError("the norm gram is not positive definite")
        lo, hi = _generalized_extremes(k, n)
        if lo <= 0:
            raise ValidationError("the form is not positive definite")
        object.__setattr__(self, "gram", k)
        object.__setattr__(self, "norm", n)
        object.__setattr__(self, "load", np.asarray(self.load, dtype=float))
        object.__setattr__(self, "c1", math.sqrt(lo))
        object.__setattr__(self, "c2", math.sqrt(hi))

    def psi(self, v):
        return 0.5 * v @ self.gram @ v - self.load @ v

    def h_norm(self, v):
        return math.sqrt(max(float(v @ self.norm @ v), 0.0))

    def energy_norm(self, v):
        return math.sqrt(max(float(v @ self.gram @ v), 0.0))

    def minimizer(self):
        return np.linalg.solve(self.gram, self.load)


def l2_form(target_values, weights=None):
    """Fit in the weighted ``L²`` norm: ``K = N = diag(w)``, ``load = N·target``."""
    t = np.asarray(target_values, dtype=float)
    w = np.full(t.size, 1.0 / t.size) if weights is None else np.asarray(weights, dtype=float)
    n = np.diag(w)
    return QuadraticForm(n, w * t, n)


def poisson_form(rhs_values):
    """``-u'' = g`` on grid ``k/n``, ``u'(0) = 0``, ``u(1) = 0`` eliminated; energy norm as ``H``."""
    g = np.asarray(rhs_values, dtype=float)
    n = g.size
    h = 1.0 / n
    k = (np.diag(np.full(n, 2.0)) - np.diag(np.ones(n - 1), 1) - np.diag(np.ones(n - 1), -1)) / h
    k[0, 0] = 1.0 / h
    load = h * g
    load[0] *= 0.5
    return QuadraticForm(k, load, k)


@dataclass(frozen=True, eq=False)
class ParametricRB:
    """``F(u; α) = M u + B α`` with ``M`` from ``base`` (``λ = 0``) and ``B`` the basis columns."""

    base: rb.DiscreteRB
    basis: np.ndarray
    norm: np.ndarray
    c: float = None

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != self.base.n:
            raise ValidationError("basis must have one row per grid point")
        object.__setattr__(self, "basis", b)
        m = self.base.dense_matrix()
        n = np.asarray(self.norm, dtype=float)
        object.__setattr__(self, "c", math.sqrt(max(_generalized_extremes(m.T @ n @ m, n)[1], 0.0)))

    @property
    def n_params(self):
        return self.basis.shape[1]

    def f_zero(self, u):
        """``F(u; 0) = M u``."""
        return self.base.matvec(np.asarray(u, dtype=float))

    def apply(self, u, alpha):
        return self.f_zero(u) + self.basis @ alpha

    def fixed_point(self, alpha, tol=1e-13):
        lam = self.basis @ np.asarray(alpha, dtype=float)
        res = rb.solve_fixed_point(self.base.with_lambda(lam), tol=tol)
        return res.f_star.values

    def fractal_basis(self):
        """Columns ``(I - M)⁻¹ B``: the fixed points for unit parameters."""
        if self.base.n > rb.DENSE_LIMIT:
            raise ValidationError("fractal basis needs a dense solve")
        return np.linalg.solve(np.eye(self.base.n) - self.base.dense_matrix(), self.basis)


def gamma(prb, form):
    return prb.c * form.c2 / form.c1


class _Normal:
    def __init__(self, prb, form):
        b, k = prb.basis, form.gram
        self.kb = k @ b
        try:
            self.fac = cho_factor(b.T @ self.kb)
        except LinAlgError as exc:
            raise SingularNormalEquations("the basis is degenerate in the energy inner product") from exc
        piv = np.diag(self.fac[0]) ** 2
        if np.min(piv) < 1e-12 * np.max(piv):
            raise SingularNormalEquations("the basis is numerically degenerate")

    def solve(self, prb, form, u):
        fu = prb.f_zero(u)
        alpha = cho_solve(self.fac, prb.basis.T @ form.load - self.kb.T @ fu)
        return fu + prb.basis @ alpha, alpha


def g_operator(prb, form, u, _normal=None):
    """``G(u)`` and the minimizing parameters."""
    values = u.values if isinstance(u, rb.GridFunction) else np.asarray(u, dtype=float)
    normal = _normal or _Normal(prb, form)
    g, alpha = normal.solve(prb, form, values)
    return rb.GridFunction(prb.base.grid, g), alpha


@dataclass
class CollageResult:
    u: rb.GridFunction
    alpha: np.ndarray
    iters: int
    residual: float
    steps: list
    membership: float
    resolve_gap: float


def collage_fit(prb, form, tol=1e-12, max_iter=1000, u0=None):
    """Iterate ``u ← G(u)`` until ``‖G(u) - u‖ ≤ tol`` in the ``H`` norm."""
    if tol <= 0:
        raise ValidationError("tol must be positive")
    gam = gamma(prb, form)
    if gam >= 1:
        raise GammaNotLessThanOne(
            f"gamma = c*c2/c1 = {prb.c:.4g}*{form.c2:.4g}/{form.c1:.4g} = {gam:.4g} >= 1")
    normal = _Normal(prb, form)
    u = np.zeros(prb.base.n) if u0 is None else np.asarray(u0, dtype=float)
    steps = []
    for it in range(1, max_iter + 1):
        g, alpha = normal.solve(prb, form, u)
        step = form.h_norm(g - u)
        steps.append(step)
        u = g
        if step <= tol:
            break
    else:
        raise MaxIterExceeded(f"collage iteration did not reach {tol:g} in {max_iter} steps")
    membership = form.h_norm(u - prb.apply(u, alpha))
    resolve_gap = form.h_norm(u - prb.fixed_point(alpha))
    return CollageResult(rb.GridFunction(prb.base.grid, u), alpha, it, step, steps,
                         membership, resolve_gap)


def contraction_estimate(prb, form, trials=20, seed=0):
    """Largest observed ``‖G(u) - G(v)‖ / ‖u - v‖`` over random pairs."""
    if trials < 10:
        raise ValidationError("use at least 10 trials")
    rng = make_rng(seed)
    normal = _Normal(prb, form)
    worst = 0.0
    for _ in range(trials):
        u, v = rng.normal(size=(2, prb.base.n))
        d = form.h_norm(u - v)
        if d == 0:
            continue
        gu, _ = normal.solve(prb, form, u)
        gv, _ = normal.solve(prb, form, v)
        worst = max(worst, form.h_norm(gu - gv) / d)
    return worst


def quasi_optimality_factor(c, gam):
    if not (0 < gam < 1 and c > 0):
        raise ValidationError("need 0 < gamma < 1 and c > 0")
    return (1.0 / c + 1.0) / (1.0 / gam - 1.0)


def quasi_optimality_check(prb, form, reference_best_error, collage_error, tolerance=1e-12):
    bound = quasi_optimality_factor(prb.c, gamma(prb, form)) * reference_best_error
    return bound, bool(collage_error <= bound + tolerance)


def best_approximation(prb, form, target):
    """Closest point of ``V_N`` to ``target`` in the ``H`` norm: ``(u, α, error)``."""
    phi = prb.fractal_basis()
    n = form.norm
    try:
        alpha = cho_solve(cho_factor(phi.T @ n @ phi), phi.T @ n @ target)
    except LinAlgError as exc:
        raise SingularNormalEquations("fractal basis is degenerate") from exc
    u = phi @ alpha
    return u, alpha, form.h_norm(u - target)


def ritz(prb, form):
    """Minimizer of ``Ψ`` over ``V_N``."""
    phi = prb.fractal_basis()
    alpha = np.linalg.solve(phi.T @ form.gram @ phi, phi.T @ form.load)
    return phi @ alpha, alpha


def interpolating_family(n_maps, s_odd, n_g, mode="endpoint-continuous"):
    """Parameters are the knot values at ``jh``; ``λ_{2j-1} = (1-S) α_{j-1}``, ``λ_{2j} = (1-S) α_j``."""
    p = InterpolationProblem(lambda x: x, n_maps, s_odd, mode)
    s_o, s_e = pair_scalings(p)
    s = np.empty(n_maps)
    s[0::2], s[1::2] = s_o, s_e
    ifs = paired_ifs(n_maps)
    spec = rb.constant_spec(ifs, np.zeros(n_maps), s)
    base = rb.assemble(spec, rb.make_admissible_grid(ifs, n_g))
    knot = np.arange(n_maps) // 2 + np.arange(n_maps) % 2
    basis = np.zeros((n_g, n_maps // 2 + 1))
    rows = np.arange(n_g)
    basis[rows, knot[base.cell]] = 1.0 - s[base.cell]
    return base, basis


def fit_report(prb, form, result, best_error, collage_error):
    bound, _ = quasi_optimality_check(prb, form, best_error, collage_error)
    return {
        "alpha": [float(a) for a in result.alpha],
        "gamma": gamma(prb, form),
        "c": prb.c,
        "c1": form.c1,
        "c2": form.c2,
        "iters": result.iters,
        "residual": result.residual,
        "best_error": best_error,
        "collage_error": collage_error,
        "bound": bound,
    }
