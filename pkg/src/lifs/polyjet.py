"""Taylor jets of real polynomials and the affine maps that leave their graphs invariant.

A polynomial of degree ``M`` is stored by its derivatives at zero,
``a_k = p^(k)(0)``, so ``p(x) = Σ a_k x^k/k!``.  Its jet at ``x`` is the vector
``f(x) = (p(x), p'(x), …, p^(M)(x))``.  Everything is exact at size ``M+1``
because the shift is nilpotent there.

Index conventions:

* ``A(x)[i, j] = f_{i+j}(x)`` (Hankel, zero below the anti-diagonal),
* ``V(t)[i, j] = t^(j-i)/(j-i)!`` for ``j ≥ i`` (upper triangular), so that
  ``f(x+t) = A(x) v(t) = V(t) f(x)`` and ``V(s)ᵀ v(t) = v(t+s)``,
* ``W_s(x) = A(x) D_s A(x)⁺`` is upper triangular with diagonal
  ``(s^M, …, s, 1)``.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np

from lifs.errors import (
    DegenerateHankel,
    NonDyadicPoint,
    ThetaOutOfRange,
    ValidationError,
    ZeroLeadingCoefficient,
)
from lifs.io import write_csv
from lifs.local_ifs import AffineMap1D


@dataclass(frozen=True, eq=False)
class JetVector:
    values: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if v.ndim != 1 or v.size == 0:
            raise ValidationError("a jet is a nonempty vector")
        nz = np.flatnonzero(v)
        keep = nz[-1] + 1 if nz.size else 1
        if keep < v.size:
            warnings.warn(f"jet had {v.size - keep} trailing zeros; trimmed to degree {keep - 1}")
            v = v[:keep]
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def degree(self):
        return self.values.size - 1

    def __len__(self):
        return self.values.size


def taylor_vector(t, m):
    """``v(t)`` truncated to ``m+1`` entries."""
    k = np.arange(m + 1)
    return np.array([t ** i / math.factorial(i) for i in k], dtype=float)


def jet_at(coefficients, x):
    """Derivatives ``0..M`` at ``x`` of the polynomial with ``a_k = p^(k)(0)``."""
    a = np.asarray(coefficients, dtype=float)
    if a.size == 0:
        raise ValidationError("empty coefficient list")
    if a[-1] == 0 and a.size > 1:
        raise ZeroLeadingCoefficient("the last coefficient must be nonzero")
    m = a.size - 1
    v = taylor_vector(x, m)
    vals = np.array([np.dot(a[k:], v[: m + 1 - k]) for k in range(m + 1)])
    if a.size == 1:
        return JetVector(a.copy())
    return JetVector(vals)


def _jet_values(j):
    return j.values if isinstance(j, JetVector) else np.asarray(j, dtype=float)


def hankel(j, size=None):
    """``A[i, k] = f_{i+k}``, zero where ``i + k`` exceeds the degree."""
    f = _jet_values(j)
    n = size or f.size
    idx = np.add.outer(np.arange(n), np.arange(n))
    padded = np.concatenate([f, np.zeros(2 * n)])
    return padded[idx]


def toeplitz_v(t, m):
    """``V(t) = exp(tσ)`` at size ``m+1``."""
    v = taylor_vector(t, m)
    d = np.subtract.outer(np.arange(m + 1), np.arange(m + 1))
    return np.where(d <= 0, v[np.clip(-d, 0, m)], 0.0)


def dilation(s, m):
    return np.diag(float(s) ** np.arange(m + 1))


def reversal(m, size=None):
    """``P_M``: reverses the first ``m+1`` coordinates, zero elsewhere."""
    n = size or m + 1
    p = np.zeros((n, n))
    p[np.arange(m + 1), m - np.arange(m + 1)] = 1.0
    return p


def hankel_pseudoinverse(a):
    """Moore-Penrose inverse of an upper-left triangular Hankel matrix.

    With ``L = I - P_M A / a_M`` (strictly lower triangular, so ``L^(M+1) = 0``)
    the inverse of the leading block is ``Σ_{k≤M} L^k P_M / a_M``.
    """
    a = np.asarray(a, dtype=float)
    col = a[:, 0]
    nz = np.flatnonzero(col)
    if nz.size == 0:
        raise DegenerateHankel("the Hankel matrix is zero")
    m = nz[-1]
    a_m = col[m]
    block = a[: m + 1, : m + 1]
    if not np.array_equal(a, hankel(col[: m + 1], a.shape[0])):
        raise DegenerateHankel("expected a Hankel matrix that vanishes below its anti-diagonal")
    p = reversal(m)
    scaled = p / a_m
    low = np.eye(m + 1) - scaled @ block
    inv = np.zeros((m + 1, m + 1))
    term = scaled.copy()
    for _ in range(m + 1):
        inv += term
        term = low @ term
    out = np.zeros_like(a)
    out[: m + 1, : m + 1] = inv
    return out


def fractel_linear(j, s):
    """``W_s(x) = A(x) D_s A(x)⁺`` for the jet ``j = f(x)``."""
    if not 0 < s < 1:
        raise ValidationError(f"s must lie in (0, 1), got {s}")
    f = _jet_values(j)
    if f[-1] == 0:
        raise DegenerateHankel("the top derivative of the jet vanishes")
    a = hankel(f)
    return a @ dilation(s, f.size - 1) @ hankel_pseudoinverse(a)


def fractel_eigenvalues(w):
    return np.sort(np.diag(w))[::-1]


@dataclass(frozen=True, eq=False)
class Fractel:
    """``w(t, y) = (l(t), linear·y + offset)``."""

    l: AffineMap1D
    linear: np.ndarray
    offset: np.ndarray

    def __call__(self, t, y):
        return self.l(t), self.linear @ np.asarray(y, dtype=float) + self.offset


def make_theta_fractel(j, x, s, theta):
    """Fractel about ``x`` with ratio ``s`` whose eigenvalue 1 is damped to ``1 - θ``.

    The damping acts on the top derivative, which is constant along the graph,
    so ``(W - θ e_M e_Mᵀ) f(t) + θ f_M(x) e_M = W f(t)`` for every ``t``.
    """
    if not 0.0 <= theta <= 1.0:
        raise ThetaOutOfRange(f"theta must lie in [0, 1], got {theta}")
    f = _jet_values(j)
    w = fractel_linear(f, s)
    m = f.size - 1
    e = np.zeros(m + 1)
    e[m] = 1.0
    return Fractel(AffineMap1D(s, (1.0 - s) * x), w - theta * np.outer(e, e), theta * f[m] * e)


def poly_ifs_pair(coefficients, theta=0.5, s=0.5):
    """The two fractels about 0 and 1 whose x-maps are ``t/2`` and ``(t+1)/2``."""
    if s != 0.5:
        raise ValidationError("the two-map construction needs s = 1/2")
    return (make_theta_fractel(jet_at(coefficients, 0.0), 0.0, s, theta),
            make_theta_fractel(jet_at(coefficients, 1.0), 1.0, s, theta))


def dyadic_digits(x, j):
    """Binary digits ``d_1..d_J`` of ``x ∈ [0, 1)``; raises when ``x·2^J`` is not an integer."""
    scaled = x * 2.0 ** j
    n = int(round(scaled))
    if scaled != n or not 0 <= n < 2 ** j:
        raise NonDyadicPoint(f"{x!r} has no exact {j}-digit binary expansion in [0, 1)")
    return [(n >> (j - 1 - k)) & 1 for k in range(j)]


def poly_ifs_reconstruct(coefficients, x, digits, theta=0.5, s=0.5):
    """Jet at the dyadic ``x`` obtained by running the digit recursion from ``f(0)``."""
    pair = poly_ifs_pair(coefficients, theta, s)
    d = dyadic_digits(x, digits)
    t, y = 0.0, jet_at(coefficients, 0.0).values.copy()
    for bit in reversed(d):
        t, y = pair[bit](t, y)
    if t != x:
        raise NonDyadicPoint(f"digit recursion reached {t!r}, expected {x!r}")
    return JetVector(y)


def write_jet_trace(path, xs, jets):
    m = max(len(j) for j in jets)
    cols = [np.asarray(xs, dtype=float)]
    for k in range(m):
        cols.append([j.values[k] if k < len(j) else 0.0 for j in jets])
    write_csv(path, ["x"] + [f"f{k}" for k in range(m)], cols)
