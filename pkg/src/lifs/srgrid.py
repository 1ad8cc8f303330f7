"""Self-referential dyadic grids and digit-recursive evaluation.

Points are digit strings, never floats, so the shift ``σ`` and grid closure are
exact.  The point 1 is kept as the infinite string ``0.111…``: it is fixed by
``σ`` and by ``l_1``, and ``l_0(1) = 1/2``.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from lifs.errors import GraphInvarianceViolated, NonDyadicPoint, SingularConditions, ValidationError
from lifs.io import write_csv


@dataclass(frozen=True)
class DyadicPoint:
    """``0.d_1 d_2 … d_J`` in binary; trailing zeros are dropped.  ``is_one`` marks 1."""

    digits: tuple = ()
    is_one: bool = False

    def __post_init__(self):
        d = tuple(int(b) for b in self.digits)
        if any(b not in (0, 1) for b in d):
            raise ValidationError("binary digits must be 0 or 1")
        if self.is_one:
            d = ()
        while d and d[-1] == 0:
            d = d[:-1]
        object.__setattr__(self, "digits", d)

    @classmethod
    def one(cls):
        return cls((), True)

    @classmethod
    def from_value(cls, x):
        q = Fraction(x)
        q = Fraction(int(q.numerator), int(q.denominator))
        if q == 1:
            return cls.one()
        if not 0 <= q < 1 or q.denominator & (q.denominator - 1):
            raise NonDyadicPoint(f"{x!r} is not a dyadic rational in [0, 1]")
        j = q.denominator.bit_length() - 1
        n = q.numerator
        return cls(tuple((n >> (j - 1 - k)) & 1 for k in range(j)))

    @property
    def value(self):
        if self.is_one:
            return Fraction(1)
        return sum((Fraction(b, 2 ** (k + 1)) for k, b in enumerate(self.digits)), Fraction(0))

    def __float__(self):
        return float(self.value)

    def __lt__(self, other):
        return self.value < other.value

    def label(self):
        if self.is_one:
            return "0.(1)"
        return "0." + "".join(map(str, self.digits)) if self.digits else "0"


ZERO = DyadicPoint()
ONE = DyadicPoint.one()


def shift(x):
    """``σ``: drop the leading digit (``σ(1) = 1``)."""
    return x if x.is_one else DyadicPoint(x.digits[1:])


def l_map(bit, x):
    """``l_0(t) = t/2`` and ``l_1(t) = (t+1)/2`` on digit strings."""
    if x.is_one:
        return ONE if bit else DyadicPoint((1,))
    return DyadicPoint((bit,) + x.digits)


@dataclass(frozen=True)
class SelfRefGrid:
    points: frozenset

    def sorted_points(self):
        return sorted(self.points)

    def is_sigma_invariant(self):
        return all(shift(p) in self.points for p in self.points)

    def is_self_referential(self):
        images = {l_map(b, z) for z in self.points for b in (0, 1)}
        return self.points <= images

    def __len__(self):
        return len(self.points)

    def __contains__(self, p):
        return p in self.points

    def __iter__(self):
        return iter(self.sorted_points())

    def to_csv(self, path):
        pts = self.sorted_points()
        write_csv(path, ["digits", "value"], [[p.label() for p in pts], [float(p) for p in pts]])


def close_grid(m):
    """Smallest ``σ``-closed set containing ``m ∪ {0, 1}``."""
    pts = {ZERO, ONE}
    for p in m:
        p = p if isinstance(p, DyadicPoint) else DyadicPoint.from_value(p)
        while p not in pts:
            pts.add(p)
            p = shift(p)
    grid = SelfRefGrid(frozenset(pts))
    if not (grid.is_sigma_invariant() and grid.is_self_referential()):
        raise ValidationError("closure failed its invariance checks")
    return grid


def _parts(w):
    if hasattr(w, "linear"):
        return np.asarray(w.linear, dtype=float), np.asarray(w.offset, dtype=float)
    a, b = w
    return np.asarray(a, dtype=float), np.asarray(b, dtype=float)


def check_graph_invariance(pair, target_jet, probes=16, tol=1e-8):
    """Raise unless ``W_d f(t) + b_d = f(l_d(t))`` at ``probes`` points of [0, 1]."""
    ts = (np.arange(probes) + 0.5) / probes
    for bit, w in enumerate(pair):
        a, b = _parts(w)
        for t in ts:
            lhs = a @ np.asarray(target_jet(t)) + b
            rhs = np.asarray(target_jet((t + bit) / 2.0))
            if np.max(np.abs(lhs - rhs)) > tol * max(1.0, np.max(np.abs(rhs))):
                raise GraphInvarianceViolated(f"map {bit} moves the graph point at t = {t:.4g}")


class SuffixEvaluator:
    """Memoised evaluation ``y(x) = W_{d_1} y(σx) + b_{d_1}``; ``ops`` counts affine steps."""

    def __init__(self, pair, f0, target_jet=None, tol=1e-8):
        self.maps = [_parts(w) for w in pair]
        f0 = np.asarray(getattr(f0, "values", f0), dtype=float)
        a0, b0 = self.maps[0]
        if np.max(np.abs(a0 @ f0 + b0 - f0)) > tol * max(1.0, np.max(np.abs(f0))):
            raise GraphInvarianceViolated("f0 is not fixed by the digit-0 map")
        if target_jet is not None:
            check_graph_invariance(pair, target_jet, tol=tol)
        self.cache = {ZERO: f0}
        self.ops = 0

    def _one(self):
        a1, b1 = self.maps[1]
        try:
            return np.linalg.solve(np.eye(len(b1)) - a1, b1)
        except np.linalg.LinAlgError as exc:
            raise SingularConditions("the digit-1 map has no unique fixed point") from exc

    def evaluate(self, x):
        if x in self.cache:
            return self.cache[x]
        if x.is_one:
            self.cache[x] = self._one()
            return self.cache[x]
        chain = []
        p = x
        while p not in self.cache:
            chain.append(p)
            p = shift(p)
        y = self.cache[p]
        for q in reversed(chain):
            a, b = self.maps[q.digits[0]]
            y = a @ y + b
            self.ops += 1
            self.cache[q] = y
        return y


def evaluate_along_digits(pair, f0, x, target_jet=None, return_path=False):
    """Run ``x ← l_d(x)``, ``y ← W_d y + b_d`` over the digits of ``x`` from last to first."""
    x = x if isinstance(x, DyadicPoint) else DyadicPoint.from_value(x)
    ev = SuffixEvaluator(pair, f0, target_jet)
    if x.is_one:
        y = ev.evaluate(x)
        return (y, [ONE]) if return_path else y
    y = ev.cache[ZERO]
    t = ZERO
    path = [t]
    for bit in reversed(x.digits):
        a, b = ev.maps[bit]
        y = a @ y + b
        t = l_map(bit, t)
        path.append(t)
    if t != x:
        raise ValidationError("digit recursion did not reproduce the point")
    return (y, path) if return_path else y


def evaluate_grid(pair, f0, grid, target_jet=None):
    """Jets at every grid point with shared suffixes; returns ``(dict, ops)``."""
    ev = SuffixEvaluator(pair, f0, target_jet)
    out = {p: ev.evaluate(p) for p in grid.sorted_points()}
    return out, ev.ops


def write_evaluation(path, values):
    pts = sorted(values)
    m = max(len(values[p]) for p in pts)
    cols = [[float(p) for p in pts]]
    cols += [[values[p][k] for p in pts] for k in range(m)]
    write_csv(path, ["x"] + [f"f{k}" for k in range(m)], cols)
