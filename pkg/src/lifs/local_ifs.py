"""Local iterated function systems on [0, 1] and set-valued attractor iteration.

One-dimensional local IFSs use the half-open convention: domains and images
are ``[lo, hi)`` with the last image cell closed at 1.  Two-dimensional point
sets stand in for subsets of the plane; they are snapped to a lattice of pitch
``pitch`` after every operator application so that iteration stays finite.
"""

from dataclasses import dataclass
import json
import math

import numpy as np
from scipy.spatial import cKDTree

from lifs import kernels
from lifs.errors import (
    DomainOutsideUnit,
    EmptySet,
    LengthMismatch,
    MismatchedImage,
    NotContractive,
    OverlappingImages,
    ValidationError,
)
from lifs.io import read_csv, write_csv

PROPERTY_P_TOL = 1e-10
DEFAULT_PITCH = 1e-3
BRUTE_FORCE_PAIRS = 4_000_000


@dataclass(frozen=True)
class Partition1D:
    knots: tuple

    def __post_init__(self):
        k = tuple(float(v) for v in self.knots)
        object.__setattr__(self, "knots", k)
        if len(k) < 2:
            raise ValidationError("a partition needs at least two knots")
        if k[0] != 0.0 or k[-1] != 1.0:
            raise ValidationError("partition must start at 0 and end at 1")
        if any(b <= a for a, b in zip(k, k[1:])):
            raise ValidationError("partition knots must be strictly increasing")

    @classmethod
    def uniform(cls, n):
        return cls(tuple(np.linspace(0.0, 1.0, n + 1)))

    @property
    def n_cells(self):
        return len(self.knots) - 1

    def cell(self, i):
        """Cell ``i`` (0-based) as ``(lo, hi)``."""
        return self.knots[i], self.knots[i + 1]

    def locate(self, x):
        """0-based cell index of every point of ``x``; the last cell includes 1."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.knots, x, side="right") - 1
        return np.clip(idx, 0, self.n_cells - 1)


@dataclass(frozen=True)
class AffineMap1D:
    a: float
    b: float

    def __call__(self, x):
        return self.a * x + self.b

    def inverse(self, x):
        return (x - self.b) / self.a

    def lipschitz(self):
        return abs(self.a)

    def image(self, lo, hi):
        p, q = self(lo), self(hi)
        return (p, q) if p <= q else (q, p)

    def compose(self, inner):
        """``self ∘ inner``."""
        return AffineMap1D(self.a * inner.a, self.a * inner.b + self.b)


@dataclass(frozen=True)
class LocalIFS1D:
    partition: Partition1D
    domains: tuple
    maps: tuple

    @property
    def n(self):
        return len(self.maps)

    def images(self):
        return [m.image(*d) for m, d in zip(self.maps, self.domains)]

    def in_domain(self, i, x, tol=1e-12):
        lo, hi = self.domains[i]
        x = np.asarray(x, dtype=float)
        return (x >= lo - tol) & (x < hi - tol)

    def slopes(self):
        return np.array([m.a for m in self.maps])

    def to_dict(self):
        return {
            "knots": list(self.partition.knots),
            "domains": [list(d) for d in self.domains],
            "maps": [{"a": m.a, "b": m.b} for m in self.maps],
        }

    @classmethod
    def from_dict(cls, doc):
        return new_local_ifs(
            Partition1D(doc["knots"]),
            [tuple(d) for d in doc["domains"]],
            [AffineMap1D(float(m["a"]), float(m["b"])) for m in doc["maps"]],
        )

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def new_local_ifs(partition, domains, maps, tol=PROPERTY_P_TOL):
    """Validate and build a :class:`LocalIFS1D`.

    Map ``i`` must send its domain onto the ``i``-th partition cell; the images
    then partition [0, 1] (property (P)).
    """
    domains = tuple((float(lo), float(hi)) for lo, hi in domains)
    maps = tuple(maps)
    if not (len(domains) == len(maps) == partition.n_cells):
        raise LengthMismatch(
            f"{len(domains)} domains, {len(maps)} maps, {partition.n_cells} cells")
    for lo, hi in domains:
        if lo < -tol or hi > 1.0 + tol or hi <= lo:
            raise DomainOutsideUnit(f"domain [{lo}, {hi}) is not a subinterval of [0, 1]")
    images = [m.image(*d) for m, d in zip(maps, domains)]
    order = sorted(range(len(images)), key=lambda i: images[i])
    for i, j in zip(order, order[1:]):
        if images[j][0] < images[i][1] - tol:
            raise OverlappingImages(f"images of maps {i + 1} and {j + 1} overlap")
    for i, (lo, hi) in enumerate(images):
        c_lo, c_hi = partition.cell(i)
        if abs(lo - c_lo) > tol or abs(hi - c_hi) > tol:
            raise MismatchedImage(
                f"u_{i + 1} maps its domain onto [{lo}, {hi}), expected [{c_lo}, {c_hi})")
    return LocalIFS1D(partition, domains, maps)


def binary_ifs():
    """``u_1(x) = x/2`` and ``u_2(x) = (x+1)/2`` on [0, 1)."""
    return new_local_ifs(
        Partition1D((0.0, 0.5, 1.0)),
        [(0.0, 1.0), (0.0, 1.0)],
        [AffineMap1D(0.5, 0.0), AffineMap1D(0.5, 0.5)],
    )


def paired_ifs(n):
    """Even ``n`` maps; maps ``2j-1`` and ``2j`` halve the shared domain ``[(j-1)h, jh)``, ``h = 2/n``."""
    if n < 2 or n % 2:
        raise ValidationError("the paired layout needs an even number of maps")
    h = 2.0 / n
    domains, maps = [], []
    for j in range(1, n // 2 + 1):
        dom = ((j - 1) * h, j * h)
        domains += [dom, dom]
        maps += [AffineMap1D(0.5, (j - 1) * h / 2), AffineMap1D(0.5, j * h / 2)]
    knots = [i * h / 2 for i in range(n + 1)]
    knots[-1] = 1.0
    return new_local_ifs(Partition1D(knots), domains, maps)


def address_point(ifs, sigma):
    """Interval ``u_{σ1} ∘ … ∘ u_{σK}([0, 1])`` for a finite code (digits 1..N)."""
    if len(sigma) < 1:
        raise ValidationError("a code needs at least one digit")
    if any(m.lipschitz() >= 1.0 for m in ifs.maps):
        raise NotContractive("address intervals need contractive maps")
    lo, hi = 0.0, 1.0
    for d in reversed(sigma):
        if not 1 <= d <= ifs.n:
            raise ValidationError(f"digit {d} outside 1..{ifs.n}")
        d_lo, d_hi = ifs.domains[d - 1]
        lo, hi = max(lo, d_lo), min(hi, d_hi)
        if hi < lo:
            raise ValidationError(f"code {tuple(sigma)} addresses an empty set")
        lo, hi = ifs.maps[d - 1].image(lo, hi)
    return lo, hi


# --------------------------------------------------------------------- 2D sets

@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    def contains(self, pts, tol=1e-12):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return ((pts[:, 0] >= self.x0 - tol) & (pts[:, 0] <= self.x1 + tol)
                & (pts[:, 1] >= self.y0 - tol) & (pts[:, 1] <= self.y1 + tol))

    def sample(self, n):
        xs = np.linspace(self.x0, self.x1, n)
        ys = np.linspace(self.y0, self.y1, n)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])


UNIT_SQUARE = Rect(0.0, 1.0, 0.0, 1.0)


@dataclass(frozen=True)
class Affine2D:
    matrix: tuple
    offset: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).reshape(2, 2)
        object.__setattr__(self, "matrix", tuple(map(tuple, m)))
        object.__setattr__(self, "offset", tuple(float(v) for v in self.offset))

    @classmethod
    def similarity(cls, s, tx=0.0, ty=0.0, angle=0.0):
        c, n = math.cos(angle), math.sin(angle)
        return cls(((s * c, -s * n), (s * n, s * c)), (tx, ty))

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return pts @ np.asarray(self.matrix).T + np.asarray(self.offset)

    def lipschitz(self):
        return float(np.linalg.norm(np.asarray(self.matrix), 2))


def _snap_unique(pts, pitch):
    keys = np.rint(pts / pitch).astype(np.int64)
    if len(keys) and np.max(np.abs(keys)) < 2 ** 30:
        # pack both lattice coordinates into one integer so a 1D unique suffices
        packed = np.unique((keys[:, 0] + 2 ** 30) * 2 ** 31 + (keys[:, 1] + 2 ** 30))
        keys = np.column_stack([packed // 2 ** 31 - 2 ** 30, packed % 2 ** 31 - 2 ** 30])
    else:
        keys = np.unique(keys, axis=0)
    return keys * pitch


class PointSet2D:
    """Finite planar point set, deduplicated on a lattice of the given pitch."""

    def __init__(self, points, pitch=DEFAULT_PITCH):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if pitch:
            pts = _snap_unique(pts, pitch)
        else:
            pts = np.unique(pts, axis=0)
        pts.setflags(write=False)
        self.points = pts
        self.pitch = pitch

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return isinstance(other, PointSet2D) and np.array_equal(self.points, other.points)

    def __repr__(self):
        return f"PointSet2D({len(self)} points, pitch={self.pitch})"

    def to_csv(self, path):
        write_csv(path, ["x", "y"], [self.points[:, 0], self.points[:, 1]])

    @classmethod
    def from_csv(cls, path, pitch=DEFAULT_PITCH):
        header, rows = read_csv(path)
        if header != ["x", "y"]:
            raise ValidationError(f"expected header x,y, got {','.join(header)}")
        return cls([[float(a), float(b)] for a, b in rows], pitch)


def apply_set_operator(ifs_maps, s, pitch=None):
    """``F_loc(S) = ⋃ f_i(S ∩ X_i)``; points outside every domain are dropped.

    ``ifs_maps`` is a sequence of ``(Rect, Affine2D)`` pairs.
    """
    pitch = s.pitch if pitch is None else pitch
    parts = [f(s.points[dom.contains(s.points)]) for dom, f in ifs_maps]
    return PointSet2D(np.concatenate(parts) if parts else np.empty((0, 2)), pitch)


def hausdorff_distance(a, b):
    pa = a.points if isinstance(a, PointSet2D) else np.asarray(a, dtype=float).reshape(-1, 2)
    pb = b.points if isinstance(b, PointSet2D) else np.asarray(b, dtype=float).reshape(-1, 2)
    if len(pa) == 0 or len(pb) == 0:
        raise EmptySet("Hausdorff distance needs two nonempty sets")
    if len(pa) * len(pb) > BRUTE_FORCE_PAIRS:
        return max(_directed_tree(pa, pb), _directed_tree(pb, pa))
    return max(kernels.directed_hausdorff(pa, pb), kernels.directed_hausdorff(pb, pa))


def _directed_tree(a, b):
    return float(cKDTree(b).query(a, k=1)[0].max())


@dataclass
class AttractorResult:
    points: PointSet2D
    iterations: int
    converged: bool
    empty: bool
    last_step: float


def iterate_attractor(ifs_maps, start=None, box=UNIT_SQUARE, samples=64,
                      pitch=DEFAULT_PITCH, max_iter=200):
    """Iterate ``K_n = F_loc(K_{n-1})`` from ``K_0`` (default: a ``samples²`` grid on ``box``).

    Stops when the snapped set repeats.  An empty iterate is itself a fixed
    point and is reported as such.
    """
    k = start if start is not None else PointSet2D(box.sample(samples), pitch)
    seen = {k.points.tobytes(): 0}
    step = math.inf
    for it in range(1, max_iter + 1):
        nxt = apply_set_operator(ifs_maps, k, pitch)
        if len(nxt) == 0:
            return AttractorResult(nxt, it, True, True, math.inf)
        step = hausdorff_distance(k, nxt) if len(k) else math.inf
        key = nxt.points.tobytes()
        k = nxt
        if key in seen:
            return AttractorResult(k, it, True, False, step)
        seen[key] = it
    return AttractorResult(k, max_iter, False, False, step)


@dataclass
class CollageBound:
    epsilon: float
    bound: float
    actual: float
    holds: bool


def verify_collage_bound(m, maps, s=None, iterations=20, pitch=DEFAULT_PITCH, tolerance=None):
    """Check ``d_H(M, A) <= d_H(M, F(M)) / (1 - s)`` for a global planar IFS.

    The attractor is estimated by iterating from ``M``; ``tolerance`` defaults to
    the combined lattice and truncation error of that estimate.
    """
    if s is None:
        s = max(f.lipschitz() for f in maps)
    if s >= 1.0:
        raise NotContractive(f"contraction factor {s} is not below 1")
    whole = Rect(-math.inf, math.inf, -math.inf, math.inf)
    pairs = [(whole, f) for f in maps]
    fm = apply_set_operator(pairs, m, pitch=0)
    eps = hausdorff_distance(m, fm)
    a = PointSet2D(m.points, pitch)
    for _ in range(iterations):
        a = apply_set_operator(pairs, a, pitch)
    actual = hausdorff_distance(m, a)
    bound = eps / (1.0 - s)
    if tolerance is None:
        tolerance = pitch * math.sqrt(2.0) / (1.0 - s) + s ** iterations * bound
    return CollageBound(eps, bound, actual, actual <= bound + tolerance)


def two_homothety_example(x1=0.8, y1=0.8, x2=0.4, y2=0.4, s1=0.5, s2=0.5, local=True):
    """Two homotheties towards (0, 0) and (x2, y2), on sub-rectangles when ``local``."""
    f1 = Affine2D(((s1, 0.0), (0.0, s1)), (0.0, 0.0))
    f2 = Affine2D(((s2, 0.0), (0.0, s2)), ((1 - s2) * x2, (1 - s2) * y2))
    if local:
        return [(Rect(0.0, x1, 0.0, y1), f1), (Rect(x2, 1.0, y2, 1.0), f2)]
    return [(UNIT_SQUARE, f1), (UNIT_SQUARE, f2)]
