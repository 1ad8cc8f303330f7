"""Discrete Read-Bajraktarevic operators on admissible grids.

For the affine maps ``v_i(x, y) = λ_i(x) + S_i(x) y`` the operator restricted to
an admissible grid is exactly ``f ↦ λ^g + M f`` with ``M = U S E``.  Every row of
``M`` has a single entry, so ``M`` is stored as a source-index array plus the
diagonal of sampled scalings.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.sparse import coo_matrix

from lifs import kernels
from lifs.errors import (
    ContractivityViolated,
    GridNotAdmissible,
    InvalidP,
    LengthMismatch,
    NotAdmissible,
    ValidationError,
)
from lifs.io import write_csv
from lifs.local_ifs import LocalIFS1D

GRID_TOL = 1e-12
DENSE_LIMIT = 4096


@dataclass(frozen=True)
class SampledFunction:
    """Constant, affine (``alpha + beta*x``) or tabulated real function on ``domain``.

    Tables are interpolated piecewise linearly; a sample point returns its sample.
    """

    kind: str
    c: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    grid: tuple = ()
    values: tuple = ()
    domain: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.kind not in ("constant", "affine", "table"):
            raise ValidationError(f"unknown sampled-function kind {self.kind!r}")
        if self.kind == "table":
            g = tuple(float(v) for v in self.grid)
            if len(g) == 0 or len(g) != len(self.values):
                raise ValidationError("table grid and values must be nonempty and equally long")
            if any(b <= a for a, b in zip(g, g[1:])):
                raise ValidationError("table grid must be strictly increasing")
            object.__setattr__(self, "grid", g)
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "domain", (float(self.domain[0]), float(self.domain[1])))

    @classmethod
    def constant(cls, c, domain=(0.0, 1.0)):
        return cls("constant", c=float(c), domain=domain)

    @classmethod
    def affine(cls, alpha, beta, domain=(0.0, 1.0)):
        return cls("affine", alpha=float(alpha), beta=float(beta), domain=domain)

    @classmethod
    def table(cls, grid, values, domain=None):
        if domain is None:
            domain = (grid[0], grid[-1])
        return cls("table", grid=tuple(grid), values=tuple(values), domain=domain)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if np.any(x < lo - 1e-9) or np.any(x > hi + 1e-9):
            raise ValidationError(f"evaluation outside the domain [{lo}, {hi}]")
        if self.kind == "constant":
            return np.full(x.shape, self.c)
        if self.kind == "affine":
            return self.alpha + self.beta * x
        return np.interp(x, self.grid, self.values)

    def sup_abs(self):
        """Sup of ``|·|`` over the domain (over the samples, for tables)."""
        if self.kind == "constant":
            return abs(self.c)
        if self.kind == "affine":
            return max(abs(self.alpha + self.beta * d) for d in self.domain)
        return max(abs(v) for v in self.values)

    def scaled(self, k):
        if self.kind == "constant":
            return SampledFunction.constant(k * self.c, self.domain)
        if self.kind == "affine":
            return SampledFunction.affine(k * self.alpha, k * self.beta, self.domain)
        return SampledFunction.table(self.grid, [k * v for v in self.values], self.domain)

    def to_dict(self):
        if self.kind == "constant":
            return {"kind": "constant", "c": self.c}
        if self.kind == "affine":
            return {"kind": "affine", "alpha": self.alpha, "beta": self.beta}
        return {"kind": "table", "grid": list(self.grid), "values": list(self.values)}

    @classmethod
    def from_dict(cls, doc, domain=(0.0, 1.0)):
        kind = doc["kind"]
        if kind == "constant":
            return cls.constant(doc["c"], domain)
        if kind == "affine":
            return cls.affine(doc["alpha"], doc["beta"], domain)
        if kind == "table":
            return cls.table(doc["grid"], doc["values"], domain)
        raise ValidationError(f"unknown sampled-function kind {kind!r}")


@dataclass(frozen=True)
class RBSpec:
    ifs: LocalIFS1D
    lambdas: tuple
    scalings: tuple

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(self.lambdas))
        object.__setattr__(self, "scalings", tuple(self.scalings))
        if not (len(self.lambdas) == len(self.scalings) == self.ifs.n):
            raise LengthMismatch(
                f"{len(self.lambdas)} lambdas and {len(self.scalings)} scalings for {self.ifs.n} maps")

    def v(self, i, x, y):
        """``v_i(x, y) = λ_i(x) + S_i(x) y`` (0-based ``i``)."""
        return self.lambdas[i](x) + self.scalings[i](x) * y

    def with_lambdas(self, lambdas):
        return RBSpec(self.ifs, lambdas, self.scalings)

    def to_dict(self):
        return {
            "ifs": self.ifs.to_dict(),
            "lambdas": [f.to_dict() for f in self.lambdas],
            "scalings": [f.to_dict() for f in self.scalings],
        }

    @classmethod
    def from_dict(cls, doc):
        ifs = LocalIFS1D.from_dict(doc["ifs"])
        lam = [SampledFunction.from_dict(d, ifs.domains[i]) for i, d in enumerate(doc["lambdas"])]
        sca = [SampledFunction.from_dict(d, ifs.domains[i]) for i, d in enumerate(doc["scalings"])]
        return cls(ifs, lam, sca)


def constant_spec(ifs, lambdas, scalings):
    if not (len(lambdas) == len(scalings) == ifs.n):
        raise LengthMismatch(f"{len(lambdas)} lambdas and {len(scalings)} scalings for {ifs.n} maps")
    return RBSpec(
        ifs,
        [SampledFunction.constant(c, d) for c, d in zip(lambdas, ifs.domains)],
        [SampledFunction.constant(c, d) for c, d in zip(scalings, ifs.domains)],
    )


@dataclass(frozen=True, eq=False)
class Grid:
    points: np.ndarray
    ifs: LocalIFS1D

    def __len__(self):
        return len(self.points)

    def index_of(self, z, tol=GRID_TOL):
        """Grid index of every value in ``z``; ``-1`` where no grid point lies within ``tol``."""
        z = np.asarray(z, dtype=float)
        pts = self.points
        j = np.clip(np.searchsorted(pts, z), 1, len(pts) - 1) if len(pts) > 1 else np.zeros(z.shape, int)
        if len(pts) > 1:
            left = pts[j - 1]
            j = np.where(np.abs(z - left) <= np.abs(pts[j] - z), j - 1, j)
        ok = np.abs(pts[j] - z) <= tol
        return np.where(ok, j, -1)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if len(self.values) != len(self.grid):
            raise LengthMismatch(f"{len(self.values)} values on a grid of {len(self.grid)} points")

    def to_csv(self, path):
        write_csv(path, ["x", "value"], [self.grid.points, self.values])


def _preimages(ifs, pts, tol=GRID_TOL):
    cell = ifs.partition.locate(pts)
    a = np.array([m.a for m in ifs.maps])[cell]
    b = np.array([m.b for m in ifs.maps])[cell]
    return cell, (pts - b) / a


def _admissible_sources(ifs, grid_pts, tol=GRID_TOL):
    g = Grid(grid_pts, ifs)
    cell, z = _preimages(ifs, grid_pts)
    return cell, z, g.index_of(z, tol)


def make_admissible_grid(ifs, n_g, budget=32, tol=GRID_TOL):
    """Uniform grid ``{k/n_g}``, closed under the inverse maps if necessary.

    Each closure round adds the missing preimages; if the set still grows after
    ``budget`` rounds the grid is declared not admissible.
    """
    if n_g < 1:
        raise ValidationError("grid size must be positive")
    pts = np.arange(n_g) / n_g
    for _ in range(budget + 1):
        _, z, src = _admissible_sources(ifs, pts, tol)
        missing = z[src < 0]
        if missing.size == 0:
            return Grid(pts, ifs)
        pts = np.unique(np.concatenate([pts, missing]))
        keep = np.concatenate([[True], np.diff(pts) > tol])
        pts = pts[keep]
    raise NotAdmissible(f"grid closure did not stabilise within {budget} rounds ({len(pts)} points)")


def is_admissible(grid, tol=GRID_TOL):
    _, _, src = _admissible_sources(grid.ifs, grid.points, tol)
    return bool(np.all(src >= 0))


@dataclass(frozen=True, eq=False)
class DiscreteRB:
    """Discrete RB operator ``f ↦ λ^g + M f``.

    ``src[r]`` is the column of the single entry of row ``r`` and ``s_vec[r]`` its
    value.  The factored form keeps, per map ``i``, the grid indices of its
    domain (``E_i``), the scalings sampled there (``S_i``) and, for each row of
    its image cell, the position in the domain list (``U_i``).
    """

    grid: Grid
    lambda_vec: np.ndarray
    src: np.ndarray
    s_vec: np.ndarray
    cell: np.ndarray
    dom_idx: tuple
    s_dom: tuple
    img_rows: tuple
    u_pos: tuple
    block_partition: tuple = None

    @property
    def n(self):
        return len(self.lambda_vec)

    def matvec(self, f):
        return self.s_vec * f[self.src]

    def matvec_factored(self, f):
        out = np.zeros(self.n)
        for dom, s, rows, pos in zip(self.dom_idx, self.s_dom, self.img_rows, self.u_pos):
            out[rows] = (s * f[dom])[pos]
        return out

    def dense_matrix(self):
        m = np.zeros((self.n, self.n))
        m[np.arange(self.n), self.src] = self.s_vec
        return m

    def sparse_matrix(self):
        return coo_matrix((self.s_vec, (np.arange(self.n), self.src)), shape=(self.n, self.n)).tocsr()

    def with_lambda(self, lambda_vec):
        return DiscreteRB(self.grid, np.asarray(lambda_vec, dtype=float), self.src, self.s_vec,
                          self.cell, self.dom_idx, self.s_dom, self.img_rows, self.u_pos,
                          self.block_partition)


def assemble(spec, grid):
    """Sample ``λ_i`` and ``S_i`` at the preimages of the grid points."""
    ifs = spec.ifs
    pts = grid.points
    cell, _, src = _admissible_sources(ifs, pts)
    if np.any(src < 0):
        bad = pts[src < 0][:3]
        raise GridNotAdmissible(f"preimages of grid points {bad.tolist()} are not grid points")
    lam = np.empty(len(pts))
    svec = np.empty(len(pts))
    dom_idx, s_dom, img_rows, u_pos = [], [], [], []
    for i in range(ifs.n):
        rows = np.flatnonzero(cell == i)
        dom = np.flatnonzero(ifs.in_domain(i, pts))
        z = pts[src[rows]]
        lam[rows] = spec.lambdas[i](z)
        svec[rows] = spec.scalings[i](z)
        pos = np.searchsorted(dom, src[rows])
        if np.any(pos >= len(dom)) or np.any(dom[np.minimum(pos, len(dom) - 1)] != src[rows]):
            raise GridNotAdmissible(f"preimages under u_{i + 1} fall outside its domain")
        dom_idx.append(dom)
        s_dom.append(spec.scalings[i](pts[dom]) if len(dom) else np.empty(0))
        img_rows.append(rows)
        u_pos.append(pos)
    rb = DiscreteRB(grid, lam, src.astype(np.intp), svec, cell, tuple(dom_idx), tuple(s_dom),
                    tuple(img_rows), tuple(u_pos))
    blocks = detect_local_refinement(rb)
    return DiscreteRB(grid, lam, rb.src, svec, cell, rb.dom_idx, rb.s_dom, rb.img_rows,
                      rb.u_pos, blocks)


def apply(rb, f):
    """``Φ^g f = λ^g + M f``."""
    values = f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=float)
    if len(values) != rb.n:
        raise LengthMismatch(f"function of length {len(values)} for an operator of size {rb.n}")
    return GridFunction(rb.grid, rb.lambda_vec + rb.matvec(values))


def continuous_operator(spec, f, x):
    """The RB operator applied to a callable ``f`` and evaluated at the points ``x``."""
    x = np.asarray(x, dtype=float)
    cell, z = _preimages(spec.ifs, x)
    out = np.empty(x.shape)
    for i in range(spec.ifs.n):
        m = cell == i
        out[m] = spec.v(i, z[m], f(z[m]))
    return out


def check_contractivity(spec, p=math.inf):
    """Left-hand side of the L^p contractivity condition and whether it is below 1."""
    if not (p == math.inf or p >= 1):
        raise InvalidP(f"p must be >= 1 or infinity, got {p}")
    sups = np.array([s.sup_abs() for s in spec.scalings])
    if p == math.inf:
        value = float(sups.max())
    else:
        a = np.abs(spec.ifs.slopes())
        value = float(np.sum(a * sups ** p) ** (1.0 / p))
    return value, value < 1.0


@dataclass
class FixedPointResult:
    f_star: GridFunction
    iters: int
    residual: float
    converged: bool = True
    residuals: list = field(default_factory=list)


def cycle_seed(rb):
    """Zero vector with the exact fixed-point values filled in on every cycle of ``src``.

    Row ``r`` reads row ``src[r]``, so ``src`` is a functional graph.  On a cycle
    ``r0 → r1 → … → r0`` the fixed point has a closed form; seeding it makes the
    plain iteration terminate after (longest tail + 1) steps.
    """
    n = rb.n
    src = rb.src
    lam, s = rb.lambda_vec, rb.s_vec
    f = np.zeros(n)
    state = np.zeros(n, dtype=np.int8)  # 0 new, 1 on current path, 2 done
    for start in range(n):
        if state[start]:
            continue
        path = []
        r = start
        while state[r] == 0:
            state[r] = 1
            path.append(r)
            r = src[r]
        if state[r] == 1:
            cyc = path[path.index(r):]
            prod, acc = 1.0, 0.0
            for q in cyc:
                acc += prod * lam[q]
                prod *= s[q]
            if prod != 1.0:
                f[cyc[0]] = acc / (1.0 - prod)
                for q in reversed(cyc[1:]):
                    f[q] = lam[q] + s[q] * f[src[q]]
        for q in path:
            state[q] = 2
    return f


def solve_fixed_point(rb, start=None, tol=1e-12, max_iter=10_000, force=False, seed=None,
                      track=False):
    """Banach iteration of the discrete operator.

    ``start`` is ``None`` (zero, with exact values seeded on cycles of the
    sampling map), ``"zero"``, ``"random"`` or an explicit vector.  A scaling of
    magnitude >= 1 anywhere on the grid is refused unless ``force`` is set.
    """
    smax = float(np.max(np.abs(rb.s_vec))) if rb.n else 0.0
    if smax >= 1.0:
        if not force:
            raise ContractivityViolated(f"max |S| on the grid is {smax:.6g} >= 1")
        warnings.warn(f"max |S| on the grid is {smax:.6g} >= 1; iteration may diverge")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    if start is None:
        f = cycle_seed(rb)
    elif isinstance(start, str):
        if start == "zero":
            f = np.zeros(rb.n)
        elif start == "random":
            f = np.random.default_rng(seed).uniform(-1.0, 1.0, rb.n)
        else:
            raise ValidationError(f"unknown start {start!r}")
    else:
        f = np.array(start.values if isinstance(start, GridFunction) else start, dtype=float)
        if len(f) != rb.n:
            raise LengthMismatch("start vector has the wrong length")
    f = np.ascontiguousarray(f, dtype=np.float64)
    residuals = []
    if track:
        iters, step = 0, math.inf
        while iters < max_iter:
            g = rb.lambda_vec + rb.matvec(f)
            step = float(np.max(np.abs(g - f))) if rb.n else 0.0
            residuals.append(step)
            f = g
            iters += 1
            if step <= tol:
                break
    else:
        iters, step = kernels.rb_iterate(rb.lambda_vec, rb.src, rb.s_vec, f, tol, max_iter)
    converged = step <= tol
    if not converged:
        warnings.warn(f"fixed-point iteration stopped after {iters} steps, residual {step:.3e}")
    return FixedPointResult(GridFunction(rb.grid, f), int(iters), float(step), converged, residuals)


def solve_direct(rb):
    """Dense solve of ``(I - M) f = λ^g``; only for grids of at most 4096 points."""
    if rb.n > DENSE_LIMIT:
        raise ValidationError(f"dense solve limited to {DENSE_LIMIT} points, grid has {rb.n}")
    a = np.eye(rb.n) - rb.dense_matrix()
    return GridFunction(rb.grid, np.linalg.solve(a, rb.lambda_vec))


def solve(spec, grid, **kwargs):
    """Assemble and iterate after checking the sup-norm contractivity condition."""
    value, ok = check_contractivity(spec, math.inf)
    if not ok and not kwargs.get("force"):
        raise ContractivityViolated(f"max sup|S_i| = {value:.6g} is not below 1")
    return solve_fixed_point(assemble(spec, grid), **kwargs)


def detect_local_refinement(rb):
    """Finest grouping of maps into independent global IFSs, or ``None``.

    Maps are linked when a domain meets another map's image (or domain); each
    linked group must then satisfy ``X_i^g = ⋃_{j∈K} u_j(X_j) ∩ X^g`` for all
    ``i`` in the group.  Groups are returned as sorted tuples of 1-based indices.
    """
    n_maps = len(rb.dom_idx)
    member = [set(d.tolist()) for d in rb.dom_idx]
    images = [set(r.tolist()) for r in rb.img_rows]
    rows, cols = [], []
    for i in range(n_maps):
        for j in range(n_maps):
            if member[i] & images[j] or (i != j and member[i] & member[j]):
                rows.append(i)
                cols.append(j)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n_maps, n_maps))
    _, labels = connected_components(graph, directed=False)
    groups = [tuple(int(i) for i in np.flatnonzero(labels == lab)) for lab in np.unique(labels)]

    def valid(group):
        cover = set().union(*(images[j] for j in group))
        return all(member[i] == cover for i in group)

    if not all(valid(g) for g in groups):
        whole = tuple(range(n_maps))
        if not valid(whole):
            return None
        groups = [whole]
    blocks = tuple(tuple(i + 1 for i in g) for g in sorted(groups))
    if not _is_block_diagonal(rb, blocks):
        return None
    return blocks


def _is_block_diagonal(rb, blocks):
    for block in blocks:
        rows = np.concatenate([rb.img_rows[i - 1] for i in block])
        cols = set(np.concatenate([rb.dom_idx[i - 1] for i in block]).tolist())
        if not set(rb.src[rows].tolist()) <= cols:
            return False
    return True


def block_indices(rb, block):
    """Grid indices belonging to a block (union of its image cells), sorted."""
    return np.sort(np.concatenate([rb.img_rows[i - 1] for i in block]))


def block_decay_base(rb, block, k_max):
    """Measured per-step factor of the block's iteration error in the 2-norm.

    The error recursion ``e ← M e`` is started from the worst case for
    ``k_max`` steps (top right singular vector of ``M_b^k_max``) and the base is
    ``exp`` of the least-squares slope of ``log ‖e_k‖₂`` over ``k = 0..k_max``.
    """
    idx = block_indices(rb, block)
    m = rb.dense_matrix()[np.ix_(idx, idx)]
    _, _, vt = np.linalg.svd(np.linalg.matrix_power(m, k_max))
    e = vt[0]
    norms = [np.linalg.norm(e)]
    for _ in range(k_max):
        e = m @ e
        norms.append(np.linalg.norm(e))
    slope = np.polyfit(np.arange(k_max + 1), np.log(norms), 1)[0]
    return float(math.exp(slope))


def graph_invariance_residual(spec, grid, f_star):
    """Max over ``x ∈ X_i^g`` with ``u_i(x)`` on the grid of ``|f*(u_i x) - v_i(x, f*(x))|``.

    Returns ``(residual, number_of_checked_points)``.
    """
    values = f_star.values if isinstance(f_star, GridFunction) else np.asarray(f_star)
    pts = grid.points
    worst, count = 0.0, 0
    for i, u in enumerate(spec.ifs.maps):
        dom = np.flatnonzero(spec.ifs.in_domain(i, pts))
        x = pts[dom]
        j = grid.index_of(u(x))
        ok = j >= 0
        if not np.any(ok):
            continue
        lhs = values[j[ok]]
        rhs = spec.v(i, x[ok], values[dom[ok]])
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        count += int(ok.sum())
    return worst, count
