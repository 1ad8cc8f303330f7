import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lifs.errors import (
    DomainOutsideUnit,
    EmptySet,
    LengthMismatch,
    MismatchedImage,
    NotContractive,
    OverlappingImages,
    ValidationError,
)
from lifs.local_ifs import (
    AffineMap1D,
    Affine2D,
    LocalIFS1D,
    Partition1D,
    PointSet2D,
    Rect,
    UNIT_SQUARE,
    address_point,
    apply_set_operator,
    binary_ifs,
    two_homothety_example,
    hausdorff_distance,
    iterate_attractor,
    new_local_ifs,
    paired_ifs,
    verify_collage_bound,
)


def brute_hausdorff(a, b):
    def directed(p, q):
        return max(min(math.dist(x, y) for y in q) for x in p)
    return max(directed(a, b), directed(b, a))


def test_partition_validation():
    with pytest.raises(ValidationError):
        Partition1D((0.0, 0.5, 0.4, 1.0))
    with pytest.raises(ValidationError):
        Partition1D((0.1, 1.0))
    p = Partition1D.uniform(4)
    assert p.n_cells == 4 and p.cell(2) == (0.5, 0.75)
    assert list(p.locate([0.0, 0.25, 0.999, 1.0])) == [0, 1, 3, 3]


def test_binary_ifs_valid():
    ifs = binary_ifs()
    assert ifs.n == 2
    assert ifs.images() == [(0.0, 0.5), (0.5, 1.0)]


def test_overlapping_images_rejected():
    with pytest.raises(OverlappingImages):
        new_local_ifs(Partition1D((0, 0.5, 1)), [(0, 1), (0, 1)],
                      [AffineMap1D(0.5, 0), AffineMap1D(0.5, 0)])


def test_mismatched_and_outside():
    with pytest.raises(MismatchedImage):
        new_local_ifs(Partition1D((0, 0.5, 1)), [(0, 1), (0, 1)],
                      [AffineMap1D(0.4, 0), AffineMap1D(0.5, 0.5)])
    with pytest.raises(DomainOutsideUnit):
        new_local_ifs(Partition1D((0, 0.5, 1)), [(0, 1.5), (0, 1)],
                      [AffineMap1D(1 / 3, 0), AffineMap1D(0.5, 0.5)])
    with pytest.raises(LengthMismatch):
        new_local_ifs(Partition1D((0, 0.5, 1)), [(0, 1)], [AffineMap1D(0.5, 0)])


def test_paired_layout_images():
    ifs = paired_ifs(8)
    h = 0.25
    for i, (lo, hi) in enumerate(ifs.images(), start=1):
        assert lo == pytest.approx((i - 1) * h / 2, abs=1e-15)
        assert hi == pytest.approx(i * h / 2, abs=1e-15)


def test_half_open_membership():
    ifs = paired_ifs(4)
    assert ifs.in_domain(0, np.array([0.0]))[0]
    assert not ifs.in_domain(0, np.array([0.5]))[0]
    assert ifs.in_domain(2, np.array([0.5]))[0]


def test_ifs_json_roundtrip():
    ifs = paired_ifs(6)
    back = LocalIFS1D.from_json(ifs.to_json())
    assert back.to_dict() == ifs.to_dict()


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_property_p_partition(n):
    ifs = paired_ifs(n)
    imgs = sorted(ifs.images())
    assert imgs[0][0] == pytest.approx(0.0, abs=1e-12)
    assert imgs[-1][1] == pytest.approx(1.0, abs=1e-12)
    for (_, hi), (lo, _) in zip(imgs, imgs[1:]):
        assert abs(hi - lo) <= 1e-12


def test_address_point():
    ifs = binary_ifs()
    assert address_point(ifs, (1,)) == (0.0, 0.5)
    # u2(u1(u1([0,1]))) = u2([0, 1/4]) = [1/2, 5/8]
    assert address_point(ifs, (2, 1, 1)) == (0.5, 0.625)
    lo, hi = address_point(ifs, (1, 2) * 10)
    assert hi - lo == pytest.approx(2.0 ** -20, rel=1e-12)


def test_address_not_contractive():
    ifs = new_local_ifs(Partition1D((0, 0.5, 1)), [(0, 0.5), (0.5, 1)],
                        [AffineMap1D(1.0, 0.0), AffineMap1D(1.0, 0.0)])
    with pytest.raises(NotContractive):
        address_point(ifs, (1,))


@given(st.lists(st.integers(1, 2), min_size=1, max_size=30), st.integers(1, 2))
def test_address_nested(sigma, extra):
    ifs = binary_ifs()
    lo, hi = address_point(ifs, sigma)
    lo2, hi2 = address_point(ifs, sigma + [extra])
    assert lo - 1e-15 <= lo2 and hi2 <= hi + 1e-15


def test_hausdorff_trivial():
    assert hausdorff_distance(PointSet2D([[0, 0]]), PointSet2D([[0, 0]])) == 0
    assert hausdorff_distance(PointSet2D([[0, 0]], pitch=0), PointSet2D([[3, 4]], pitch=0)) == 5
    with pytest.raises(EmptySet):
        hausdorff_distance(PointSet2D(np.empty((0, 2))), PointSet2D([[0, 0]]))


def test_hausdorff_vs_bruteforce():
    rng = np.random.default_rng(11)
    a, b = rng.uniform(size=(2, 50, 2))
    got = hausdorff_distance(PointSet2D(a, pitch=0), PointSet2D(b, pitch=0))
    assert got == pytest.approx(brute_hausdorff(a.tolist(), b.tolist()), abs=1e-14)


pts = st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=12)


@settings(max_examples=60)
@given(pts, pts, pts)
def test_hausdorff_metric_axioms(a, b, c):
    A, B, C = (PointSet2D(p, pitch=0) for p in (a, b, c))
    ab = hausdorff_distance(A, B)
    assert ab == pytest.approx(hausdorff_distance(B, A), abs=1e-12)
    assert hausdorff_distance(A, A) == 0
    assert ab <= hausdorff_distance(A, C) + hausdorff_distance(C, B) + 1e-12


def test_pointset_csv_roundtrip(tmp_path):
    s = PointSet2D([[0.1, 0.2], [0.3, 0.4], [0.1, 0.2]])
    assert len(s) == 2
    s.to_csv(tmp_path / "p.csv")
    assert PointSet2D.from_csv(tmp_path / "p.csv") == s
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "x,y"


def test_set_operator_empty_and_drop():
    maps = two_homothety_example()
    assert len(apply_set_operator(maps, PointSet2D(np.empty((0, 2))))) == 0
    # (0.9, 0.1) is in neither domain
    assert len(apply_set_operator(maps, PointSet2D([[0.9, 0.1]]))) == 0


@settings(max_examples=40)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=20),
       st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), max_size=20))
def test_set_operator_monotone(s, extra):
    maps = two_homothety_example()
    small = PointSet2D(s)
    big = PointSet2D(s + extra)
    fs = apply_set_operator(maps, small)
    fb = apply_set_operator(maps, big)
    keys = {tuple(p) for p in np.rint(fb.points / fb.pitch).astype(int)}
    assert all(tuple(p) in keys for p in np.rint(fs.points / fs.pitch).astype(int))


def test_example_local_attractor_is_geometric_sequence():
    # (x2, y2) lies in X_1, so every s1^k (x2, y2) stays in the local attractor
    res = iterate_attractor(two_homothety_example(local=True))
    assert res.converged and not res.empty
    expected = [[0.0, 0.0]] + [[0.4 * 0.5 ** k] * 2 for k in range(12)]
    ref = PointSet2D(expected)
    assert hausdorff_distance(res.points, ref) <= 2 * ref.pitch
    assert len(res.points) == 11


def test_example_global_attractor_segment():
    res = iterate_attractor(two_homothety_example(local=False), max_iter=400)
    assert res.converged
    xs = np.linspace(0, 0.4, 2001)
    seg = PointSet2D(np.column_stack([xs, xs]), pitch=0)
    assert hausdorff_distance(res.points, seg) <= 2e-3


def test_empty_attractor_reported():
    maps = [(Rect(0.9, 1.0, 0.9, 1.0), Affine2D.similarity(0.5))]
    res = iterate_attractor(maps, start=PointSet2D([[0.95, 0.95]]))
    assert res.empty and res.converged and len(res.points) == 0


def sierpinski():
    return [Affine2D.similarity(0.5), Affine2D.similarity(0.5, 0.5, 0.0),
            Affine2D.similarity(0.5, 0.25, 0.5)]


def test_collage_bound_on_attractor_estimate():
    maps = sierpinski()
    start = PointSet2D(UNIT_SQUARE.sample(8))
    pairs = [(Rect(-9, 9, -9, 9), f) for f in maps]
    a = start
    for _ in range(25):
        a = apply_set_operator(pairs, a)
    cb = verify_collage_bound(a, maps, s=0.5)
    assert cb.holds and cb.epsilon <= 2e-3 and cb.actual <= 2e-3


def test_collage_bound_corners_and_far():
    maps = sierpinski()
    corners = PointSet2D([[0, 0], [1, 0], [0, 1], [1, 1]])
    cb = verify_collage_bound(corners, maps, s=0.5)
    assert cb.holds and cb.actual <= 2 * cb.epsilon
    far = PointSet2D(corners.points + 10.0)
    assert verify_collage_bound(far, maps, s=0.5).holds
    with pytest.raises(NotContractive):
        verify_collage_bound(corners, maps, s=1.0)
