import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lifs import polyjet as pj
from lifs.errors import (
    DegenerateHankel,
    NonDyadicPoint,
    ThetaOutOfRange,
    ValidationError,
    ZeroLeadingCoefficient,
)

from oracles import poly_derivative_jet, random_tight_poly

floats = st.floats(-2, 2, allow_nan=False)


def test_jet_vector_trims_with_warning():
    with pytest.warns(UserWarning):
        j = pj.JetVector([1.0, 2.0, 0.0, 0.0])
    assert j.degree == 1
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert pj.JetVector([0.0]).degree == 0


def test_jet_at_square():
    assert pj.jet_at([0, 0, 2], 0.75).values.tolist() == [0.5625, 1.5, 2.0]
    with pytest.raises(ZeroLeadingCoefficient):
        pj.jet_at([1, 0], 0.2)


@pytest.mark.parametrize("seed", range(10))
def test_jet_matches_numpy_polynomial(seed):
    rng = np.random.default_rng(seed)
    c = random_tight_poly(rng)
    x = rng.uniform(-1, 1)
    assert np.allclose(pj.jet_at(c, x).values, poly_derivative_jet(c, x), atol=1e-11)


@given(floats, floats, st.integers(0, 6))
def test_v_group_law(t, s, m):
    lhs = pj.toeplitz_v(t, m) @ pj.toeplitz_v(s, m)
    assert np.allclose(lhs, pj.toeplitz_v(t + s, m), atol=1e-9)
    assert np.allclose(pj.toeplitz_v(s, m).T @ pj.taylor_vector(t, m), pj.taylor_vector(t + s, m), atol=1e-9)


def test_v_upper_triangular():
    v = pj.toeplitz_v(0.3, 4)
    assert np.array_equal(v, np.triu(v)) and np.all(np.diag(v) == 1)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), floats, floats)
def test_shift_identity(seed, x, t):
    c = random_tight_poly(np.random.default_rng(seed))
    f = pj.jet_at(c, x)
    m = f.degree
    lhs = pj.hankel(f) @ pj.taylor_vector(t, m)
    assert np.allclose(lhs, pj.toeplitz_v(t, m) @ f.values, atol=1e-9 * max(1, np.abs(lhs).max()))
    assert np.allclose(lhs, pj.jet_at(c, x + t).values, atol=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-1, 1), st.integers(0, 3))
def test_moore_penrose(seed, x, pad):
    c = random_tight_poly(np.random.default_rng(seed))
    f = pj.jet_at(c, x)
    a = pj.hankel(f, f.degree + 1 + pad)
    g = pj.hankel_pseudoinverse(a)
    tol = 1e-9
    assert np.allclose(a @ g @ a, a, atol=tol)
    assert np.allclose(g @ a @ g, g, atol=tol)
    assert np.allclose((a @ g).T, a @ g, atol=tol)
    assert np.allclose((g @ a).T, g @ a, atol=tol)
    assert np.allclose(g, np.linalg.pinv(a), atol=1e-8)


def test_pseudoinverse_rejects_degenerate():
    with pytest.raises(DegenerateHankel):
        pj.hankel_pseudoinverse(np.zeros((3, 3)))
    with pytest.raises(DegenerateHankel):
        pj.hankel_pseudoinverse(np.ones((3, 3)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-1, 1), st.floats(0.05, 0.95))
def test_fractel_spectrum(seed, x, s):
    c = random_tight_poly(np.random.default_rng(seed))
    f = pj.jet_at(c, x)
    w = pj.fractel_linear(f, s)
    m = f.degree
    assert np.allclose(w, np.triu(w), atol=1e-9)
    assert np.allclose(pj.fractel_eigenvalues(w), s ** np.arange(m + 1), atol=1e-9)
    assert np.allclose(np.sort(np.linalg.eigvals(w).real)[::-1], s ** np.arange(m + 1), atol=1e-7)


def test_fractel_square_at_zero():
    w = pj.fractel_linear(pj.jet_at([0, 0, 2], 0.0), 0.5)
    assert np.allclose(w, np.diag([0.25, 0.5, 1.0]))
    with pytest.raises(ValidationError):
        pj.fractel_linear(pj.jet_at([0, 0, 2], 0.0), 1.0)


@pytest.mark.parametrize("theta", [0.0, 0.3, 1.0])
def test_fractel_leaves_graph_invariant(theta):
    rng = np.random.default_rng(5)
    c = random_tight_poly(rng, 5)
    x = 0.4
    fr = pj.make_theta_fractel(pj.jet_at(c, x), x, 0.5, theta)
    for t in rng.uniform(0, 1, 10):
        t2, y = fr(t, pj.jet_at(c, t).values)
        assert t2 == pytest.approx(0.5 * t + 0.2)
        assert np.allclose(y, pj.jet_at(c, t2).values, atol=1e-9)


def test_theta_range():
    with pytest.raises(ThetaOutOfRange):
        pj.make_theta_fractel(pj.jet_at([1, 1], 0), 0, 0.5, 1.5)


def test_damping_contracts_top_eigenvalue():
    fr = pj.make_theta_fractel(pj.jet_at([0, 1, 3], 0.2), 0.2, 0.5, 0.5)
    assert np.max(np.abs(np.linalg.eigvals(fr.linear))) == pytest.approx(0.5)


def test_dyadic_digits():
    assert pj.dyadic_digits(0.6875, 4) == [1, 0, 1, 1]
    with pytest.raises(NonDyadicPoint):
        pj.dyadic_digits(0.1, 12)
    with pytest.raises(NonDyadicPoint):
        pj.dyadic_digits(1.0, 4)


def test_reconstruction_random_points():
    rng = np.random.default_rng(6)
    for _ in range(20):
        c = random_tight_poly(rng)
        x = int(rng.integers(0, 4096)) / 4096
        got = pj.poly_ifs_reconstruct(c, x, 12).values
        want = poly_derivative_jet(c, x)
        assert np.max(np.abs(got[: len(want)] - want)) <= 1e-8


def test_pair_needs_half():
    with pytest.raises(ValidationError):
        pj.poly_ifs_pair([1, 1], s=0.3)


def test_jet_trace_csv(tmp_path):
    pj.write_jet_trace(tmp_path / "j.csv", [0.0, 0.5], [pj.jet_at([1, 2], 0.0), pj.jet_at([3], 0.5)])
    lines = (tmp_path / "j.csv").read_text().splitlines()
    assert lines[0] == "x,f0,f1" and lines[2] == "0.5,3,0"
