import numpy as np
import pytest

from lifs import rb, subdiv
from lifs.errors import IncompatibleBoundary, ValidationError
from lifs.local_ifs import binary_ifs
from lifs.subdiv import RefinementLevel

from oracles import random_binary_spec


def test_level_shape():
    lev = RefinementLevel(2, [1, 2, 3, 4])
    assert lev.mesh.tolist() == [0, 0.25, 0.5, 0.75]
    assert lev.coarse().tolist() == [1, 3]
    with pytest.raises(ValidationError):
        RefinementLevel(2, [1, 2, 3])


def test_compatibility_check():
    bad = rb.constant_spec(binary_ifs(), [0.0, 1.0], [0.5, 0.5])
    with pytest.raises(IncompatibleBoundary):
        subdiv.subdivide(*subdiv.v_maps(bad))
    # v_1(1, y) = v_2(0, y) for every y
    spec = subdiv.random_compatible_spec(0)
    v1, v2 = subdiv.v_maps(spec)
    y = np.linspace(-3, 3, 7)
    assert np.allclose(v1(np.ones(7), y), v2(np.zeros(7), y), atol=1e-15)


def test_seed_is_value_at_zero():
    spec = rb.constant_spec(binary_ifs(), [0.3, 0.3], [0.4, 0.4])
    assert subdiv.fixed_point_seed(subdiv.v_maps(spec)[0]).values[0] == pytest.approx(0.5)


def test_seed_nonlinear_fallback():
    seed = subdiv.fixed_point_seed(lambda x, y: np.cos(y))
    assert seed.values[0] == pytest.approx(np.cos(seed.values[0]), abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_matches_rb_fixed_point(seed):
    spec = subdiv.random_compatible_spec(seed)
    levels = subdiv.subdivide(*subdiv.v_maps(spec), levels=12)
    fs = rb.solve(spec, rb.make_admissible_grid(spec.ifs, 4096)).f_star
    assert np.max(np.abs(levels[-1].values - fs.values)) <= 1e-8
    limit = subdiv.subdivision_limit(*subdiv.v_maps(spec))
    assert np.array_equal(limit.values, levels[-1].values)


def test_exact_seed_makes_levels_nested():
    spec = subdiv.random_compatible_spec(3)
    hist = subdiv.subdivide(*subdiv.v_maps(spec), levels=8)
    assert np.max(subdiv.cauchy_differences(hist)) <= 1e-14


def test_wrong_seed_converges_geometrically():
    spec = subdiv.random_compatible_spec(4, s_bound=0.6)
    hist = subdiv.subdivide(*subdiv.v_maps(spec), seed=RefinementLevel(0, [5.0]), levels=14)
    d = subdiv.cauchy_differences(hist)
    assert d[-1] < 1e-2 * d[0]
    assert np.all(d[1:] <= 0.6 * d[:-1] + 1e-14)


def test_distinct_constant_maps_incompatible():
    rng = np.random.default_rng(7)
    for _ in range(5):
        spec = random_binary_spec(rng)
        lam = [f.c for f in spec.lambdas]
        s = [f.c for f in spec.scalings]
        # compatibility for constants: λ_1 + S_1 y = λ_2 + S_2 y for all y needs equal maps
        if lam[0] != lam[1] or s[0] != s[1]:
            with pytest.raises(IncompatibleBoundary):
                subdiv.check_compatible(*subdiv.v_maps(spec))


def test_seed_must_be_level_zero():
    spec = subdiv.random_compatible_spec(1)
    with pytest.raises(ValidationError):
        subdiv.subdivide(*subdiv.v_maps(spec), seed=RefinementLevel(1, [0, 0]))


def test_write_levels(tmp_path):
    spec = subdiv.random_compatible_spec(2)
    hist = subdiv.subdivide(*subdiv.v_maps(spec), levels=2)
    subdiv.write_levels(tmp_path / "l.csv", hist)
    lines = (tmp_path / "l.csv").read_text().splitlines()
    assert lines[0] == "level,x,value" and len(lines) == 1 + 1 + 2 + 4
    assert lines[3].startswith("1,0.5,")
