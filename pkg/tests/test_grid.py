import numpy as np
import oracles
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maxcomm import (
    Cube,
    CubeFamily,
    CubeOutOfBoundsError,
    Exponents,
    Grid,
    GridFunction,
    PrefixTable,
    cube_mean,
    cube_min,
    enumerate_cubes,
    indicator,
    load_grid_function,
    restrict,
    save_grid_function,
    unit_grid,
    weighted_measure,
)
from maxcomm.grid import count_all_cubes, from_json, to_json
from maxcomm.weights import Weight, power_weight, uniform_weight


def gf(values, spacing=1.0):
    values = np.asarray(values, dtype=float)
    return GridFunction(Grid(values.ndim, values.shape, spacing), values)


@pytest.mark.parametrize("shape, mode, count", [
    ((4,), "all", 10),
    ((3, 3), "all", 14),
    ((8,), "dyadic", 15),
])
def test_family_counts(shape, mode, count):
    family = CubeFamily(Grid(len(shape), shape), mode)
    assert len(family) == count
    assert len(enumerate_cubes(family)) == count


@pytest.mark.parametrize("shape", [(1 + 1,), (5,), (9,), (2, 3), (4, 4), (5, 3)])
def test_enumeration_matches_oracle(shape):
    grid = Grid(len(shape), shape)
    got = [(c.anchor, c.side) for c in enumerate_cubes(CubeFamily(grid, "all"))]
    assert got == oracles.cubes(shape)
    assert count_all_cubes(shape) == len(got)
    dyadic = [(c.anchor, c.side) for c in enumerate_cubes(CubeFamily(grid, "dyadic"))]
    assert dyadic == oracles.dyadic_cubes(shape)


def test_sampled_family_is_seeded_subset():
    grid = Grid(2, (6, 6))
    a = enumerate_cubes(CubeFamily(grid, "sampled", k=20, seed=3))
    b = enumerate_cubes(CubeFamily(grid, "sampled", k=20, seed=3))
    assert a == b and len(a) == 20
    everything = set(enumerate_cubes(CubeFamily(grid, "all")))
    assert set(a) <= everything
    with pytest.raises(ValueError):
        CubeFamily(grid, "sampled", k=10**6, seed=0)
    with pytest.raises(ValueError):
        CubeFamily(grid, "sampled")


def test_family_mode_and_grid_validation():
    with pytest.raises(ValueError):
        CubeFamily(Grid(1, (4,)), "random")
    with pytest.raises(ValueError):
        Grid(3, (2, 2, 2))
    with pytest.raises(ValueError):
        Grid(1, (1,))
    with pytest.raises(ValueError):
        Grid(1, (4,), spacing=0.0)


def test_cube_mean_examples():
    f = gf([1, 2, 3, 4])
    assert cube_mean(f, Cube((0,), 4)) == 2.5
    assert cube_mean(f, Cube((1,), 2)) == 2.5
    c = gf(np.full((3, 3), 0.7))
    for cube in CubeFamily(c.grid):
        assert cube_mean(c, cube) == pytest.approx(0.7, abs=1e-15)


def test_cube_min_examples():
    assert cube_min(gf([3, 1, 2]), Cube((0,), 3)) == 1
    assert cube_min(gf([5.5] * 4), Cube((1,), 2)) == 5.5


def test_out_of_domain_cube_rejected():
    f = gf([1, 2, 3, 4])
    with pytest.raises(CubeOutOfBoundsError):
        cube_mean(f, Cube((2,), 3))
    with pytest.raises(CubeOutOfBoundsError):
        cube_min(f, Cube((-1,), 2))


def test_weighted_measure_examples():
    grid = Grid(1, (8,))
    assert weighted_measure(uniform_weight(grid), Cube((2,), 3)) == 3.0
    half = Grid(1, (8,), spacing=0.5)
    assert weighted_measure(uniform_weight(half), Cube((0,), 4)) == 2.0
    w = power_weight(unit_grid(2, 7), [0.4, 0.6], 0.5, 0.05)
    for cube in CubeFamily(w.grid):
        direct = sum(w.values[p] for p in oracles.points(cube.anchor, cube.side))
        assert weighted_measure(w, cube) == pytest.approx(direct * w.grid.cell_volume, rel=1e-13)


def test_indicator_and_restrict():
    grid = Grid(1, (6,))
    ind = indicator(grid, Cube((0,), 3))
    assert ind.values.tolist() == [1, 1, 1, 0, 0, 0]
    ones = GridFunction(grid, np.ones(6))
    assert np.array_equal(restrict(ones, Cube((0,), 3)).values, ind.values)
    f = gf(np.arange(16.0).reshape(4, 4))
    r = restrict(f, Cube((1, 2), 2))
    assert np.array_equal(r.values, oracles.restrict(f.values, (1, 2), 2))


@given(arrays(np.float64, st.integers(2, 12), elements=st.floats(-1e3, 1e3)))
def test_prefix_sums_1d(values):
    table = PrefixTable(values)
    for anchor, side in oracles.cubes(values.shape):
        direct = sum(values[p] for p in oracles.points(anchor, side))
        assert table.box_sum(Cube(anchor, side)) == pytest.approx(direct, rel=1e-12, abs=1e-9)


@given(arrays(np.float64, st.tuples(st.integers(2, 6), st.integers(2, 6)),
              elements=st.floats(-1e3, 1e3)))
def test_prefix_sums_2d(values):
    table = PrefixTable(values)
    for anchor, side in oracles.cubes(values.shape):
        direct = sum(values[p] for p in oracles.points(anchor, side))
        assert table.box_sum(Cube(anchor, side)) == pytest.approx(direct, rel=1e-12, abs=1e-9)
        windows = table.window_sums(side)
        assert windows[anchor] == pytest.approx(direct, rel=1e-12, abs=1e-9)


def test_cube_geometry():
    q = Cube((1, 1), 3)
    assert q.n_points == 9
    assert q.measure(0.5) == 0.25 * 9
    assert q.contains((3, 1)) and not q.contains((4, 1))
    assert q.contains_cube(Cube((2, 2), 2)) and not q.contains_cube(Cube((2, 2), 3))
    assert q.fits((4, 4)) and not q.fits((3, 4))
    assert len(list(q.points())) == 9


@pytest.mark.parametrize("suffix", [".json", ".csv"])
@pytest.mark.parametrize("shape", [(7,), (3, 5)])
def test_grid_file_round_trip(tmp_path, suffix, shape):
    rng = np.random.default_rng(1)
    spacing = 0.25
    f = GridFunction(Grid(len(shape), shape, spacing), rng.standard_normal(shape))
    path = tmp_path / f"f{suffix}"
    save_grid_function(f, path)
    g = load_grid_function(path, spacing=spacing, dim=len(shape))
    assert np.array_equal(f.values, g.values)
    assert g.grid.shape == f.grid.shape and g.grid.spacing == spacing


def test_json_dict_round_trip():
    f = gf(np.linspace(0, 1, 9).reshape(3, 3), spacing=0.125)
    g = from_json(to_json(f))
    assert np.array_equal(f.values, g.values)
    assert g.grid == f.grid


def test_grid_function_rejects_bad_values():
    with pytest.raises(ValueError):
        GridFunction(Grid(1, (3,)), [1.0, np.nan, 2.0])
    with pytest.raises(ValueError):
        GridFunction(Grid(1, (3,)), [1.0, 2.0])


def test_weight_requires_positive_values():
    grid = Grid(1, (3,))
    with pytest.raises(ValueError):
        Weight(GridFunction(grid, [1.0, 0.0, 1.0]))


def test_exponents_validation():
    e = Exponents(2.0, 0.25, 1)
    assert e.q == pytest.approx(4.0)
    assert Exponents(2.0, 0.5, 2).q == pytest.approx(4.0)
    for bad in [(1.0, 0.25, 1), (2.0, 0.0, 1), (2.0, 1.0, 1), (4.0, 0.25, 1), (2.0, 0.25, 3)]:
        with pytest.raises(ValueError):
            Exponents(*bad)
    with pytest.raises(ValueError):
        Exponents(2.0, 0.25, 1, r=2.0)
    with pytest.raises(ValueError):
        Exponents(2.0, 0.25, 1, s=0.5)
