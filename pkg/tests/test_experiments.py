import numpy as np
import pytest

from maxcomm import Exponents, unit_grid
from maxcomm.verification import (
    Profile,
    build_corpus,
    default_profiles,
    empirical_constants,
    refinement_experiment,
)
from maxcomm.verification.experiments import (
    _centered_cube,
    control_lip_norms,
    level_grid,
    loglog_slope,
)


def test_loglog_slope_recovers_power():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert loglog_slope(x, 3 * x**0.25) == pytest.approx(0.25, rel=1e-12)


def test_level_grids_nest():
    coarse, fine = level_grid(1, 8, 0), level_grid(1, 8, 1)
    assert coarse.shape == (9,) and fine.shape == (17,)
    assert np.allclose(fine.coordinates()[::2], coarse.coordinates())
    assert fine.coordinates()[0, 0] == -1.0 and fine.coordinates()[-1, 0] == 1.0


def test_centered_cube_checks_lattice_and_domain():
    grid = level_grid(1, 8, 0)
    q = _centered_cube(grid, (0.25,), 3)
    assert q.anchor == (4,) and q.side == 3
    with pytest.raises(ValueError):
        _centered_cube(grid, (0.3,), 3)
    with pytest.raises(ValueError):
        _centered_cube(grid, (-1.0,), 3)


def test_refinement_nonnegative_profile_has_zero_lhs():
    res = refinement_experiment([default_profiles(1)[0]], levels=2, n0=8)
    assert all(r["lhs_neg_mean"] == 0 for r in res.rows)
    assert res.checks["affine: lhs vanishes"]
    assert res.checks["affine: rhs decreases"]


def test_refinement_signed_control_tracks_negative_part():
    prof = Profile("signed_linear", lambda x: x[..., 0], (-0.5,), False)
    res = refinement_experiment([prof], levels=3, n0=16)
    info = res.summary["signed_linear"]
    assert info["b_minus_x0"] == 0.5
    assert info["lhs_neg_finest"] == pytest.approx(0.5, rel=1e-12)
    assert res.passed


def test_refinement_in_two_dimensions():
    res = refinement_experiment(levels=2, n0=8, dim=2, m=3)
    assert {r["profile"] for r in res.rows} == {"affine", "bump", "signed_linear"}
    assert all(r["N"] in (9, 17) for r in res.rows)


def test_refinement_argument_checks():
    with pytest.raises(ValueError):
        refinement_experiment(levels=1)
    with pytest.raises(ValueError):
        refinement_experiment(levels=2, n0=8, m=4)


def test_empirical_constants_and_controls():
    corpus = build_corpus(0, unit_grid(1, 16))
    consts = empirical_constants(corpus, Exponents(2.0, 0.25, 1))
    assert {"lemma22", "lemma24", "lemma25_first", "lemma25_second"} <= set(consts)
    assert any(k.startswith("Mb_over_lip/") for k in consts)
    assert all(np.isfinite(v) and v >= 0 for v in consts.values())
    controls = control_lip_norms(corpus, 0.25)
    assert list(controls) == ["log_control"] and controls["log_control"] > 0
