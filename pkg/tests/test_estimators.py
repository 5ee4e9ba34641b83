import numpy as np
import oracles
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from maxcomm import (
    A1ConstantEstimator,
    CommutatorOperator,
    CubeFamily,
    Grid,
    GridFunction,
    LipschitzNormEstimator,
    MaximalOperator,
    lip_norm,
    uniform_weight,
)


def test_maximal_operator_transform_matches_oracle():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((4, 5))
    est = MaximalOperator().fit(x)
    assert est.n_cubes_ == 20 + 12 + 6 + 2
    assert np.allclose(est.transform(x), oracles.hl(x), rtol=1e-12)
    sharp = MaximalOperator(kind="sharp", method="brute").fit(x)
    assert np.allclose(sharp.transform(x), oracles.sharp(x), rtol=1e-12)
    assert np.allclose(MaximalOperator().fit_transform(x), est.transform(x))


def test_estimators_clone_and_params():
    est = LipschitzNormEstimator(beta=0.5, p=2.0, functional="maximal", s=2.0)
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    twin.set_params(beta=0.25)
    assert est.beta == 0.5 and twin.beta == 0.25


def test_not_fitted_and_shape_errors():
    with pytest.raises(NotFittedError):
        MaximalOperator().transform(np.ones(4))
    est = MaximalOperator().fit(np.ones(4))
    with pytest.raises(ValueError):
        est.transform(np.ones(5))
    with pytest.raises(ValueError):
        MaximalOperator(kind="other").fit(np.ones(4))
    with pytest.raises(ValueError):
        MaximalOperator(family="odd").fit(np.ones(4))
    with pytest.raises(ValueError):
        MaximalOperator().fit(np.ones((2, 2, 2)))


@pytest.mark.parametrize("kind", ["Mb", "bM", "bMsharp"])
def test_commutator_operator(kind):
    rng = np.random.default_rng(1)
    b = rng.random(7)
    f = rng.standard_normal(7)
    est = CommutatorOperator(kind=kind).fit(b)
    out = est.transform(f)
    if kind == "Mb":
        assert np.allclose(out, oracles.mb(b, f), rtol=1e-12)
    elif kind == "bM":
        assert np.allclose(out, b * oracles.hl(f) - oracles.hl(b * f), rtol=1e-12, atol=1e-12)
    else:
        assert np.allclose(out, b * oracles.sharp(f) - oracles.sharp(b * f), rtol=1e-12,
                           atol=1e-12)


def test_lipschitz_estimator_matches_function():
    b = np.linspace(0, 1, 9) ** 2
    est = LipschitzNormEstimator(beta=0.5, p=1.0, spacing=0.125).fit(b)
    grid = Grid(1, (9,), 0.125)
    expected = lip_norm(GridFunction(grid, b), uniform_weight(grid), 0.5, 1, CubeFamily(grid))
    assert est.norm_ == expected.value and est.witness_ == expected.witness
    assert est.predict(2 * b) == pytest.approx(2 * est.norm_, rel=1e-12)
    assert est.score(b) == -est.norm_
    for functional in ("maximal", "sharp"):
        other = LipschitzNormEstimator(beta=0.5, functional=functional, s=2.0).fit(b)
        assert other.norm_ >= 0 and len(other.profile_.values) == 45
    with pytest.raises(ValueError):
        LipschitzNormEstimator(functional="x").fit(b)


def test_lipschitz_estimator_weight_and_sampled_family():
    b = np.arange(12.0).reshape(3, 4)
    w = np.linspace(1, 2, 12).reshape(3, 4)
    est = LipschitzNormEstimator(beta=0.5, weight=w, family="sampled", k=5, seed=2).fit(b)
    assert est.n_cubes_ == 5 and len(est.profile_.values) == 5
    with pytest.raises(ValueError):
        LipschitzNormEstimator(weight=np.ones(3)).fit(b)


def test_a1_estimator():
    w = np.array([1.0, 2.0])
    est = A1ConstantEstimator().fit(w)
    assert est.constant_ == 1.5 and est.pointwise_ == 1.5
    assert np.allclose(est.predict(w), [1.5, 1.0])
    with pytest.raises(ValueError):
        A1ConstantEstimator().fit(np.array([1.0, 0.0]))
