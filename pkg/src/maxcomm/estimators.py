"""scikit-learn style wrappers around the operators and functionals.

Estimators take plain arrays (one grid function per call, 1D or 2D) and keep
their configuration in constructor parameters, so ``get_params`` /
``set_params`` / ``clone`` work as usual.  ``fit`` fixes the lattice and cube
family from the training array; later arrays must have the same shape.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import (
    check_family_mode,
    check_grid_array,
    check_grid_function,
    check_same_shape,
)
from .grid import CubeFamily, GridFunction
from .lipschitz import lip_profile, maximal_char_functional, sharp_char_functional
from .operators import (
    commutator_maximal,
    commutator_sharp,
    hl_maximal,
    maximal_commutator,
    sharp_maximal,
)
from .weights import Weight, a1_constant, a1_constant_pointwise, uniform_weight


class _GridEstimator(BaseEstimator):
    def _fit_grid(self, X):
        check_family_mode(self.family)
        f = check_grid_function(check_grid_array(X), self.spacing)
        self.grid_ = f.grid
        self.family_ = CubeFamily(f.grid, self.family, k=self.k, seed=self.seed) \
            if self.family == "sampled" else CubeFamily(f.grid, self.family)
        self.n_cubes_ = len(self.family_)
        return f

    def _as_function(self, X) -> GridFunction:
        check_is_fitted(self, "grid_")
        arr = check_grid_array(X)
        if arr.shape != self.grid_.shape:
            raise ValueError(f"fitted on shape {self.grid_.shape}, got {arr.shape}")
        return GridFunction(self.grid_, arr)


class MaximalOperator(TransformerMixin, _GridEstimator):
    """Hardy-Littlewood (``kind="hl"``) or sharp (``kind="sharp"``) maximal function."""

    def __init__(self, kind="hl", family="all", k=None, seed=0, spacing=1.0, method="fast"):
        self.kind = kind
        self.family = family
        self.k = k
        self.seed = seed
        self.spacing = spacing
        self.method = method

    def fit(self, X, y=None):
        if self.kind not in ("hl", "sharp"):
            raise ValueError(f"kind must be 'hl' or 'sharp', got {self.kind!r}")
        self._fit_grid(X)
        return self

    def transform(self, X):
        f = self._as_function(X)
        op = hl_maximal if self.kind == "hl" else sharp_maximal
        return op(f, self.family_, self.method).array


class CommutatorOperator(TransformerMixin, _GridEstimator):
    """M_b, [b, M] or [b, M#] for the symbol b given to ``fit``."""

    KINDS = ("Mb", "bM", "bMsharp")

    def __init__(self, kind="Mb", family="all", k=None, seed=0, spacing=1.0):
        self.kind = kind
        self.family = family
        self.k = k
        self.seed = seed
        self.spacing = spacing

    def fit(self, X, y=None):
        """``X`` is the symbol b."""
        if self.kind not in self.KINDS:
            raise ValueError(f"kind must be one of {self.KINDS}, got {self.kind!r}")
        self.symbol_ = self._fit_grid(X)
        return self

    def transform(self, X):
        f = self._as_function(X)
        if self.kind == "Mb":
            return maximal_commutator(self.symbol_, f, self.family_).array
        if self.kind == "bM":
            return commutator_maximal(self.symbol_, f, self.family_).values
        return commutator_sharp(self.symbol_, f, self.family_).values


def _weight_from(weight, grid) -> Weight:
    if weight is None:
        return uniform_weight(grid)
    if isinstance(weight, Weight):
        return weight
    arr = check_grid_array(weight)
    check_same_shape(arr, np.empty(grid.shape), "weight and symbol")
    return Weight(GridFunction(grid, arr))


class LipschitzNormEstimator(_GridEstimator):
    """Weighted Lipschitz norm, or a characterizing functional, of a symbol.

    ``functional`` is ``"lip"`` (exponent ``p``), ``"maximal"`` or ``"sharp"``
    (exponent ``s``).  After ``fit``: ``norm_`` (the sup), ``witness_`` and
    ``profile_`` (per-cube values).
    """

    def __init__(self, beta=0.25, p=1.0, s=1.0, functional="lip", weight=None,
                 family="all", k=None, seed=0, spacing=1.0):
        self.beta = beta
        self.p = p
        self.s = s
        self.functional = functional
        self.weight = weight
        self.family = family
        self.k = k
        self.seed = seed
        self.spacing = spacing

    def _profile(self, b):
        mu = _weight_from(self.weight, self.grid_)
        if self.functional == "lip":
            return lip_profile(b, mu, self.beta, self.p, self.family_)
        if self.functional == "maximal":
            return maximal_char_functional(b, mu, self.beta, self.s, self.family_)
        if self.functional == "sharp":
            return sharp_char_functional(b, mu, self.beta, self.s, self.family_)
        raise ValueError(f"unknown functional {self.functional!r}")

    def fit(self, X, y=None):
        b = self._fit_grid(X)
        self.profile_ = self._profile(b)
        self.norm_ = self.profile_.sup
        self.witness_ = self.profile_.witness
        return self

    def predict(self, X):
        """The sup of the functional for another symbol on the fitted lattice."""
        return self._profile(self._as_function(X)).sup

    def score(self, X, y=None):
        return -self.predict(X)


class A1ConstantEstimator(_GridEstimator):
    """A_1 constant of a weight over the cube family.

    ``constant_`` is the cube form max mean_Q(w)/min_Q(w); ``pointwise_`` the
    form max M(w)/w.  ``predict`` returns the per-point ratio M(w)/w.
    """

    def __init__(self, family="all", k=None, seed=0, spacing=1.0):
        self.family = family
        self.k = k
        self.seed = seed
        self.spacing = spacing

    def fit(self, X, y=None):
        w = self._fit_grid(X)
        weight = Weight(w)
        self.constant_ = a1_constant(weight, self.family_)
        self.pointwise_ = a1_constant_pointwise(weight, self.family_)
        return self

    def predict(self, X):
        w = self._as_function(X)
        return hl_maximal(w, self.family_).array / Weight(w).values


__all__ = ["A1ConstantEstimator", "CommutatorOperator", "LipschitzNormEstimator", "MaximalOperator"]
