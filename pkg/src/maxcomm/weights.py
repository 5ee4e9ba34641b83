"""Muckenhoupt weights: A_1 / A_p constants, doubling ratios, test-weight generators.

Constants computed over a finite cube family are lower bounds of the
continuum constants; callers report them as such.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .grid import (
    Cube,
    CubeFamily,
    CubeOutOfBoundsError,
    Grid,
    GridFunction,
    PrefixTable,
    check_cube,
)
from .operators import _windows, hl_maximal


class Weight:
    """Strictly positive grid function with cached prefix tables of its powers."""

    def __init__(self, base: GridFunction, generator: str = "custom", params: dict | None = None):
        if not isinstance(base, GridFunction):
            raise TypeError("Weight wraps a GridFunction")
        if not np.all(base.values > 0):
            raise ValueError("weights must be strictly positive")
        self.base = base
        self.generator = generator
        self.params = dict(params or {})
        self._powers: dict[float, PrefixTable] = {}

    @property
    def grid(self) -> Grid:
        return self.base.grid

    @property
    def values(self) -> np.ndarray:
        return self.base.values

    @cached_property
    def prefix(self) -> PrefixTable:
        return self.base.prefix

    def power_table(self, t: float) -> PrefixTable:
        """Prefix table of ``w**t``, built on first request."""
        t = float(t)
        if t == 1.0:
            return self.prefix
        if t not in self._powers:
            self._powers[t] = PrefixTable(self.values**t)
        return self._powers[t]

    def measure(self, cube: Cube) -> float:
        check_cube(cube, self.grid)
        return self.prefix.box_sum(cube) * self.grid.cell_volume

    def measures(self, side: int) -> np.ndarray:
        """w(Q) for every in-domain cube of ``side``, indexed by anchor."""
        return self.prefix.window_sums(side) * self.grid.cell_volume

    def power(self, t: float) -> GridFunction:
        return self.base.with_values(self.values**t)

    def metadata(self, a1_lower_bound: float | None = None) -> dict:
        return {
            "generator": self.generator,
            "params": self.params,
            "a1_constant_lowerbound": a1_lower_bound,
        }

    def __repr__(self):
        return f"Weight({self.generator}, {self.params}, shape={self.grid.shape})"


def as_weight(mu) -> Weight:
    if isinstance(mu, Weight):
        return mu
    return Weight(mu)


def uniform_weight(grid: Grid) -> Weight:
    return Weight(GridFunction(grid, np.ones(grid.shape)), "uniform", {})


def _window_min(values: np.ndarray, side: int) -> np.ndarray:
    return _windows(values, side).min(axis=tuple(range(values.ndim, 2 * values.ndim)))


def a1_profile(w: Weight, family: CubeFamily):
    """Per-side arrays of mean_Q(w) / min_Q(w) (masked cubes set to -inf)."""
    d = w.grid.dim
    out = {}
    for side, mask in family.masks.items():
        ratio = w.prefix.window_sums(side) / side**d / _window_min(w.values, side)
        out[side] = np.where(mask, ratio, -np.inf)
    return out


def a1_constant(w: Weight, family: CubeFamily, check_pointwise: bool = False) -> float:
    """max over the family of mean_Q(w) / min_Q(w).

    With ``check_pointwise`` the pointwise form max_x M(w)(x)/w(x) is computed
    as well and a ``ValueError`` is raised if the two disagree beyond 1e-12.
    """
    value = max(float(r.max()) for r in a1_profile(w, family).values())
    if check_pointwise:
        other = a1_constant_pointwise(w, family)
        if abs(value - other) > 1e-12 * value:
            raise ValueError(f"A_1 forms disagree: {value!r} vs {other!r}")
    return value


def a1_constant_pointwise(w: Weight, family: CubeFamily) -> float:
    mw = hl_maximal(w.base, family).array
    return float(np.max(mw / w.values))


def ap_constant(w: Weight, p: float, family: CubeFamily) -> float:
    """sup_Q mean_Q(w) * mean_Q(w^{-1/(p-1)})^{p-1}."""
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    d = w.grid.dim
    dual = w.power_table(-1.0 / (p - 1.0))
    best = -np.inf
    for side, mask in family.masks.items():
        n = side**d
        vals = (w.prefix.window_sums(side) / n) * (dual.window_sums(side) / n) ** (p - 1.0)
        best = max(best, float(vals[mask].max()))
    return best


def power_weight(grid: Grid, center, a: float, epsilon: float) -> Weight:
    """w(x) = (|x - center| + epsilon)^(-a), the regularized A_1 power weight."""
    if not 0 <= a < grid.dim:
        raise ValueError(f"a must lie in [0, {grid.dim}), got {a}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    dist = np.linalg.norm(grid.coordinates() - center, axis=-1)
    values = np.ones(grid.shape) if a == 0 else (dist + epsilon) ** (-a)
    return Weight(GridFunction(grid, values), "power",
                  {"center": center.tolist(), "a": a, "epsilon": epsilon})


def coifman_rochberg_weight(f: GridFunction, delta: float, family: CubeFamily) -> Weight:
    """(M|f| + floor)^delta with floor = 1e-9 max|f|; an A_1 weight for 0 < delta < 1."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    top = float(np.max(np.abs(f.values)))
    if top == 0:
        raise ValueError("Coifman-Rochberg weight needs f not identically zero")
    mf = hl_maximal(f, family).array
    values = (mf + 1e-9 * top) ** delta
    return Weight(f.with_values(values), "coifman_rochberg", {"delta": delta})


def tripled(cube: Cube) -> Cube:
    return Cube(tuple(a - cube.side for a in cube.anchor), 3 * cube.side)


def doubling_ratio(w: Weight, cube: Cube) -> float:
    """w(3Q) / w(Q) for the concentric tripled cube, which must fit the domain."""
    check_cube(cube, w.grid)
    big = tripled(cube)
    if not big.fits(w.grid.shape):
        raise CubeOutOfBoundsError(f"dilate {big} of {cube} leaves the domain")
    return w.measure(big) / w.measure(cube)


def interior_cubes(family: CubeFamily):
    """Members whose tripled dilate still fits the domain."""
    shape = family.grid.shape
    return [c for c in family if tripled(c).fits(shape)]


def doubling_violations(w: Weight, family: CubeFamily, a1: float | None = None):
    """Cubes where w(3Q)/w(Q) exceeds 3^n [w]_{A_1} (1 + 1e-9)."""
    if a1 is None:
        a1 = a1_constant(w, family)
    bound = 3**w.grid.dim * a1 * (1 + 1e-9)
    bad = []
    for cube in interior_cubes(family):
        ratio = doubling_ratio(w, cube)
        if ratio > bound:
            bad.append((cube, ratio, bound))
    return bad


__all__ = [
    "Weight",
    "a1_constant",
    "a1_constant_pointwise",
    "a1_profile",
    "ap_constant",
    "as_weight",
    "coifman_rochberg_weight",
    "doubling_ratio",
    "doubling_violations",
    "interior_cubes",
    "power_weight",
    "tripled",
    "uniform_weight",
]
