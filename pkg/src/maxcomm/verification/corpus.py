"""Seeded test corpora of functions f, symbols b and weights w.

Members are continuum profiles on the grid's box (rescaled to [0, 1]^n), so
the same seed sampled on a finer grid gives the same functions at higher
resolution.  The one exception is the white-noise field, which is drawn per
lattice point and flagged ``continuum=False``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..grid import CubeFamily, Grid, GridFunction
from ..weights import Weight, coifman_rochberg_weight, power_weight, uniform_weight

DEFAULT_SIZES = (8, 6, 4)


@dataclass(frozen=True, eq=False)
class Member:
    name: str
    function: GridFunction
    nonnegative: bool
    continuum: bool = True
    lipschitz: bool = True

    @property
    def values(self) -> np.ndarray:
        return self.function.values


@dataclass(eq=False)
class Corpus:
    seed: int
    grid: Grid
    functions: list = field(default_factory=list)
    symbols: list = field(default_factory=list)
    weights: list = field(default_factory=list)

    def nonnegative_symbols(self) -> list:
        return [m for m in self.symbols if m.nonnegative]

    def controls(self) -> list:
        return [m for m in self.symbols if not m.nonnegative]

    def lipschitz_symbols(self) -> list:
        return [m for m in self.symbols if m.lipschitz]

    def continuum_functions(self) -> list:
        return [m for m in self.functions if m.continuum]

    def names(self) -> dict:
        return {
            "functions": [m.name for m in self.functions],
            "symbols": [m.name for m in self.symbols],
            "weights": [w.generator + _weight_tag(w) for w in self.weights],
        }


def _weight_tag(w: Weight) -> str:
    if w.generator == "power":
        return f"(a={w.params['a']})"
    if w.generator == "coifman_rochberg":
        return f"({w.params.get('source', '')},delta={w.params['delta']})"
    return ""


def _unit(grid: Grid) -> np.ndarray:
    coords = grid.coordinates()
    length = grid.spacing * (np.array(grid.shape) - 1)
    return (coords - grid.origin) / length


def _sup_dist(u, c):
    return np.abs(u - c).max(axis=-1)


def _eucl(u, c):
    return np.linalg.norm(u - c, axis=-1)


def build_corpus(seed: int, grid: Grid, sizes=DEFAULT_SIZES, epsilon: float = 0.02,
                 delta: float = 0.5) -> Corpus:
    """Deterministic corpus for ``grid``.

    ``sizes`` truncates the (functions, symbols, weights) lists; at most 8, 6
    and 5 are available.  ``epsilon`` regularizes power weights as a fraction
    of the box side.
    """
    rng = np.random.default_rng(seed)
    d = grid.dim
    u = _unit(grid)
    h_unit = 1.0 / (np.array(grid.shape).min() - 1)

    # draw every random parameter up front so the corpus does not depend on sizes
    centers = rng.uniform(0.25, 0.75, size=(2, d))
    halves = rng.uniform(0.08, 0.22, size=2)
    bump_c = rng.uniform(0.35, 0.65, size=d)
    amps = rng.uniform(-1, 1, size=(3, d))
    phases = rng.uniform(0, 2 * np.pi, size=(3, d))
    noise = rng.random(grid.shape)
    holder_c = rng.uniform(0.3, 0.7, size=d)

    def gf(values):
        return GridFunction(grid, values)

    # an indicator must contain at least the lattice point nearest its centre
    halves = np.maximum(halves, h_unit / 2)

    trig = np.zeros(grid.shape)
    for k in range(3):
        for ax in range(d):
            trig += amps[k, ax] * np.cos(2 * np.pi * (k + 1) * u[..., ax] + phases[k, ax])
    trig = 1.2 + trig / np.abs(amps).sum()
    bump = np.exp(-(_eucl(u, bump_c) ** 2) / (2 * 0.15**2))

    functions = [
        Member("indicator_0", gf((_sup_dist(u, centers[0]) <= halves[0]).astype(float)), True),
        Member("indicator_1", gf((_sup_dist(u, centers[1]) <= halves[1]).astype(float)), True),
        Member("ramp", gf(u.mean(axis=-1)), True),
        Member("bump", gf(bump), True),
        Member("random_smooth", gf(trig), True),
        Member("oscillatory", gf(np.sin(6 * np.pi * u[..., 0])), False),
        Member("white_noise", gf(noise), True, continuum=False),
        Member("constant", gf(np.ones(grid.shape)), True),
    ]

    log_c = np.full(d, 0.5)
    dist = np.maximum(_eucl(u, log_c), h_unit / 2)
    symbols = [
        Member("bump_shifted", gf(0.5 + bump), True),
        Member("ramp", gf(u.mean(axis=-1)), True),
        Member("holder_0.3", gf(_eucl(u, holder_c) ** 0.3), True),
        Member("holder_0.7", gf(_eucl(u, holder_c) ** 0.7), True),
        Member("log_control", gf(np.log(2.0 / dist)), True, lipschitz=False),
        Member("signed_cos", gf(np.cos(2 * np.pi * u[..., 0])), False),
    ]

    full = CubeFamily(grid, "all")
    length = grid.spacing * (min(grid.shape) - 1)
    center = grid.origin + 0.5 * length
    weights = [
        uniform_weight(grid),
        power_weight(grid, center, 0.25, epsilon * length),
        power_weight(grid, center, 0.5, epsilon * length),
    ]
    for src, dl in (("indicator_0", delta), ("bump", 0.3)):
        f = next(m.function for m in functions if m.name == src)
        w = coifman_rochberg_weight(f, dl, full)
        w.params["source"] = src
        weights.append(w)

    nf, nb, nw = sizes
    return Corpus(seed, grid, functions[:nf], symbols[:nb], weights[:nw])
