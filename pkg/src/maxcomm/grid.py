"""Lattice grids, grid functions, cubes, cube families and prefix tables.

A function on R^n is represented by its samples on a uniform lattice with
step ``h``.  Integrals become ``h**n``-scaled sums and cube averages become
plain means over the cube's lattice points, so scale-invariant identities
survive discretization unchanged.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np


class CubeOutOfBoundsError(ValueError):
    """Raised when a cube does not lie inside the grid domain."""


class CoverageError(ValueError):
    """Raised when a cube family leaves some lattice point uncovered."""


@dataclass(frozen=True)
class Grid:
    dim: int
    shape: tuple
    spacing: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        shape = tuple(int(n) for n in np.atleast_1d(self.shape))
        object.__setattr__(self, "shape", shape)
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if len(shape) != self.dim:
            raise ValueError(f"shape {shape} does not match dim {self.dim}")
        if any(n < 2 for n in shape):
            raise ValueError(f"every axis needs at least 2 points, got {shape}")
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise ValueError(f"spacing must be positive, got {self.spacing}")

    @property
    def n_points(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def coordinates(self) -> np.ndarray:
        """Physical coordinates, shape ``shape + (dim,)``."""
        axes = [self.origin + self.spacing * np.arange(n) for n in self.shape]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def points(self):
        return itertools.product(*(range(n) for n in self.shape))

    def sample(self, profile) -> GridFunction:
        """Evaluate a continuum ``profile(coords)`` on the lattice.

        ``profile`` receives an array of shape ``shape + (dim,)`` and must
        return an array of shape ``shape``.
        """
        return GridFunction(self, profile(self.coordinates()))


def unit_grid(dim: int, n: int) -> Grid:
    """Grid with ``n`` points per axis spanning ``[0, 1]**dim``."""
    return Grid(dim, (n,) * dim, 1.0 / (n - 1))


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError(f"values shape {values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @cached_property
    def prefix(self) -> PrefixTable:
        return PrefixTable(self.values)

    def with_values(self, values) -> GridFunction:
        return GridFunction(self.grid, values)

    def abs(self) -> GridFunction:
        return self.with_values(np.abs(self.values))

    def positive_part(self) -> GridFunction:
        return self.with_values(np.maximum(self.values, 0.0))

    def negative_part(self) -> GridFunction:
        return self.with_values(np.maximum(-self.values, 0.0))

    def __mul__(self, other):
        other = other.values if isinstance(other, GridFunction) else other
        return self.with_values(self.values * other)

    __rmul__ = __mul__

    def __add__(self, other):
        other = other.values if isinstance(other, GridFunction) else other
        return self.with_values(self.values + other)

    def __sub__(self, other):
        other = other.values if isinstance(other, GridFunction) else other
        return self.with_values(self.values - other)

    def total(self) -> float:
        """Integral of the function (``h**n``-scaled sum)."""
        return float(np.sum(self.values)) * self.grid.cell_volume


@dataclass(frozen=True, order=True)
class Cube:
    side: int
    anchor: tuple

    def __init__(self, anchor, side):
        object.__setattr__(self, "side", int(side))
        object.__setattr__(self, "anchor", tuple(int(a) for a in np.atleast_1d(anchor)))
        if self.side < 1:
            raise ValueError(f"cube side must be >= 1, got {side}")

    @property
    def dim(self) -> int:
        return len(self.anchor)

    @property
    def slices(self) -> tuple:
        return tuple(slice(a, a + self.side) for a in self.anchor)

    @property
    def n_points(self) -> int:
        return self.side**self.dim

    def measure(self, spacing: float) -> float:
        return (self.side * spacing) ** self.dim

    def contains(self, point) -> bool:
        return all(a <= x < a + self.side for a, x in zip(self.anchor, point))

    def contains_cube(self, other: Cube) -> bool:
        return all(
            a <= b and b + other.side <= a + self.side
            for a, b in zip(self.anchor, other.anchor)
        )

    def fits(self, shape) -> bool:
        return len(shape) == self.dim and all(
            a >= 0 and a + self.side <= n for a, n in zip(self.anchor, shape)
        )

    def points(self):
        return itertools.product(*(range(a, a + self.side) for a in self.anchor))

    def to_dict(self) -> dict:
        return {"anchor": list(self.anchor), "side": self.side}


def check_cube(cube: Cube, grid: Grid) -> None:
    if not cube.fits(grid.shape):
        raise CubeOutOfBoundsError(f"{cube} does not fit in grid of shape {grid.shape}")


def anchor_shape(shape, side: int) -> tuple:
    return tuple(n - side + 1 for n in shape)


def count_all_cubes(shape) -> int:
    """Closed-form number of in-domain cubes of every side."""
    return sum(
        int(np.prod([n - s + 1 for n in shape])) for s in range(1, min(shape) + 1)
    )


@dataclass(frozen=True, eq=False)
class CubeFamily:
    """A family of in-domain cubes, stored as one anchor mask per side.

    ``mode`` is ``"all"``, ``"dyadic"`` or ``"sampled"`` (``k`` cubes drawn
    without replacement from the all-family using ``seed``).
    """

    grid: Grid
    mode: str = "all"
    k: int | None = None
    seed: int | None = None
    masks: dict = field(init=False, repr=False)

    def __post_init__(self):
        shape = self.grid.shape
        sides = range(1, min(shape) + 1)
        if self.mode == "all":
            masks = {s: np.ones(anchor_shape(shape, s), dtype=bool) for s in sides}
        elif self.mode == "dyadic":
            masks = {}
            for s in sides:
                if s & (s - 1):
                    continue
                idx = np.meshgrid(*(np.arange(m) for m in anchor_shape(shape, s)), indexing="ij")
                masks[s] = np.logical_and.reduce([i % s == 0 for i in idx])
        elif self.mode == "sampled":
            masks = _sampled_masks(shape, self.k, self.seed)
        else:
            raise ValueError(f"unknown family mode {self.mode!r}")
        for m in masks.values():
            m.setflags(write=False)
        object.__setattr__(self, "masks", {s: m for s, m in masks.items() if m.any()})

    @classmethod
    def from_masks(cls, grid: Grid, masks: dict) -> CubeFamily:
        family = cls.__new__(cls)
        object.__setattr__(family, "grid", grid)
        object.__setattr__(family, "mode", "custom")
        object.__setattr__(family, "k", None)
        object.__setattr__(family, "seed", None)
        object.__setattr__(family, "masks", {s: m for s, m in masks.items() if m.any()})
        return family

    @property
    def sides(self) -> list:
        return sorted(self.masks)

    def anchors(self, side: int) -> np.ndarray:
        """Anchors of the given side in lexicographic order, shape ``(A, dim)``."""
        if side not in self.masks:
            return np.empty((0, self.grid.dim), dtype=int)
        return np.argwhere(self.masks[side])

    def __len__(self) -> int:
        return int(sum(m.sum() for m in self.masks.values()))

    def __iter__(self):
        return iter(enumerate_cubes(self))

    def __contains__(self, cube: Cube) -> bool:
        m = self.masks.get(cube.side)
        return m is not None and cube.fits(self.grid.shape) and bool(m[cube.anchor])

    def within(self, q0: Cube) -> dict:
        """Anchor masks of members contained in ``q0``, re-anchored to ``q0``."""
        check_cube(q0, self.grid)
        masks = {}
        for s, m in self.masks.items():
            if s > q0.side:
                continue
            sub = m[tuple(slice(a, a + q0.side - s + 1) for a in q0.anchor)]
            if sub.any():
                masks[s] = sub
        return masks

    def covered(self) -> np.ndarray:
        """Boolean array marking lattice points lying in at least one member."""
        out = np.zeros(self.grid.shape, dtype=bool)
        for s, m in self.masks.items():
            out |= _scatter_any(m, s, self.grid.shape)
        return out


def _scatter_any(mask: np.ndarray, side: int, shape) -> np.ndarray:
    out = np.zeros(shape, dtype=bool)
    for offset in itertools.product(range(side), repeat=len(shape)):
        sl = tuple(slice(o, o + m) for o, m in zip(offset, mask.shape))
        out[sl] |= mask
    return out


def _sampled_masks(shape, k, seed) -> dict:
    if k is None or k < 1:
        raise ValueError("sampled family needs k >= 1")
    sides = list(range(1, min(shape) + 1))
    counts = np.array([np.prod(anchor_shape(shape, s)) for s in sides])
    total = int(counts.sum())
    if k > total:
        raise ValueError(f"cannot sample {k} cubes from {total}")
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(total, size=k, replace=False))
    bounds = np.concatenate([[0], np.cumsum(counts)])
    masks = {}
    for i, s in enumerate(sides):
        local = picks[(picks >= bounds[i]) & (picks < bounds[i + 1])] - bounds[i]
        m = np.zeros(anchor_shape(shape, s), dtype=bool)
        m.flat[local] = True
        masks[s] = m
    return masks


def enumerate_cubes(family: CubeFamily) -> list:
    """Members ordered by side ascending, then anchor lexicographically."""
    return [Cube(a, s) for s in family.sides for a in family.anchors(s)]


class PrefixTable:
    """Summed-area table giving O(1) box sums over axis-aligned cubes.

    Accumulation runs in extended precision so box sums stay within
    ~1e-15 of direct summation on the grid sizes used here.
    """

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        self.shape = values.shape
        table = np.zeros(tuple(n + 1 for n in values.shape), dtype=np.longdouble)
        inner = values.astype(np.longdouble)
        for axis in range(values.ndim):
            inner = np.cumsum(inner, axis=axis)
        table[(slice(1, None),) * values.ndim] = inner
        self.table = table

    def box_sum(self, cube: Cube) -> float:
        if not cube.fits(self.shape):
            raise CubeOutOfBoundsError(f"{cube} outside table of shape {self.shape}")
        t = self.table
        s = cube.side
        if len(self.shape) == 1:
            (a,) = cube.anchor
            return float(t[a + s] - t[a])
        a, b = cube.anchor
        return float(t[a + s, b + s] - t[a, b + s] - t[a + s, b] + t[a, b])

    def range_sums(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Sums over boxes ``[lo, hi)`` given as integer arrays of shape ``(..., dim)``."""
        t = self.table
        lo = np.asarray(lo)
        hi = np.asarray(hi)
        if len(self.shape) == 1:
            return (t[hi[..., 0]] - t[lo[..., 0]]).astype(float)
        a0, a1, b0, b1 = lo[..., 0], lo[..., 1], hi[..., 0], hi[..., 1]
        return (t[b0, b1] - t[a0, b1] - t[b0, a1] + t[a0, a1]).astype(float)

    def window_sums(self, side: int) -> np.ndarray:
        """Box sums of every in-domain cube of ``side``, indexed by anchor."""
        t = self.table
        s = side
        if len(self.shape) == 1:
            return (t[s:] - t[:-s]).astype(float)
        out = t[s:, s:] - t[:-s, s:] - t[s:, :-s] + t[:-s, :-s]
        return out.astype(float)


def cube_sum(f: GridFunction, cube: Cube) -> float:
    check_cube(cube, f.grid)
    return f.prefix.box_sum(cube)


def cube_mean(f: GridFunction, cube: Cube, via: PrefixTable | None = None) -> float:
    check_cube(cube, f.grid)
    table = f.prefix if via is None else via
    return table.box_sum(cube) / cube.n_points


def cube_min(f: GridFunction, cube: Cube) -> float:
    check_cube(cube, f.grid)
    return float(f.values[cube.slices].min())


def weighted_measure(mu, cube: Cube) -> float:
    """mu(Q) = sum of mu over Q's points times ``h**n``; accepts a Weight or GridFunction."""
    check_cube(cube, mu.grid)
    return mu.prefix.box_sum(cube) * mu.grid.cell_volume


def restrict(f: GridFunction, cube: Cube) -> GridFunction:
    """f times the indicator of ``cube``."""
    check_cube(cube, f.grid)
    out = np.zeros(f.grid.shape)
    out[cube.slices] = f.values[cube.slices]
    return f.with_values(out)


def indicator(grid: Grid, cube: Cube) -> GridFunction:
    check_cube(cube, grid)
    out = np.zeros(grid.shape)
    out[cube.slices] = 1.0
    return GridFunction(grid, out)


def crop(f: GridFunction, cube: Cube) -> np.ndarray:
    check_cube(cube, f.grid)
    return f.values[cube.slices]


@dataclass(frozen=True)
class Exponents:
    """Exponent triple with ``1/q = 1/p - beta/n``."""

    p: float
    beta: float
    n: int
    r: float | None = None
    s: float | None = None

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.n not in (1, 2):
            raise ValueError(f"n must be 1 or 2, got {self.n}")
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if not self.p < self.n / self.beta:
            raise ValueError(f"need p < n/beta = {self.n / self.beta}, got p={self.p}")
        if self.r is not None and not 1 < self.r < self.p:
            raise ValueError(f"r must lie in (1, p), got {self.r}")
        if self.s is not None and not self.s >= 1:
            raise ValueError(f"s must be >= 1, got {self.s}")

    @property
    def q(self) -> float:
        return 1.0 / (1.0 / self.p - self.beta / self.n)

    def to_dict(self) -> dict:
        d = {"p": self.p, "beta": self.beta, "n": self.n, "q": self.q}
        if self.r is not None:
            d["r"] = self.r
        if self.s is not None:
            d["s"] = self.s
        return d


# -- serialization ---------------------------------------------------------


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def to_json(f: GridFunction) -> dict:
    g = f.grid
    return {
        "dim": g.dim,
        "shape": list(g.shape),
        "spacing": fmt_float(g.spacing),
        "values": np.vectorize(fmt_float, otypes=[object])(f.values).tolist(),
    }


def from_json(data: dict) -> GridFunction:
    grid = Grid(int(data["dim"]), tuple(int(n) for n in data["shape"]), float(data["spacing"]))
    values = np.array(data["values"], dtype=float)
    return GridFunction(grid, values)


def save_json(f: GridFunction, path, extra: dict | None = None) -> None:
    data = to_json(f)
    if extra:
        data.update(extra)
    Path(path).write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")


def load_json(path) -> GridFunction:
    return from_json(json.loads(Path(path).read_text()))


def save_csv(f: GridFunction, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if f.grid.dim == 1:
            for v in f.values:
                writer.writerow([fmt_float(v)])
        else:
            for row in f.values:
                writer.writerow([fmt_float(v) for v in row])


def load_csv(path, spacing: float = 1.0, dim: int | None = None) -> GridFunction:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: no values")
    try:
        values = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    if dim is None:
        dim = 1 if values.shape[1] == 1 else 2
    if dim == 1:
        if values.shape[1] != 1:
            raise ValueError(f"{path}: 1D grid files hold one value per line")
        values = values[:, 0]
    return GridFunction(Grid(dim, values.shape, spacing), values)


def load_grid_function(path, spacing: float = 1.0, dim: int | None = None) -> GridFunction:
    path = Path(path)
    if path.suffix.lower() == ".json":
        return load_json(path)
    return load_csv(path, spacing, dim)


def save_grid_function(f: GridFunction, path, extra: dict | None = None) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        save_json(f, path, extra)
    else:
        save_csv(f, path)
