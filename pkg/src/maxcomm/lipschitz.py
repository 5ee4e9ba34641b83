"""Weighted Lipschitz norms and the cube-indexed functionals that characterize them.

All integrals are ``h**n``-scaled lattice sums; ``b_Q`` is the plain mean of
``b`` over the cube's points.  Every function here returns a supremum over a
finite cube family, which is a lower bound for the continuum quantity.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .grid import Cube, CubeFamily, GridFunction, fmt_float, restrict
from .operators import _windows, all_cube_masks, hl_maximal_batch, sharp_maximal_batch
from .weights import as_weight


@dataclass(frozen=True)
class LipNormResult:
    value: float
    witness: Cube | None
    beta: float
    p: float


@dataclass(frozen=True, eq=False)
class FunctionalProfile:
    """Per-cube values of a functional, in enumeration order."""

    name: str
    cubes: list
    values: np.ndarray
    exponents: dict = field(default_factory=dict)

    @property
    def sup(self) -> float:
        return float(self.values.max()) if len(self.values) else 0.0

    @property
    def witness(self) -> Cube | None:
        if not len(self.values):
            return None
        return self.cubes[int(np.argmax(self.values))]

    def value_of(self, cube: Cube) -> float:
        return float(self.values[self.cubes.index(cube)])

    def summary(self) -> dict:
        w = self.witness
        return {
            "name": self.name,
            "sup": self.sup,
            "witness": None if w is None else w.to_dict(),
            "exponents": dict(self.exponents),
            "n_cubes": len(self.cubes),
        }

    def to_csv(self, path) -> None:
        dim = self.cubes[0].dim if self.cubes else int(self.exponents.get("n", 1))
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"anchor_{i}" for i in range(dim)] + ["side", "value"])
            for cube, v in zip(self.cubes, self.values):
                writer.writerow([*cube.anchor, cube.side, fmt_float(v)])

    def to_json(self, path) -> None:
        data = self.summary()
        data["sup"] = fmt_float(data["sup"])
        data["exponents"] = {k: fmt_float(v) for k, v in data["exponents"].items()}
        with open(path, "w") as fh:
            json.dump(data, fh, indent=1, sort_keys=True)
            fh.write("\n")


def _per_side_profile(name, family: CubeFamily, per_side, exponents) -> FunctionalProfile:
    cubes, values = [], []
    for side in family.sides:
        mask = family.masks[side]
        vals = per_side(side)
        cubes.extend(Cube(a, side) for a in np.argwhere(mask))
        values.append(vals[mask])
    values = np.concatenate(values) if values else np.empty(0)
    return FunctionalProfile(name, cubes, values, exponents)


def _flat_windows(values, side):
    d = values.ndim
    w = _windows(values, side)
    return w.reshape(w.shape[:d] + (-1,))


def _inner_sum(dev, wmu, p):
    """sum over the cube of |dev|^p mu^{1-p}; mu^0 = 1 is special-cased."""
    if p == 1:
        return np.abs(dev).sum(axis=-1)
    return (np.abs(dev) ** p * wmu ** (1.0 - p)).sum(axis=-1)


def lip_profile(b: GridFunction, mu, beta: float, p: float, family: CubeFamily) -> FunctionalProfile:
    """Per-cube mu(Q)^{-beta/n} ((1/mu(Q)) sum_Q |b - b_Q|^p mu^{1-p} h^n)^{1/p}."""
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    mu = as_weight(mu)
    n = b.grid.dim
    dv = b.grid.cell_volume

    def per_side(side):
        wb = _flat_windows(b.values, side)
        dev = wb - wb.mean(axis=-1, keepdims=True)
        wmu = None if p == 1 else _flat_windows(mu.values, side)
        mq = mu.measures(side)
        inner = _inner_sum(dev, wmu, p) * dv
        return mq ** (-beta / n) * (inner / mq) ** (1.0 / p)

    return _per_side_profile("lip", family, per_side, {"beta": beta, "p": p, "n": n})


def lip_term(b: GridFunction, mu, beta: float, p: float, cube: Cube) -> float:
    """The Lipschitz-norm expression for a single cube, by direct summation."""
    mu = as_weight(mu)
    n = b.grid.dim
    box = b.values[cube.slices]
    wbox = mu.values[cube.slices]
    mq = float(np.sum(wbox)) * b.grid.cell_volume
    dev = np.abs(box - box.mean())
    weight = 1.0 if p == 1 else wbox ** (1.0 - p)
    inner = float(np.sum(dev**p * weight)) * b.grid.cell_volume
    return mq ** (-beta / n) * (inner / mq) ** (1.0 / p)


def lip_norm(b: GridFunction, mu, beta: float, p: float, family: CubeFamily) -> LipNormResult:
    prof = lip_profile(b, mu, beta, p, family)
    return LipNormResult(prof.sup, prof.witness, beta, p)


def lip_norm_equivalence_table(b: GridFunction, mu, beta: float, family: CubeFamily,
                               p_list) -> dict:
    """Norms for each p in ``p_list``; Lip^p norms are comparable, constants unquantified."""
    return {p: lip_norm(b, mu, beta, p, family) for p in p_list}


def equivalence_ratio(table: dict) -> float:
    """Largest ratio between any two nonzero norms of a table (1.0 if all vanish)."""
    vals = [r.value for r in table.values() if r.value > 0]
    if not vals:
        return 1.0
    return max(vals) / min(vals)


def pointwise_lip_constant(b: GridFunction, w, beta: float,
                           family: CubeFamily | None = None) -> float:
    """max over x != y of |b(x)-b(y)| / (||b|| w(B)^{beta/n} (w(x)+w(y))).

    B is the cube centred at x with half-side |x-y|_inf (in lattice steps),
    clipped to the domain.  ||b|| is the p = 1 weighted Lipschitz norm.
    """
    w = as_weight(w)
    if family is None:
        family = CubeFamily(b.grid, "all")
    norm = lip_norm(b, w, beta, 1, family).value
    if norm == 0:
        return 0.0
    n = b.grid.dim
    shape = np.array(b.grid.shape)
    pts = np.argwhere(np.ones(b.grid.shape, dtype=bool))
    bv = b.values.reshape(-1)
    wv = w.values.reshape(-1)
    best = 0.0
    for i, x in enumerate(pts):
        r = np.abs(pts - x).max(axis=1)
        lo = np.clip(x - r[:, None], 0, None)
        hi = np.minimum(x + r[:, None] + 1, shape)
        wb = w.prefix.range_sums(lo, hi) * b.grid.cell_volume
        num = np.abs(bv[i] - bv)
        den = norm * wb ** (beta / n) * (wv[i] + wv)
        ratio = np.where(r > 0, num / den, 0.0)
        best = max(best, float(ratio.max()))
    return best


def oscillation_bound_constant(b: GridFunction, w, beta: float, family: CubeFamily) -> float:
    """max over (Q, x in Q) of |b(x) - b_Q| / (||b|| w(Q)^{beta/n} w(x))."""
    w = as_weight(w)
    norm = lip_norm(b, w, beta, 1, family).value
    if norm == 0:
        return 0.0
    n = b.grid.dim
    best = 0.0
    for side in family.sides:
        mask = family.masks[side]
        wb = _flat_windows(b.values, side)
        ww = _flat_windows(w.values, side)
        dev = np.abs(wb - wb.mean(axis=-1, keepdims=True))
        ratio = dev / (norm * w.measures(side)[..., None] ** (beta / n) * ww)
        best = max(best, float(ratio.max(axis=-1)[mask].max()))
    return best


# -- characterizing functionals --------------------------------------------


_BATCH = 128


def restricted_max_on_cube(b: GridFunction, cube: Cube) -> np.ndarray:
    """M_Q(b) on the points of ``cube`` using every subcube of it."""
    return restricted_maxima(b, [cube])[0]


def restricted_maxima(b: GridFunction, cubes) -> list:
    """M_Q(b) on Q's points for each Q in ``cubes``; crops of equal side are batched."""
    out = [None] * len(cubes)
    by_side = {}
    for i, q in enumerate(cubes):
        by_side.setdefault(q.side, []).append(i)
    for side, idx in by_side.items():
        masks = all_cube_masks((side,) * b.grid.dim)
        for start in range(0, len(idx), _BATCH):
            chunk = idx[start:start + _BATCH]
            stack = np.stack([b.values[cubes[i].slices] for i in chunk])
            res = hl_maximal_batch(stack, masks)
            for k, i in enumerate(chunk):
                out[i] = res[k]
    return out


def sharp_of_restriction(b: GridFunction, cube: Cube) -> np.ndarray:
    """M#(b chi_Q) over the global all-family, on the points of ``cube``."""
    return sharp_of_restrictions(b, [cube])[0]


def sharp_of_restrictions(b: GridFunction, cubes, on_cube: bool = True) -> list:
    """M#(b chi_Q) for each Q, over the global all-family.

    Returns values on Q's points, or on the whole grid if ``on_cube`` is false.
    """
    masks = all_cube_masks(b.grid.shape)
    out = []
    for start in range(0, len(cubes), _BATCH):
        chunk = cubes[start:start + _BATCH]
        stack = np.stack([restrict(b, q).values for q in chunk])
        res = sharp_maximal_batch(stack, masks)
        out.extend(r[q.slices] if on_cube else r for r, q in zip(res, chunk))
    return out


def _char_profiles(name, b, mu, beta, s_values, family, fields):
    mu = as_weight(mu)
    n = b.grid.dim
    dv = b.grid.cell_volume
    cubes = list(family)
    inner = fields(cubes)
    out = {s: np.empty(len(cubes)) for s in s_values}
    for i, cube in enumerate(cubes):
        dev = (b.values[cube.slices] - inner[i]).reshape(-1)
        wmu = mu.values[cube.slices].reshape(-1)
        mq = float(np.sum(wmu)) * dv
        for s in s_values:
            total = _inner_sum(dev, wmu, s) * dv
            out[s][i] = mq ** (-beta / n) * (total / mq) ** (1.0 / s)
    return {
        s: FunctionalProfile(name, cubes, vals, {"beta": beta, "s": s, "n": n})
        for s, vals in out.items()
    }


def maximal_char_profiles(b: GridFunction, mu, beta: float, s_values, family: CubeFamily) -> dict:
    """Profiles of mu(Q)^{-beta/n} ((1/mu(Q)) int_Q |b - M_Q b|^s mu^{1-s})^{1/s} for each s."""
    _check_s(s_values)
    return _char_profiles("maximal_char", b, mu, beta, list(s_values), family,
                          lambda cubes: restricted_maxima(b, cubes))


def maximal_char_functional(b: GridFunction, mu, beta: float, s: float,
                            family: CubeFamily) -> FunctionalProfile:
    return maximal_char_profiles(b, mu, beta, [s], family)[s]


def sharp_char_profiles(b: GridFunction, mu, beta: float, s_values, family: CubeFamily) -> dict:
    """Same as the maximal version with M_Q b replaced by 2 M#(b chi_Q)."""
    _check_s(s_values)
    return _char_profiles("sharp_char", b, mu, beta, list(s_values), family,
                          lambda cubes: [2.0 * v for v in sharp_of_restrictions(b, cubes)])


def sharp_char_functional(b: GridFunction, mu, beta: float, s: float,
                          family: CubeFamily) -> FunctionalProfile:
    return sharp_char_profiles(b, mu, beta, [s], family)[s]


def _check_s(s_values):
    for s in s_values:
        if not s >= 1:
            raise ValueError(f"s must be >= 1, got {s}")


__all__ = [
    "FunctionalProfile",
    "LipNormResult",
    "equivalence_ratio",
    "lip_norm",
    "lip_norm_equivalence_table",
    "lip_profile",
    "lip_term",
    "maximal_char_functional",
    "maximal_char_profiles",
    "oscillation_bound_constant",
    "pointwise_lip_constant",
    "restricted_max_on_cube",
    "restricted_maxima",
    "sharp_char_functional",
    "sharp_char_profiles",
    "sharp_of_restriction",
    "sharp_of_restrictions",
]
