"""Maximal operators and their commutators on lattice grids.

Every operator takes a ``method`` argument.  ``"fast"`` computes each cube's
aggregate once (prefix sums where an O(1) form exists, vectorized windows
otherwise) and max-scatters it to the cube's points.  ``"brute"`` loops over
(point, cube) pairs with direct summation and is the reference the fast
paths are tested against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import maximum_filter

from .grid import (
    CoverageError,
    Cube,
    CubeFamily,
    GridFunction,
    PrefixTable,
    check_cube,
)

METHODS = ("fast", "brute")

# element budget for a single vectorized chunk of the M_b kernel
_CHUNK = 1 << 22


class BudgetExceededError(RuntimeError):
    """The requested evaluation needs more work than the budget allows."""


@dataclass(frozen=True, eq=False)
class OperatorOutput:
    values: GridFunction
    argmax_side: np.ndarray | None = None
    argmax_anchor: np.ndarray | None = None
    defined: np.ndarray | None = None

    def at(self, point):
        """Value at ``point``, or ``None`` where the operator is not defined."""
        point = tuple(point)
        if self.defined is not None and not self.defined[point]:
            return None
        return float(self.values.values[point])

    def argmax_cube(self, point) -> Cube | None:
        if self.argmax_side is None:
            return None
        point = tuple(point)
        if self.defined is not None and not self.defined[point]:
            return None
        return Cube(self.argmax_anchor[point], self.argmax_side[point])

    @property
    def array(self) -> np.ndarray:
        return self.values.values


# -- max-scatter -----------------------------------------------------------


def _scatter_max(vals: np.ndarray, side: int, shape) -> np.ndarray:
    """out[x] = max of vals[a] over anchors a of side-``side`` cubes containing x."""
    pad = [(side - 1, side - 1)] * len(shape)
    padded = np.pad(vals, pad, constant_values=-np.inf)
    filt = maximum_filter(padded, size=side, mode="constant", cval=-np.inf)
    h = side // 2
    return filt[tuple(slice(h, h + n) for n in shape)]


def _offsets(side: int, dim: int):
    # descending offsets visit anchors (x - offset) in ascending lexicographic order
    return itertools.product(range(side - 1, -1, -1), repeat=dim)


class _MaxScatter:
    """Running per-point maximum with optional first-attaining cube."""

    def __init__(self, shape, track: bool):
        self.shape = tuple(shape)
        self.best = np.full(self.shape, -np.inf)
        self.track = track
        if track:
            self.side = np.zeros(self.shape, dtype=int)
            self.anchor = np.zeros(self.shape + (len(self.shape),), dtype=int)

    def add(self, vals: np.ndarray, side: int) -> None:
        if not self.track:
            np.maximum(self.best, _scatter_max(vals, side, self.shape), out=self.best)
            return
        for off in _offsets(side, len(self.shape)):
            self.add_offset(off, vals, side)

    def add_offset(self, off, vals: np.ndarray, side: int) -> None:
        region = tuple(slice(o, o + m) for o, m in zip(off, vals.shape))
        cur = self.best[region]
        if not self.track:
            np.maximum(cur, vals, out=cur)
            return
        better = vals > cur
        if not better.any():
            return
        cur[better] = vals[better]
        self.side[region][better] = side
        anchors = np.moveaxis(np.indices(vals.shape), 0, -1)
        self.anchor[region][better] = anchors[better]

    def finish(self, grid, shift=None, defined=None) -> OperatorOutput:
        if np.isneginf(self.best).any():
            raise CoverageError("cube family does not cover every lattice point")
        return _assemble(grid, self.best, self.side if self.track else None,
                         self.anchor if self.track else None, shift, defined)


def _assemble(grid, best, side, anchor, shift=None, defined=None) -> OperatorOutput:
    if shift is None:
        return OperatorOutput(GridFunction(grid, best), side, anchor)
    full = np.zeros(grid.shape)
    full[shift] = best
    mask = np.zeros(grid.shape, dtype=bool)
    mask[shift] = True
    if side is not None:
        s_full = np.zeros(grid.shape, dtype=int)
        s_full[shift] = side
        a_full = np.zeros(grid.shape + (grid.dim,), dtype=int)
        a_full[shift] = anchor + np.array([sl.start for sl in shift])
        side, anchor = s_full, a_full
    return OperatorOutput(GridFunction(grid, full), side, anchor, mask)


def _masked(vals: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, vals, -np.inf)


def _windows(values: np.ndarray, side: int) -> np.ndarray:
    return sliding_window_view(values, (side,) * values.ndim)


def _window_axes(dim: int) -> tuple:
    return tuple(range(dim, 2 * dim))


# -- fast per-cube aggregates ----------------------------------------------


def _mean_anchor_values(values: np.ndarray):
    table = PrefixTable(values)
    d = values.ndim

    # the data are |f| >= 0; clamp cancellation noise in the table differences
    def per_side(side):
        return np.maximum(table.window_sums(side), 0.0) / side**d

    return per_side


def _osc_anchor_values(values: np.ndarray):
    d = values.ndim
    axes = _window_axes(d)

    def per_side(side):
        w = _windows(values, side)
        m = w.mean(axis=axes, keepdims=True)
        return np.abs(w - m).mean(axis=axes)

    return per_side


def _fast_max(values_shape, masks, per_side, track):
    acc = _MaxScatter(values_shape, track)
    for side in sorted(masks):
        acc.add(_masked(per_side(side), masks[side]), side)
    return acc


# -- brute-force reference ---------------------------------------------------


def _containing(point, side, shape, mask):
    ranges = [range(max(0, x - side + 1), min(x, n - side) + 1) for x, n in zip(point, shape)]
    for anchor in itertools.product(*ranges):
        if mask[anchor]:
            yield anchor


def _brute_max(shape, masks, term, track=True):
    """Loop over every point and every member cube containing it."""
    best = np.full(shape, -np.inf)
    side_arr = np.zeros(shape, dtype=int)
    anchor_arr = np.zeros(tuple(shape) + (len(shape),), dtype=int)
    for x in itertools.product(*(range(n) for n in shape)):
        for side in sorted(masks):
            for anchor in _containing(x, side, shape, masks[side]):
                v = term(anchor, side, x)
                if v > best[x]:
                    best[x] = v
                    side_arr[x] = side
                    anchor_arr[x] = anchor
    if np.isneginf(best).any():
        raise CoverageError("cube family does not cover every lattice point")
    return best, side_arr, anchor_arr


def _cached(fn):
    cache = {}

    def term(anchor, side, x):
        key = (anchor, side)
        if key not in cache:
            cache[key] = fn(anchor, side)
        return cache[key]

    return term


def _box(values, anchor, side):
    return values[tuple(slice(a, a + side) for a in anchor)]


def _check_method(method):
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def _check_family(f: GridFunction, family: CubeFamily):
    if family.grid.shape != f.grid.shape:
        raise ValueError(f"family grid {family.grid.shape} != function grid {f.grid.shape}")


def _check_same_grid(b: GridFunction, f: GridFunction):
    if b.grid.shape != f.grid.shape:
        raise ValueError(f"grids differ: {b.grid.shape} vs {f.grid.shape}")


# -- batched array kernels -------------------------------------------------


def _scatter_max_batch(vals: np.ndarray, side: int, shape) -> np.ndarray:
    d = len(shape)
    pad = [(0, 0)] + [(side - 1, side - 1)] * d
    padded = np.pad(vals, pad, constant_values=-np.inf)
    filt = maximum_filter(padded, size=(1,) + (side,) * d, mode="constant", cval=-np.inf)
    h = side // 2
    return filt[(slice(None),) + tuple(slice(h, h + n) for n in shape)]


def _batch_max(stack: np.ndarray, masks: dict, per_side) -> np.ndarray:
    shape = stack.shape[1:]
    best = np.full(stack.shape, -np.inf)
    for side in sorted(masks):
        vals = np.where(masks[side], per_side(side), -np.inf)
        np.maximum(best, _scatter_max_batch(vals, side, shape), out=best)
    return best


def hl_maximal_batch(stack: np.ndarray, masks: dict) -> np.ndarray:
    """Maximal function of every function in ``stack`` (leading axis = batch)."""
    absvals = np.abs(np.asarray(stack, dtype=float))
    d = absvals.ndim - 1
    table = np.zeros((absvals.shape[0],) + tuple(n + 1 for n in absvals.shape[1:]),
                     dtype=np.longdouble)
    inner = absvals.astype(np.longdouble)
    for axis in range(1, d + 1):
        inner = np.cumsum(inner, axis=axis)
    table[(slice(None),) + (slice(1, None),) * d] = inner

    def per_side(s):
        if d == 1:
            sums = table[:, s:] - table[:, :-s]
        else:
            sums = table[:, s:, s:] - table[:, :-s, s:] - table[:, s:, :-s] + table[:, :-s, :-s]
        return np.maximum(sums.astype(float), 0.0) / s**d

    return _batch_max(absvals, masks, per_side)


def sharp_maximal_batch(stack: np.ndarray, masks: dict) -> np.ndarray:
    """Sharp maximal function of every function in ``stack``."""
    vals = np.asarray(stack, dtype=float)
    d = vals.ndim - 1
    axes = tuple(range(d + 1, 2 * d + 1))

    def per_side(s):
        w = sliding_window_view(vals, (s,) * d, axis=tuple(range(1, d + 1)))
        m = w.mean(axis=axes, keepdims=True)
        return np.abs(w - m).mean(axis=axes)

    return _batch_max(vals, masks, per_side)


def maximal_commutator_batch(bstack: np.ndarray, fstack: np.ndarray, masks: dict) -> np.ndarray:
    """M_b(f) for paired stacks of symbols and functions (leading axis = batch)."""
    bvals = np.asarray(bstack, dtype=float)
    absf = np.abs(np.asarray(fstack, dtype=float))
    k = bvals.shape[0]
    shape = bvals.shape[1:]
    d = len(shape)
    spatial = tuple(range(1, d + 1))
    best = np.full(bvals.shape, -np.inf)
    for side in sorted(masks):
        m = side**d
        wb = sliding_window_view(bvals, (side,) * d, axis=spatial)
        anchors_shape = wb.shape[1:d + 1]
        wb = wb.reshape(-1, m)
        wf = sliding_window_view(absf, (side,) * d, axis=spatial).reshape(-1, m)
        vals = np.empty_like(wb)
        step = max(1, _CHUNK // (m * m))
        for start in range(0, wb.shape[0], step):
            sb = wb[start:start + step]
            sf = wf[start:start + step]
            vals[start:start + step] = (np.abs(sb[:, :, None] - sb[:, None, :])
                                        * sf[:, None, :]).mean(axis=2)
        vals = vals.reshape((k,) + anchors_shape + (m,))
        vals = np.where(masks[side][..., None], vals, -np.inf)
        for j, off in enumerate(itertools.product(range(side), repeat=d)):
            region = (slice(None),) + tuple(slice(o, o + a) for o, a in zip(off, anchors_shape))
            np.maximum(best[region], vals[..., j], out=best[region])
    return best


def all_cube_masks(shape) -> dict:
    return {s: np.ones(tuple(n - s + 1 for n in shape), dtype=bool)
            for s in range(1, min(shape) + 1)}


# -- operators ---------------------------------------------------------------


def hl_maximal(f: GridFunction, family: CubeFamily, method: str = "fast",
               argmax: bool = False) -> OperatorOutput:
    """Hardy-Littlewood maximal function: sup over member cubes Q containing x of mean |f| on Q."""
    _check_method(method)
    _check_family(f, family)
    absf = np.abs(f.values)
    return _maximal_on(absf, f.grid, family.masks, method, argmax)


def _maximal_on(absvals, grid, masks, method, argmax, shift=None):
    if method == "fast":
        acc = _fast_max(absvals.shape, masks, _mean_anchor_values(absvals), argmax)
        return acc.finish(grid, shift)
    term = _cached(lambda a, s: float(np.mean(_box(absvals, a, s))))
    best, side, anchor = _brute_max(absvals.shape, masks, term)
    if not argmax:
        side = anchor = None
    return _assemble(grid, best, side, anchor, shift)


def restricted_maximal(f: GridFunction, q0: Cube, family: CubeFamily,
                       method: str = "fast", argmax: bool = False) -> OperatorOutput:
    """Maximal function over member cubes Q with x in Q contained in ``q0``.

    Only points of ``q0`` carry a value; ``OperatorOutput.at`` returns ``None``
    elsewhere.
    """
    _check_method(method)
    _check_family(f, family)
    check_cube(q0, f.grid)
    masks = family.within(q0)
    absvals = np.abs(f.values[q0.slices])
    return _maximal_on(absvals, f.grid, masks, method, argmax, shift=q0.slices)


def sharp_maximal(f: GridFunction, family: CubeFamily, method: str = "fast",
                  argmax: bool = False) -> OperatorOutput:
    """Sharp maximal function: sup of the mean oscillation (1/|Q|) sum |f - f_Q|."""
    _check_method(method)
    _check_family(f, family)
    vals = f.values
    if method == "fast":
        acc = _fast_max(vals.shape, family.masks, _osc_anchor_values(vals), argmax)
        return acc.finish(f.grid)

    def osc(a, s):
        box = _box(vals, a, s)
        return float(np.mean(np.abs(box - np.mean(box))))

    best, side, anchor = _brute_max(vals.shape, family.masks, _cached(osc))
    return _assemble(f.grid, best, side if argmax else None, anchor if argmax else None)


def mb_work(shape, masks) -> int:
    """Element operations the fast M_b kernel performs for this family."""
    d = len(shape)
    return int(sum(int(m.sum()) * side ** (2 * d) for side, m in masks.items()))


def maximal_commutator(b: GridFunction, f: GridFunction, family: CubeFamily,
                       method: str = "fast", argmax: bool = False,
                       budget: float | None = 5e9) -> OperatorOutput:
    """M_b(f)(x) = sup over Q containing x of mean over y in Q of |b(x) - b(y)| |f(y)|.

    There is no prefix-sum form because of the coupling through ``b(x)``; the
    fast path evaluates every (cube, member point) term exactly, vectorized
    per side.  ``budget`` caps the number of element operations.
    """
    _check_method(method)
    _check_family(f, family)
    _check_same_grid(b, f)
    if budget is not None and mb_work(f.grid.shape, family.masks) > budget:
        raise BudgetExceededError(
            f"M_b needs {mb_work(f.grid.shape, family.masks):.3g} operations, budget {budget:.3g}"
        )
    return _mb_on(b.values, np.abs(f.values), f.grid, family.masks, method, argmax)


def _mb_on(bvals, absf, grid, masks, method, argmax, shift=None):
    shape = bvals.shape
    d = len(shape)
    if method == "brute":
        def term(a, s, x):
            return float(np.mean(np.abs(bvals[x] - _box(bvals, a, s)) * _box(absf, a, s)))

        best, side, anchor = _brute_max(shape, masks, term)
        return _assemble(grid, best, side if argmax else None,
                         anchor if argmax else None, shift)

    acc = _MaxScatter(shape, argmax)
    for s in sorted(masks):
        vals = _mb_side_values(bvals, absf, s)
        vals = np.where(masks[s][..., None], vals, -np.inf)
        offsets = list(itertools.product(range(s), repeat=d))
        order = range(len(offsets) - 1, -1, -1)
        for j in order:
            acc.add_offset(offsets[j], vals[..., j], s)
    return acc.finish(grid, shift)


def _mb_side_values(bvals, absf, side):
    """For each anchor and each member position x: mean_y |b(x)-b(y)| |f(y)|."""
    d = bvals.ndim
    m = side**d
    wb = _windows(bvals, side)
    anchors_shape = wb.shape[:d]
    wb = wb.reshape(-1, m)
    wf = _windows(absf, side).reshape(-1, m)
    out = np.empty_like(wb, dtype=float)
    step = max(1, _CHUNK // (m * m))
    for start in range(0, wb.shape[0], step):
        sb = wb[start:start + step]
        sf = wf[start:start + step]
        diff = np.abs(sb[:, :, None] - sb[:, None, :])
        out[start:start + step] = (diff * sf[:, None, :]).mean(axis=2)
    return out.reshape(anchors_shape + (m,))


def commutator_maximal(b: GridFunction, f: GridFunction, family: CubeFamily,
                       method: str = "fast") -> GridFunction:
    """Nonlinear commutator [b, M](f) = b M(f) - M(b f)."""
    _check_same_grid(b, f)
    mf = hl_maximal(f, family, method).array
    mbf = hl_maximal(b * f, family, method).array
    return f.with_values(b.values * mf - mbf)


def commutator_sharp(b: GridFunction, f: GridFunction, family: CubeFamily,
                     method: str = "fast") -> GridFunction:
    """[b, M#](f) = b M#(f) - M#(b f)."""
    _check_same_grid(b, f)
    mf = sharp_maximal(f, family, method).array
    mbf = sharp_maximal(b * f, family, method).array
    return f.with_values(b.values * mf - mbf)


def weighted_fractional_maximal(f: GridFunction, mu, alpha: float, r: float,
                                family: CubeFamily, method: str = "fast",
                                argmax: bool = False) -> OperatorOutput:
    """sup over Q containing x of (mu(Q)^{r alpha/n - 1} * integral_Q |f|^r mu)^{1/r}."""
    _check_method(method)
    _check_family(f, family)
    n = f.grid.dim
    if not 0 < alpha < n:
        raise ValueError(f"alpha must lie in (0, {n}), got {alpha}")
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    muv = np.asarray(mu.values, dtype=float)
    if muv.shape != f.grid.shape:
        raise ValueError("weight and function grids differ")
    dv = f.grid.cell_volume
    g = np.abs(f.values) ** r * muv
    expo = 1.0 - r * alpha / n

    if method == "fast":
        tg = PrefixTable(g)
        tm = getattr(mu, "prefix", None) or PrefixTable(muv)

        def per_side(side):
            mq = tm.window_sums(side) * dv
            return (np.maximum(tg.window_sums(side), 0.0) * dv / mq**expo) ** (1.0 / r)

        acc = _fast_max(g.shape, family.masks, per_side, argmax)
        return acc.finish(f.grid)

    def term(a, s):
        mq = float(np.sum(_box(muv, a, s))) * dv
        return (float(np.sum(_box(g, a, s))) * dv / mq**expo) ** (1.0 / r)

    best, side, anchor = _brute_max(g.shape, family.masks, _cached(term))
    return _assemble(f.grid, best, side if argmax else None, anchor if argmax else None)
