"""Grid-refinement experiments.

``refinement_experiment`` follows shrinking cubes around fixed interior points
of continuum profiles on [-1, 1]^n and tabulates both sides of the
negative-part bounds used in the converse arguments.

``refinement_stability`` samples the same seeded corpus at two resolutions
and compares the empirical constants of the lemma suites.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..grid import Cube, CubeFamily, Exponents, Grid, GridFunction, unit_grid
from ..lipschitz import lip_norm, maximal_char_functional, sharp_char_functional
from ..weights import uniform_weight
from .corpus import build_corpus
from .norms import estimate_operator_norm
from .suites import (
    stability_factor,
    verify_lemma22,
    verify_lemma24_domination,
    verify_lemma25_ratios,
)


@dataclass(frozen=True)
class Profile:
    """A closed-form symbol on [-1, 1]^n, observed at the point ``x0``."""

    name: str
    b: object
    x0: tuple
    nonnegative: bool

    def sample(self, grid: Grid) -> GridFunction:
        return grid.sample(self.b)


def default_profiles(dim: int = 1) -> list:
    def first(x):
        return x[..., 0]

    return [
        Profile("affine", lambda x: 1.0 + first(x), (0.25,) * dim, True),
        Profile("bump", lambda x: np.exp(-np.sum(x**2, axis=-1)), (0.25,) * dim, True),
        Profile("signed_linear", first, (-0.5,) * dim, False),
    ]


@dataclass
class ExperimentResult:
    rows: list
    summary: dict
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {"rows": self.rows, "summary": self.summary, "checks": self.checks,
                "passed": self.passed}


def level_grid(dim: int, n0: int, k: int) -> Grid:
    n = n0 * 2**k + 1
    return Grid(dim, (n,) * dim, spacing=2.0 / (n - 1), origin=-1.0)


def _centered_cube(grid: Grid, x0, m: int) -> Cube:
    idx = np.rint((np.asarray(x0, dtype=float) - grid.origin) / grid.spacing).astype(int)
    if not np.allclose(grid.origin + idx * grid.spacing, x0, atol=1e-12):
        raise ValueError(f"{x0} is not a lattice point of the level grid")
    cube = Cube(tuple(int(i) - m // 2 for i in idx), m)
    if not cube.fits(grid.shape):
        raise ValueError(f"cube of {m} points around {x0} leaves the domain")
    return cube


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def refinement_experiment(profiles=None, exponents: Exponents | None = None, levels: int = 4,
                          n0: int = 32, m: int = 5, dim: int = 1,
                          sharp_max_n: int | None = 129, slope_tol: float = 0.1,
                          control_tol: float = 0.1) -> ExperimentResult:
    """Shrinking-cube table at N_k = n0 2^k + 1 points per axis, k < ``levels``.

    At level k the cube is the ``m``-point cube centred at x0 and the constant
    C_k is the sup over the dyadic family of mu(Q)^{-1-beta/n} int_Q |b - M_Q b|
    (mu = 1), so the right-hand side is C_k |Q|^{beta/n}.  The sharp-maximal
    variant uses 2 M#(b chi_Q) in place of M_Q b and is tabulated for grids of
    at most ``sharp_max_n`` points per axis (None: all levels).
    """
    if levels < 2:
        raise ValueError(f"need at least 2 levels, got {levels}")
    if exponents is None:
        exponents = Exponents(2.0, 0.25, dim)
    if m % 2 == 0 or m < 1:
        raise ValueError("m must be a positive odd number of points")
    profiles = default_profiles(dim) if profiles is None else profiles
    beta, n = exponents.beta, dim
    rows, summary, checks = [], {}, {}
    for prof in profiles:
        prow = []
        for k in range(levels):
            grid = level_grid(dim, n0, k)
            b = prof.sample(grid)
            mu = uniform_weight(grid)
            dyadic = CubeFamily(grid, "dyadic")
            cube = _centered_cube(grid, prof.x0, m)
            box = b.values[cube.slices]
            size = cube.n_points * grid.cell_volume
            growth = size ** (beta / n)
            c34 = maximal_char_functional(b, mu, beta, 1.0, dyadic).sup
            neg = float(np.maximum(-box, 0).mean())
            pos = float(np.maximum(box, 0).mean())
            row = {
                "profile": prof.name, "level": k, "N": grid.shape[0], "h": grid.spacing,
                "cube_points": m, "cube_measure": size,
                "C_max": c34, "lhs_neg_mean": neg, "rhs_max": c34 * growth,
                "lhs_split": abs(float(box.mean())) - pos + neg,
            }
            if sharp_max_n is None or grid.shape[0] <= sharp_max_n:
                c43 = sharp_char_functional(b, mu, beta, 1.0, dyadic).sup
                row["C_sharp"] = c43
                row["rhs_sharp"] = c43 * growth
            prow.append(row)
        rows.extend(prow)
        x0_val = float(prof.b(np.asarray(prof.x0, dtype=float)[None, :])[0])
        rhs = np.array([r["rhs_max"] for r in prow])
        sizes = np.array([r["cube_measure"] for r in prow])
        slope = loglog_slope(sizes, rhs)
        info = {
            "x0": list(prof.x0),
            "b_minus_x0": max(-x0_val, 0.0),
            "slope_rhs": slope,
            "expected_slope": beta / n,
            "lhs_neg_finest": prow[-1]["lhs_neg_mean"],
            "rhs_finest": float(rhs[-1]),
            "rhs_coarsest": float(rhs[0]),
        }
        summary[prof.name] = info
        if prof.nonnegative:
            checks[f"{prof.name}: rhs decreases"] = bool(rhs[-1] < rhs[0])
            checks[f"{prof.name}: lhs vanishes"] = all(r["lhs_neg_mean"] == 0 for r in prow)
            checks[f"{prof.name}: slope"] = bool(abs(slope - beta / n) <= slope_tol * beta / n)
        elif info["b_minus_x0"] > 0:
            target = info["b_minus_x0"]
            checks[f"{prof.name}: lhs near b-(x0)"] = bool(
                abs(info["lhs_neg_finest"] - target) <= control_tol * target)
    return ExperimentResult(rows, summary, checks)


def empirical_constants(corpus, exponents: Exponents, r: float | None = None,
                        family: CubeFamily | None = None) -> dict:
    """Sups of the lemma ratio suites and of ||M_b|| / ||b||, on continuum members."""
    beta = exponents.beta
    grid = corpus.grid
    family = CubeFamily(grid, "all") if family is None else family
    out = {
        "lemma22": verify_lemma22(corpus, beta, family, continuum_only=True).info["sup"],
        "lemma24": verify_lemma24_domination(corpus, beta, r, family, continuum_only=True).info["sup"],
    }
    l25 = verify_lemma25_ratios(corpus, beta, r, family, continuum_only=True).info
    out["lemma25_first"] = l25["sup_first"]
    out["lemma25_second"] = l25["sup_second"]
    mu = uniform_weight(grid)
    functions = corpus.continuum_functions()
    for bm in corpus.symbols:
        if not bm.lipschitz:
            continue
        norm = lip_norm(bm.function, mu, beta, 1, family).value
        if bm.nonnegative and norm > 0:
            est = estimate_operator_norm("Mb", functions, exponents, mu, bm.function, family)
            out[f"Mb_over_lip/{bm.name}"] = est.sup_ratio / norm
    return out


def control_lip_norms(corpus, beta: float, family: CubeFamily | None = None) -> dict:
    """Lipschitz norms (mu = 1, p = 1) of the non-Lipschitz controls."""
    family = CubeFamily(corpus.grid, "all") if family is None else family
    mu = uniform_weight(corpus.grid)
    return {bm.name: lip_norm(bm.function, mu, beta, 1, family).value
            for bm in corpus.symbols if not bm.lipschitz}


def refinement_stability(seed: int, exponents: Exponents, n_coarse: int = 64,
                         n_fine: int = 128, r: float | None = None, factor: float = 2.0,
                         min_growth: float = 1.2) -> ExperimentResult:
    """Compare empirical constants at two resolutions of the same seeded corpus.

    Each constant must change by at most ``factor``; each non-Lipschitz
    control's norm must grow by at least ``min_growth``.
    """
    dim = exponents.n
    values = {}
    for n in (n_coarse, n_fine):
        corpus = build_corpus(seed, unit_grid(dim, n))
        consts = empirical_constants(corpus, exponents, r)
        consts.update({f"control/{k}": v
                       for k, v in control_lip_norms(corpus, exponents.beta).items()})
        values[n] = consts
    rows, checks = [], {}
    for key in values[n_coarse]:
        a, b = values[n_coarse][key], values[n_fine][key]
        row = {"quantity": key, "coarse": a, "fine": b, "ratio": b / a if a else float("nan")}
        if key.startswith("control/"):
            checks[f"{key}: grows"] = bool(a > 0 and b >= min_growth * a)
        else:
            row["factor"] = stability_factor(a, b)
            checks[f"{key}: stable"] = bool(row["factor"] <= factor)
        rows.append(row)
    summary = {"seed": seed, "n_coarse": n_coarse, "n_fine": n_fine,
               "exponents": exponents.to_dict(), "factor": factor, "min_growth": min_growth}
    return ExperimentResult(rows, summary, checks)
