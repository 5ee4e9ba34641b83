"""Weighted Lebesgue norms and corpus-based operator-norm estimates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grid import CubeFamily, Exponents, GridFunction
from ..operators import (
    commutator_maximal,
    commutator_sharp,
    maximal_commutator,
    weighted_fractional_maximal,
)
from ..weights import as_weight

OPERATORS = ("Mb", "bM", "bMsharp", "frac")


@dataclass(frozen=True)
class NormEstimate:
    operator: str
    exponents: dict
    sup_ratio: float
    witness: str | None
    n_samples: int
    n_skipped: int = 0

    def to_dict(self) -> dict:
        return {
            "operator": self.operator,
            "exponents": dict(self.exponents),
            "sup_ratio": self.sup_ratio,
            "witness": self.witness,
            "n_samples": self.n_samples,
            "n_skipped": self.n_skipped,
        }


def weighted_lp_norm(f: GridFunction, p: float, mu) -> float:
    """(sum |f|^p mu h^n)^{1/p}."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    mu = as_weight(mu)
    total = float(np.sum(np.abs(f.values) ** p * mu.values)) * f.grid.cell_volume
    return total ** (1.0 / p)


def dual_power_norm(g: GridFunction, q: float, mu) -> float:
    """Norm in L^q(mu^{1-q}): (sum |g|^q mu^{1-q} h^n)^{1/q}."""
    mu = as_weight(mu)
    total = float(np.sum(np.abs(g.values) ** q * mu.values ** (1.0 - q))) * g.grid.cell_volume
    return total ** (1.0 / q)


def _named(functions):
    for i, m in enumerate(functions):
        if isinstance(m, GridFunction):
            yield f"f{i}", m
        else:
            yield m.name, m.function


def apply_operator(op: str, f: GridFunction, symbol: GridFunction | None, mu,
                   exponents: Exponents, family: CubeFamily) -> GridFunction:
    if op == "Mb":
        return maximal_commutator(symbol, f, family).values
    if op == "bM":
        return commutator_maximal(symbol, f, family)
    if op == "bMsharp":
        return commutator_sharp(symbol, f, family)
    if op == "frac":
        r = exponents.r if exponents.r is not None else default_r(exponents.p)
        return weighted_fractional_maximal(f, mu, exponents.beta, r, family).values
    raise ValueError(f"unknown operator {op!r}; expected one of {OPERATORS}")


def default_r(p: float) -> float:
    return (1.0 + p) / 2.0


def estimate_operator_norm(op: str, functions, exponents: Exponents, mu,
                           symbol: GridFunction | None = None,
                           family: CubeFamily | None = None) -> NormEstimate:
    """sup over ``functions`` of ||op f|| / ||f||_{L^p(mu)}.

    The target norm is L^q(mu^{1-q}) for the commutators and L^q(mu) for the
    weighted fractional maximal operator (``op="frac"``, with alpha = beta).
    Functions of zero norm are skipped.  ``functions`` may be a Corpus, a list
    of corpus members, or a list of grid functions.
    """
    if op not in OPERATORS:
        raise ValueError(f"unknown operator {op!r}; expected one of {OPERATORS}")
    if hasattr(functions, "functions"):
        functions = functions.functions
    functions = list(functions)
    if not functions:
        raise ValueError("empty corpus")
    if op != "frac" and symbol is None:
        raise ValueError(f"operator {op} needs a symbol b")
    mu = as_weight(mu)
    if family is None:
        family = CubeFamily(mu.grid, "all")
    q = exponents.q
    best, witness, used, skipped = 0.0, None, 0, 0
    for name, f in _named(functions):
        denom = weighted_lp_norm(f, exponents.p, mu)
        if denom == 0:
            skipped += 1
            continue
        g = apply_operator(op, f, symbol, mu, exponents, family)
        num = weighted_lp_norm(g, q, mu) if op == "frac" else dual_power_norm(g, q, mu)
        ratio = num / denom
        used += 1
        if ratio > best or witness is None:
            best, witness = ratio, name
    exps = exponents.to_dict()
    if op == "frac":
        exps.setdefault("r", default_r(exponents.p))
    return NormEstimate(op, exps, best, witness, used, skipped)
