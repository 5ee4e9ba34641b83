"""Discrete maximal operators, commutators, Muckenhoupt weights and weighted
Lipschitz functionals on uniform lattices in one and two dimensions."""

from .estimators import (
    A1ConstantEstimator,
    CommutatorOperator,
    LipschitzNormEstimator,
    MaximalOperator,
)
from .grid import (
    CoverageError,
    Cube,
    CubeFamily,
    CubeOutOfBoundsError,
    Exponents,
    Grid,
    GridFunction,
    PrefixTable,
    cube_mean,
    cube_min,
    cube_sum,
    enumerate_cubes,
    indicator,
    load_grid_function,
    restrict,
    save_grid_function,
    unit_grid,
    weighted_measure,
)
from .lipschitz import (
    FunctionalProfile,
    LipNormResult,
    lip_norm,
    lip_norm_equivalence_table,
    lip_profile,
    maximal_char_functional,
    oscillation_bound_constant,
    pointwise_lip_constant,
    sharp_char_functional,
)
from .operators import (
    BudgetExceededError,
    OperatorOutput,
    commutator_maximal,
    commutator_sharp,
    hl_maximal,
    maximal_commutator,
    restricted_maximal,
    sharp_maximal,
    weighted_fractional_maximal,
)
from .tables import emit_table
from .weights import (
    Weight,
    a1_constant,
    ap_constant,
    coifman_rochberg_weight,
    doubling_ratio,
    power_weight,
    uniform_weight,
)

__version__ = "0.1.0"

__all__ = [
    "A1ConstantEstimator",
    "BudgetExceededError",
    "CommutatorOperator",
    "CoverageError",
    "Cube",
    "CubeFamily",
    "CubeOutOfBoundsError",
    "Exponents",
    "FunctionalProfile",
    "Grid",
    "GridFunction",
    "LipNormResult",
    "LipschitzNormEstimator",
    "MaximalOperator",
    "OperatorOutput",
    "PrefixTable",
    "Weight",
    "a1_constant",
    "ap_constant",
    "coifman_rochberg_weight",
    "commutator_maximal",
    "commutator_sharp",
    "cube_mean",
    "cube_min",
    "cube_sum",
    "doubling_ratio",
    "emit_table",
    "enumerate_cubes",
    "hl_maximal",
    "indicator",
    "lip_norm",
    "lip_norm_equivalence_table",
    "lip_profile",
    "load_grid_function",
    "maximal_char_functional",
    "maximal_commutator",
    "oscillation_bound_constant",
    "pointwise_lip_constant",
    "power_weight",
    "restrict",
    "restricted_maximal",
    "save_grid_function",
    "sharp_char_functional",
    "sharp_maximal",
    "uniform_weight",
    "unit_grid",
    "weighted_fractional_maximal",
    "weighted_measure",
]
