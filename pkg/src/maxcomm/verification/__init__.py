"""Verification suites, corpora, operator-norm estimates and refinement experiments."""

from .corpus import Corpus, Member, build_corpus
from .experiments import (
    ExperimentResult,
    Profile,
    default_profiles,
    empirical_constants,
    refinement_experiment,
    refinement_stability,
)
from .norms import (
    NormEstimate,
    dual_power_norm,
    estimate_operator_norm,
    weighted_lp_norm,
)
from .report import VerificationReport, merge
from .suites import (
    SuiteError,
    verify_a1_consistency,
    verify_commutator_identity,
    verify_converse_chain,
    verify_holder_monotonicity,
    verify_lemma21,
    verify_lemma22,
    verify_lemma24_domination,
    verify_lemma25_ratios,
    verify_mean_split,
    verify_pointwise_domination,
    verify_restriction_identities,
)

__all__ = [
    "Corpus",
    "ExperimentResult",
    "Member",
    "NormEstimate",
    "Profile",
    "SuiteError",
    "VerificationReport",
    "build_corpus",
    "default_profiles",
    "dual_power_norm",
    "empirical_constants",
    "estimate_operator_norm",
    "merge",
    "refinement_experiment",
    "refinement_stability",
    "verify_a1_consistency",
    "verify_commutator_identity",
    "verify_converse_chain",
    "verify_holder_monotonicity",
    "verify_lemma21",
    "verify_lemma22",
    "verify_lemma24_domination",
    "verify_lemma25_ratios",
    "verify_mean_split",
    "verify_pointwise_domination",
    "verify_restriction_identities",
    "weighted_lp_norm",
]
