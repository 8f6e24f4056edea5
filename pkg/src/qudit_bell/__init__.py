"""Bipartite qudit Bell inequalities built from correlators.

Kernels (C_d, CGLMP, SLK), their quantum values on the maximally entangled
state, local-hidden-variable bounds by enumeration, and a facet test.
"""

from .core import (
    PAIRS,
    CANONICAL_SETTINGS,
    Behavior,
    BellError,
    ComputationRefused,
    CorrelatorSpec,
    DeterministicStrategy,
    DimensionMismatchError,
    InvalidBehaviorError,
    InvalidModulusError,
    Kernel,
    MeasurementSettings,
    convex_combination,
    evaluate_kernel,
    nmod,
    random_product_behavior,
    strategy_behavior,
    strategy_kernel_value,
    uniform_behavior,
)
from .correlators import (
    CorrelatorFamily,
    Verdict,
    cd_family,
    cglmp_family,
    closed_form_correlator,
    condition_check,
    family_sum,
    family_values,
    general_family,
)
from .kernels import (
    CANONICAL_SLK_PARAMS,
    SlkParams,
    build_cd_kernel,
    build_cglmp_kernel,
    build_kernel,
    build_slk_kernel,
    cd_quantum_closed_form,
    noise_threshold,
    slk_lhv_formula,
)
from .lhv import EnumerationCapError, LhvResult, lhv_fast, lhv_oracle, noise_tolerance_scan, violation_report
from .quantum import closed_form_behavior, noisy_behavior, oracle_behavior, qubit_pure_vs_mixed_demo
from .tightness import tightness_report, transformed_generators

__version__ = "0.1.0"

__all__ = [
    "Behavior",
    "BellError",
    "CANONICAL_SETTINGS",
    "CANONICAL_SLK_PARAMS",
    "ComputationRefused",
    "CorrelatorFamily",
    "CorrelatorSpec",
    "DeterministicStrategy",
    "DimensionMismatchError",
    "EnumerationCapError",
    "InvalidBehaviorError",
    "InvalidModulusError",
    "Kernel",
    "LhvResult",
    "MeasurementSettings",
    "PAIRS",
    "SlkParams",
    "Verdict",
    "build_cd_kernel",
    "build_cglmp_kernel",
    "build_kernel",
    "build_slk_kernel",
    "cd_family",
    "cd_quantum_closed_form",
    "cglmp_family",
    "closed_form_behavior",
    "closed_form_correlator",
    "condition_check",
    "convex_combination",
    "evaluate_kernel",
    "family_sum",
    "family_values",
    "general_family",
    "lhv_fast",
    "lhv_oracle",
    "nmod",
    "noise_threshold",
    "noise_tolerance_scan",
    "noisy_behavior",
    "oracle_behavior",
    "qubit_pure_vs_mixed_demo",
    "random_product_behavior",
    "slk_lhv_formula",
    "strategy_behavior",
    "strategy_kernel_value",
    "tightness_report",
    "transformed_generators",
    "uniform_behavior",
    "violation_report",
]
