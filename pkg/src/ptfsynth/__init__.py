"""Exact ternary polynomial-threshold synthesis, routing and circuit verification."""

from importlib.metadata import PackageNotFoundError, version

from .core import (FALSE, TRUE, OperationSpec, TernaryMask, TruthTable, accuracy, boolean_op,
                   eval_mask, mask_table, truth_table_of)
from .enumeration import enumerate_op, enumerate_perfect_masks, margin_certificate, select_mask
from .registry import get_op, standard_ops
from .route import CompositionPlan, compose_mask, harden_routing, sinkhorn_project, solve_linear_composition
from .synth import McmcConfig, QuantizationConfig, synthesize, warmstart_experiment
from .transform import EstimationPlan, Oracle, exact_coefficients, fwht, hoeffding_samples, low_degree_survey
from .circuit import (Circuit, VerificationReport, build_comparator, build_equality, build_full_adder,
                      build_ripple_adder, evaluate, verify_exhaustive, verify_random)

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0.1.0"

__all__ = [
    "FALSE", "TRUE", "OperationSpec", "TernaryMask", "TruthTable", "accuracy", "boolean_op",
    "eval_mask", "mask_table", "truth_table_of",
    "enumerate_op", "enumerate_perfect_masks", "margin_certificate", "select_mask",
    "get_op", "standard_ops",
    "CompositionPlan", "compose_mask", "harden_routing", "sinkhorn_project", "solve_linear_composition",
    "McmcConfig", "QuantizationConfig", "synthesize", "warmstart_experiment",
    "EstimationPlan", "Oracle", "exact_coefficients", "fwht", "hoeffding_samples", "low_degree_survey",
    "Circuit", "VerificationReport", "build_comparator", "build_equality", "build_full_adder",
    "build_ripple_adder", "evaluate", "verify_exhaustive", "verify_random",
]
