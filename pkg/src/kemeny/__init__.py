"""Kemeny functions of finite Markov chains and one-dimensional diffusions."""
from .chain import (
    KemenyReport,
    dual_chain,
    kemeny_function,
    mean_entry_times,
    occupation_matrix,
    stationary_distribution,
    trace_kemeny,
    validate_stochastic,
)
from .ctmc import kemeny_function_ct, stationary_ct, uniformization_crosscheck, validate_generator
from .diffusion import (
    build_analysis,
    expected_hitting,
    gamma,
    gamma_truncation_study,
    green_function,
    h_metric,
    kemeny_profile,
    make_spec,
)
from .expr import eval_expression, parse_expression
from .specio import load_chain_spec, load_diffusion_spec, load_model

__all__ = [
    "KemenyReport",
    "build_analysis",
    "dual_chain",
    "eval_expression",
    "expected_hitting",
    "gamma",
    "gamma_truncation_study",
    "green_function",
    "h_metric",
    "kemeny_function",
    "kemeny_function_ct",
    "kemeny_profile",
    "load_chain_spec",
    "load_diffusion_spec",
    "load_model",
    "make_spec",
    "mean_entry_times",
    "occupation_matrix",
    "parse_expression",
    "stationary_ct",
    "stationary_distribution",
    "trace_kemeny",
    "uniformization_crosscheck",
    "validate_generator",
    "validate_stochastic",
]
