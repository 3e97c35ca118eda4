"""secomp: secure computability of function tuples over finite multiterminal sources.

The library decides, for a finite joint source and a tuple of functions
with a designated private one, whether the functions can be computed over
public communication that stays nearly independent of the private value.
It computes the governing rate quantities exactly (conditional-entropy
constraint sets solved as covering LPs, plus closed forms where they are
known optimal), and simulates the matching two-stage random-binning /
one-time-pad protocol at small blocklength with exact leakage accounting.
"""

from .coloring import (
    ColoringExperiment,
    ColoringInstance,
    GapReport,
    HypothesisReport,
    balance_deviation,
    check_hypotheses,
    failure_rate_experiment,
    failure_rate_sweep,
    random_coloring,
    security_gap,
    svar_log_bound,
    uniform_instance,
)
from .protocol import (
    DEFAULT_ENUM_CAP,
    BinningCode,
    BlockModel,
    KeyMap,
    ProtocolConfig,
    ProtocolRun,
    RunReport,
    TranscriptLaw,
    build_binning_code,
    build_key_map,
    exact_transcript_law,
    key_quality,
    run_case1_protocol,
    run_case2_protocol,
    run_case3_protocol,
    simulate,
    simulate_case1,
    simulate_case2,
    simulate_case3,
    sw_decode,
)
from .rateregion import (
    BOUNDARY,
    BOUND_ONLY,
    NOT_SECURELY_COMPUTABLE,
    SECURELY_COMPUTABLE,
    AnalysisReport,
    Constraint,
    ConstraintSet,
    RateVector,
    VerdictRow,
    analyze,
    bss_row_spec,
    bss_verdict_table,
    build_constraints,
    check_interactive_inequality,
    constraints_case1,
    constraints_case2,
    constraints_case3,
    min_sum_rate,
    two_terminal_closed_form,
)
from .sources import (
    CONST,
    FunctionSpec,
    JointSource,
    RvExpr,
    binary_entropy,
    cond_entropy,
    make_bss,
    make_function_spec,
    mutual_information,
    rv,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport", "BinningCode", "BlockModel", "BOUNDARY", "BOUND_ONLY",
    "ColoringExperiment", "ColoringInstance", "CONST", "Constraint",
    "ConstraintSet", "DEFAULT_ENUM_CAP", "FunctionSpec", "GapReport",
    "HypothesisReport", "JointSource", "KeyMap", "NOT_SECURELY_COMPUTABLE",
    "ProtocolConfig", "ProtocolRun", "RateVector", "RunReport", "RvExpr",
    "SECURELY_COMPUTABLE", "TranscriptLaw", "VerdictRow", "analyze",
    "balance_deviation", "binary_entropy", "bss_row_spec", "bss_verdict_table",
    "build_binning_code", "build_constraints", "build_key_map",
    "check_hypotheses", "check_interactive_inequality", "cond_entropy",
    "constraints_case1", "constraints_case2", "constraints_case3",
    "exact_transcript_law", "failure_rate_experiment", "failure_rate_sweep",
    "key_quality", "make_bss", "make_function_spec", "min_sum_rate",
    "mutual_information", "random_coloring", "run_case1_protocol",
    "run_case2_protocol", "run_case3_protocol", "rv", "security_gap",
    "simulate", "simulate_case1", "simulate_case2", "simulate_case3",
    "svar_log_bound", "sw_decode", "two_terminal_closed_form",
    "uniform_instance", "validate",
]
