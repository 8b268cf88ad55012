"""Exact root-number bias computations for cusp forms on Gamma0(N).

The package computes the trace of the Fricke involution W_N on
S_k(Gamma0(N)) and its new subspace, the signed difference
delta(N, k) = dim+ - dim- of the refined new subspaces, and the
classification of the levels and weights where the bias vanishes.
All arithmetic is exact (integers and fractions); every closed form
has an independent brute-force counterpart used by the test suite.
"""

from rootbias.arith import decompose_level
from rootbias.bias import (
    BiasRecord,
    ZeroClass,
    bias_record,
    classify_zero,
    delta,
    delta_prime,
    minimal_balance,
    refined_dims,
    scan_negative,
    sign_prediction_large_k,
)
from rootbias.classnum import Discriminant, h_prime, hurwitz
from rootbias.dims import DimensionBreakdown, dim_sk, dim_sk_new, dimension_breakdown
from rootbias.trace import (
    CaseTag,
    TraceReport,
    trace_full_closed,
    trace_full_direct,
    trace_new_closed,
    trace_new_mobius,
    trace_report,
)

__version__ = "0.1.0"

__all__ = [
    "BiasRecord",
    "CaseTag",
    "DimensionBreakdown",
    "Discriminant",
    "TraceReport",
    "ZeroClass",
    "bias_record",
    "classify_zero",
    "decompose_level",
    "delta",
    "delta_prime",
    "dim_sk",
    "dim_sk_new",
    "dimension_breakdown",
    "h_prime",
    "hurwitz",
    "minimal_balance",
    "refined_dims",
    "scan_negative",
    "sign_prediction_large_k",
    "trace_full_closed",
    "trace_full_direct",
    "trace_new_closed",
    "trace_new_mobius",
    "trace_report",
]
