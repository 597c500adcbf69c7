"""Reduced-precision batched personalized PageRank over streaming COO SpMV."""

__version__ = "0.1.0"

from .fixedpoint import (
    FormatMismatchError,
    FxFormat,
    FxValue,
    NegativeInputError,
    RangeOverflowError,
    SaturationTally,
    fx_add,
    fx_mul,
    quantize,
    to_fraction,
    to_real,
)
from .graph import (
    CooGraph,
    Diagnostic,
    EdgeList,
    PacketStream,
    normalize,
    packets,
    read_qcoo,
    requantize,
    validate,
    write_qcoo,
)
from .spmv import (
    UnsortedInputError,
    spmv_oracle_float,
    spmv_oracle_quantized,
    spmv_stream,
)
from .ppr import (
    ConvergenceTrace,
    DuplicateVertexError,
    PprConfig,
    RankBatch,
    SaturationDetectedError,
    init,
    rank,
    run,
    scaling,
    step,
)
from .metrics import (
    CutoffTooLargeError,
    MetricsReport,
    MissingRelevanceError,
    RankingPair,
    build_report,
    convergence_norms,
    edit_distance_at,
    errors_at,
    kendall_tau,
    mae,
    ndcg,
    order_by_score,
    precision_at,
)
from .datagen import (
    EDGE_TARGETS,
    PRESETS,
    EmptyInputError,
    GenSpec,
    InvalidParametersError,
    MalformedLineError,
    generate,
    parse_snap,
    preset,
    write_edgelist,
)

__all__ = [
    "__version__",
    "FxFormat",
    "FxValue",
    "SaturationTally",
    "quantize",
    "fx_add",
    "fx_mul",
    "to_real",
    "to_fraction",
    "NegativeInputError",
    "RangeOverflowError",
    "FormatMismatchError",
    "EdgeList",
    "CooGraph",
    "PacketStream",
    "Diagnostic",
    "normalize",
    "requantize",
    "packets",
    "validate",
    "write_qcoo",
    "read_qcoo",
    "UnsortedInputError",
    "spmv_stream",
    "spmv_oracle_quantized",
    "spmv_oracle_float",
    "PprConfig",
    "RankBatch",
    "ConvergenceTrace",
    "DuplicateVertexError",
    "SaturationDetectedError",
    "init",
    "scaling",
    "step",
    "run",
    "rank",
    "RankingPair",
    "MetricsReport",
    "CutoffTooLargeError",
    "MissingRelevanceError",
    "order_by_score",
    "errors_at",
    "edit_distance_at",
    "precision_at",
    "ndcg",
    "mae",
    "kendall_tau",
    "convergence_norms",
    "build_report",
    "GenSpec",
    "PRESETS",
    "EDGE_TARGETS",
    "preset",
    "generate",
    "parse_snap",
    "write_edgelist",
    "InvalidParametersError",
    "MalformedLineError",
    "EmptyInputError",
]
