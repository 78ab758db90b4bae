"""Riemannian solvers for top-1 CCA and LDA with sketched preconditioning."""

from ellopt._core import (
    CCAResult,
    ConvergenceTrace,
    CountSketch,
    DataError,
    LDAResult,
    NumericalError,
    SparseMatrix,
    TraceRecord,
    effective_dimension,
    exact_cca,
    exact_lda,
    parse_libsvm,
    pencil_condition_number,
    recommended_sketch_size,
    sketched_cca,
    sketched_lda,
    split_columns,
)

__version__ = "0.1.0"

__all__ = [
    "CCAResult",
    "ConvergenceTrace",
    "CountSketch",
    "DataError",
    "LDAResult",
    "NumericalError",
    "SparseMatrix",
    "TraceRecord",
    "effective_dimension",
    "exact_cca",
    "exact_lda",
    "parse_libsvm",
    "pencil_condition_number",
    "recommended_sketch_size",
    "sketched_cca",
    "sketched_lda",
    "split_columns",
]
