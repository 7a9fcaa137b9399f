"""Coherent-state superpositions, splitters, and superposition/Schmidt rank quantifiers."""

from .core import (
    FockArray,
    PureEnsemble,
    SuperpositionState,
    canonicalize,
    coherent_overlap,
    fock_inner,
    gram_matrix,
    norm,
    normalize,
    tensor_product,
    to_fock,
)
from .quantifiers import (
    RankReport,
    Tolerances,
    analyze,
    bound_check,
    gram_rank,
    multipartite_report,
    nonclassicality_rank,
    schmidt_rank,
    schmidt_spectrum,
    vandermonde_certificate,
)
from .transforms import (
    SplitterUnitary,
    apply_splitter,
    apply_splitter_fock,
    balanced_bs,
    dft_splitter,
    extend_with_vacuum,
    from_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "FockArray",
    "PureEnsemble",
    "RankReport",
    "SplitterUnitary",
    "SuperpositionState",
    "Tolerances",
    "analyze",
    "apply_splitter",
    "apply_splitter_fock",
    "balanced_bs",
    "bound_check",
    "canonicalize",
    "coherent_overlap",
    "dft_splitter",
    "extend_with_vacuum",
    "fock_inner",
    "from_matrix",
    "gram_matrix",
    "gram_rank",
    "multipartite_report",
    "nonclassicality_rank",
    "norm",
    "normalize",
    "schmidt_rank",
    "schmidt_spectrum",
    "tensor_product",
    "to_fock",
    "vandermonde_certificate",
]
