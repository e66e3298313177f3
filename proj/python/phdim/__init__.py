"""Intrinsic-dimension estimation and score-based generated-text detection."""

from ._phdim import (  # noqa: F401
    DataError,
    DegenerateCloud,
    DimensionEstimate,
    Error,
    FormatError,
    IoError,
    ParamError,
    PhdParams,
    SizeError,
    TooFewPoints,
    UnstableEstimate,
    classify,
    euclidean_mst,
    fit_logistic_1d,
    fit_threshold_at_fpr,
    fit_threshold_eer,
    mle_estimate,
    persistence_score,
    phd_estimate,
    read_embeddings,
    roc_auc,
    sample_manifold,
    slope_to_dimension,
    subsample_sizes,
    write_embeddings,
    zeroth_barcode,
)

__version__ = "0.1.0"
