"""Tract-level rent-to-property-value analytics.

Descriptive statistics (ratio quantiles, medians, correlations,
Theil-Sen fits), Queen contiguity weights, and maximum-likelihood
spatial lag regressions over census-tract extracts, plus a synthetic
lattice generator for end-to-end validation.
"""

from .descriptive import (
    QuantileSummary,
    TheilSenLine,
    compute_rpv,
    correlation_matrix,
    emit_scatter,
    group_medians,
    quantile,
    quantile_summary,
    theil_sen_fit,
    zscores,
)
from .ingest import (
    Dataset,
    DesignTable,
    Scope,
    TractRecord,
    ValidationError,
    load_attributes,
    log_transform,
    partition_by_area,
    write_attributes,
)
from .sar import SarFit, SarSpec, concentrated_loglik, fit_sar, log_det, render_fit_table
from .synth import SynthConfig, generate
from .weights import (
    SpatialWeights,
    TractGeometry,
    eigen_bounds,
    from_adjacency,
    queen_contiguity,
    read_geojson,
    row_standardize,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Scope",
    "TractRecord",
    "Dataset",
    "DesignTable",
    "ValidationError",
    "load_attributes",
    "write_attributes",
    "partition_by_area",
    "log_transform",
    "TractGeometry",
    "SpatialWeights",
    "queen_contiguity",
    "from_adjacency",
    "row_standardize",
    "eigen_bounds",
    "read_geojson",
    "compute_rpv",
    "zscores",
    "quantile",
    "quantile_summary",
    "group_medians",
    "correlation_matrix",
    "theil_sen_fit",
    "emit_scatter",
    "QuantileSummary",
    "TheilSenLine",
    "SarSpec",
    "SarFit",
    "log_det",
    "concentrated_loglik",
    "fit_sar",
    "render_fit_table",
    "SynthConfig",
    "generate",
]
