"""Nonlinear time-series analysis toolkit for biomechanical gait data.

Core estimators (state-space reconstruction parameters, the entropy family,
detrended fluctuation analysis, recurrence quantification, Lyapunov
exponents) plus a batch pipeline that fans algorithms out over the columns
of CSV/Parquet datasets.
"""

from .data import (
    AttributeList,
    Dataset,
    TimeSeries,
    load_dataset,
    read_attribute_list,
    select_column,
    select_columns,
    write_csv,
)
from .dfa import DfaResult, dfa
from .entropy import (
    MultiscaleCurve,
    PermutationEntropyResult,
    approximate_entropy,
    coarse_grain,
    cross_approximate_entropy,
    multiscale_entropy_plus,
    permutation_entropy,
    sample_entropy,
    symbolic_entropy,
)
from .errors import GaitnlError
from .lyapunov import (
    LyeRosensteinResult,
    LyeWolfResult,
    lye_rosenstein,
    lye_wolf,
    mean_period,
)
from .pipeline import (
    AlgorithmRequest,
    BatchJob,
    BatchSummary,
    TaskResult,
    register_algorithm,
    registered_algorithms,
    resolve_parameters,
    run_batch,
)
from .rqa import (
    RadiusSearchResult,
    RecurrencePlot,
    RqaMeasures,
    radius_from_recurrence,
    read_rqa1,
    recurrence_plot,
    recurrence_plot_from_packed,
    recurrence_rate_at,
    rqa_measures,
    write_pgm,
    write_rqa1,
)
from .statespace import AmiCurve, EmbeddingParams, FnnCurve, ami, embed, fnn

__version__ = "0.1.0"

__all__ = [
    "AttributeList",
    "Dataset",
    "TimeSeries",
    "load_dataset",
    "read_attribute_list",
    "select_column",
    "select_columns",
    "write_csv",
    "DfaResult",
    "dfa",
    "MultiscaleCurve",
    "PermutationEntropyResult",
    "approximate_entropy",
    "coarse_grain",
    "cross_approximate_entropy",
    "multiscale_entropy_plus",
    "permutation_entropy",
    "sample_entropy",
    "symbolic_entropy",
    "GaitnlError",
    "LyeRosensteinResult",
    "LyeWolfResult",
    "lye_rosenstein",
    "lye_wolf",
    "mean_period",
    "AlgorithmRequest",
    "BatchJob",
    "BatchSummary",
    "TaskResult",
    "register_algorithm",
    "registered_algorithms",
    "resolve_parameters",
    "run_batch",
    "RadiusSearchResult",
    "RecurrencePlot",
    "RqaMeasures",
    "radius_from_recurrence",
    "read_rqa1",
    "recurrence_plot",
    "recurrence_plot_from_packed",
    "recurrence_rate_at",
    "rqa_measures",
    "write_pgm",
    "write_rqa1",
    "AmiCurve",
    "EmbeddingParams",
    "FnnCurve",
    "ami",
    "embed",
    "fnn",
    "__version__",
]
