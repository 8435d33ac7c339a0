"""From-scratch supervised learning toolkit for tabular heart-risk classification."""

__version__ = "0.1.0"

from .dataset import (  # noqa: F401
    DEFAULT_SCHEMA,
    Dataset,
    FeatureSchema,
    load_csv,
    summarize,
    validate,
    write_csv,
)
from .preprocess import (  # noqa: F401
    EncodingSpec,
    SplitConfig,
    StandardizationParams,
    apply_standardize,
    default_encoding_spec,
    encode,
    fit_standardize,
    stratified_split,
)
from .metrics import ConfusionMatrix, MetricReport, compute_metrics, confusion, roc_auc  # noqa: F401
from .classifier import (  # noqa: F401
    ClassifierSpec,
    PredictionOutput,
    TrainedModel,
    load,
    predict,
    save,
    train,
)
from .model_selection import CvConfig, ParamGrid, default_grid, grid_search, kfold_indices  # noqa: F401
