"""Uniform train/predict/persist surface over the four model families.

A trained model always carries the encoding spec and standardization
statistics it was fitted with, so prediction never recomputes anything from
inference-time data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import knn as knn_mod
from . import logreg as logreg_mod
from . import mlp as mlp_mod
from . import svm as svm_mod
from .dataset import DEFAULT_SCHEMA, Dataset, FeatureSchema, validate
from .errors import ConfigurationError, InputError, ShapeError, TrainingError
from .preprocess import (
    EncodingSpec,
    SplitConfig,
    StandardizationParams,
    apply_standardize,
    default_encoding_spec,
    encode_matrix,
    fit_standardize,
)

KINDS = ("logreg", "knn", "svm", "mlp")

DEFAULT_THRESHOLD = 0.5

LOGREG_DEFAULTS = {"l2_lambda": 0.01, "learning_rate": 0.1, "max_iters": 5000, "tol": 1e-6}
KNN_DEFAULTS = {"k": 5, "metric": "euclidean", "weighting": "uniform"}
SVM_DEFAULTS = {"kernel": "rbf", "gamma": 1.0 / 19.0, "C": 1.0, "smo_tol": 1e-3, "max_passes": 5}
MLP_DEFAULTS = {
    "hidden_widths": (32, 16),
    "adam_lr": 0.0005,
    "batch_size": 20,
    "dropout_rate": 0.2,
    "l2_lambda": 0.001,
    "max_epochs": 500,
    "early_stop_patience": 20,
    "plateau_factor": 0.5,
    "plateau_patience": 5,
    "min_lr": 1e-6,
    "validation_fraction": 0.2,
}

_DEFAULTS = {"logreg": LOGREG_DEFAULTS, "knn": KNN_DEFAULTS, "svm": SVM_DEFAULTS, "mlp": MLP_DEFAULTS}


def _coerce(key: str, value, default):
    """Bring a possibly-string value to the type of its default."""
    if isinstance(default, tuple):
        if isinstance(value, (tuple, list)):
            return tuple(int(v) for v in value)
        return tuple(int(part) for part in str(value).replace(",", " ").split())
    if isinstance(default, bool):
        return str(value).lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return str(value)


def normalize_hyperparams(kind: str, overrides: Mapping[str, object] | None) -> dict:
    """Fill defaults for the kind and type-coerce overrides; rejects unknown keys."""
    if kind not in KINDS:
        raise ConfigurationError(f"unknown model kind {kind!r}; valid kinds: {', '.join(KINDS)}")
    merged = dict(_DEFAULTS[kind])
    for key, value in (overrides or {}).items():
        if key not in merged:
            raise ConfigurationError(f"unknown {kind} hyperparameter {key!r}")
        try:
            merged[key] = _coerce(key, value, merged[key])
        except (TypeError, ValueError):
            raise ConfigurationError(f"bad value for {kind} hyperparameter {key!r}: {value!r}") from None
    return merged


@dataclass(frozen=True)
class ClassifierSpec:
    """What to train: model kind, hyperparameter overrides, seed."""

    kind: str
    hyperparams: dict = field(default_factory=dict)
    seed: int = 42
    standardize: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(
                f"unknown model kind {self.kind!r}; valid kinds: {', '.join(KINDS)}"
            )


@dataclass(frozen=True)
class ModelMetadata:
    kind: str
    seed: int
    standardize: bool
    hyperparams: dict
    data_source: str
    data_rows: int
    schema_fingerprint: str
    split: SplitConfig | None = None


@dataclass(frozen=True)
class TrainedModel:
    kind: str
    params: object
    encoding: EncodingSpec
    standardization: StandardizationParams | None
    metadata: ModelMetadata
    schema: FeatureSchema = DEFAULT_SCHEMA


@dataclass(frozen=True)
class PredictionOutput:
    label: int
    score: float


def _fit_kind(kind: str, X: np.ndarray, y: np.ndarray, hp: dict, seed: int):
    if kind == "logreg":
        return logreg_mod.fit(X, y, logreg_mod.LogRegParams(**hp))
    if kind == "knn":
        return knn_mod.fit_knn(X, y, hp["k"], hp["metric"], hp["weighting"])
    if kind == "svm":
        kernel = svm_mod.KernelSpec(hp["kernel"], hp["gamma"] if hp["kernel"] == "rbf" else None)
        return svm_mod.fit_smo(
            X, y, kernel, C=hp["C"], smo_tol=hp["smo_tol"], max_passes=hp["max_passes"], seed=seed
        )
    cfg_fields = {k: v for k, v in hp.items() if k != "hidden_widths"}
    cfg = mlp_mod.MlpTrainConfig(seed=seed, **cfg_fields)
    arch = mlp_mod.MlpArchitecture(layer_widths=(X.shape[1], *hp["hidden_widths"], 1))
    net, _history = mlp_mod.train(X, y, cfg, arch)
    return net


def train(
    spec: ClassifierSpec, train_data: Dataset, split: SplitConfig | None = None
) -> TrainedModel:
    """Validate, encode, standardize, and fit the requested model kind.

    ``split`` is recorded in metadata when the caller carved the training set
    out of a larger file, so evaluation can reconstruct the same partition.
    """
    report = validate(train_data)
    if not report.is_valid:
        first = report.row_errors[0]
        raise TrainingError(
            f"training data failed validation ({len(report.row_errors)} errors; "
            f"first: row {first.row}, {first.column}: {first.rule})"
        )
    y = train_data.target.astype(np.int64)
    if np.unique(y).size < 2:
        raise TrainingError("training data must contain both classes")

    hp = normalize_hyperparams(spec.kind, spec.hyperparams)
    enc = default_encoding_spec(train_data.schema)
    X = encode_matrix(train_data.features, train_data.schema, enc)
    std = None
    if spec.standardize:
        std = fit_standardize(X, enc.numeric_indices)
        X = apply_standardize(X, std)

    params = _fit_kind(spec.kind, X, y, hp, spec.seed)
    metadata = ModelMetadata(
        kind=spec.kind,
        seed=spec.seed,
        standardize=spec.standardize,
        hyperparams=hp,
        data_source=train_data.provenance.source,
        data_rows=train_data.provenance.n_rows,
        schema_fingerprint=train_data.schema.fingerprint(),
        split=split,
    )
    return TrainedModel(
        kind=spec.kind,
        params=params,
        encoding=enc,
        standardization=std,
        metadata=metadata,
        schema=train_data.schema,
    )


def _scores(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Model-specific score in [0, 1] for encoded, standardized rows."""
    if model.kind == "logreg":
        return logreg_mod.predict_proba(model.params, X)
    if model.kind == "knn":
        _labels, scores = knn_mod.predict_batch(model.params, X)
        return scores
    if model.kind == "svm":
        return logreg_mod.sigmoid(svm_mod.decision_function(model.params, X))
    return mlp_mod.predict_proba(model.params, X)


def _prepare(model: TrainedModel, raw: np.ndarray) -> np.ndarray:
    X = encode_matrix(raw, model.schema, model.encoding)
    if model.standardization is not None:
        X = apply_standardize(X, model.standardization)
    return X


def predict_matrix(
    model: TrainedModel, raw_features: np.ndarray, threshold: float = DEFAULT_THRESHOLD
) -> tuple[np.ndarray, np.ndarray]:
    """Labels and scores for raw (unencoded) feature rows."""
    scores = _scores(model, _prepare(model, np.asarray(raw_features, dtype=np.float64)))
    return (scores >= threshold).astype(np.int64), scores


def row_from_mapping(record: Mapping[str, object], schema: FeatureSchema) -> np.ndarray:
    """Order a name->value record into a raw feature row, checking the schema."""
    names = [c.name for c in schema.feature_columns]
    for key in record:
        if key not in names:
            raise InputError(f"unknown field {key!r}")
    row = np.empty(len(names))
    for i, name in enumerate(names):
        if name not in record:
            raise InputError(f"missing field {name!r}")
        try:
            row[i] = float(record[name])  # type: ignore[arg-type]
        except (TypeError, ValueError):
            raise InputError(f"field {name!r}: cannot parse {record[name]!r}") from None
    return row


def _check_row(row: np.ndarray, schema: FeatureSchema) -> None:
    for i, col in enumerate(schema.feature_columns):
        v = row[i]
        if col.domain is not None:
            if v not in col.domain:
                raise InputError(f"field {col.name!r}: value {v} not in domain {set(col.domain)}")
        elif not np.isfinite(v):
            raise InputError(f"field {col.name!r}: value must be finite")


def predict(
    model: TrainedModel,
    raw_row: Mapping[str, object] | Sequence[float] | np.ndarray,
    threshold: float = DEFAULT_THRESHOLD,
) -> PredictionOutput:
    """Score one raw record; label is 1 exactly when score >= threshold."""
    if isinstance(raw_row, Mapping):
        row = row_from_mapping(raw_row, model.schema)
    else:
        row = np.asarray(raw_row, dtype=np.float64)
        if row.shape != (len(model.schema.feature_columns),):
            raise InputError(
                f"expected {len(model.schema.feature_columns)} feature values, got {row.shape}"
            )
    _check_row(row, model.schema)
    _labels, scores = predict_matrix(model, row.reshape(1, -1), threshold)
    score = float(scores[0])
    return PredictionOutput(label=int(score >= threshold), score=score)


def accuracy_on(model: TrainedModel, data: Dataset, threshold: float = DEFAULT_THRESHOLD) -> float:
    labels, _scores = predict_matrix(model, data.features, threshold)
    return float(np.mean(labels == data.target.astype(np.int64)))


def save(model: TrainedModel, path: str) -> None:
    """Write the model artifact; see the persistence module for the format."""
    from .persistence import encode_artifact

    with open(path, "wb") as fh:
        fh.write(encode_artifact(model))


def load(path: str) -> TrainedModel:
    """Read a model artifact written by :func:`save`."""
    from .persistence import decode_artifact

    with open(path, "rb") as fh:
        return decode_artifact(fh.read())
