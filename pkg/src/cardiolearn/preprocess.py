"""Nominal encoding, train-statistics standardization, and the stratified 80/20 split."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import NOMINAL, Dataset, FeatureSchema
from .errors import (
    ConfigurationError,
    DegenerateFeatureError,
    EncodingError,
    InsufficientDataError,
    ShapeError,
    StratificationError,
)


@dataclass(frozen=True)
class EncodingSpec:
    """How raw columns map to model features.

    Nominal columns with more than two levels expand to one indicator column
    per level (no reference level is dropped); two-level nominals and numerics
    pass through. ``output_layout`` lists the derived feature names in order.
    """

    one_hot_columns: tuple[str, ...]
    passthrough_columns: tuple[str, ...]
    output_layout: tuple[str, ...]
    numeric_indices: tuple[int, ...]


def default_encoding_spec(schema: FeatureSchema) -> EncodingSpec:
    """Derive the encoding layout from the schema, preserving column order."""
    one_hot = []
    passthrough = []
    layout: list[str] = []
    numeric_idx: list[int] = []
    for col in schema.feature_columns:
        if col.kind == NOMINAL and len(col.domain) > 2:
            one_hot.append(col.name)
            layout.extend(f"{col.name}={level}" for level in col.domain)
        else:
            passthrough.append(col.name)
            if col.kind != NOMINAL:
                numeric_idx.append(len(layout))
            layout.append(col.name)
    return EncodingSpec(
        one_hot_columns=tuple(one_hot),
        passthrough_columns=tuple(passthrough),
        output_layout=tuple(layout),
        numeric_indices=tuple(numeric_idx),
    )


def encode_matrix(raw: np.ndarray, schema: FeatureSchema, spec: EncodingSpec) -> np.ndarray:
    """Encode raw feature rows (n x 11) into the derived layout.

    Raises :class:`EncodingError` naming the first out-of-domain nominal cell.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2 or raw.shape[1] != len(schema.feature_columns):
        raise ShapeError(f"expected n x {len(schema.feature_columns)} raw matrix, got {raw.shape}")
    out = np.zeros((raw.shape[0], len(spec.output_layout)), dtype=np.float64)
    pos = 0
    for j, col in enumerate(schema.feature_columns):
        column = raw[:, j]
        if col.name in spec.one_hot_columns:
            bad = np.flatnonzero(~np.isin(column, col.domain))
            if bad.size:
                i = int(bad[0])
                raise EncodingError(
                    f"row {i}, column {col.name!r}: value {column[i]} not in domain"
                )
            for level in col.domain:
                out[:, pos] = column == level
                pos += 1
        else:
            if col.kind == NOMINAL:
                bad = np.flatnonzero(~np.isin(column, col.domain))
                if bad.size:
                    i = int(bad[0])
                    raise EncodingError(
                        f"row {i}, column {col.name!r}: value {column[i]} not in domain"
                    )
            out[:, pos] = column
            pos += 1
    return out


def encode(d: Dataset, spec: EncodingSpec | None = None) -> tuple[np.ndarray, tuple[str, ...]]:
    """Encode a dataset's features; returns the matrix and its column layout."""
    if spec is None:
        spec = default_encoding_spec(d.schema)
    return encode_matrix(d.features, d.schema, spec), spec.output_layout


@dataclass(frozen=True)
class StandardizationParams:
    """Per-column centering/scaling statistics fitted on training rows only."""

    means: np.ndarray
    stds: np.ndarray
    applies_to: tuple[int, ...]
    n_features: int

    def __post_init__(self):
        self.means.setflags(write=False)
        self.stds.setflags(write=False)


def fit_standardize(train_matrix: np.ndarray, numeric_indices: tuple[int, ...]) -> StandardizationParams:
    """Fit means and population stds of the indexed columns on training rows."""
    m = np.asarray(train_matrix, dtype=np.float64)
    if m.shape[0] < 2:
        raise InsufficientDataError("standardization needs at least 2 training rows")
    idx = tuple(int(i) for i in numeric_indices)
    means = m[:, idx].mean(axis=0)
    stds = m[:, idx].std(axis=0)
    for k, s in enumerate(stds):
        if s == 0.0:
            raise DegenerateFeatureError(f"column {idx[k]} has zero variance")
    return StandardizationParams(
        means=means.copy(), stds=stds.copy(), applies_to=idx, n_features=m.shape[1]
    )


def apply_standardize(matrix: np.ndarray, params: StandardizationParams) -> np.ndarray:
    """Map the indexed columns through (x - mean) / std; other columns pass through."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[1] != params.n_features:
        raise ShapeError(
            f"matrix width {m.shape[1] if m.ndim == 2 else m.shape} does not match "
            f"fitted width {params.n_features}"
        )
    out = m.copy()
    idx = list(params.applies_to)
    out[:, idx] = (out[:, idx] - params.means) / params.stds
    return out


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.8
    seed: int = 42
    stratify: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigurationError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def split_indices(labels: np.ndarray, config: SplitConfig) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic train/test index partition; stratified by label when asked.

    The train side gets exactly round(train_fraction * n) rows. Under
    stratification each class contributes floor(fraction * n_c) rows plus
    remainder slots handed out by largest fractional part, ties broken by a
    seeded shuffle, so per-class proportions are off by at most one row.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    n_train = _round_half_up(config.train_fraction * n)
    rng = np.random.default_rng(config.seed)

    if not config.stratify:
        perm = rng.permutation(n)
        return np.sort(perm[:n_train]), np.sort(perm[n_train:])

    classes = np.unique(labels)
    if classes.size < 2:
        raise StratificationError("stratified split needs both classes present")

    base = {}
    remainders = []
    for c in classes:
        n_c = int(np.sum(labels == c))
        exact = config.train_fraction * n_c
        base[c] = int(np.floor(exact))
        remainders.append((c, exact - np.floor(exact)))
    extra = n_train - sum(base.values())
    # Seeded shuffle decides ties between equal fractional remainders.
    rng.shuffle(remainders)
    remainders.sort(key=lambda t: -t[1])
    for c, _ in remainders[:extra]:
        base[c] += 1

    train_parts = []
    test_parts = []
    for c in classes:
        members = np.flatnonzero(labels == c)
        perm = rng.permutation(members.size)
        take = base[c]
        train_parts.append(members[perm[:take]])
        test_parts.append(members[perm[take:]])
    return (
        np.sort(np.concatenate(train_parts)),
        np.sort(np.concatenate(test_parts)),
    )


def stratified_split(d: Dataset, config: SplitConfig) -> tuple[Dataset, Dataset]:
    """Split a dataset into train/test per the config; row order is preserved."""
    if d.n_rows < 5:
        raise InsufficientDataError(f"need at least 5 rows to split, got {d.n_rows}")
    train_idx, test_idx = split_indices(d.target, config)
    return d.subset(train_idx, "train"), d.subset(test_idx, "test")
