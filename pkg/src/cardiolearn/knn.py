"""K-nearest-neighbors classifier over the encoded feature space.

Neighbor search is an exhaustive scan: at ~1000 stored rows a full distance
pass costs microseconds, and exactness keeps the tie-break contract testable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ShapeError

METRICS = ("euclidean", "manhattan")
WEIGHTINGS = ("uniform", "inverse_distance")

INVERSE_DISTANCE_EPS = 1e-10


@dataclass(frozen=True)
class KnnModel:
    """Stored training matrix and labels plus the voting configuration."""

    points: np.ndarray
    labels: np.ndarray
    k: int
    metric: str = "euclidean"
    weighting: str = "uniform"

    def __post_init__(self):
        if self.points.ndim != 2 or self.labels.shape != (self.points.shape[0],):
            raise ShapeError("stored matrix and labels must be n x d and length n")
        if not 1 <= self.k <= self.points.shape[0]:
            raise ConfigurationError(
                f"k must be in [1, {self.points.shape[0]}], got {self.k}"
            )
        if self.metric not in METRICS:
            raise ConfigurationError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.weighting not in WEIGHTINGS:
            raise ConfigurationError(
                f"weighting must be one of {WEIGHTINGS}, got {self.weighting!r}"
            )
        self.points.setflags(write=False)
        self.labels.setflags(write=False)


def fit_knn(
    X: np.ndarray, y: np.ndarray, k: int, metric: str = "euclidean", weighting: str = "uniform"
) -> KnnModel:
    """Memorize the training rows; all work happens at query time."""
    return KnnModel(
        points=np.array(X, dtype=np.float64),
        labels=np.array(y, dtype=np.int64),
        k=int(k),
        metric=metric,
        weighting=weighting,
    )


def _distances(model: KnnModel, query: np.ndarray) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (model.points.shape[1],):
        raise ShapeError(f"query width {q.shape} does not match stored {model.points.shape[1]}")
    diff = model.points - q
    if model.metric == "euclidean":
        return np.sqrt((diff**2).sum(axis=1))
    return np.abs(diff).sum(axis=1)


def kneighbors(model: KnnModel, query: np.ndarray, k: int) -> list[tuple[int, float]]:
    """The k nearest stored rows as (index, distance), distance ascending.

    Equal distances are broken in favor of the lower stored index.
    """
    if not 1 <= k <= model.points.shape[0]:
        raise ConfigurationError(f"k must be in [1, {model.points.shape[0]}], got {k}")
    dist = _distances(model, query)
    order = np.argsort(dist, kind="stable")[:k]
    return [(int(i), float(dist[i])) for i in order]


def predict_label(model: KnnModel, query: np.ndarray) -> tuple[int, float]:
    """Vote among the k nearest rows; returns (label, positive share).

    Uniform weighting is a majority vote with the positive-vote fraction as
    score; inverse-distance weights votes by 1/(d + eps). An exactly tied
    vote falls back to the single nearest neighbor's label.
    """
    neighbors = kneighbors(model, query, model.k)
    idx = np.array([i for i, _ in neighbors])
    votes = model.labels[idx]
    if model.weighting == "uniform":
        weights = np.ones(len(neighbors))
    else:
        d = np.array([d for _, d in neighbors])
        weights = 1.0 / (d + INVERSE_DISTANCE_EPS)
    pos = float(weights[votes == 1].sum())
    neg = float(weights[votes == 0].sum())
    score = pos / (pos + neg)
    if pos > neg:
        label = 1
    elif neg > pos:
        label = 0
    else:
        label = int(model.labels[idx[0]])
    return label, score


def predict_batch(model: KnnModel, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized convenience over rows; semantics identical to predict_label."""
    queries = np.asarray(queries, dtype=np.float64)
    labels = np.empty(queries.shape[0], dtype=np.int64)
    scores = np.empty(queries.shape[0], dtype=np.float64)
    for i, q in enumerate(queries):
        labels[i], scores[i] = predict_label(model, q)
    return labels, scores
