"""Stratified k-fold cross-validated grid search over hyperparameter products.

Each (candidate, fold) job derives its own seed from (global seed, candidate
index, fold index), so results are identical whether jobs run serially or in
parallel, and preprocessing is refit inside every fold to avoid leakage.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .classifier import ClassifierSpec, KINDS, accuracy_on, train
from .dataset import Dataset
from .errors import CardioLearnError, ConfigurationError, StratificationError, TrainingError

MAX_GRID_SIZE = 10_000

DEFAULT_GRID_AXES = {
    "logreg": {
        "l2_lambda": [0.0001, 0.001, 0.01, 0.1, 1.0],
        "learning_rate": [0.01, 0.1, 0.5],
    },
    "knn": {
        "k": list(range(1, 31)),
        "metric": ["euclidean", "manhattan"],
        "weighting": ["uniform", "inverse_distance"],
    },
    "svm": {
        "C": [0.1, 1.0, 10.0, 100.0],
        "gamma": [0.001, 0.01, 0.1, 1.0],
        "kernel": ["linear", "rbf"],
    },
    "mlp": {
        "dropout_rate": [0.2, 0.5],
        "adam_lr": [0.0005, 0.001],
    },
}


@dataclass(frozen=True)
class ParamGrid:
    """Named axes of candidate values; the candidate set is their product."""

    kind: str
    axes: dict[str, list]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown model kind {self.kind!r}")
        if not self.axes:
            raise ConfigurationError("grid needs at least one axis")
        size = 1
        for name, values in self.axes.items():
            if not values:
                raise ConfigurationError(f"grid axis {name!r} is empty")
            size *= len(values)
        if size > MAX_GRID_SIZE:
            raise ConfigurationError(f"grid has {size} candidates, limit is {MAX_GRID_SIZE}")

    def candidates(self) -> list[dict]:
        """All axis combinations, iterated with the last axis fastest."""
        names = list(self.axes)
        return [
            dict(zip(names, combo))
            for combo in itertools.product(*(self.axes[n] for n in names))
        ]


def default_grid(kind: str) -> ParamGrid:
    if kind not in DEFAULT_GRID_AXES:
        raise ConfigurationError(f"unknown model kind {kind!r}")
    return ParamGrid(kind, {k: list(v) for k, v in DEFAULT_GRID_AXES[kind].items()})


@dataclass(frozen=True)
class CvConfig:
    folds: int = 5
    stratified: bool = True
    seed: int = 42
    scoring: str = "accuracy"

    def __post_init__(self):
        if self.folds < 2:
            raise ConfigurationError(f"folds must be >= 2, got {self.folds}")
        if self.scoring != "accuracy":
            raise ConfigurationError(f"unsupported scoring {self.scoring!r}")


def kfold_indices(labels: np.ndarray, cfg: CvConfig) -> list[np.ndarray]:
    """Disjoint index folds; stratification keeps per-class counts within 1."""
    labels = np.asarray(labels)
    n = labels.shape[0]
    if cfg.folds > n:
        raise ConfigurationError(f"cannot make {cfg.folds} folds from {n} rows")
    rng = np.random.default_rng(cfg.seed)

    if not cfg.stratified:
        chunks = np.array_split(rng.permutation(n), cfg.folds)
        return [np.sort(c) for c in chunks]

    buckets: list[list[int]] = [[] for _ in range(cfg.folds)]
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if members.size < cfg.folds:
            raise StratificationError(
                f"class {c} has {members.size} rows, fewer than {cfg.folds} folds"
            )
        for i, idx in enumerate(rng.permutation(members)):
            buckets[i % cfg.folds].append(int(idx))
    return [np.sort(np.array(b, dtype=np.intp)) for b in buckets]


@dataclass(frozen=True)
class CandidateResult:
    params: dict
    fold_scores: tuple[float, ...]
    mean_score: float
    std_score: float
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class GridSearchResult:
    kind: str
    candidates: tuple[CandidateResult, ...]
    best_index: int
    axis_names: tuple[str, ...]
    folds: int

    @property
    def best_candidate(self) -> CandidateResult:
        return self.candidates[self.best_index]

    @property
    def best_params(self) -> dict:
        return dict(self.best_candidate.params)

    @property
    def best_mean_score(self) -> float:
        return self.best_candidate.mean_score

    def to_csv(self) -> str:
        """One row per candidate: axes, mean/std, per-fold scores, error marker."""
        fold_headers = [f"fold_{i}" for i in range(self.folds)]
        header = ["candidate", *self.axis_names, "mean_score", "std_score", *fold_headers, "error"]
        lines = [",".join(header)]
        for i, cand in enumerate(self.candidates):
            cells = [str(i)]
            cells += [str(cand.params[a]) for a in self.axis_names]
            if cand.failed:
                cells += ["", ""] + [""] * self.folds + [cand.error.replace(",", ";")]
            else:
                cells += [repr(cand.mean_score), repr(cand.std_score)]
                cells += [repr(s) for s in cand.fold_scores]
                cells += [""]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def derived_seed(global_seed: int, candidate_index: int, fold_index: int) -> int:
    """Stable per-job seed; independent of evaluation order."""
    ss = np.random.SeedSequence([global_seed, candidate_index, fold_index])
    return int(ss.generate_state(1)[0])


def grid_search(
    grid: ParamGrid, data: Dataset, cfg: CvConfig, standardize: bool = True
) -> GridSearchResult:
    """Score every candidate by mean held-out-fold accuracy and pick the best.

    Ties go to the earliest candidate in grid-iteration order. A candidate
    whose training raises is recorded with the error text and excluded from
    best-selection; it only becomes fatal if every candidate fails.
    """
    labels = data.target.astype(np.int64)
    folds = kfold_indices(labels, cfg)
    all_indices = np.arange(data.n_rows)

    results: list[CandidateResult] = []
    for cand_idx, params in enumerate(grid.candidates()):
        scores: list[float] = []
        error: str | None = None
        for fold_idx, held_out in enumerate(folds):
            train_idx = np.setdiff1d(all_indices, held_out, assume_unique=False)
            spec = ClassifierSpec(
                kind=grid.kind,
                hyperparams=params,
                seed=derived_seed(cfg.seed, cand_idx, fold_idx),
                standardize=standardize,
            )
            try:
                model = train(spec, data.subset(train_idx, f"cv-train{fold_idx}"))
                scores.append(accuracy_on(model, data.subset(held_out, f"cv-test{fold_idx}")))
            except CardioLearnError as exc:
                error = f"{type(exc).__name__}: {exc}"
                break
        if error is not None:
            results.append(CandidateResult(dict(params), (), float("nan"), float("nan"), error))
        else:
            arr = np.array(scores)
            results.append(
                CandidateResult(dict(params), tuple(scores), float(arr.mean()), float(arr.std()))
            )

    best_index = -1
    best_score = -np.inf
    for i, cand in enumerate(results):
        if not cand.failed and cand.mean_score > best_score:
            best_index = i
            best_score = cand.mean_score
    if best_index < 0:
        raise TrainingError("every grid candidate failed to train")

    return GridSearchResult(
        kind=grid.kind,
        candidates=tuple(results),
        best_index=best_index,
        axis_names=tuple(grid.axes),
        folds=cfg.folds,
    )
