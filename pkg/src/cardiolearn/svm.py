"""Soft-margin SVM with linear and RBF kernels, trained by simplified SMO.

The trainer sweeps the examples, picks Karush-Kuhn-Tucker violators, draws the
second working index at random (seeded), and solves each two-variable dual
subproblem analytically with box clipping. The randomized partner choice
trades Platt's second-choice heuristic for simplicity; on ~1000-row problems
convergence is quick and the seed keeps runs reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ShapeError, TrainingError

KERNEL_KINDS = ("linear", "rbf")

#: Minimum change in an alpha for an update to count, per the simplified
#: algorithm; prevents endless rounding-scale updates.
MIN_ALPHA_STEP = 1e-5

#: Random partner draws attempted per violator before moving on; a single
#: draw can stall on pairs whose box section is a point (L == H).
PARTNER_RETRIES = 10

DEFAULT_SWEEP_CAP = 1000


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float | None = 1.0 / 19.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ConfigurationError(f"kernel must be one of {KERNEL_KINDS}, got {self.kind!r}")
        if self.kind == "rbf":
            if self.gamma is None or not np.isfinite(self.gamma) or self.gamma <= 0:
                raise ConfigurationError(f"rbf kernel needs gamma > 0, got {self.gamma}")


def kernel_eval(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> float:
    """Kernel value for two rows: dot product, or exp(-gamma * ||a-b||^2)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError(f"rows must share a width, got {a.shape} and {b.shape}")
    if spec.kind == "linear":
        return float(a @ b)
    return float(np.exp(-spec.gamma * ((a - b) ** 2).sum()))


def kernel_columns(spec: KernelSpec, stored: np.ndarray, query: np.ndarray) -> np.ndarray:
    """K(stored_i, query) for every stored row, via the direct formulas."""
    if spec.kind == "linear":
        return stored @ query
    return np.exp(-spec.gamma * ((stored - query) ** 2).sum(axis=1))


def _kernel_matrix(spec: KernelSpec, X: np.ndarray) -> np.ndarray:
    if spec.kind == "linear":
        return X @ X.T
    sq = (X**2).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.clip(d2, 0.0, None, out=d2)
    return np.exp(-spec.gamma * d2)


@dataclass(frozen=True)
class SvmModel:
    """Support vectors with their dual coefficients and the trained bias.

    ``converged`` is False when the sweep cap was hit before the required run
    of clean sweeps; prediction still works, per the soft-failure contract.
    """

    support_vectors: np.ndarray
    alphas: np.ndarray
    signed_labels: np.ndarray
    bias: float
    kernel: KernelSpec
    C: float
    smo_tol: float
    max_passes: int
    converged: bool = True
    n_sweeps: int = 0
    sweep_objectives: tuple[float, ...] = ()
    update_objectives: tuple[float, ...] = ()

    def __post_init__(self):
        self.support_vectors.setflags(write=False)
        self.alphas.setflags(write=False)
        self.signed_labels.setflags(write=False)


def _dual_objective(alphas: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    v = alphas * y
    return float(alphas.sum() - 0.5 * v @ K @ v)


def fit_smo(
    X: np.ndarray,
    y01: np.ndarray,
    kernel: KernelSpec | None = None,
    C: float = 1.0,
    smo_tol: float = 1e-3,
    max_passes: int = 5,
    seed: int = 0,
    sweep_cap: int = DEFAULT_SWEEP_CAP,
    record_objective: bool = False,
    min_alpha_step: float = MIN_ALPHA_STEP,
) -> SvmModel:
    """Train on 0/1 labels (mapped internally to -1/+1).

    Terminates after ``max_passes`` consecutive sweeps with zero accepted
    updates; hitting ``sweep_cap`` first marks the model as not converged.
    ``record_objective`` additionally tracks the dual objective after every
    accepted update (O(n^2) each, intended for small test instances).
    """
    if kernel is None:
        kernel = KernelSpec()
    if C <= 0:
        raise ConfigurationError(f"C must be positive, got {C}")
    X = np.asarray(X, dtype=np.float64)
    y01 = np.asarray(y01)
    classes = np.unique(y01)
    if not np.isin(classes, (0, 1)).all() or classes.size < 2:
        raise TrainingError("SMO needs binary 0/1 labels with both classes present")
    y = np.where(y01 == 1, 1.0, -1.0)

    n = X.shape[0]
    K = _kernel_matrix(kernel, X)
    alphas = np.zeros(n)
    b = 0.0
    rng = np.random.default_rng(seed)

    clean_passes = 0
    sweeps = 0
    sweep_objectives: list[float] = []
    update_objectives: list[float] = []

    while clean_passes < max_passes and sweeps < sweep_cap:
        f = K @ (alphas * y) + b  # fresh margins each sweep; updated incrementally below
        changed = 0
        r_all = y * (f - y)
        no_violators = not np.any(
            ((r_all < -smo_tol) & (alphas < C)) | ((r_all > smo_tol) & (alphas > 0))
        )
        scan = () if no_violators else range(n)
        for i in scan:
            e_i = f[i] - y[i]
            r_i = y[i] * e_i
            if not ((r_i < -smo_tol and alphas[i] < C) or (r_i > smo_tol and alphas[i] > 0)):
                continue
            for _attempt in range(min(n - 1, PARTNER_RETRIES)):
                j = int(rng.integers(n - 1))
                if j >= i:
                    j += 1
                e_j = f[j] - y[j]
                a_i, a_j = alphas[i], alphas[j]
                if y[i] != y[j]:
                    low, high = max(0.0, a_j - a_i), min(C, C + a_j - a_i)
                else:
                    low, high = max(0.0, a_i + a_j - C), min(C, a_i + a_j)
                if low == high:
                    continue
                eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
                if eta >= 0:
                    continue
                a_j_new = a_j - y[j] * (e_i - e_j) / eta
                a_j_new = min(high, max(low, a_j_new))
                if abs(a_j_new - a_j) < min_alpha_step:
                    continue
                a_i_new = a_i + y[i] * y[j] * (a_j - a_j_new)
                a_i_new = min(C, max(0.0, a_i_new))

                b1 = b - e_i - y[i] * (a_i_new - a_i) * K[i, i] - y[j] * (a_j_new - a_j) * K[i, j]
                b2 = b - e_j - y[i] * (a_i_new - a_i) * K[i, j] - y[j] * (a_j_new - a_j) * K[j, j]
                if 0.0 < a_i_new < C:
                    b_new = b1
                elif 0.0 < a_j_new < C:
                    b_new = b2
                else:
                    b_new = 0.5 * (b1 + b2)

                f += (
                    (a_i_new - a_i) * y[i] * K[i]
                    + (a_j_new - a_j) * y[j] * K[j]
                    + (b_new - b)
                )
                alphas[i], alphas[j], b = a_i_new, a_j_new, b_new
                changed += 1
                if record_objective:
                    update_objectives.append(_dual_objective(alphas, y, K))
                break

        sweeps += 1
        clean_passes = clean_passes + 1 if changed == 0 else 0
        sweep_objectives.append(_dual_objective(alphas, y, K))

    keep = alphas > 0.0
    return SvmModel(
        support_vectors=X[keep].copy(),
        alphas=alphas[keep].copy(),
        signed_labels=y[keep].copy(),
        bias=float(b),
        kernel=kernel,
        C=float(C),
        smo_tol=float(smo_tol),
        max_passes=int(max_passes),
        converged=clean_passes >= max_passes,
        n_sweeps=sweeps,
        sweep_objectives=tuple(sweep_objectives),
        update_objectives=tuple(update_objectives),
    )


def decision_function(model: SvmModel, x: np.ndarray):
    """sum_i alpha_i y_i K(s_i, x) + bias for one row or a matrix of rows."""
    x = np.asarray(x, dtype=np.float64)
    width = model.support_vectors.shape[1]
    if x.ndim == 1:
        if x.shape[0] != width:
            raise ShapeError(f"query width {x.shape[0]} does not match stored {width}")
        if model.alphas.size == 0:
            return float(model.bias)
        cols = kernel_columns(model.kernel, model.support_vectors, x)
        return float((model.alphas * model.signed_labels) @ cols + model.bias)
    if x.ndim != 2 or x.shape[1] != width:
        raise ShapeError(f"query width {x.shape} does not match stored {width}")
    return np.array([decision_function(model, row) for row in x])


def predict(model: SvmModel, x: np.ndarray):
    """Class labels from the sign of the decision value (0/1 encoding)."""
    value = decision_function(model, x)
    if np.ndim(value) == 0:
        return int(value >= 0.0)
    return (value >= 0.0).astype(np.int64)
