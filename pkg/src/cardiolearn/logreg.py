"""Binary logistic regression trained by full-batch gradient descent with L2 penalty."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DivergenceError, ShapeError, TrainingError

PROB_CLAMP = 1e-12
MAX_HALVINGS = 60


@dataclass(frozen=True)
class LogRegParams:
    """Hyperparameters plus, after fitting, the weight vector and bias.

    The bias is never penalized. ``loss_history`` records the accepted loss at
    each iteration and is training metadata, not part of the model artifact.
    """

    l2_lambda: float = 0.01
    learning_rate: float = 0.1
    max_iters: int = 5000
    tol: float = 1e-6
    weights: np.ndarray | None = None
    bias: float = 0.0
    loss_history: tuple[float, ...] = ()

    def __post_init__(self):
        if self.l2_lambda < 0 or self.learning_rate <= 0 or self.max_iters < 1 or self.tol < 0:
            raise TrainingError("invalid logistic-regression hyperparameters")
        if self.weights is not None:
            self.weights.setflags(write=False)


def sigmoid(z):
    """Logistic link 1 / (1 + exp(-z)); overflow-safe for large |z|."""
    scalar = np.ndim(z) == 0
    arr = np.atleast_1d(np.asarray(z, dtype=np.float64))
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ez = np.exp(arr[~pos])
    out[~pos] = ez / (1.0 + ez)
    return float(out[0]) if scalar else out


def loss_and_gradient(
    weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, l2_lambda: float
) -> tuple[float, np.ndarray, float]:
    """Mean binary cross-entropy plus (lambda/2)||w||^2, with its exact gradient."""
    n = X.shape[0]
    p = sigmoid(X @ weights + bias)
    p_safe = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    bce = -np.mean(y * np.log(p_safe) + (1.0 - y) * np.log(1.0 - p_safe))
    loss = bce + 0.5 * l2_lambda * float(weights @ weights)
    residual = p - y
    grad_w = X.T @ residual / n + l2_lambda * weights
    grad_b = float(residual.mean())
    return float(loss), grad_w, grad_b


def fit(X: np.ndarray, y: np.ndarray, hp: LogRegParams) -> LogRegParams:
    """Minimize the penalized cross-entropy from zero initialization.

    Each iteration takes a gradient step at the configured learning rate,
    halving the step while the loss would increase, so the recorded loss
    sequence is non-increasing. Stops when the gradient max-norm drops below
    ``tol`` or after ``max_iters`` iterations.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.unique(y).size < 2:
        raise TrainingError("training data must contain both classes")

    w = np.zeros(X.shape[1])
    b = 0.0
    loss, grad_w, grad_b = loss_and_gradient(w, b, X, y, hp.l2_lambda)
    history = [loss]

    for iteration in range(hp.max_iters):
        if not np.isfinite(loss):
            raise DivergenceError(f"non-finite loss at iteration {iteration}")
        grad_norm = max(float(np.abs(grad_w).max(initial=0.0)), abs(grad_b))
        if grad_norm < hp.tol:
            break

        step = hp.learning_rate
        for _ in range(MAX_HALVINGS):
            w_new = w - step * grad_w
            b_new = b - step * grad_b
            new_loss, new_grad_w, new_grad_b = loss_and_gradient(
                w_new, b_new, X, y, hp.l2_lambda
            )
            if np.isfinite(new_loss) and new_loss <= loss:
                break
            step *= 0.5
        else:
            break  # no step this small improves: numerically converged

        w, b = w_new, b_new
        loss, grad_w, grad_b = new_loss, new_grad_w, new_grad_b
        history.append(loss)

    return replace(
        hp, weights=w, bias=float(b), loss_history=tuple(history)
    )


def predict_proba(params: LogRegParams, x: np.ndarray):
    """sigmoid(w . x + b) for a single row or a matrix of rows."""
    if params.weights is None:
        raise TrainingError("model is not fitted")
    x = np.asarray(x, dtype=np.float64)
    width = x.shape[-1] if x.ndim else 0
    if x.ndim not in (1, 2) or width != params.weights.shape[0]:
        raise ShapeError(f"input width {width} does not match weights {params.weights.shape[0]}")
    z = x @ params.weights + params.bias
    return sigmoid(z) if x.ndim == 2 else float(sigmoid(z))
