"""Feed-forward network: leaky-ReLU hidden layers, sigmoid output, inverted
dropout, L2 penalty, Adam, early stopping, and plateau learning-rate decay.

Everything is plain numpy; mini-batch order, dropout masks, and weight
initialization all come from one seeded generator, so a (config, seed) pair
reproduces training bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, DivergenceError, ShapeError, TrainingError
from .logreg import sigmoid
from .preprocess import SplitConfig, split_indices

PROB_CLAMP = 1e-12
LEAKY_SLOPE = 0.01
PLATEAU_MIN_DELTA = 1e-4


@dataclass(frozen=True)
class MlpArchitecture:
    """Layer widths from input to the single sigmoid output unit."""

    layer_widths: tuple[int, ...] = (19, 32, 16, 1)
    negative_slope: float = LEAKY_SLOPE

    def __post_init__(self):
        if len(self.layer_widths) < 3:
            raise ConfigurationError("need at least one hidden layer")
        if self.layer_widths[-1] != 1:
            raise ConfigurationError("output layer width must be 1")
        if any(w < 1 for w in self.layer_widths):
            raise ConfigurationError("layer widths must be positive")


@dataclass(frozen=True)
class MlpTrainConfig:
    adam_lr: float = 0.0005
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 20
    dropout_rate: float = 0.2
    l2_lambda: float = 0.001
    max_epochs: int = 500
    early_stop_patience: int = 20
    plateau_factor: float = 0.5
    plateau_patience: int = 5
    min_lr: float = 1e-6
    validation_fraction: float = 0.2
    seed: int = 42

    def __post_init__(self):
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigurationError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if not 0.0 < self.plateau_factor < 1.0:
            raise ConfigurationError(f"plateau_factor must be in (0, 1), got {self.plateau_factor}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigurationError("validation_fraction must be in (0, 1)")
        if self.adam_lr <= 0 or self.max_epochs < 1 or self.l2_lambda < 0:
            raise ConfigurationError("invalid optimizer configuration")


#: Reconstructed pre-tuning configuration: heavy dropout, stock Adam rate,
#: short patience, and min_lr pinned to adam_lr so plateau decay cannot act.
BASELINE_MLP_OVERRIDES = {
    "dropout_rate": 0.5,
    "adam_lr": 0.001,
    "min_lr": 0.001,
    "early_stop_patience": 5,
}


@dataclass
class MlpNetwork:
    """Weight matrices (fan_in x fan_out) and bias vectors per layer."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    architecture: MlpArchitecture

    def copy(self) -> "MlpNetwork":
        return MlpNetwork(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.architecture,
        )


def init_network(arch: MlpArchitecture, rng: np.random.Generator) -> MlpNetwork:
    """Seeded uniform(-r, r) weights with r = sqrt(6/(fan_in+fan_out)); zero biases."""
    weights = []
    biases = []
    for fan_in, fan_out in zip(arch.layer_widths[:-1], arch.layer_widths[1:]):
        r = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-r, r, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpNetwork(weights, biases, arch)


def leaky_relu(z: np.ndarray, slope: float = LEAKY_SLOPE) -> np.ndarray:
    return np.where(z >= 0, z, slope * z)


def leaky_relu_grad(z: np.ndarray, slope: float = LEAKY_SLOPE) -> np.ndarray:
    return np.where(z >= 0, 1.0, slope)


@dataclass
class ForwardPass:
    """Per-layer tensors from one forward evaluation (batch-major)."""

    inputs: np.ndarray
    pre_activations: list[np.ndarray]
    activations: list[np.ndarray]
    masks: list[np.ndarray | None]
    output_preactivation: np.ndarray
    probability: np.ndarray


def forward(
    net: MlpNetwork,
    x: np.ndarray,
    mode: str = "infer",
    dropout_rate: float = 0.0,
    rng: np.random.Generator | None = None,
) -> ForwardPass:
    """Run the network on a row or batch.

    Train mode draws inverted-dropout masks (Bernoulli keep, scaled by
    1/(1-rate)) for each hidden layer; infer mode applies no mask and no
    scaling, so inference is a pure deterministic function.
    """
    if mode not in ("train", "infer"):
        raise ConfigurationError(f"mode must be 'train' or 'infer', got {mode!r}")
    slope = net.architecture.negative_slope
    a = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if a.shape[1] != net.architecture.layer_widths[0]:
        raise ShapeError(
            f"input width {a.shape[1]} does not match network input "
            f"{net.architecture.layer_widths[0]}"
        )
    dropping = mode == "train" and dropout_rate > 0.0
    if dropping and rng is None:
        raise ConfigurationError("train-mode forward with dropout needs an rng")

    inputs = a
    pre_activations = []
    activations = []
    masks: list[np.ndarray | None] = []
    n_hidden = len(net.weights) - 1
    for layer in range(n_hidden):
        z = a @ net.weights[layer] + net.biases[layer]
        h = leaky_relu(z, slope)
        if dropping:
            mask = (rng.random(h.shape) >= dropout_rate) / (1.0 - dropout_rate)
            h = h * mask
        else:
            mask = None
        pre_activations.append(z)
        activations.append(h)
        masks.append(mask)
        a = h
    z_out = a @ net.weights[-1] + net.biases[-1]
    prob = sigmoid(z_out)
    return ForwardPass(inputs, pre_activations, activations, masks, z_out, prob)


def loss(outputs: np.ndarray, labels: np.ndarray, net: MlpNetwork, l2_lambda: float) -> float:
    """Mean clamped binary cross-entropy plus (lambda/2) * sum of squared weights."""
    p = np.clip(np.asarray(outputs, dtype=np.float64).reshape(-1), PROB_CLAMP, 1.0 - PROB_CLAMP)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if p.shape != y.shape:
        raise ShapeError(f"outputs and labels differ in length: {p.shape} vs {y.shape}")
    bce = -np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    penalty = 0.5 * l2_lambda * sum(float((w**2).sum()) for w in net.weights)
    return float(bce + penalty)


def backward(
    net: MlpNetwork, fwd: ForwardPass, labels: np.ndarray, l2_lambda: float
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Exact gradients of :func:`loss` through the (possibly masked) graph."""
    y = np.asarray(labels, dtype=np.float64).reshape(-1, 1)
    n = y.shape[0]
    slope = net.architecture.negative_slope

    delta = (fwd.probability - y) / n  # d(mean BCE)/d(z_out)
    weight_grads: list[np.ndarray] = [None] * len(net.weights)
    bias_grads: list[np.ndarray] = [None] * len(net.biases)

    layer_inputs = [fwd.inputs] + fwd.activations
    for layer in range(len(net.weights) - 1, -1, -1):
        weight_grads[layer] = layer_inputs[layer].T @ delta + l2_lambda * net.weights[layer]
        bias_grads[layer] = delta.sum(axis=0)
        if layer > 0:
            upstream = delta @ net.weights[layer].T
            mask = fwd.masks[layer - 1]
            if mask is not None:
                upstream = upstream * mask
            delta = upstream * leaky_relu_grad(fwd.pre_activations[layer - 1], slope)
    return weight_grads, bias_grads


@dataclass
class AdamState:
    """First/second moment accumulators shaped like the parameter list."""

    first_moment: list[np.ndarray]
    second_moment: list[np.ndarray]
    step_count: int = 0

    @classmethod
    def zeros_like(cls, params: list[np.ndarray]) -> "AdamState":
        return cls(
            first_moment=[np.zeros_like(p) for p in params],
            second_moment=[np.zeros_like(p) for p in params],
            step_count=0,
        )


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update; returns fresh parameter and state lists."""
    t = state.step_count + 1
    new_params = []
    new_m = []
    new_v = []
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g**2
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        new_params.append(p - lr * m_hat / (np.sqrt(v_hat) + eps))
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(new_m, new_v, t)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    lr: float


@dataclass(frozen=True)
class TrainingHistory:
    epochs: tuple[EpochRecord, ...]
    stopped_early: bool
    best_val_loss: float
    best_epoch: int

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,val_loss,lr"]
        for r in self.epochs:
            lines.append(f"{r.epoch},{r.train_loss!r},{r.val_loss!r},{r.lr!r}")
        return "\n".join(lines) + "\n"


def _validation_loss(net: MlpNetwork, X: np.ndarray, y: np.ndarray) -> float:
    """Plain data loss (no penalty term) in infer mode."""
    prob = forward(net, X).probability
    return loss(prob, y, net, l2_lambda=0.0)


def train(
    X: np.ndarray,
    y: np.ndarray,
    cfg: MlpTrainConfig,
    arch: MlpArchitecture | None = None,
) -> tuple[MlpNetwork, TrainingHistory]:
    """Train with mini-batch Adam, early stopping, and plateau LR reduction.

    A stratified ``validation_fraction`` of the rows is carved out first and
    never trained on. After each epoch the validation loss drives two rules:
    no improvement beyond 1e-4 for ``plateau_patience`` epochs halves the
    learning rate (floored at ``min_lr``), and no strict improvement for
    ``early_stop_patience`` epochs stops training. The weights snapshotted at
    the best validation loss are always the ones returned.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if X.shape[0] != y.shape[0]:
        raise ShapeError("X and y row counts differ")
    if np.unique(y).size < 2:
        raise TrainingError("training data must contain both classes")
    if arch is None:
        arch = MlpArchitecture(layer_widths=(X.shape[1], 32, 16, 1))
    elif arch.layer_widths[0] != X.shape[1]:
        raise ShapeError(
            f"architecture input width {arch.layer_widths[0]} does not match data {X.shape[1]}"
        )

    fit_idx, val_idx = split_indices(
        y, SplitConfig(train_fraction=1.0 - cfg.validation_fraction, seed=cfg.seed)
    )
    if fit_idx.size == 0 or val_idx.size == 0:
        raise TrainingError("not enough rows for a validation carve-out")
    X_fit, y_fit = X[fit_idx], y[fit_idx]
    X_val, y_val = X[val_idx], y[val_idx]

    rng = np.random.default_rng(cfg.seed)
    net = init_network(arch, rng)
    n_layers = len(net.weights)
    params = net.weights + net.biases
    state = AdamState.zeros_like(params)

    lr = cfg.adam_lr
    best_val = np.inf
    best_epoch = -1
    best_net = net.copy()
    plateau_best = np.inf
    plateau_count = 0
    no_improve = 0
    stopped_early = False
    records: list[EpochRecord] = []

    for epoch in range(cfg.max_epochs):
        perm = rng.permutation(X_fit.shape[0])
        loss_sum = 0.0
        for start in range(0, X_fit.shape[0], cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            fwd = forward(net, X_fit[idx], mode="train", dropout_rate=cfg.dropout_rate, rng=rng)
            batch_loss = loss(fwd.probability, y_fit[idx], net, cfg.l2_lambda)
            if not np.isfinite(batch_loss):
                raise DivergenceError(f"non-finite training loss at epoch {epoch}")
            w_grads, b_grads = backward(net, fwd, y_fit[idx], cfg.l2_lambda)
            params, state = adam_step(
                params,
                w_grads + b_grads,
                state,
                lr,
                beta1=cfg.adam_beta1,
                beta2=cfg.adam_beta2,
                eps=cfg.adam_eps,
            )
            net.weights = params[:n_layers]
            net.biases = params[n_layers:]
            loss_sum += batch_loss * idx.size

        train_loss = loss_sum / X_fit.shape[0]
        val_loss = _validation_loss(net, X_val, y_val)
        if not np.isfinite(val_loss):
            raise DivergenceError(f"non-finite validation loss at epoch {epoch}")
        records.append(EpochRecord(epoch, float(train_loss), float(val_loss), lr))

        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            best_net = net.copy()
            no_improve = 0
        else:
            no_improve += 1

        if plateau_best - val_loss > PLATEAU_MIN_DELTA:
            plateau_best = val_loss
            plateau_count = 0
        else:
            plateau_count += 1
            if plateau_count >= cfg.plateau_patience:
                lr = max(lr * cfg.plateau_factor, cfg.min_lr)
                plateau_count = 0

        if no_improve >= cfg.early_stop_patience:
            stopped_early = True
            break

    history = TrainingHistory(
        epochs=tuple(records),
        stopped_early=stopped_early,
        best_val_loss=float(best_val),
        best_epoch=best_epoch,
    )
    return best_net, history


def predict_proba(net: MlpNetwork, X: np.ndarray):
    """Inference-mode output probability for a row or matrix."""
    prob = forward(net, X).probability
    if np.ndim(X) == 1:
        return float(prob[0, 0])
    return prob.reshape(-1)


def baseline_config(tuned: MlpTrainConfig) -> MlpTrainConfig:
    """The reconstructed pre-tuning configuration derived from a tuned one."""
    return replace(tuned, **BASELINE_MLP_OVERRIDES)
