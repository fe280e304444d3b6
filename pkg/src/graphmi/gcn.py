"""Two-layer GCN target model: forward pass, full-batch training, DP training."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .graph import Graph, normalize_adjacency, vec_to_matrix

log = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


@dataclass(frozen=True)
class DpConfig:
    clip_norm: float = 1.0
    noise_multiplier: float = 0.0
    delta: float = 1e-5
    nominal_epsilon: float | None = None

    def __post_init__(self):
        if not self.clip_norm > 0:
            raise ValueError("clip_norm must be positive")
        if self.noise_multiplier < 0:
            raise ValueError("noise_multiplier must be nonnegative")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.nominal_epsilon is not None and not self.nominal_epsilon > 0:
            raise ValueError("nominal_epsilon must be positive when given")


@dataclass(frozen=True)
class TrainConfig:
    hidden_dim: int = 16
    learning_rate: float = 0.01
    weight_decay: float = 5e-4
    max_epochs: int = 200
    patience: int = 10
    min_epochs: int = 50
    train_fraction: float = 0.1
    val_fraction: float = 0.2
    seed: int = 0
    optimizer: str = "adam"
    dp: DpConfig | None = None

    def __post_init__(self):
        if self.hidden_dim < 1:
            raise ValueError("hidden_dim must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be nonnegative")
        if self.max_epochs < 0 or self.patience < 1 or self.min_epochs < 0:
            raise ValueError("max_epochs and min_epochs must be >= 0, patience >= 1")
        if not (0 < self.train_fraction <= 1 and 0 <= self.val_fraction < 1):
            raise ValueError("train_fraction must be in (0, 1] and val_fraction in [0, 1)")
        if self.train_fraction + self.val_fraction > 1 + 1e-12:
            raise ValueError("train_fraction + val_fraction must not exceed 1")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if isinstance(self.dp, dict):
            object.__setattr__(self, "dp", DpConfig(**self.dp))


@dataclass(frozen=True)
class GcnModel:
    w0: np.ndarray
    w1: np.ndarray
    train_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        w0 = np.array(self.w0, dtype=float)
        w1 = np.array(self.w1, dtype=float)
        if w0.ndim != 2 or w1.ndim != 2 or w0.shape[1] != w1.shape[0]:
            raise ValueError(f"incompatible weight shapes {w0.shape} and {w1.shape}")
        if not (np.all(np.isfinite(w0)) and np.all(np.isfinite(w1))):
            raise ValueError("weights must be finite")
        w0.setflags(write=False)
        w1.setflags(write=False)
        object.__setattr__(self, "w0", w0)
        object.__setattr__(self, "w1", w1)

    @property
    def hidden_dim(self) -> int:
        return self.w0.shape[1]

    @property
    def num_classes(self) -> int:
        return self.w1.shape[1]

    @property
    def num_features(self) -> int:
        return self.w0.shape[0]


class ForwardCache(NamedTuple):
    """Intermediates of one forward pass, kept for reverse-mode gradients."""

    A_hat: np.ndarray
    inv_sqrt_deg: np.ndarray
    norm_adj: np.ndarray
    xw0: np.ndarray
    pre_hidden: np.ndarray
    hidden: np.ndarray
    hw1: np.ndarray
    logits: np.ndarray


def forward_dense(model: GcnModel, A: np.ndarray, X: np.ndarray) -> ForwardCache:
    X = np.asarray(X, dtype=float)
    N = A.shape[0]
    if X.shape != (N, model.num_features):
        raise ValueError(f"features have shape {X.shape}, expected ({N}, {model.num_features})")
    A_hat = A + np.eye(N)
    s = 1.0 / np.sqrt(A_hat.sum(axis=1))
    norm_adj = s[:, None] * A_hat * s[None, :]
    xw0 = X @ model.w0
    pre = norm_adj @ xw0
    hidden = np.maximum(pre, 0.0)
    hw1 = hidden @ model.w1
    logits = norm_adj @ hw1
    return ForwardCache(A_hat, s, norm_adj, xw0, pre, hidden, hw1, logits)


def gcn_forward(model: GcnModel, a: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(hidden, logits)``; hidden is the ReLU layer, logits are linear."""
    N = np.asarray(X).shape[0]
    cache = forward_dense(model, vec_to_matrix(a, N), X)
    return cache.hidden, cache.logits


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def cross_entropy(logits: np.ndarray, labels: np.ndarray, nodes: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over ``nodes`` and its gradient w.r.t. all logits."""
    nodes = np.asarray(nodes, dtype=np.int64)
    if nodes.size == 0:
        raise ValueError("cross-entropy needs at least one node")
    logp = log_softmax(logits[nodes])
    y = np.asarray(labels)[nodes]
    loss = -logp[np.arange(nodes.size), y].mean()
    d_sub = np.exp(logp)
    d_sub[np.arange(nodes.size), y] -= 1.0
    d_logits = np.zeros_like(logits)
    np.add.at(d_logits, nodes, d_sub / nodes.size)
    return float(loss), d_logits


def predict(model: GcnModel, A: np.ndarray, X: np.ndarray) -> np.ndarray:
    return forward_dense(model, A, X).logits.argmax(axis=1)


def accuracy(model: GcnModel, a: np.ndarray, X: np.ndarray, Y: np.ndarray, nodes=None) -> float:
    """Fraction of ``nodes`` (default: all) whose argmax logit matches the label.

    ``np.argmax`` takes the first maximum, so ties go to the lowest class index.
    """
    X = np.asarray(X, dtype=float)
    nodes = np.arange(X.shape[0]) if nodes is None else np.asarray(nodes, dtype=np.int64)
    if nodes.size == 0:
        raise ValueError("accuracy needs a nonempty node subset")
    _, logits = gcn_forward(model, a, X)
    return float(np.mean(logits[nodes].argmax(axis=1) == np.asarray(Y)[nodes]))


def glorot_init(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def split_nodes(num_nodes: int, train_fraction: float, val_fraction: float,
                rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    perm = rng.permutation(num_nodes)
    n_train = int(round(train_fraction * num_nodes))
    n_val = int(round(val_fraction * num_nodes))
    n_val = min(n_val, num_nodes - n_train)
    train = np.sort(perm[:n_train])
    val = np.sort(perm[n_train:n_train + n_val])
    test = np.sort(perm[n_train + n_val:])
    return train, val, test


class _Adam:
    def __init__(self, shapes, lr, b1=0.9, b2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        out = []
        for k, (p, g) in enumerate(zip(params, grads)):
            self.m[k] = self.b1 * self.m[k] + (1 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1 - self.b2) * g * g
            m_hat = self.m[k] / (1 - self.b1 ** self.t)
            v_hat = self.v[k] / (1 - self.b2 ** self.t)
            out.append(p - self.lr * m_hat / (np.sqrt(v_hat) + self.eps))
        return out


class _Sgd:
    def __init__(self, lr):
        self.lr = lr

    def step(self, params, grads):
        return [p - self.lr * g for p, g in zip(params, grads)]


def weight_grads(w0, w1, norm_x, norm_adj, labels, nodes):
    """Loss and gradients of the mean cross-entropy w.r.t. both weight matrices."""
    pre = norm_x @ w0
    hidden = np.maximum(pre, 0.0)
    logits = norm_adj @ (hidden @ w1)
    loss, d_logits = cross_entropy(logits, labels, nodes)
    d_hw1 = norm_adj @ d_logits  # norm_adj is symmetric
    g1 = hidden.T @ d_hw1
    d_pre = (d_hw1 @ w1.T) * (pre > 0)
    g0 = norm_x.T @ d_pre
    return loss, g0, g1, logits


def clip_and_noise(grads: list[np.ndarray], dp: DpConfig,
                   rng: np.random.Generator) -> list[np.ndarray]:
    """Scale the joint gradient to norm <= clip_norm and add N(0, (sigma*C)^2) noise."""
    norm = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
    scale = min(1.0, dp.clip_norm / norm) if norm > 0 else 1.0
    out = [g * scale for g in grads]
    if dp.noise_multiplier > 0:
        std = dp.noise_multiplier * dp.clip_norm
        out = [g + rng.normal(0.0, std, size=g.shape) for g in out]
    return out


def _check_classes(graph: Graph, train_idx: np.ndarray) -> None:
    missing = sorted(set(range(graph.num_classes)) - set(graph.labels[train_idx].tolist()))
    if missing:
        raise ValueError(f"train split has no node of class(es) {missing}; change seed or train_fraction")


def train_gcn(graph: Graph, config: TrainConfig) -> GcnModel:
    """Full-batch training with validation-based early stopping.

    Early stopping is armed only after ``min_epochs``: on small, imbalanced
    train splits validation loss often rises before it falls.

    The run draws three independent RNG streams from ``config.seed``: weight
    initialization, the node split and (for DP training) gradient noise. The
    weights with the best validation accuracy (ties: lower validation loss)
    are returned.
    """
    init_rng, split_rng, noise_rng = (np.random.default_rng(s)
                                      for s in np.random.SeedSequence(config.seed).spawn(3))
    train_idx, val_idx, _ = split_nodes(graph.num_nodes, config.train_fraction,
                                        config.val_fraction, split_rng)
    if train_idx.size == 0:
        raise ValueError("empty train split")
    _check_classes(graph, train_idx)

    w0 = glorot_init(init_rng, graph.num_features, config.hidden_dim)
    w1 = glorot_init(init_rng, config.hidden_dim, graph.num_classes)

    norm_adj = normalize_adjacency(graph.adjacency)
    norm_x = norm_adj @ graph.features
    Y = graph.labels
    eval_idx = val_idx if val_idx.size else train_idx
    opt = _Adam([w0.shape, w1.shape], config.learning_rate) if config.optimizer == "adam" \
        else _Sgd(config.learning_rate)

    def evaluate(w0, w1):
        _, _, _, logits = weight_grads(w0, w1, norm_x, norm_adj, Y, eval_idx)
        v_loss, _ = cross_entropy(logits, Y, eval_idx)
        v_acc = float(np.mean(logits[eval_idx].argmax(axis=1) == Y[eval_idx]))
        return v_acc, v_loss

    best = (w0, w1)
    best_acc, best_loss = evaluate(w0, w1) if config.max_epochs > 0 else (float("nan"),) * 2
    since_improved = 0
    epochs_run = 0
    for epoch in range(1, config.max_epochs + 1):
        loss, g0, g1, _ = weight_grads(w0, w1, norm_x, norm_adj, Y, train_idx)
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite training loss at epoch {epoch}", epoch)
        if config.dp is not None:
            g0, g1 = clip_and_noise([g0, g1], config.dp, noise_rng)
        if config.weight_decay:
            g0 = g0 + config.weight_decay * w0
            g1 = g1 + config.weight_decay * w1
        w0, w1 = opt.step([w0, w1], [g0, g1])
        if not (np.all(np.isfinite(w0)) and np.all(np.isfinite(w1))):
            raise TrainingError(f"non-finite weights at epoch {epoch}", epoch)
        epochs_run = epoch

        v_acc, v_loss = evaluate(w0, w1)
        # Either better accuracy or still-converging loss resets the patience window.
        improved = False
        if v_acc > best_acc or (v_acc == best_acc and v_loss < best_loss):
            best, best_acc = (w0, w1), v_acc
            improved = True
        if v_loss < best_loss:
            best_loss = v_loss
            improved = True
        since_improved = 0 if improved else since_improved + 1
        if since_improved >= config.patience and epoch >= config.min_epochs:
            log.debug("early stop at epoch %d (val acc %.3f)", epoch, best_acc)
            break

    meta = {
        "seed": config.seed,
        "epochs_run": epochs_run,
        "val_accuracy": best_acc,
        "train_nodes": train_idx.tolist(),
        "val_nodes": val_idx.tolist(),
        "dp": None if config.dp is None else {
            "clip_norm": config.dp.clip_norm,
            "noise_multiplier": config.dp.noise_multiplier,
            "delta": config.dp.delta,
            "nominal_epsilon": config.dp.nominal_epsilon,
        },
    }
    return GcnModel(best[0], best[1], meta)


def train_gcn_dp(graph: Graph, config: TrainConfig) -> GcnModel:
    if config.dp is None:
        raise ValueError("train_gcn_dp requires config.dp")
    return train_gcn(graph, config)
