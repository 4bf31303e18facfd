"""Single dense softmax layer trained with mini-batch AdaGrad, plus classification metrics."""

from __future__ import annotations

import struct
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DivergenceError, ParseError, ShapeError
from .rng import make_rng

MODEL_MAGIC = b"QORCMODL"
MODEL_VERSION = 1
_INIT_STREAM = 0x1D1D


@dataclass
class TrainConfig:
    learning_rate: float = 0.05
    batch_size: int = 128
    epochs: int = 100
    epsilon: float = 1e-7
    shuffle_seed: int = 0
    init_seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be >= 1")


@dataclass
class LinearModel:
    weights: np.ndarray  # (n_features, n_classes)
    biases: np.ndarray
    acc_weights: np.ndarray = None
    acc_biases: np.ndarray = None

    def __post_init__(self):
        if self.acc_weights is None:
            self.acc_weights = np.zeros_like(self.weights)
        if self.acc_biases is None:
            self.acc_biases = np.zeros_like(self.biases)

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    @property
    def n_classes(self) -> int:
        return self.weights.shape[1]

    @classmethod
    def initialize(cls, n_features: int, n_classes: int, seed: int = 0) -> LinearModel:
        """Glorot-uniform weights, zero biases."""
        limit = np.sqrt(6.0 / (n_features + n_classes))
        w = make_rng(seed, _INIT_STREAM).uniform(-limit, limit, size=(n_features, n_classes))
        return cls(w, np.zeros(n_classes))

    def copy(self) -> LinearModel:
        return LinearModel(self.weights.copy(), self.biases.copy(), self.acc_weights.copy(), self.acc_biases.copy())


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grad(model: LinearModel, x: np.ndarray, y: np.ndarray):
    """Mean softmax cross-entropy over the batch and its gradients (dW, db)."""
    probs = softmax(x @ model.weights + model.biases)
    rows = np.arange(y.size)
    loss = -np.mean(np.log(np.clip(probs[rows, y], 1e-300, None)))
    delta = probs
    delta[rows, y] -= 1.0
    delta /= y.size
    return loss, x.T @ delta, delta.sum(axis=0)


def adagrad_step(model: LinearModel, grad_w, grad_b, learning_rate: float, epsilon: float):
    """theta -= lr * g / (sqrt(G) + eps), with G accumulating g**2."""
    model.acc_weights += grad_w * grad_w
    model.acc_biases += grad_b * grad_b
    model.weights -= learning_rate * grad_w / (np.sqrt(model.acc_weights) + epsilon)
    model.biases -= learning_rate * grad_b / (np.sqrt(model.acc_biases) + epsilon)


@dataclass
class TrainHistory:
    loss: list = field(default_factory=list)
    epoch_seconds: list = field(default_factory=list)
    accuracy: dict = field(default_factory=dict)  # split name -> per-epoch accuracy

    @property
    def runtime_per_epoch(self) -> float:
        return float(np.mean(self.epoch_seconds)) if self.epoch_seconds else 0.0


def train(
    features: np.ndarray,
    labels: np.ndarray,
    cfg: TrainConfig,
    n_classes: int | None = None,
    eval_sets: dict | None = None,
    model: LinearModel | None = None,
) -> tuple[LinearModel, TrainHistory]:
    """Train a softmax layer; rows are reshuffled every epoch from ``cfg.shuffle_seed``.

    ``eval_sets`` maps a name to ``(features, labels)``; their accuracy is
    recorded after every epoch (outside the timed region).
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] != y.size:
        raise ShapeError(f"features {x.shape} do not match {y.size} labels")
    n_classes = int(y.max()) + 1 if n_classes is None else n_classes
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ValueError(f"labels must lie in [0, {n_classes})")
    if model is None:
        model = LinearModel.initialize(x.shape[1], n_classes, cfg.init_seed)
    history = TrainHistory()
    for name in eval_sets or {}:
        history.accuracy[name] = []

    n = y.size
    for epoch in range(cfg.epochs):
        start = time.perf_counter()
        order = make_rng(cfg.shuffle_seed, epoch).permutation(n)
        epoch_loss = 0.0
        for b, lo in enumerate(range(0, n, cfg.batch_size)):
            idx = order[lo:lo + cfg.batch_size]
            loss, gw, gb = loss_and_grad(model, x[idx], y[idx])
            if not (np.isfinite(loss) and np.all(np.isfinite(gw))):
                raise DivergenceError(epoch, b)
            adagrad_step(model, gw, gb, cfg.learning_rate, cfg.epsilon)
            epoch_loss += loss * idx.size
        history.epoch_seconds.append(time.perf_counter() - start)
        history.loss.append(epoch_loss / max(n, 1))
        for name, (ex, ey) in (eval_sets or {}).items():
            history.accuracy[name].append(accuracy(predict(model, ex)[0], ey))
    return model, history


def predict(model: LinearModel, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Predicted labels (ties go to the lowest class index) and class probabilities."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ShapeError(f"model expects {model.n_features} features, got shape {x.shape}")
    probs = softmax(x @ model.weights + model.biases)
    return np.argmax(probs, axis=1), probs


def accuracy(predicted, labels) -> float:
    labels = np.asarray(labels)
    return float(np.mean(np.asarray(predicted) == labels)) if labels.size else 0.0


@dataclass
class EvalReport:
    accuracy: float
    macro_f1: float
    confusion: np.ndarray  # rows: true label, columns: prediction
    per_class_f1: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    runtime_per_epoch_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "confusion": self.confusion.tolist(),
            "per_class_f1": self.per_class_f1.tolist(),
            "precision": self.precision.tolist(),
            "recall": self.recall.tolist(),
            "runtime_per_epoch_s": self.runtime_per_epoch_s,
        }


def confusion_matrix(labels, predicted, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    return np.bincount(labels * n_classes + predicted, minlength=n_classes * n_classes).reshape(n_classes, n_classes)


def report_from_predictions(labels, predicted, n_classes: int) -> EvalReport:
    """Accuracy, per-class precision/recall/F1 and macro F1 from a confusion matrix.

    Precision or recall with an empty denominator counts as 0, and a class with
    ``P + R == 0`` contributes F1 = 0.
    """
    cm = confusion_matrix(labels, predicted, n_classes)
    tp = np.diag(cm).astype(np.float64)
    predicted_pos = cm.sum(axis=0)
    actual_pos = cm.sum(axis=1)
    precision = np.divide(tp, predicted_pos, out=np.zeros(n_classes), where=predicted_pos > 0)
    recall = np.divide(tp, actual_pos, out=np.zeros(n_classes), where=actual_pos > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros(n_classes), where=denom > 0)
    total = cm.sum()
    acc = float(np.trace(cm) / total) if total else 0.0
    return EvalReport(acc, float(f1.mean()), cm, f1, precision, recall)


def evaluate(model: LinearModel, features, labels) -> EvalReport:
    predicted, _ = predict(model, features)
    return report_from_predictions(labels, predicted, model.n_classes)


def save_model(model: LinearModel, path):
    header = MODEL_MAGIC + struct.pack("<III", MODEL_VERSION, model.n_features, model.n_classes)
    body = b"".join(
        np.ascontiguousarray(a, dtype="<f8").tobytes()
        for a in (model.weights, model.biases, model.acc_weights, model.acc_biases)
    )
    Path(path).write_bytes(header + body)


def load_model(path) -> LinearModel:
    raw = Path(path).read_bytes()
    if raw[:8] != MODEL_MAGIC:
        raise ParseError(f"{path}: not a model file (bad magic)")
    version, d, c = struct.unpack_from("<III", raw, 8)
    if version != MODEL_VERSION:
        raise ParseError(f"{path}: unsupported model version {version}")
    need = 20 + 8 * (2 * d * c + 2 * c)
    if len(raw) != need:
        raise ParseError(f"{path}: expected {need} bytes, found {len(raw)}")
    arr = np.frombuffer(raw, dtype="<f8", offset=20).astype(np.float64)
    w, rest = arr[: d * c].reshape(d, c), arr[d * c:]
    b, rest = rest[:c], rest[c:]
    aw, ab = rest[: d * c].reshape(d, c), rest[d * c:]
    return LinearModel(w.copy(), b.copy(), aw.copy(), ab.copy())
