"""Linear probes over frozen sentence features.

A single linear layer trained with deterministic full-batch gradient
descent measures how much downstream signal a feature set carries.
Classification uses softmax cross-entropy, regression mean squared error;
both add a small L2 penalty on the weights (never the bias).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, InputError

TASK_CLASSIFICATION = "classification"
TASK_REGRESSION = "regression"

PRBM_MAGIC = b"PRBM"
PRBM_VERSION = 1


def _check_task(task: str) -> None:
    if task not in (TASK_CLASSIFICATION, TASK_REGRESSION):
        raise InputError(f"unknown task: {task!r}")


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix plus integer class labels or real targets."""

    features: np.ndarray
    targets: np.ndarray
    split: str = "train"
    classes: tuple[str, ...] | None = None  # class-index -> original label

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[0] < 1:
            raise InputError(f"features must be a non-empty 2D matrix, got shape {feats.shape}")
        if not np.all(np.isfinite(feats)):
            raise InputError("features contain non-finite values")
        targets = np.asarray(self.targets)
        if targets.shape != (feats.shape[0],):
            raise InputError(
                f"targets must have shape ({feats.shape[0]},), got {targets.shape}")
        if self.classes is not None:
            targets = targets.astype(np.int64)
            if targets.size and (targets.min() < 0 or targets.max() >= len(self.classes)):
                raise InputError("class labels out of range")
        else:
            targets = targets.astype(np.float64)
            if not np.all(np.isfinite(targets)):
                raise InputError("targets contain non-finite values")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "targets", targets)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def width(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class ProbeConfig:
    learning_rate: float = 0.1
    max_iter: int = 2000
    tol: float = 1e-7
    patience: int = 20
    l2: float = 1e-4
    seed: int = 0
    standardize: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0 or self.max_iter < 1 or self.patience < 1:
            raise InputError("learning_rate, max_iter and patience must be positive")
        if self.tol < 0 or self.l2 < 0:
            raise InputError("tol and l2 must be non-negative")


@dataclass(frozen=True)
class ProbeModel:
    weights: np.ndarray  # d x k (k=1 for regression)
    bias: np.ndarray  # k
    task: str
    classes: tuple[str, ...] | None = None
    feature_mean: np.ndarray | None = None
    feature_std: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_task(self.task)
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or b.shape != (w.shape[1],) or w.shape[1] < 1:
            raise InputError("weights must be d x k with a matching k-vector bias")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise InputError("model parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def width(self) -> int:
        return self.weights.shape[0]


def _one_hot(labels: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((labels.shape[0], k), dtype=np.float64)
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def loss_and_gradients(weights: np.ndarray, bias: np.ndarray, features: np.ndarray,
                       targets: np.ndarray, task: str,
                       l2: float = 0.0) -> tuple[float, np.ndarray, np.ndarray]:
    """Objective value and analytic gradients at the given parameters.

    Classification: mean softmax cross-entropy over rows. Regression: mean
    squared error. Both plus 0.5 * l2 * ||weights||^2.
    """
    _check_task(task)
    n = features.shape[0]
    logits = features @ weights + bias
    if task == TASK_CLASSIFICATION:
        probs = softmax(logits)
        labels = targets.astype(np.int64)
        data_loss = -np.mean(np.log(probs[np.arange(n), labels] + 1e-300))
        delta = (probs - _one_hot(labels, weights.shape[1])) / n
    else:
        resid = logits[:, 0] - targets
        data_loss = float(np.mean(resid**2))
        delta = (2.0 * resid / n)[:, None]
    grad_w = features.T @ delta + l2 * weights
    grad_b = delta.sum(axis=0)
    loss = float(data_loss + 0.5 * l2 * np.sum(weights**2))
    return loss, grad_w, grad_b


def _standardizer(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    std = np.where(std > 0, std, 1.0)  # constant columns pass through
    return mean, std


def train_linear_probe(train: LabeledDataset, task: str,
                       config: ProbeConfig = ProbeConfig()) -> ProbeModel:
    """Fit the linear layer by full-batch gradient descent from zero init.

    Stops early once the loss improves by less than config.tol for
    config.patience consecutive iterations. Deterministic: no randomness
    enters the solve; config.seed is recorded for provenance only.
    """
    _check_task(task)
    features = train.features
    if task == TASK_CLASSIFICATION:
        if train.classes is None:
            raise InputError("classification needs a dataset with class labels")
        k = len(train.classes)
        if np.unique(train.targets).size < 2:
            raise InputError("classification needs at least 2 classes present")
    else:
        k = 1
    mean = std = None
    if config.standardize:
        mean, std = _standardizer(features)
        features = (features - mean) / std
    weights = np.zeros((train.width, k), dtype=np.float64)
    bias = np.zeros(k, dtype=np.float64)
    history: list[float] = []
    stalled = 0
    prev = np.inf
    for _ in range(config.max_iter):
        loss, grad_w, grad_b = loss_and_gradients(
            weights, bias, features, train.targets, task, config.l2)
        history.append(loss)
        weights -= config.learning_rate * grad_w
        bias -= config.learning_rate * grad_b
        stalled = stalled + 1 if prev - loss < config.tol else 0
        if stalled >= config.patience:
            break
        prev = loss
    final_loss, _, _ = loss_and_gradients(
        weights, bias, features, train.targets, task, config.l2)
    meta = {
        "seed": config.seed,
        "epochs": len(history),
        "learning_rate": config.learning_rate,
        "l2": config.l2,
        "final_loss": final_loss,
        "loss_history": history,
    }
    return ProbeModel(weights=weights, bias=bias, task=task, classes=train.classes,
                      feature_mean=mean, feature_std=std, meta=meta)


def _apply_standardize(model: ProbeModel, features: np.ndarray) -> np.ndarray:
    if model.feature_mean is None:
        return features
    return (features - model.feature_mean) / model.feature_std


def predict(model: ProbeModel, features: np.ndarray) -> np.ndarray:
    """Class indices (argmax, ties to the lowest index) or real predictions."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.width:
        raise InputError(
            f"feature width {features.shape[-1] if features.ndim == 2 else '?'}"
            f" does not match model width {model.width}")
    logits = _apply_standardize(model, features) @ model.weights + model.bias
    if model.task == TASK_CLASSIFICATION:
        return np.argmax(logits, axis=1)
    return logits[:, 0]


def r_squared(targets: np.ndarray, preds: np.ndarray) -> float:
    targets = np.asarray(targets, dtype=np.float64)
    ss_tot = float(np.sum((targets - targets.mean()) ** 2))
    if ss_tot == 0.0:
        raise InputError("targets are constant: R^2 undefined")
    ss_res = float(np.sum((targets - preds) ** 2))
    return 1.0 - ss_res / ss_tot


def evaluate(model: ProbeModel, test: LabeledDataset) -> float:
    """Test accuracy (classification) or test R^2 (regression)."""
    if test.width != model.width:
        raise InputError(f"dataset width {test.width} does not match model width {model.width}")
    preds = predict(model, test.features)
    if model.task == TASK_CLASSIFICATION:
        return float(np.mean(preds == test.targets))
    return r_squared(test.targets, preds)


def baseline_majority_mean(train: LabeledDataset, test: LabeledDataset, task: str) -> float:
    """Majority-class accuracy or train-mean R^2 — the no-information floor."""
    _check_task(task)
    if task == TASK_CLASSIFICATION:
        labels, counts = np.unique(train.targets, return_counts=True)
        majority = labels[np.argmax(counts)]  # ties: lowest class index
        return float(np.mean(test.targets == majority))
    preds = np.full(test.n, float(np.mean(train.targets)))
    return r_squared(test.targets, preds)


def save_probe_model(path, model: ProbeModel) -> None:
    meta = {
        "task": model.task,
        "d": model.width,
        "k": int(model.weights.shape[1]),
        "classes": list(model.classes) if model.classes is not None else None,
        "standardized": model.feature_mean is not None,
        "meta": model.meta,
    }
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(PRBM_MAGIC)
        fh.write(struct.pack("<II", PRBM_VERSION, len(blob)))
        fh.write(blob)
        fh.write(model.weights.astype("<f8").tobytes(order="C"))
        fh.write(model.bias.astype("<f8").tobytes())
        if model.feature_mean is not None:
            fh.write(model.feature_mean.astype("<f8").tobytes())
            fh.write(model.feature_std.astype("<f8").tobytes())


def load_probe_model(path) -> ProbeModel:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != PRBM_MAGIC:
        raise FormatError("bad magic, expected PRBM", offset=0)
    if len(raw) < 12:
        raise FormatError("truncated header", offset=len(raw))
    version, meta_len = struct.unpack_from("<II", raw, 4)
    if version != PRBM_VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    pos = 12
    try:
        meta = json.loads(raw[pos:pos + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise FormatError(f"bad metadata JSON: {err}", offset=pos) from err
    pos += meta_len
    d, k = meta["d"], meta["k"]

    def take(count):
        nonlocal pos
        end = pos + count * 8
        if end > len(raw):
            raise FormatError("truncated parameter block", offset=pos)
        arr = np.frombuffer(raw[pos:end], dtype="<f8").copy()
        pos = end
        return arr

    weights = take(d * k).reshape(d, k)
    bias = take(k)
    mean = std = None
    if meta["standardized"]:
        mean = take(d)
        std = take(d)
    if pos != len(raw):
        raise FormatError("trailing data after parameters", offset=pos)
    classes = tuple(meta["classes"]) if meta["classes"] is not None else None
    return ProbeModel(weights=weights, bias=bias, task=meta["task"], classes=classes,
                      feature_mean=mean, feature_std=std, meta=meta["meta"])


def _class_order(values: list[str]) -> list[str]:
    """Sorted label order: numeric when every label parses as a number."""
    uniq = sorted(set(values))
    try:
        return sorted(uniq, key=lambda v: (float(v), v))
    except ValueError:
        return uniq


def load_labeled_csv(path, label_column: str, task: str, split: str = "train") -> LabeledDataset:
    """Read a delimited text table into a LabeledDataset.

    The header names one label column; every other column is a feature.
    Classification maps labels to indices in sorted order.
    """
    _check_task(task)
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise InputError(f"{path}: empty dataset file")
    header = lines[0].split(",")
    if label_column not in header:
        raise InputError(f"{path}: no column named {label_column!r}")
    label_idx = header.index(label_column)
    feat_idx = [i for i in range(len(header)) if i != label_idx]
    raw_labels: list[str] = []
    rows: list[list[float]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise InputError(f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}")
        raw_labels.append(cells[label_idx])
        try:
            rows.append([float(cells[i]) for i in feat_idx])
        except ValueError as err:
            raise InputError(f"{path}:{lineno}: non-numeric feature cell ({err})") from err
    features = np.asarray(rows, dtype=np.float64)
    if task == TASK_REGRESSION:
        try:
            targets = np.asarray([float(v) for v in raw_labels])
        except ValueError as err:
            raise InputError(f"{path}: non-numeric regression target ({err})") from err
        return LabeledDataset(features=features, targets=targets, split=split)
    classes = _class_order(raw_labels)
    index = {c: i for i, c in enumerate(classes)}
    targets = np.asarray([index[v] for v in raw_labels], dtype=np.int64)
    return LabeledDataset(features=features, targets=targets, split=split,
                          classes=tuple(classes))
