"""Gradient-trained classifiers with stratified cross-validation.

Three model kinds share one training loop: logistic regression and the MLP
minimize L2-regularized cross-entropy, the linear SVM minimizes regularized
hinge loss.  Training is full-batch gradient descent; whenever a step would
increase the loss it is reverted and the learning rate halved, so the loss
trace is non-increasing by construction.

Features are standardized per training fold (zero-variance coordinates pass
through unscaled), and every loss exposes its value and gradient through
``loss_and_grad`` so tests can check gradients against finite differences.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    InvariantViolation,
    NotAnMLP,
    SingleClassTraining,
    TooFewSamples,
)

KINDS = ("logreg", "mlp", "linear_svm")


@dataclass
class ClassifierSpec:
    kind: str
    l2: float = 1e-4
    learning_rate: float = 1e-2
    epochs: int = 300
    max_iters: int = 500  # logreg budget, kept separate to mirror its config
    hidden: tuple[int, ...] = (256, 64, 16)
    C: float = 1.0  # svm margin penalty; regularization strength is 1/C
    seed: int = 0

    def __post_init__(self):
        self.hidden = tuple(int(h) for h in self.hidden)
        if self.kind not in KINDS:
            raise InvariantViolation(f"unknown classifier kind {self.kind!r}")
        if any(h < 1 for h in self.hidden):
            raise InvariantViolation("hidden sizes must be >= 1")
        if self.l2 < 0 or self.C < 0:
            raise InvariantViolation("penalties must be >= 0")
        if self.epochs < 1 or self.max_iters < 1:
            raise InvariantViolation("epochs must be >= 1")

    @property
    def budget(self) -> int:
        return self.max_iters if self.kind == "logreg" else self.epochs


@dataclass
class TrainedModel:
    spec: ClassifierSpec
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    feat_mean: np.ndarray = field(repr=False)
    feat_scale: np.ndarray = field(repr=False)

    @property
    def n_features(self) -> int:
        return self.weights[0].shape[0]

    def to_json_dict(self) -> dict:
        return {
            "kind": self.spec.kind,
            "hidden": list(self.spec.hidden),
            "weights": [{"shape": list(w.shape), "values": w.ravel().tolist()} for w in self.weights],
            "biases": [{"shape": list(b.shape), "values": b.ravel().tolist()} for b in self.biases],
            "feat_mean": self.feat_mean.tolist(),
            "feat_scale": self.feat_scale.tolist(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "TrainedModel":
        spec = ClassifierSpec(kind=d["kind"], hidden=tuple(d.get("hidden", ())))
        unpack = lambda e: np.array(e["values"], dtype=np.float64).reshape(e["shape"])
        return cls(
            spec=spec,
            weights=[unpack(e) for e in d["weights"]],
            biases=[unpack(e) for e in d["biases"]],
            feat_mean=np.array(d["feat_mean"], dtype=np.float64),
            feat_scale=np.array(d["feat_scale"], dtype=np.float64),
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path: str | Path) -> "TrainedModel":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _flatten(params: list[np.ndarray]) -> np.ndarray:
    return np.concatenate([p.ravel() for p in params])


def _unflatten(flat: np.ndarray, shapes: list[tuple]) -> list[np.ndarray]:
    out = []
    pos = 0
    for shp in shapes:
        size = int(np.prod(shp))
        out.append(flat[pos : pos + size].reshape(shp))
        pos += size
    return out


def _init_params(kind: str, n_features: int, hidden: tuple[int, ...], seed: int):
    """He-initialized weights; single output unit for all kinds."""
    rng = np.random.default_rng(seed)
    sizes = [n_features, *hidden, 1] if kind == "mlp" else [n_features, 1]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _forward_mlp(x, weights, biases):
    """Returns hidden activations (post-ReLU) and the output logit."""
    acts = []
    h = x
    for w, b in zip(weights[:-1], biases[:-1]):
        h = np.maximum(h @ w + b, 0.0)
        acts.append(h)
    z = (h @ weights[-1] + biases[-1]).ravel()
    return acts, z


def loss_and_grad(kind, weights, biases, x, y, l2):
    """Regularized loss and its gradients w.r.t. every parameter array.

    y is 0/1.  L2 applies to weights only, never biases.  For the SVM,
    ``l2`` is already the effective strength (1/C) and the hinge term uses
    labels mapped to -1/+1.
    """
    n = x.shape[0]
    reg = 0.5 * l2 * sum(float((w * w).sum()) for w in weights)

    if kind in ("logreg", "linear_svm"):
        w, b = weights[0], biases[0]
        z = (x @ w + b).ravel()
        if kind == "logreg":
            # mean softplus(z) - y z, the stable binary cross-entropy
            loss = float(np.mean(np.logaddexp(0.0, z) - y * z)) + reg
            dz = (_sigmoid(z) - y) / n
        else:
            ypm = 2.0 * y - 1.0
            margin = 1.0 - ypm * z
            loss = float(np.mean(np.maximum(margin, 0.0))) + reg
            dz = np.where(margin > 0.0, -ypm, 0.0) / n
        gw = x.T @ dz[:, None] + l2 * w
        gb = np.array([dz.sum()])
        return loss, [gw], [gb]

    if kind == "mlp":
        acts, z = _forward_mlp(x, weights, biases)
        loss = float(np.mean(np.logaddexp(0.0, z) - y * z)) + reg
        dz = ((_sigmoid(z) - y) / n)[:, None]
        gws, gbs = [], []
        layer_inputs = [x] + acts
        delta = dz
        for li in range(len(weights) - 1, -1, -1):
            gws.append(layer_inputs[li].T @ delta + l2 * weights[li])
            gbs.append(delta.sum(axis=0))
            if li > 0:
                delta = (delta @ weights[li].T) * (acts[li - 1] > 0.0)
        return loss, gws[::-1], gbs[::-1]

    raise InvariantViolation(f"unknown kind {kind!r}")


def _fit_standardizer(x: np.ndarray):
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0.0] = 1.0  # zero-variance coordinates pass through
    return mean, scale


def train(spec: ClassifierSpec, features, labels) -> TrainedModel:
    """Fit one model by full-batch gradient descent with step-halving.

    Deterministic given the spec seed.  Standardization statistics come
    from this data only, so cross-validation folds never leak.
    """
    try:
        x = np.asarray(features, dtype=np.float64)
    except ValueError as exc:
        raise DimensionMismatch(f"features are not a uniform matrix: {exc}") from exc
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"features {x.shape} do not match {y.shape[0]} labels")
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise SingleClassTraining(f"only label {classes[0]} present")
    if counts.min() < 2:
        raise TooFewSamples("need at least 2 samples per class")

    mean, scale = _fit_standardizer(x)
    xs = (x - mean) / scale

    if spec.kind == "linear_svm":
        if spec.C == 0:
            raise InvariantViolation("svm margin penalty C must be > 0")
        l2 = 1.0 / spec.C
    else:
        l2 = spec.l2
    weights, biases = _init_params(spec.kind, x.shape[1], spec.hidden, spec.seed)

    lr = spec.learning_rate
    loss, gws, gbs = loss_and_grad(spec.kind, weights, biases, xs, y, l2)
    for _ in range(spec.budget):
        new_w = [w - lr * g for w, g in zip(weights, gws)]
        new_b = [b - lr * g for b, g in zip(biases, gbs)]
        new_loss, new_gws, new_gbs = loss_and_grad(spec.kind, new_w, new_b, xs, y, l2)
        if new_loss > loss:
            lr *= 0.5
            if lr < 1e-12:
                break
            continue
        weights, biases, loss, gws, gbs = new_w, new_b, new_loss, new_gws, new_gbs
    return TrainedModel(spec, weights, biases, mean, scale)


def predict(model: TrainedModel, features) -> tuple[np.ndarray, np.ndarray]:
    """(labels, class-1 scores); scores are sigmoid outputs in [0, 1]."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"model expects {model.n_features} features, got {x.shape[1]}"
        )
    xs = (x - model.feat_mean) / model.feat_scale
    if model.spec.kind == "mlp":
        _, z = _forward_mlp(xs, model.weights, model.biases)
    else:
        z = (xs @ model.weights[0] + model.biases[0]).ravel()
    scores = _sigmoid(z)
    return (scores >= 0.5).astype(np.int64), scores


def embed(model: TrainedModel, features) -> np.ndarray:
    """Last-hidden-layer activations of an MLP, for external 2-D projection."""
    if model.spec.kind != "mlp":
        raise NotAnMLP(f"embeddings require an mlp model, got {model.spec.kind}")
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"model expects {model.n_features} features, got {x.shape[1]}"
        )
    xs = (x - model.feat_mean) / model.feat_scale
    acts, _ = _forward_mlp(xs, model.weights, model.biases)
    return acts[-1]


def confusion_counts(y_true: np.ndarray, y_pred: np.ndarray) -> dict[str, int]:
    tp = int(((y_true == 1) & (y_pred == 1)).sum())
    tn = int(((y_true == 0) & (y_pred == 0)).sum())
    fp = int(((y_true == 0) & (y_pred == 1)).sum())
    fn = int(((y_true == 1) & (y_pred == 0)).sum())
    return {"tp": tp, "tn": tn, "fp": fp, "fn": fn}


def metrics_from_confusion(c: dict[str, int]) -> dict[str, float]:
    tp, tn, fp, fn = c["tp"], c["tn"], c["fp"], c["fn"]
    total = tp + tn + fp + fn
    accuracy = (tp + tn) / total if total else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if tp else 0.0
    return {"accuracy": accuracy, "precision": precision, "recall": recall, "f1": f1}


@dataclass
class EvalReport:
    spec: ClassifierSpec
    k: int
    seed: int
    fold_assignment: list[int]
    fold_confusions: list[dict[str, int]]
    fold_metrics: list[dict[str, float]]
    mean_metrics: dict[str, float]

    def to_json_dict(self) -> dict:
        return {
            "classifier": self.spec.kind,
            "k": self.k,
            "seed": self.seed,
            "fold_assignment": self.fold_assignment,
            "fold_confusions": self.fold_confusions,
            "fold_metrics": self.fold_metrics,
            "mean_metrics": self.mean_metrics,
        }


def stratified_folds(labels, k: int, seed: int) -> np.ndarray:
    """Fold index per sample; each class dealt round-robin after a shuffle."""
    y = np.asarray(labels)
    rng = np.random.default_rng(seed)
    assign = np.empty(y.shape[0], dtype=np.int64)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        assign[idx] = np.arange(idx.size) % k
    return assign


def kfold_cv(spec: ClassifierSpec, features, labels, k: int = 5, seed: int = 0) -> EvalReport:
    """Stratified k-fold cross-validation with per-fold standardization."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if k < 2:
        raise InvariantViolation("k must be >= 2")
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise SingleClassTraining("cross-validation needs both labels")
    if counts.min() < k:
        raise TooFewSamples(
            f"smallest class has {counts.min()} samples; need >= k = {k}"
        )
    # every training fold must keep >= 2 samples of each class
    smallest = int(counts.min())
    if smallest - math.ceil(smallest / k) < 2:
        raise TooFewSamples(
            f"with k={k}, a training fold would hold fewer than 2 samples "
            f"of the smallest class ({smallest} total)"
        )

    assign = stratified_folds(y, k, seed)
    confusions, fold_metrics = [], []
    for fold in range(k):
        test = assign == fold
        model = train(spec, x[~test], y[~test])
        pred, _ = predict(model, x[test])
        c = confusion_counts(y[test], pred)
        confusions.append(c)
        fold_metrics.append(metrics_from_confusion(c))
    mean_metrics = {
        name: float(np.mean([m[name] for m in fold_metrics]))
        for name in ("accuracy", "precision", "recall", "f1")
    }
    return EvalReport(
        spec=spec,
        k=k,
        seed=seed,
        fold_assignment=assign.tolist(),
        fold_confusions=confusions,
        fold_metrics=fold_metrics,
        mean_metrics=mean_metrics,
    )
