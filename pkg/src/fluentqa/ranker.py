"""Linear response scorer: F(q, a, r) = w . phi + b over the 96 features.

Two training objectives are provided.  The logistic loss treats every
candidate independently:

    sum_ij log(1 + exp(-y_ij * F_ij))        y in {-1, +1}

The softmax loss is a per-question margin ranker: with one designated good
response per group and margins M_j = F(good) - F(bad_j),

    sum_i log(1 + sum_j exp(-M_j))

Groups with several positives are replicated once per positive, each
positive taking the designated slot against all negatives.  Because long
candidate lists make full-group gradients expensive, softmax training uses
strided negative sampling: per group and epoch the negatives are shuffled
and cut into strides of (K - 1), each stride paired with a randomly chosen
positive, so every negative is visited at least once per epoch.

Optimization is plain mini-batch gradient descent with step decay, seeded
and deterministic.  Scores are computed on standardized features; the
standardization statistics travel with the model.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import features as feat
from .features import StandardizationStats, fit_standardization, standardize
from .ngram import NGramModel
from .stgen import CandidateResponse, QAInstance

__all__ = [
    "TrainConfig",
    "RankerModel",
    "LabeledGroup",
    "FeatureGroup",
    "Ranking",
    "SchemaMismatch",
    "DegenerateData",
    "NoPositive",
    "featurize",
    "score",
    "score_many",
    "logistic_loss",
    "logistic_grad",
    "softmax_group_loss",
    "softmax_group_grad",
    "softmax_loss",
    "strided_batches",
    "train_logistic",
    "train_softmax",
    "rank",
    "rank_order",
    "shortest_response_baseline",
    "save_model",
    "load_model",
]


class SchemaMismatch(ValueError):
    pass


class DegenerateData(ValueError):
    pass


class NoPositive(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 50
    l2: float = 1e-4
    batch_groups: int = 32
    seed: int = 13
    neg_batch: int = 50       # K for strided negative sampling
    decay: float = 0.1        # lr_epoch = lr / (1 + decay * epoch)

    def to_json(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "l2": self.l2,
            "batch_groups": self.batch_groups,
            "seed": self.seed,
            "neg_batch": self.neg_batch,
            "decay": self.decay,
        }


@dataclass(frozen=True)
class LabeledGroup:
    """One question with its candidate responses and 0/1 labels."""

    instance: QAInstance
    candidates: tuple[CandidateResponse, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        if len(self.candidates) != len(self.labels):
            raise ValueError(f"group {self.instance.id!r}: candidates/labels length mismatch")
        if any(l not in (0, 1) for l in self.labels):
            raise ValueError(f"group {self.instance.id!r}: labels must be 0 or 1")


@dataclass(frozen=True)
class FeatureGroup:
    """Extracted (but unstandardized) features for one question's candidates."""

    group_id: str
    matrix: np.ndarray              # (m, d)
    labels: np.ndarray              # (m,) of 0/1
    tokens: tuple[tuple[str, ...], ...] | None = None

    def __post_init__(self):
        if self.matrix.shape[0] != self.labels.shape[0]:
            raise ValueError(f"group {self.group_id!r}: matrix/labels length mismatch")


@dataclass(frozen=True)
class RankerModel:
    weights: np.ndarray
    bias: float
    loss: str                        # "logistic" | "softmax"
    stats: StandardizationStats
    schema_version: int = feat.SCHEMA_VERSION
    hyperparameters: dict = field(default_factory=dict)
    training_curve: tuple[float, ...] = ()
    training_hash: str = ""

    def __post_init__(self):
        if not np.all(np.isfinite(self.weights)) or not math.isfinite(self.bias):
            raise ValueError("model parameters must be finite")


def featurize(group: LabeledGroup, lm2: NGramModel, lm3: NGramModel) -> FeatureGroup:
    matrix = np.vstack(
        [feat.extract(group.instance, c, lm2, lm3) for c in group.candidates]
    )
    return FeatureGroup(
        group.instance.id,
        matrix,
        np.asarray(group.labels, int),
        tuple(c.tokens for c in group.candidates),
    )


def score(model: RankerModel, vector: np.ndarray) -> float:
    vector = np.asarray(vector, float)
    if vector.shape != model.weights.shape:
        raise SchemaMismatch(f"feature shape {vector.shape} != weights {model.weights.shape}")
    phi = standardize(vector, model.stats)
    return float(phi @ model.weights + model.bias)


def score_many(model: RankerModel, matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, float)
    if matrix.shape[-1] != model.weights.shape[0]:
        raise SchemaMismatch(f"feature dim {matrix.shape[-1]} != weights {model.weights.shape[0]}")
    return standardize(matrix, model.stats) @ model.weights + model.bias


# ---------------------------------------------------------------------------
# losses and gradients (exposed so tests can finite-difference them)


def logistic_loss(w, b, X, y) -> float:
    """sum log(1 + exp(-y f)) for y in {-1, +1}."""
    f = X @ w + b
    return float(np.logaddexp(0.0, -y * f).sum())


def logistic_grad(w, b, X, y):
    f = X @ w + b
    s = 1.0 / (1.0 + np.exp(y * f))   # sigmoid(-y f)
    coef = -y * s
    return X.T @ coef, float(coef.sum())


def softmax_group_loss(w, b, x_pos, X_neg) -> float:
    """log(1 + sum_j exp(-(f_pos - f_j))) for one group; b cancels."""
    if X_neg.shape[0] == 0:
        return 0.0
    margins = (x_pos @ w) - (X_neg @ w)
    a = np.concatenate(([0.0], -margins))
    m = a.max()
    return float(m + np.log(np.exp(a - m).sum()))


def softmax_group_grad(w, b, x_pos, X_neg):
    if X_neg.shape[0] == 0:
        return np.zeros_like(w), 0.0
    margins = (x_pos @ w) - (X_neg @ w)
    a = np.concatenate(([0.0], -margins))
    m = a.max()
    e = np.exp(a - m)
    q = e[1:] / e.sum()               # weight of each negative
    gw = X_neg.T @ q - q.sum() * x_pos
    return gw, 0.0


def _replicas(group: FeatureGroup):
    pos = np.flatnonzero(group.labels == 1)
    neg = np.flatnonzero(group.labels == 0)
    return pos, neg


def strided_batches(rng, positives, negatives, k: int):
    """Yield (positive, negatives-chunk) pairs for one group and epoch.

    Negatives are shuffled and cut into strides of k - 1, so each appears in
    at least one chunk per epoch; every chunk draws one random positive.
    """
    stride = max(k - 1, 1)
    shuffled = rng.permutation(negatives)
    for start in range(0, shuffled.size, stride):
        chunk = shuffled[start : start + stride]
        yield positives[rng.integers(positives.size)], chunk


def softmax_loss(w, b, groups) -> float:
    """Full (unsampled) softmax objective, one term per positive replica."""
    total = 0.0
    for g in groups:
        pos, neg = _replicas(g)
        for p in pos:
            total += softmax_group_loss(w, b, g.matrix[p], g.matrix[neg])
    return total


# ---------------------------------------------------------------------------
# training


def _standardized_groups(groups):
    all_rows = np.vstack([g.matrix for g in groups])
    stats = fit_standardization(all_rows)
    std_groups = [
        FeatureGroup(g.group_id, standardize(g.matrix, stats), g.labels, g.tokens)
        for g in groups
    ]
    return stats, std_groups


def _training_hash(groups, config: TrainConfig, loss: str) -> str:
    h = hashlib.sha256()
    h.update(loss.encode())
    h.update(json.dumps(config.to_json(), sort_keys=True).encode())
    for g in groups:
        h.update(g.group_id.encode())
        h.update(np.ascontiguousarray(g.matrix).tobytes())
        h.update(np.ascontiguousarray(g.labels).tobytes())
    return h.hexdigest()


def train_logistic(groups, config: TrainConfig = TrainConfig()) -> RankerModel:
    groups = list(groups)
    if not groups:
        raise DegenerateData("no training groups")
    labels = np.concatenate([g.labels for g in groups])
    if labels.min() == labels.max():
        raise DegenerateData("all training labels are identical")
    stats, std = _standardized_groups(groups)
    d = std[0].matrix.shape[1]
    w = np.zeros(d)
    b = 0.0
    rng = np.random.default_rng(config.seed)
    curve = []
    ys = [2.0 * g.labels - 1.0 for g in std]
    for epoch in range(config.epochs):
        lr = config.learning_rate / (1.0 + config.decay * epoch)
        order = rng.permutation(len(std))
        for start in range(0, len(order), config.batch_groups):
            batch = order[start : start + config.batch_groups]
            X = np.vstack([std[i].matrix for i in batch])
            y = np.concatenate([ys[i] for i in batch])
            gw, gb = logistic_grad(w, b, X, y)
            n = X.shape[0]
            w -= lr * (gw / n + config.l2 * w)
            b -= lr * gb / n
        full = logistic_loss(w, b, np.vstack([g.matrix for g in std]), np.concatenate(ys))
        curve.append(full + 0.5 * config.l2 * float(w @ w))
    return RankerModel(
        w, b, "logistic", stats,
        hyperparameters=config.to_json(),
        training_curve=tuple(curve),
        training_hash=_training_hash(groups, config, "logistic"),
    )


def train_softmax(groups, config: TrainConfig = TrainConfig()) -> RankerModel:
    groups = list(groups)
    if not groups:
        raise NoPositive("no training groups")
    for g in groups:
        if not (g.labels == 1).any():
            raise NoPositive(f"group {g.group_id!r} has no positive candidate")
    stats, std = _standardized_groups(groups)
    d = std[0].matrix.shape[1]
    w = np.zeros(d)
    b = 0.0
    rng = np.random.default_rng(config.seed)
    curve = []
    for epoch in range(config.epochs):
        lr = config.learning_rate / (1.0 + config.decay * epoch)
        for gi in rng.permutation(len(std)):
            g = std[gi]
            pos, neg = _replicas(g)
            if neg.size == 0:
                continue
            for p, chunk in strided_batches(rng, pos, neg, config.neg_batch):
                gw, _ = softmax_group_grad(w, b, g.matrix[p], g.matrix[chunk])
                w -= lr * (gw + config.l2 * w)
        curve.append(softmax_loss(w, b, std) + 0.5 * config.l2 * float(w @ w))
    return RankerModel(
        w, b, "softmax", stats,
        hyperparameters=config.to_json(),
        training_curve=tuple(curve),
        training_hash=_training_hash(groups, config, "softmax"),
    )


# ---------------------------------------------------------------------------
# ranking


@dataclass(frozen=True)
class Ranking:
    indices: tuple[int, ...]          # candidate indices, best first
    scores: np.ndarray                # aligned with the original order
    probabilities: np.ndarray         # aligned with the original order


def rank_order(scores, tokens=None) -> list[int]:
    """Indices sorted by descending score; ties to shorter, then lexicographic."""
    scores = list(scores)

    def key(i):
        if tokens is not None:
            return (-scores[i], len(tokens[i]), " ".join(tokens[i]))
        return (-scores[i], i)

    return sorted(range(len(scores)), key=key)


def rank(model: RankerModel, group: FeatureGroup, external_scores=None) -> Ranking:
    """Order one group's candidates; probabilities by the model's loss kind.

    When external_scores is given (a probability per candidate, emulating a
    drop-in neural scorer), it replaces the linear model entirely.
    """
    if external_scores is not None:
        scores = np.asarray(external_scores, float)
        if scores.shape[0] != group.matrix.shape[0]:
            raise SchemaMismatch("external scores length does not match candidates")
        probs = scores
    else:
        scores = score_many(model, group.matrix)
        if model.loss == "logistic":
            probs = 1.0 / (1.0 + np.exp(-scores))
        else:
            shifted = np.exp(scores - scores.max())
            probs = shifted / shifted.sum()
    order = rank_order(scores, group.tokens)
    return Ranking(tuple(order), scores, probs)


def shortest_response_baseline(candidates) -> int:
    """Index of the shortest candidate (ties lexicographic)."""
    toks = [tuple(c) for c in candidates]
    if not toks:
        raise ValueError("need at least one candidate")
    return min(range(len(toks)), key=lambda i: (len(toks[i]), " ".join(toks[i])))


# ---------------------------------------------------------------------------
# persistence


def save_model(model: RankerModel, path):
    path = Path(path)
    record = {
        "format": "fluentqa-linear-ranker",
        "schema_version": model.schema_version,
        "loss": model.loss,
        "weights": model.weights.tolist(),
        "bias": model.bias,
        "standardization": model.stats.to_json(),
        "hyperparameters": model.hyperparameters,
        "training_curve": list(model.training_curve),
        "training_hash": model.training_hash,
    }
    path.write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
    sidecar = path.with_suffix(".schema.json")
    sidecar.write_text(json.dumps(feat.feature_schema(), indent=2) + "\n", encoding="utf-8")


def load_model(path) -> RankerModel:
    record = json.loads(Path(path).read_text(encoding="utf-8"))
    if record.get("format") != "fluentqa-linear-ranker":
        raise SchemaMismatch(f"{path}: not a ranker model file")
    if record.get("schema_version") != feat.SCHEMA_VERSION:
        raise SchemaMismatch(f"{path}: schema version {record.get('schema_version')} unsupported")
    return RankerModel(
        np.asarray(record["weights"], float),
        float(record["bias"]),
        record["loss"],
        StandardizationStats.from_json(record["standardization"]),
        schema_version=record["schema_version"],
        hyperparameters=record.get("hyperparameters", {}),
        training_curve=tuple(record.get("training_curve", ())),
        training_hash=record.get("training_hash", ""),
    )
