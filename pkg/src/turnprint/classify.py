"""Driver classifiers: Gaussian naive Bayes, random forest, and trip fusion.

Both classifiers are trained on labeled feature vectors and predict single
turns; trips are identified by fusing per-turn naive-Bayes densities with a
class prior in log space (maximum a posteriori over the whole trip).  Class
labels are kept sorted, and every argmax resolves ties toward the
lexicographically smallest label.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .features import FeatureVector
from .forest import Tree, forest_votes, grow_forest
from .seeds import derive_seed

NB_VARIANCE_FLOOR = 1e-9
RF_N_TREES = 100

MODEL_FORMAT = "turnprint-model"
MODEL_VERSION = 1


@dataclass
class TripPrediction:
    """MAP fusion result: winning label plus per-class cumulative log-score."""

    predicted: str
    log_scores: dict[str, float]
    n_turns_used: int


@dataclass
class GaussianNBModel:
    """Per-class, per-feature Gaussian densities with floored variances."""

    classes: list[str]
    means: np.ndarray
    variances: np.ndarray
    log_priors: np.ndarray
    seed: int

    @property
    def kind(self) -> str:
        return "nb"

    @property
    def n_features(self) -> int:
        return int(self.means.shape[1])

    def log_likelihood_matrix(self, x: np.ndarray) -> np.ndarray:
        """Class-conditional log densities, shape (n, n_classes)."""
        out = np.empty((x.shape[0], len(self.classes)))
        for c in range(len(self.classes)):
            var = self.variances[c]
            quad = ((x - self.means[c]) ** 2 / var).sum(axis=1)
            out[:, c] = -0.5 * (np.log(2.0 * np.pi * var).sum() + quad)
        return out

    def score_matrix(self, x: np.ndarray) -> np.ndarray:
        """Per-turn scores: log prior plus class-conditional log density."""
        return self.log_likelihood_matrix(x) + self.log_priors


@dataclass
class RandomForestModel:
    classes: list[str]
    trees: list[Tree]
    n_features: int
    seed: int

    @property
    def kind(self) -> str:
        return "rf"

    def score_matrix(self, x: np.ndarray) -> np.ndarray:
        """Fraction of trees voting for each class."""
        return forest_votes(self.trees, x, len(self.classes))


Model = GaussianNBModel | RandomForestModel


def _as_xy(data) -> tuple[np.ndarray, np.ndarray]:
    """Accept a list of labeled FeatureVectors or an (X, labels) pair."""
    if isinstance(data, tuple):
        x, y = data
        return np.asarray(x, dtype=float), np.asarray(y, dtype=object)
    vectors = list(data)
    if not vectors:
        raise ValueError("no training data")
    if any(v.label is None for v in vectors):
        raise ValueError("all training vectors must be labeled")
    x = np.stack([v.values for v in vectors])
    y = np.asarray([v.label for v in vectors], dtype=object)
    return x, y


def _canonical_order(x: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """Sort rows by (label, feature values) so training ignores row order."""
    keys = tuple(x[:, j] for j in range(x.shape[1] - 1, -1, -1)) + (codes,)
    return np.lexsort(keys)


def train(data, kind: str, seed: int = 0) -> Model:
    """Train a classifier of the given kind ("nb" or "rf").

    Deterministic given (data contents, kind, seed); training-set row order
    does not matter because rows are canonically sorted first.
    """
    x, y = _as_xy(data)
    classes = sorted(set(y))
    if len(classes) < 2:
        raise ValueError("training requires at least 2 classes")
    index = {label: i for i, label in enumerate(classes)}
    codes = np.asarray([index[label] for label in y], dtype=np.int64)
    order = _canonical_order(x, codes)
    x, codes = x[order], codes[order]

    if kind == "nb":
        n_classes = len(classes)
        d = x.shape[1]
        means = np.empty((n_classes, d))
        variances = np.empty((n_classes, d))
        counts = np.empty(n_classes)
        for c in range(n_classes):
            rows = x[codes == c]
            counts[c] = rows.shape[0]
            means[c] = rows.mean(axis=0)
            variances[c] = np.maximum(rows.var(axis=0), NB_VARIANCE_FLOOR)
        return GaussianNBModel(
            classes=classes,
            means=means,
            variances=variances,
            log_priors=np.log(counts / counts.sum()),
            seed=seed,
        )
    if kind == "rf":
        trees = grow_forest(x, codes, len(classes), RF_N_TREES, seed)
        return RandomForestModel(
            classes=classes, trees=trees, n_features=x.shape[1], seed=seed
        )
    raise ValueError(f"unknown classifier kind {kind!r}")


def _vector_values(v) -> np.ndarray:
    if isinstance(v, FeatureVector):
        return v.values
    return np.asarray(v, dtype=float)


def _check_dim(model: Model, x: np.ndarray) -> None:
    if x.shape[-1] != model.n_features:
        raise ValueError(
            f"vector dimension {x.shape[-1]} does not match model "
            f"dimension {model.n_features}"
        )


def _argmax_label(classes: list[str], scores: np.ndarray) -> str:
    # classes are sorted, so the first maximum is the lexicographic winner
    return classes[int(np.argmax(scores))]


def predict_turn(model: Model, v) -> tuple[str, dict[str, float]]:
    """Predict one turn; returns (label, per-class score).

    Scores are log prior + log density for naive Bayes, vote fractions for
    the forest.  Ties go to the lexicographically smallest label.
    """
    x = _vector_values(v).reshape(1, -1)
    _check_dim(model, x)
    scores = model.score_matrix(x)[0]
    label = _argmax_label(model.classes, scores)
    return label, dict(zip(model.classes, scores.tolist()))


def predict_labels(model: Model, x: np.ndarray) -> np.ndarray:
    """Vectorized per-turn prediction for an (n, d) array."""
    x = np.asarray(x, dtype=float)
    _check_dim(model, x)
    scores = model.score_matrix(x)
    return np.asarray(model.classes, dtype=object)[np.argmax(scores, axis=1)]


def predict_trip_map(
    model: GaussianNBModel,
    turns,
    priors: dict[str, float] | None = None,
) -> TripPrediction:
    """Identify a trip's driver by MAP fusion of per-turn densities.

    D_pred = argmax_k [ log p(D_k) + sum_i log p(T_i | D_k) ], evaluated in
    log space so long trips cannot underflow.  The prior defaults to uniform.
    """
    if not isinstance(model, GaussianNBModel):
        raise ValueError("trip fusion requires a naive Bayes model")
    turn_list = list(turns)
    if not turn_list:
        raise ValueError("empty trip")
    x = np.stack([_vector_values(v) for v in turn_list])
    _check_dim(model, x)
    if priors is None:
        log_prior = np.full(len(model.classes), -np.log(len(model.classes)))
    else:
        if set(priors) != set(model.classes):
            raise ValueError("priors must cover exactly the model's classes")
        p = np.asarray([priors[c] for c in model.classes], dtype=float)
        if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-6:
            raise ValueError("priors must be positive and sum to 1")
        log_prior = np.log(p)
    scores = log_prior + model.log_likelihood_matrix(x).sum(axis=0)
    return TripPrediction(
        predicted=_argmax_label(model.classes, scores),
        log_scores=dict(zip(model.classes, scores.tolist())),
        n_turns_used=len(turn_list),
    )


@dataclass
class KFoldReport:
    kind: str
    classes: list[str]
    fold_accuracies: list[float]
    mean_accuracy: float
    confusion: np.ndarray
    seed: int


def kfold_eval(data, kind: str, folds: int = 10, seed: int = 0) -> KFoldReport:
    """Stratified k-fold cross validation; deterministic per seed.

    Per-class index lists are shuffled and concatenated, then dealt
    round-robin into folds, which keeps fold sizes balanced and class mixes
    close to proportional.  Reports the mean of per-fold accuracies and the
    confusion matrix aggregated over all folds (rows true, columns predicted).
    """
    x, y = _as_xy(data)
    n = x.shape[0]
    if n < folds:
        raise ValueError(f"need at least {folds} samples for {folds}-fold eval")
    classes = sorted(set(y))
    rng = np.random.default_rng(derive_seed(seed, "kfold"))
    order = np.concatenate(
        [rng.permutation(np.flatnonzero(y == label)) for label in classes]
    )
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[order] = np.arange(n) % folds

    index = {label: i for i, label in enumerate(classes)}
    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    accuracies = []
    for f in range(folds):
        test = fold_of == f
        model = train((x[~test], y[~test]), kind, seed=derive_seed(seed, "fold", f))
        predicted = predict_labels(model, x[test])
        truth = y[test]
        accuracies.append(float(np.mean(predicted == truth)))
        for t_label, p_label in zip(truth, predicted):
            confusion[index[t_label], index[p_label]] += 1
    return KFoldReport(
        kind=kind,
        classes=classes,
        fold_accuracies=accuracies,
        mean_accuracy=float(np.mean(accuracies)),
        confusion=confusion,
        seed=seed,
    )


def model_to_dict(model: Model) -> dict:
    out = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind,
        "classes": list(model.classes),
        "seed": model.seed,
        "n_features": model.n_features,
    }
    if isinstance(model, GaussianNBModel):
        out["means"] = model.means.tolist()
        out["variances"] = model.variances.tolist()
        out["log_priors"] = model.log_priors.tolist()
    else:
        out["n_trees"] = len(model.trees)
        out["trees"] = [
            {
                "feature": t.feature.tolist(),
                "threshold": t.threshold.tolist(),
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "leaf_class": t.leaf_class.tolist(),
            }
            for t in model.trees
        ]
    return out


def model_from_dict(raw: dict) -> Model:
    if raw.get("format") != MODEL_FORMAT:
        raise ValueError("not a model file")
    if raw.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {raw.get('version')}")
    classes = [str(c) for c in raw["classes"]]
    if raw["kind"] == "nb":
        return GaussianNBModel(
            classes=classes,
            means=np.asarray(raw["means"], dtype=float),
            variances=np.asarray(raw["variances"], dtype=float),
            log_priors=np.asarray(raw["log_priors"], dtype=float),
            seed=int(raw["seed"]),
        )
    if raw["kind"] == "rf":
        trees = [
            Tree(
                feature=np.asarray(t["feature"], dtype=np.int32),
                threshold=np.asarray(t["threshold"], dtype=float),
                left=np.asarray(t["left"], dtype=np.int32),
                right=np.asarray(t["right"], dtype=np.int32),
                leaf_class=np.asarray(t["leaf_class"], dtype=np.int32),
            )
            for t in raw["trees"]
        ]
        return RandomForestModel(
            classes=classes,
            trees=trees,
            n_features=int(raw["n_features"]),
            seed=int(raw["seed"]),
        )
    raise ValueError(f"unknown model kind {raw['kind']!r}")


def save_model(model: Model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)
        fh.write("\n")


def load_model(path) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed model file {path}: {exc}") from exc
    return model_from_dict(raw)
