"""Cross-validated sensitivity/specificity with a deterministic linear baseline.

Abnormal (label 1) is the positive class throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class UndefinedMetric(ZeroDivisionError):
    pass


class InsufficientClass(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fn: int = 0
    tn: int = 0
    fp: int = 0

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "ConfusionCounts":
        t = np.asarray(y_true).astype(bool)
        p = np.asarray(y_pred).astype(bool)
        return cls(int(np.sum(t & p)), int(np.sum(t & ~p)), int(np.sum(~t & ~p)), int(np.sum(~t & p)))


def sensitivity(c: ConfusionCounts) -> float:
    if c.tp + c.fn == 0:
        raise UndefinedMetric("sensitivity is undefined without positive examples")
    return c.tp / (c.tp + c.fn)


def specificity(c: ConfusionCounts) -> float:
    if c.tn + c.fp == 0:
        raise UndefinedMetric("specificity is undefined without negative examples")
    return c.tn / (c.tn + c.fp)


def stratified_kfold(labels, k: int = 5, seed: int = 0) -> np.ndarray:
    """Fold id per example.

    Each class is shuffled and dealt round-robin, continuing where the
    previous class stopped so fold sizes stay within one of each other.
    """
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if k < 2:
        raise ValueError("k must be at least 2")
    if len(classes) < 2:
        raise InsufficientClass("stratified folds need two classes")
    rng = np.random.default_rng(seed)
    folds = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for c in classes:
        idx = np.flatnonzero(labels == c)
        if len(idx) < k:
            raise InsufficientClass(f"class {c!r} has {len(idx)} examples, fewer than k={k}")
        idx = rng.permutation(idx)
        folds[idx] = (offset + np.arange(len(idx))) % k
        offset += len(idx)
    return folds


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    scale: np.ndarray  # 0 for constant columns
    C: float
    epochs: int
    seed: int

    def standardize(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return (X - self.mean) * self.scale

    def decision_function(self, X) -> np.ndarray:
        return self.standardize(X) @ self.weights + self.bias

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(np.int64)


def train_baseline(features, labels, C: float = 1.0, epochs: int = 500, seed: int = 0,
                   tol: float = 1e-6) -> LinearModel:
    """L2-regularised hinge-loss linear SVM by dual coordinate descent.

    The bias is an extra constant feature. Coordinates are visited in a
    seeded random order each epoch; the solver stops after ``epochs`` sweeps
    or once the projected gradient falls below ``tol``.
    """
    X = np.asarray(features, dtype=float)
    y01 = np.asarray(labels).astype(np.int64)
    if not np.all(np.isfinite(X)):
        raise ValueError("features must be finite")
    counts = np.bincount(y01, minlength=2)
    if counts[0] < 2 or counts[1] < 2:
        raise InsufficientClass(f"need at least 2 examples per class, got {counts.tolist()}")

    mean = X.mean(axis=0)
    std = X.std(axis=0)
    scale = np.divide(1.0, std, out=np.zeros_like(std), where=std > 0)
    Z = (X - mean) * scale
    y = np.where(y01 == 1, 1.0, -1.0)

    K = Z @ Z.T + 1.0
    diag = np.diag(K).copy()
    n = len(y)
    alpha = np.zeros(n)
    margin = np.zeros(n)  # (K @ (alpha * y))
    rng = np.random.default_rng(seed)
    for _ in range(epochs):
        worst = 0.0
        for i in rng.permutation(n):
            g = y[i] * margin[i] - 1.0
            a = alpha[i]
            pg = min(g, 0.0) if a <= 0.0 else (max(g, 0.0) if a >= C else g)
            if pg == 0.0:
                continue
            worst = max(worst, abs(pg))
            new = min(max(a - g / diag[i], 0.0), C)
            if new != a:
                margin += (new - a) * y[i] * K[:, i]
                alpha[i] = new
        if worst < tol:
            break
    coef = alpha * y
    return LinearModel(Z.T @ coef, float(coef.sum()), mean, scale, C, epochs, seed)


@dataclass
class EvalReport:
    sensitivity: list[float]
    specificity: list[float]
    confusion: list[ConfusionCounts]
    folds: list[int]
    k: int
    seed: int
    classifier: str
    models: list[LinearModel] = field(default_factory=list, repr=False)

    @property
    def sensitivity_mean(self) -> float:
        return float(np.mean(self.sensitivity))

    @property
    def sensitivity_std(self) -> float:
        return float(np.std(self.sensitivity))

    @property
    def specificity_mean(self) -> float:
        return float(np.mean(self.specificity))

    @property
    def specificity_std(self) -> float:
        return float(np.std(self.specificity))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "classifier": self.classifier,
            "folds": list(self.folds),
            "per_fold": [
                {"fold": f, "sensitivity": se, "specificity": sp, **vars(c)}
                for f, (se, sp, c) in enumerate(zip(self.sensitivity, self.specificity, self.confusion))
            ],
            "sensitivity": {"mean": self.sensitivity_mean, "std": self.sensitivity_std},
            "specificity": {"mean": self.specificity_mean, "std": self.specificity_std},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_text(self) -> str:
        lines = [f"{self.k}-fold cross-validation, seed {self.seed}, {self.classifier}",
                 "fold  sensitivity  specificity   tp  fn  tn  fp"]
        for f, (se, sp, c) in enumerate(zip(self.sensitivity, self.specificity, self.confusion)):
            lines.append(f"{f:>4}  {se:>11.4f}  {sp:>11.4f}  {c.tp:>3} {c.fn:>3} {c.tn:>3} {c.fp:>3}")
        lines.append(f"sensitivity  {100 * self.sensitivity_mean:.2f} ± {100 * self.sensitivity_std:.2f}")
        lines.append(f"specificity  {100 * self.specificity_mean:.2f} ± {100 * self.specificity_std:.2f}")
        return "\n".join(lines) + "\n"


FoldFeaturizer = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def cross_validate(features: np.ndarray | FoldFeaturizer, labels: Sequence[int], k: int = 5, seed: int = 0,
                   C: float = 1.0, epochs: int = 500) -> EvalReport:
    """Stratified k-fold CV.

    ``features`` is either a matrix or a callable that, given train and test
    indices, returns ``(X_train, X_test)`` calibrated on the training rows only.
    """
    labels = np.asarray(labels).astype(np.int64)
    folds = stratified_kfold(labels, k, seed)
    if callable(features):
        featurize = features
    else:
        X = np.asarray(features, dtype=float)
        if len(X) != len(labels):
            raise ValueError("features and labels differ in length")

        def featurize(train, test):
            return X[train], X[test]

    sens, spec, conf, models = [], [], [], []
    for f in range(k):
        test = np.flatnonzero(folds == f)
        train = np.flatnonzero(folds != f)
        X_train, X_test = featurize(train, test)
        model = train_baseline(X_train, labels[train], C=C, epochs=epochs, seed=seed)
        c = ConfusionCounts.from_predictions(labels[test], model.predict(X_test))
        sens.append(sensitivity(c))
        spec.append(specificity(c))
        conf.append(c)
        models.append(model)
    desc = f"linear SVM (hinge, L2, dual coordinate descent, C={C}, epochs={epochs}, standardized)"
    return EvalReport(sens, spec, conf, folds.tolist(), k, seed, desc, models)
