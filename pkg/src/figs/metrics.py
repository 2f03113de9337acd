"""Evaluation metrics and structural diagnostics for tree-sum models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import FigsModel, predict_raw, truncate
from .data import Dataset

__all__ = [
    "roc_auc",
    "r2",
    "specificity_at_sensitivity",
    "repeated_split_fraction",
    "split_feature_set",
    "stability_score",
    "label_flip_perturbation",
    "EvalReport",
    "evaluate",
    "budget_curve",
    "stability_analysis",
    "DEFAULT_SENSITIVITY_LEVELS",
]

DEFAULT_SENSITIVITY_LEVELS = (0.92, 0.94, 0.96, 0.98)


def _scores_and_labels(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=np.float64).ravel()
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must have the same length")
    if scores.size == 0:
        raise ValueError("scores must be non-empty")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores contain NaN or infinite values")
    if not np.all(np.isin(labels, (0.0, 1.0))):
        raise ValueError("labels must be 0/1")
    if labels.min() == labels.max():
        raise ValueError("both classes must be present")
    return scores, labels


def roc_auc(scores, labels) -> float:
    """Probability that a random positive outscores a random negative,
    counting ties as one half.  Computed from average ranks, which matches
    the explicit pairwise count exactly."""
    scores, labels = _scores_and_labels(scores, labels)
    uniq, inverse, counts = np.unique(scores, return_inverse=True, return_counts=True)
    below = np.concatenate(([0.0], np.cumsum(counts)))[:-1]
    avg_ranks = below + (counts + 1) / 2.0  # 1-based average rank per value
    ranks = avg_ranks[inverse]
    n_pos = float(labels.sum())
    n_neg = float(labels.size - labels.sum())
    u = ranks[labels == 1.0].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def r2(predictions, targets) -> float:
    """1 - SSE/SST around the target mean.  Constant targets have no variance
    to explain; that case returns -inf as a sentinel."""
    predictions = np.asarray(predictions, dtype=np.float64).ravel()
    targets = np.asarray(targets, dtype=np.float64).ravel()
    if predictions.shape != targets.shape:
        raise ValueError("predictions and targets must have the same length")
    if predictions.size == 0:
        raise ValueError("predictions must be non-empty")
    sst = float(np.sum((targets - targets.mean()) ** 2))
    if sst == 0.0:
        return float("-inf")
    sse = float(np.sum((targets - predictions) ** 2))
    return 1.0 - sse / sst


def specificity_at_sensitivity(scores, labels, level: float) -> float:
    """Largest specificity among thresholds whose sensitivity reaches ``level``.

    Decisions are score >= threshold on the raw (pre-clamp) scores.  The
    accept-all threshold always qualifies, so the result is 0 when nothing
    stricter does.
    """
    if not 0.0 < level <= 1.0:
        raise ValueError("level must be in (0, 1]")
    scores, labels = _scores_and_labels(scores, labels)
    pos_sorted = np.sort(scores[labels == 1.0])
    neg_sorted = np.sort(scores[labels == 0.0])
    n_pos = pos_sorted.size
    n_neg = neg_sorted.size
    thresholds = np.unique(scores)
    tp = n_pos - np.searchsorted(pos_sorted, thresholds, side="left")
    tn = np.searchsorted(neg_sorted, thresholds, side="left")
    sens = tp / n_pos
    spec = tn / n_neg
    return float(spec[sens >= level].max())


def _pair_repeated_fraction(pairs: Sequence[tuple[int, float]], tolerance: float) -> float:
    if not pairs:
        return 0.0
    repeated = 0
    for i, (feat, thr) in enumerate(pairs):
        for j, (feat2, thr2) in enumerate(pairs):
            if i != j and feat == feat2 and abs(thr - thr2) <= tolerance:
                repeated += 1
                break
    return repeated / len(pairs)


def repeated_split_fraction(model: FigsModel, tolerance: float = 0.01) -> float:
    """Fraction of splits sharing a feature with another split whose threshold
    lies within ``tolerance`` (the split itself excluded)."""
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    return _pair_repeated_fraction(model.all_splits(), tolerance)


def split_feature_set(model: FigsModel) -> set[int]:
    """Features used by at least one split anywhere in the model."""
    return {feature for feature, _ in model.all_splits()}


def stability_score(features_a: Iterable[int], features_b: Iterable[int]) -> float:
    """Jaccard similarity of two split-feature sets."""
    a = set(features_a)
    b = set(features_b)
    if not a and not b:
        raise ValueError("stability score is undefined for two empty feature sets")
    return len(a & b) / len(a | b)


def label_flip_perturbation(dataset: Dataset, fraction: float, rng: np.random.Generator) -> Dataset:
    """Copy of the dataset with exactly round(fraction * n) binary labels
    flipped, chosen uniformly without replacement."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must be in [0, 1]")
    targets = dataset.targets
    if not np.all(np.isin(targets, (0.0, 1.0))):
        raise ValueError("label flips require 0/1 targets")
    n = dataset.n_samples
    k = int(round(fraction * n))
    flipped = targets.copy()
    if k > 0:
        idx = rng.choice(n, size=k, replace=False)
        flipped[idx] = 1.0 - flipped[idx]
    return Dataset(
        features=dataset.features.copy(),
        targets=flipped,
        weights=None if dataset.weights is None else dataset.weights.copy(),
        feature_names=dataset.feature_names,
    )


@dataclass
class EvalReport:
    """Prediction metrics plus structural diagnostics for one model.

    Exactly one of ``auc``/``r2`` is populated, depending on the task.
    """

    task: str
    n_samples: int
    auc: float | None
    r2: float | None
    specificity_at_sensitivity: dict[float, float] | None
    repeated_split_fraction: float
    n_trees: int
    total_splits: int
    splits_per_tree: list[int]

    def to_dict(self) -> dict:
        doc = {
            "task": self.task,
            "n_samples": self.n_samples,
            "auc": self.auc,
            "r2": self.r2,
            "specificity_at_sensitivity": None,
            "repeated_split_fraction": self.repeated_split_fraction,
            "n_trees": self.n_trees,
            "total_splits": self.total_splits,
            "splits_per_tree": self.splits_per_tree,
        }
        if self.specificity_at_sensitivity is not None:
            doc["specificity_at_sensitivity"] = {
                repr(level): value
                for level, value in sorted(self.specificity_at_sensitivity.items())
            }
        return doc


def evaluate(
    model: FigsModel,
    dataset: Dataset,
    levels: Sequence[float] = DEFAULT_SENSITIVITY_LEVELS,
) -> EvalReport:
    """Score a model on a dataset: AUC and specificity-at-sensitivity for
    binary classification (on raw tree-sum scores), R^2 for regression."""
    scores = predict_raw(model, dataset.features)
    auc = None
    r2_value = None
    spec_map = None
    if model.task == "binary_classification":
        auc = roc_auc(scores, dataset.targets)
        spec_map = {
            float(level): specificity_at_sensitivity(scores, dataset.targets, float(level))
            for level in levels
        }
    else:
        r2_value = r2(scores, dataset.targets)
    return EvalReport(
        task=model.task,
        n_samples=dataset.n_samples,
        auc=auc,
        r2=r2_value,
        specificity_at_sensitivity=spec_map,
        repeated_split_fraction=repeated_split_fraction(model),
        n_trees=model.n_trees(),
        total_splits=model.total_splits,
        splits_per_tree=model.splits_per_tree(),
    )


def budget_curve(
    model: FigsModel,
    dataset: Dataset,
    budgets: Sequence[int],
    levels: Sequence[float] = DEFAULT_SENSITIVITY_LEVELS,
) -> list[dict]:
    """Metrics of the model replayed at several split budgets.

    Greedy growth makes the model at budget b identical to a fresh fit with
    max_splits=b, so one fitted model yields the whole curve.
    """
    rows = []
    for budget in budgets:
        state = truncate(model, int(budget))
        report = evaluate(state, dataset, levels)
        scores = predict_raw(state, dataset.features)
        mse = float(np.mean((scores - dataset.targets) ** 2))
        row = {"split_budget": int(budget), "mse": mse}
        row.update({
            "auc": report.auc,
            "r2": report.r2,
            "n_trees": report.n_trees,
            "total_splits": report.total_splits,
            "repeated_split_fraction": report.repeated_split_fraction,
        })
        rows.append(row)
    return rows


def stability_analysis(
    dataset: Dataset,
    fit_fn: Callable[[Dataset], FigsModel | set],
    p_grid: Sequence[float],
    n_repeats: int,
    seed: int = 0,
) -> dict[float, list[float]]:
    """Jaccard stability of the split-feature set under label flips.

    ``fit_fn`` maps a dataset to a fitted model (or directly to a feature
    set).  For each perturbation fraction p the dataset's labels are flipped
    ``n_repeats`` times with independent seeded streams, the model is refit,
    and the Jaccard similarity against the unperturbed fit is recorded.
    """
    if n_repeats < 1:
        raise ValueError("n_repeats must be >= 1")

    def features_of(fit_result) -> set[int]:
        if isinstance(fit_result, (set, frozenset)):
            return set(fit_result)
        return split_feature_set(fit_result)

    base = features_of(fit_fn(dataset))
    out: dict[float, list[float]] = {}
    for p_index, p in enumerate(p_grid):
        scores = []
        for repeat in range(n_repeats):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=seed, spawn_key=(p_index, repeat))
            )
            perturbed = label_flip_perturbation(dataset, float(p), rng)
            scores.append(stability_score(base, features_of(fit_fn(perturbed))))
        out[float(p)] = scores
    return out
