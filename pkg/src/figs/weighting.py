"""Instance-weighted group models.

Instead of splitting a dataset by group and fitting each part separately, a
membership model estimates each sample's probability of belonging to every
group, and one tree-sum model per group is fit on ALL samples weighted by
those probabilities.  Samples that resemble a group inform its model even
when labeled otherwise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .core import FigsModel, FitConfig, fit_figs, predict_raw
from .data import Dataset
from .serialize import FORMAT_VERSION, dump_json, model_from_dict, model_to_dict

__all__ = [
    "GroupedDataset",
    "MembershipModel",
    "GFigsModel",
    "fit_membership_model",
    "membership_weights",
    "class_weights",
    "positive_class_weight",
    "fit_gfigs",
    "predict_gfigs",
    "predict_gfigs_proba",
    "load_group_weights_csv",
    "gfigs_to_dict",
    "gfigs_from_dict",
    "save_gfigs",
    "load_gfigs",
]


@dataclass
class GroupedDataset:
    """A dataset plus one group label per sample.

    Labels are normalized to strings so CSV round trips compare equal.  Every
    label must appear at least twice.
    """

    base: Dataset
    groups: np.ndarray

    def __post_init__(self) -> None:
        groups = np.asarray([str(g) for g in np.asarray(self.groups).ravel()], dtype=object)
        if groups.shape[0] != self.base.n_samples:
            raise ValueError("groups length does not match the dataset")
        labels, counts = np.unique(groups.astype(str), return_counts=True)
        if labels.size < 2:
            raise ValueError("grouped datasets need at least two distinct groups")
        if counts.min() < 2:
            raise ValueError("every group label must appear at least twice")
        self.groups = groups

    def group_labels(self) -> list[str]:
        return sorted(set(self.groups.tolist()))

    def indicator(self, group: str) -> np.ndarray:
        return (self.groups == group).astype(np.float64)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class MembershipModel:
    """L2-regularized logistic regression for P(group == target | x).

    Features are standardized internally; coefficients live on the
    standardized scale, with zeros at excluded features.  l2_strength is the
    inverse of the usual C parameter (larger means stronger shrinkage), and
    the intercept is unpenalized.
    """

    target_group: str
    other_group: str | None
    coefficients: np.ndarray
    intercept: float
    l2_strength: float
    feature_means: np.ndarray
    feature_scales: np.ndarray
    excluded_features: tuple[int, ...] = ()
    kind: str = "logistic_regression"
    n_iterations: int = 0
    converged: bool = True

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.coefficients.shape[0]:
            raise ValueError("feature matrix width does not match the membership model")
        standardized = (x - self.feature_means) / self.feature_scales
        return _sigmoid(standardized @ self.coefficients + self.intercept)


def _logistic_objective(xa: np.ndarray, y: np.ndarray, beta: np.ndarray, l2: float) -> float:
    z = xa @ beta
    nll = float(np.sum(np.logaddexp(0.0, z) - y * z))
    return nll + 0.5 * l2 * float(np.dot(beta[:-1], beta[:-1]))


def _fit_logistic_irls(
    x: np.ndarray,
    y: np.ndarray,
    l2: float,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> tuple[np.ndarray, float, int, bool]:
    """Newton/IRLS with step halving; the penalized objective never increases.

    Converged when the largest coefficient change in a step falls below tol.
    Returns (coefficients, intercept, iterations, converged).
    """
    n, d = x.shape
    xa = np.hstack([x, np.ones((n, 1))])
    beta = np.zeros(d + 1)
    penalty = np.full(d + 1, l2)
    penalty[-1] = 0.0  # intercept is unpenalized
    obj = _logistic_objective(xa, y, beta, l2)
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        z = xa @ beta
        p = _sigmoid(z)
        grad = xa.T @ (p - y) + penalty * beta
        weights = np.maximum(p * (1.0 - p), 1e-10)
        hessian = (xa * weights[:, None]).T @ xa + np.diag(penalty)
        step = np.linalg.solve(hessian, grad)
        scale = 1.0
        for _ in range(50):
            candidate = beta - scale * step
            new_obj = _logistic_objective(xa, y, candidate, l2)
            if new_obj <= obj:
                break
            scale *= 0.5
        else:
            candidate = beta
            new_obj = obj
        change = float(np.max(np.abs(candidate - beta)))
        beta = candidate
        obj = new_obj
        if change < tol:
            converged = True
            break
    return beta[:-1], float(beta[-1]), iterations, converged


def fit_membership_model(
    grouped: GroupedDataset,
    target_group,
    l2_strength: float = 1.0,
    excluded_features: tuple[int, ...] = (),
) -> MembershipModel:
    """Fit P(group == target_group | x) against all other groups."""
    if l2_strength <= 0:
        raise ValueError("l2_strength must be > 0")
    target = str(target_group)
    labels = grouped.group_labels()
    if target not in labels:
        raise ValueError(f"group {target!r} not present")
    d = grouped.base.n_features
    excluded = tuple(sorted(set(int(j) for j in excluded_features)))
    if excluded and (excluded[0] < 0 or excluded[-1] >= d):
        raise ValueError("excluded feature index out of range")
    included = [j for j in range(d) if j not in excluded]
    if not included:
        raise ValueError("cannot exclude every feature")

    x = grouped.base.features
    means = x.mean(axis=0)
    scales = x.std(axis=0)
    scales = np.where(scales == 0.0, 1.0, scales)
    standardized = (x[:, included] - means[included]) / scales[included]
    y = grouped.indicator(target)
    coef_inc, intercept, iterations, converged = _fit_logistic_irls(
        standardized, y, l2_strength
    )
    coefficients = np.zeros(d)
    coefficients[included] = coef_inc
    return MembershipModel(
        target_group=target,
        other_group=labels[1 - labels.index(target)] if len(labels) == 2 else None,
        coefficients=coefficients,
        intercept=intercept,
        l2_strength=l2_strength,
        feature_means=means,
        feature_scales=scales,
        excluded_features=excluded,
        n_iterations=iterations,
        converged=converged,
    )


def membership_weights(model: MembershipModel, dataset: Dataset, group) -> np.ndarray:
    """Per-sample probability of the given group.

    In the two-group case the complement's weights are computed as one minus
    the target's, so the two vectors sum to one exactly.
    """
    label = str(group)
    p = model.predict_proba(dataset.features)
    if label == model.target_group:
        return p
    if model.other_group is not None and label == model.other_group:
        return 1.0 - p
    raise ValueError(f"group {label!r} is not covered by this membership model")


def positive_class_weight(labels: np.ndarray) -> float:
    """Inverse prevalence of the positive class."""
    labels = np.asarray(labels, dtype=np.float64).ravel()
    if not np.all(np.isin(labels, (0.0, 1.0))):
        raise ValueError("labels must be 0/1")
    n_pos = labels.sum()
    if n_pos == 0 or n_pos == labels.size:
        raise ValueError("both classes must be present")
    return float(labels.size / n_pos)


def class_weights(labels: np.ndarray) -> np.ndarray:
    """Per-sample weights: positives get 1/prevalence, negatives get 1."""
    labels = np.asarray(labels, dtype=np.float64).ravel()
    w_pos = positive_class_weight(labels)
    return np.where(labels == 1.0, w_pos, 1.0)


@dataclass
class GFigsModel:
    """One tree-sum model per group plus the shared membership model.

    ``membership`` is None when the group weights came from external files.
    """

    per_group: dict[str, FigsModel]
    membership: MembershipModel | None
    task: str
    group_column: str | None = None
    feature_names: list[str] | None = field(default=None)

    def group_labels(self) -> list[str]:
        return sorted(self.per_group)


def fit_gfigs(
    grouped: GroupedDataset,
    config: FitConfig,
    task: str = "binary_classification",
    *,
    membership_l2: float = 1.0,
    excluded_features: tuple[int, ...] = (),
    use_class_weights: bool = False,
    external_weights: dict[str, np.ndarray] | None = None,
    group_column: str | None = None,
) -> GFigsModel:
    """Fit one tree-sum model per group on membership-weighted data.

    With two groups a single membership model supplies complementary weights.
    More than two groups require ``external_weights`` (one weight vector per
    group, e.g. from ``load_group_weights_csv``).  ``use_class_weights``
    additionally multiplies in inverse-prevalence weights for positive
    labels, which only makes sense for binary classification targets.
    """
    labels = grouped.group_labels()
    n = grouped.base.n_samples
    membership = None
    if external_weights is not None:
        weight_map = {}
        for label in labels:
            if label not in external_weights:
                raise ValueError(f"external weights missing group {label!r}")
            w = np.asarray(external_weights[label], dtype=np.float64).ravel()
            if w.shape[0] != n:
                raise ValueError("external weight vector length does not match the dataset")
            if not np.all(np.isfinite(w)) or np.any(w < 0):
                raise ValueError("external weights must be finite and non-negative")
            weight_map[label] = w
    else:
        if len(labels) != 2:
            raise ValueError(
                "built-in membership weights support exactly two groups; "
                "supply external_weights for more"
            )
        membership = fit_membership_model(
            grouped, labels[0], l2_strength=membership_l2,
            excluded_features=excluded_features,
        )
        weight_map = {
            label: membership_weights(membership, grouped.base, label)
            for label in labels
        }

    base_weights = grouped.base.effective_weights()
    outcome_weights = class_weights(grouped.base.targets) if use_class_weights else None
    per_group: dict[str, FigsModel] = {}
    for label in labels:
        w = base_weights * weight_map[label]
        if outcome_weights is not None:
            w = w * outcome_weights
        group_data = Dataset(
            features=grouped.base.features,
            targets=grouped.base.targets,
            weights=w,
            feature_names=grouped.base.feature_names,
        )
        per_group[label] = fit_figs(group_data, config, task)
    return GFigsModel(
        per_group=per_group,
        membership=membership,
        task=task,
        group_column=group_column,
        feature_names=grouped.base.feature_names,
    )


def predict_gfigs(model: GFigsModel, features: np.ndarray, groups) -> np.ndarray:
    """Raw tree-sum score from each sample's own group model."""
    features = np.asarray(features, dtype=np.float64)
    groups = np.asarray([str(g) for g in np.asarray(groups).ravel()], dtype=object)
    if groups.shape[0] != features.shape[0]:
        raise ValueError("groups length does not match the feature matrix")
    out = np.empty(features.shape[0], dtype=np.float64)
    for label in np.unique(groups.astype(str)):
        if label not in model.per_group:
            raise ValueError(f"group {label!r} has no fitted model")
        mask = groups == label
        out[mask] = predict_raw(model.per_group[label], features[mask])
    return out


def predict_gfigs_proba(model: GFigsModel, features: np.ndarray, groups) -> np.ndarray:
    if model.task != "binary_classification":
        raise ValueError("probabilities are only defined for binary_classification")
    return np.clip(predict_gfigs(model, features, groups), 0.0, 1.0)


def load_group_weights_csv(path: str, n_samples: int) -> np.ndarray:
    """Read a weight vector from a CSV with columns sample_index, weight.

    Every sample index in [0, n) must appear exactly once.
    """
    weights = np.full(n_samples, np.nan)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or \
                {"sample_index", "weight"} - set(reader.fieldnames):
            raise ValueError("weights CSV must have columns sample_index, weight")
        for row in reader:
            idx = int(row["sample_index"])
            if not 0 <= idx < n_samples:
                raise ValueError(f"sample_index {idx} out of range [0, {n_samples})")
            if not np.isnan(weights[idx]):
                raise ValueError(f"sample_index {idx} appears more than once")
            weights[idx] = float(row["weight"])
    if np.isnan(weights).any():
        raise ValueError("weights CSV does not cover every sample index")
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise ValueError("weights must be finite and non-negative")
    return weights


def _membership_to_dict(model: MembershipModel) -> dict:
    return {
        "kind": model.kind,
        "target_group": model.target_group,
        "other_group": model.other_group,
        "coefficients": model.coefficients.tolist(),
        "intercept": model.intercept,
        "l2_strength": model.l2_strength,
        "feature_means": model.feature_means.tolist(),
        "feature_scales": model.feature_scales.tolist(),
        "excluded_features": list(model.excluded_features),
        "n_iterations": model.n_iterations,
        "converged": model.converged,
    }


def _membership_from_dict(doc: dict) -> MembershipModel:
    return MembershipModel(
        target_group=str(doc["target_group"]),
        other_group=None if doc.get("other_group") is None else str(doc["other_group"]),
        coefficients=np.asarray(doc["coefficients"], dtype=np.float64),
        intercept=float(doc["intercept"]),
        l2_strength=float(doc["l2_strength"]),
        feature_means=np.asarray(doc["feature_means"], dtype=np.float64),
        feature_scales=np.asarray(doc["feature_scales"], dtype=np.float64),
        excluded_features=tuple(int(j) for j in doc.get("excluded_features", ())),
        kind=str(doc.get("kind", "logistic_regression")),
        n_iterations=int(doc.get("n_iterations", 0)),
        converged=bool(doc.get("converged", True)),
    )


def gfigs_to_dict(model: GFigsModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "gfigs",
        "task": model.task,
        "group_column": model.group_column,
        "feature_names": model.feature_names,
        "groups": [
            {"label": label, "model": model_to_dict(model.per_group[label])}
            for label in model.group_labels()
        ],
        "membership": None if model.membership is None
        else _membership_to_dict(model.membership),
    }


def gfigs_from_dict(doc: dict) -> GFigsModel:
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
    if doc.get("kind") != "gfigs":
        raise ValueError("document is not a grouped model")
    per_group = {
        str(entry["label"]): model_from_dict(entry["model"])
        for entry in doc["groups"]
    }
    names = doc.get("feature_names")
    return GFigsModel(
        per_group=per_group,
        membership=None if doc.get("membership") is None
        else _membership_from_dict(doc["membership"]),
        task=str(doc["task"]),
        group_column=doc.get("group_column"),
        feature_names=None if names is None else [str(s) for s in names],
    )


def save_gfigs(model: GFigsModel, path: str) -> None:
    dump_json(gfigs_to_dict(model), path)


def load_gfigs(path: str) -> GFigsModel:
    import json

    with open(path, "r", encoding="utf-8") as fh:
        return gfigs_from_dict(json.load(fh))
