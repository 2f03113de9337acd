"""Dataset container shared by all fitting and evaluation routines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Dataset"]


@dataclass
class Dataset:
    """Feature matrix, targets, and optional per-sample weights.

    Binary classification tasks encode labels as 0/1 in ``targets``.
    Weights must be non-negative with a positive total; a missing weight
    vector means every sample counts once.
    """

    features: np.ndarray
    targets: np.ndarray
    weights: np.ndarray | None = None
    feature_names: list[str] | None = None

    def __post_init__(self) -> None:
        features = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        if features.ndim != 2:
            raise ValueError(f"features must be 2-dimensional, got shape {features.shape}")
        n, d = features.shape
        if n == 0 or d == 0:
            raise ValueError("dataset must contain at least one sample and one feature")
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain NaN or infinite values")
        targets = np.asarray(self.targets, dtype=np.float64).ravel()
        if targets.shape[0] != n:
            raise ValueError(f"targets length {targets.shape[0]} does not match {n} samples")
        if not np.all(np.isfinite(targets)):
            raise ValueError("targets contain NaN or infinite values")
        self.features = features
        self.targets = targets
        if self.weights is not None:
            weights = np.asarray(self.weights, dtype=np.float64).ravel()
            if weights.shape[0] != n:
                raise ValueError(f"weights length {weights.shape[0]} does not match {n} samples")
            if not np.all(np.isfinite(weights)):
                raise ValueError("weights contain NaN or infinite values")
            if np.any(weights < 0):
                raise ValueError("weights must be non-negative")
            if weights.sum() <= 0:
                raise ValueError("weights must have a positive sum")
            self.weights = weights
        if self.feature_names is not None:
            names = [str(name) for name in self.feature_names]
            if len(names) != d:
                raise ValueError(f"got {len(names)} feature names for {d} features")
            self.feature_names = names

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def effective_weights(self) -> np.ndarray:
        """Weight vector with the all-ones default materialized."""
        if self.weights is None:
            return np.ones(self.n_samples, dtype=np.float64)
        return self.weights

    def subset(self, indices: np.ndarray) -> "Dataset":
        """New dataset holding the given rows (duplicates allowed)."""
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(
            features=self.features[idx],
            targets=self.targets[idx],
            weights=None if self.weights is None else self.weights[idx],
            feature_names=self.feature_names,
        )
