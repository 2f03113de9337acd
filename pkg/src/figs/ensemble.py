"""Bagged tree-sum ensembles.

Each member is fit on a bootstrap resample, and at every growth iteration a
fresh uniform feature subset restricts all candidate splits for that
iteration.  Member RNG streams are derived from (seed, member index), so
results do not depend on fitting order or thread count.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import FigsModel, FitConfig, fit_figs, predict_proba, predict_raw
from .data import Dataset
from .serialize import FORMAT_VERSION, dump_json, model_from_dict, model_to_dict

__all__ = [
    "EnsembleConfig",
    "FigsEnsemble",
    "resolve_max_features",
    "bootstrap_sample",
    "fit_bagging_figs",
    "predict_ensemble",
    "predict_ensemble_proba",
    "ensemble_to_dict",
    "ensemble_from_dict",
    "save_ensemble",
    "load_ensemble",
    "thread_count",
]

THREADS_ENV_VAR = "FIGS_THREADS"


@dataclass(frozen=True)
class EnsembleConfig:
    """Bagging knobs around a base FitConfig.

    max_features accepts an integer, "d/3", "sqrt", "all", or "auto" (d/3 for
    regression, sqrt(d) for classification, both rounded up).
    """

    base: FitConfig
    n_estimators: int = 100
    max_features: int | str = "auto"
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if isinstance(self.max_features, str):
            if self.max_features not in ("auto", "d/3", "sqrt", "all"):
                raise ValueError(f"unknown max_features rule {self.max_features!r}")
        elif self.max_features < 1:
            raise ValueError("max_features must be >= 1")


def resolve_max_features(rule: int | str, n_features: int, task: str) -> int:
    """Concrete subset size for a rule, clamped to [1, n_features]."""
    if isinstance(rule, str):
        if rule == "auto":
            rule = "d/3" if task == "regression" else "sqrt"
        if rule == "all":
            resolved = n_features
        elif rule == "d/3":
            resolved = math.ceil(n_features / 3)
        elif rule == "sqrt":
            resolved = math.ceil(math.sqrt(n_features))
        else:
            raise ValueError(f"unknown max_features rule {rule!r}")
    else:
        resolved = int(rule)
    return min(max(resolved, 1), n_features)


def bootstrap_sample(n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """n uniform draws with replacement from range(n)."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    return rng.integers(0, n_samples, size=n_samples)


@dataclass
class FigsEnsemble:
    members: list[FigsModel]
    config: EnsembleConfig
    task: str
    n_features: int

    def n_members(self) -> int:
        return len(self.members)


def thread_count(requested: int | None = None) -> int:
    """Worker cap: explicit argument, else the FIGS_THREADS env var, else 1."""
    if requested is not None:
        value = requested
    else:
        raw = os.environ.get(THREADS_ENV_VAR, "")
        try:
            value = int(raw) if raw else 1
        except ValueError:
            raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}")
    return max(value, 1)


def fit_bagging_figs(
    dataset: Dataset,
    config: EnsembleConfig,
    task: str = "regression",
    *,
    n_threads: int | None = None,
) -> FigsEnsemble:
    """Fit the members.  Bootstrap resampling carries sample weights along
    with their rows unchanged; duplicated rows simply appear twice."""
    n = dataset.n_samples
    d = dataset.n_features
    max_features = resolve_max_features(config.max_features, d, task)
    seeds = [
        np.random.SeedSequence(entropy=config.seed, spawn_key=(member,))
        for member in range(config.n_estimators)
    ]

    def fit_member(member: int) -> FigsModel:
        rng = np.random.default_rng(seeds[member])
        if config.bootstrap:
            member_data = dataset.subset(bootstrap_sample(n, rng))
        else:
            member_data = dataset
        return fit_figs(
            member_data,
            config.base,
            task,
            max_features=max_features if max_features < d else None,
            rng=rng,
        )

    workers = thread_count(n_threads)
    if workers == 1:
        members = [fit_member(k) for k in range(config.n_estimators)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            members = list(pool.map(fit_member, range(config.n_estimators)))
    return FigsEnsemble(members=members, config=config, task=task, n_features=d)


def predict_ensemble(ensemble: FigsEnsemble, features: np.ndarray) -> np.ndarray:
    """Arithmetic mean of member raw predictions."""
    stacked = np.stack([predict_raw(m, features) for m in ensemble.members])
    return stacked.mean(axis=0)


def predict_ensemble_proba(ensemble: FigsEnsemble, features: np.ndarray) -> np.ndarray:
    """Mean of member probabilities (each member clamped before averaging)."""
    if ensemble.task != "binary_classification":
        raise ValueError("probabilities are only defined for binary_classification")
    stacked = np.stack([predict_proba(m, features) for m in ensemble.members])
    return stacked.mean(axis=0)


def ensemble_to_dict(ensemble: FigsEnsemble) -> dict:
    base = ensemble.config.base
    return {
        "format_version": FORMAT_VERSION,
        "kind": "bagging",
        "task": ensemble.task,
        "n_features": ensemble.n_features,
        "config": {
            "n_estimators": ensemble.config.n_estimators,
            "max_features": ensemble.config.max_features,
            "bootstrap": ensemble.config.bootstrap,
            "seed": ensemble.config.seed,
            "base": {
                "max_splits": base.max_splits,
                "min_impurity_decrease": base.min_impurity_decrease,
                "min_samples_leaf": base.min_samples_leaf,
                "allow_new_trees": base.allow_new_trees,
                "backfit_iterations": base.backfit_iterations,
                "seed": base.seed,
            },
        },
        "members": [model_to_dict(m) for m in ensemble.members],
    }


def ensemble_from_dict(doc: dict) -> FigsEnsemble:
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
    if doc.get("kind") != "bagging":
        raise ValueError("document is not a bagged ensemble")
    raw = doc["config"]
    base = FitConfig(**raw["base"])
    max_features = raw["max_features"]
    if not isinstance(max_features, str):
        max_features = int(max_features)
    config = EnsembleConfig(
        base=base,
        n_estimators=int(raw["n_estimators"]),
        max_features=max_features,
        bootstrap=bool(raw["bootstrap"]),
        seed=int(raw["seed"]),
    )
    members = [model_from_dict(m) for m in doc["members"]]
    return FigsEnsemble(
        members=members,
        config=config,
        task=str(doc["task"]),
        n_features=int(doc["n_features"]),
    )


def save_ensemble(ensemble: FigsEnsemble, path: str) -> None:
    dump_json(ensemble_to_dict(ensemble), path)


def load_ensemble(path: str) -> FigsEnsemble:
    with open(path, "r", encoding="utf-8") as fh:
        return ensemble_from_dict(json.load(fh))
