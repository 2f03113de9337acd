"""Seeded synthetic regression/classification generators.

All generators draw features uniformly (the toy function on [-1, 1]^3,
everything else on [0, 1]^d), add optional Gaussian observation noise to the
targets, and return the noiseless targets separately so test error can be
measured against the true function.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .data import Dataset

__all__ = ["GenSpec", "KINDS", "generate", "regression_function"]

Component = tuple[tuple[int, ...], Callable[[np.ndarray], np.ndarray]]

KINDS = (
    "toy",
    "linear",
    "single_interaction",
    "poly_sum",
    "lss",
    "friedman1",
    "block_additive",
)

_DEFAULT_D = {
    "toy": 3,
    "linear": 50,
    "single_interaction": 50,
    "poly_sum": 50,
    "lss": 50,
    "friedman1": 10,
}

_MIN_D = {
    "toy": 3,
    "linear": 20,
    "single_interaction": 8,
    "poly_sum": 15,
    "lss": 15,
    "friedman1": 5,
}


@dataclass(frozen=True)
class GenSpec:
    """What to generate.

    kind            one of KINDS
    n               number of samples
    d               number of features (defaults per kind)
    noise_sd        standard deviation of additive Gaussian target noise
    seed            RNG seed; the same spec is byte-identical across calls
    balanced        toy only: enumerate the 8 sign patterns exactly n/8
                    times each at the cube corners (+-0.5)^3
    components      block_additive only: (feature indices, callable) pairs
    """

    kind: str
    n: int
    d: int | None = None
    noise_sd: float = 0.0
    seed: int = 0
    balanced: bool = False
    components: tuple[Component, ...] | None = None

    def resolved_d(self) -> int:
        if self.d is not None:
            return self.d
        if self.kind == "block_additive":
            if not self.components:
                raise ValueError("block_additive requires components")
            return max(max(idx) for idx, _ in self.components) + 1
        return _DEFAULT_D[self.kind]

    def to_dict(self) -> dict:
        if self.kind == "block_additive":
            raise ValueError("block_additive specs hold callables and cannot be serialized")
        return {
            "kind": self.kind,
            "n": self.n,
            "d": self.resolved_d(),
            "noise_sd": self.noise_sd,
            "seed": self.seed,
            "balanced": self.balanced,
        }


def regression_function(
    kind: str,
    features: np.ndarray,
    components: Sequence[Component] | None = None,
) -> np.ndarray:
    """Noiseless target values of a generator kind at the given points."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("features must be 2-dimensional")
    if kind == "toy":
        return (x[:, 0] > 0).astype(np.float64) \
            + (x[:, 1] > 0).astype(np.float64) * (x[:, 2] > 0).astype(np.float64)
    if kind == "linear":
        return x[:, :20].sum(axis=1)
    if kind == "single_interaction":
        return (x[:, :8] > 0.1).all(axis=1).astype(np.float64)
    if kind == "poly_sum":
        blocks = x[:, :15].reshape(x.shape[0], 5, 3)
        return blocks.prod(axis=2).sum(axis=1)
    if kind == "lss":
        blocks = x[:, :15].reshape(x.shape[0], 5, 3)
        return (blocks > 0.5).all(axis=2).sum(axis=1).astype(np.float64)
    if kind == "friedman1":
        return (
            10.0 * np.sin(np.pi * x[:, 0] * x[:, 1])
            + 20.0 * (x[:, 2] - 0.5) ** 2
            + 10.0 * x[:, 3]
            + 5.0 * x[:, 4]
        )
    if kind == "block_additive":
        if not components:
            raise ValueError("block_additive requires components")
        total = np.zeros(x.shape[0], dtype=np.float64)
        for indices, fn in components:
            total += np.asarray(fn(x[:, list(indices)]), dtype=np.float64).ravel()
        return total
    raise ValueError(f"unknown generator kind {kind!r}")


def _toy_features(spec: GenSpec, rng: np.random.Generator) -> np.ndarray:
    if not spec.balanced:
        return rng.uniform(-1.0, 1.0, size=(spec.n, 3))
    # Exact enumeration: each feature takes only the two values -0.5 and
    # +0.5, so every sign pattern appears exactly n/8 times and each feature
    # admits a single candidate threshold (0.0).  All split means are then
    # dyadic rationals and the greedy arithmetic is exact.
    if spec.n % 8 != 0:
        raise ValueError("balanced toy generation requires n divisible by 8")
    signs = np.array(list(itertools.product((-0.5, 0.5), repeat=3)))
    pattern = np.repeat(signs, spec.n // 8, axis=0)
    return pattern[rng.permutation(spec.n)]


def generate(spec: GenSpec) -> tuple[Dataset, np.ndarray]:
    """Draw a dataset from a GenSpec.  Returns (dataset, noiseless_targets)."""
    if spec.kind not in KINDS:
        raise ValueError(f"unknown generator kind {spec.kind!r}")
    if spec.n < 1:
        raise ValueError("n must be >= 1")
    if spec.noise_sd < 0:
        raise ValueError("noise_sd must be >= 0")
    d = spec.resolved_d()
    if spec.kind in _MIN_D and d < _MIN_D[spec.kind]:
        raise ValueError(f"kind {spec.kind!r} requires d >= {_MIN_D[spec.kind]}")
    if spec.kind == "block_additive":
        if not spec.components:
            raise ValueError("block_additive requires components")
        for indices, _ in spec.components:
            if min(indices) < 0 or max(indices) >= d:
                raise ValueError("component feature index out of range")

    rng = np.random.default_rng(spec.seed)
    if spec.kind == "toy":
        x = _toy_features(spec, rng)
    else:
        x = rng.random(size=(spec.n, d))
    clean = regression_function(spec.kind, x, spec.components)
    targets = clean
    if spec.noise_sd > 0:
        targets = clean + spec.noise_sd * rng.standard_normal(spec.n)
    names = [f"x{j}" for j in range(d)]
    return Dataset(features=x, targets=targets, feature_names=names), clean
