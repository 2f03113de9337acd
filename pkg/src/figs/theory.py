"""Oracle constructions for tree sums over additive blocks.

For a target that is a sum of smooth components over disjoint feature blocks,
the right bias/variance trade-off is achieved by tiling each block with a
regular grid of side h_k = (2*sigma^2 / (p_inf * beta_k^2 * d_k * (n+1)))
^(1/(d_k+2)) and least-squares fitting one piecewise-constant tree per block.
These oracles let tests check empirical error rates and whether greedily
grown models keep each tree inside a single block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import FigsModel, Tree, TreeNode, _leaf_membership, predict_raw
from .data import Dataset

__all__ = [
    "BlockSpec",
    "GridStructures",
    "build_grid_structures",
    "ErmTreeSum",
    "fit_erm_tree_sum",
    "DisentanglementReport",
    "disentanglement_report",
    "RateResult",
    "rate_experiment",
    "sine_block_spec",
]


@dataclass(frozen=True)
class BlockSpec:
    """Disjoint feature blocks, optionally with component functions.

    ``components[k]`` maps an (n, d_k) slice to n target values and is only
    needed by experiments that generate data; ``betas[k]`` bounds the
    component's gradient norm and is only needed to size grids.
    """

    blocks: tuple[tuple[int, ...], ...]
    components: tuple[Callable[[np.ndarray], np.ndarray], ...] | None = None
    betas: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not self.blocks:
            raise ValueError("at least one block is required")
        seen: set[int] = set()
        for block in self.blocks:
            if not block:
                raise ValueError("blocks must be non-empty")
            if any(j < 0 for j in block):
                raise ValueError("feature indices must be non-negative")
            if seen & set(block):
                raise ValueError("blocks must be disjoint")
            seen |= set(block)
        if self.components is not None and len(self.components) != len(self.blocks):
            raise ValueError("one component per block is required")
        if self.betas is not None and len(self.betas) != len(self.blocks):
            raise ValueError("one beta per block is required")

    def n_features(self) -> int:
        return max(max(block) for block in self.blocks) + 1

    def target(self, features: np.ndarray) -> np.ndarray:
        if self.components is None:
            raise ValueError("this block spec has no component functions")
        total = np.zeros(features.shape[0], dtype=np.float64)
        for block, fn in zip(self.blocks, self.components):
            total += np.asarray(fn(features[:, list(block)]), dtype=np.float64).ravel()
        return total


@dataclass(frozen=True)
class GridStructures:
    """Per-block grids over [0, 1]^{d_k}: the same cell count on every axis."""

    blocks: tuple[tuple[int, ...], ...]
    cells_per_axis: tuple[int, ...]
    h: tuple[float, ...]
    raw_h: tuple[float, ...]

    def n_cells(self) -> tuple[int, ...]:
        return tuple(c ** len(block) for c, block in zip(self.cells_per_axis, self.blocks))


def _per_block(value, n_blocks: int, name: str) -> list[float]:
    values = list(np.broadcast_to(np.asarray(value, dtype=np.float64), (n_blocks,)))
    if any(v <= 0 for v in values):
        raise ValueError(f"{name} must be positive")
    return [float(v) for v in values]


def build_grid_structures(
    block_spec: BlockSpec,
    n: int,
    sigma: float,
    beta,
    density_bound=1.0,
) -> GridStructures:
    """Grid side lengths from the bias/variance balance.

    The ideal side h_k is rounded to 1/ceil(1/h_k) so cells tile [0, 1]
    exactly; h_k >= 1 collapses the block to a single cell.  ``beta`` and
    ``density_bound`` broadcast over blocks.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    k = len(block_spec.blocks)
    betas = _per_block(beta, k, "beta")
    densities = _per_block(density_bound, k, "density_bound")
    cells = []
    raw = []
    for block, beta_k, pi_k in zip(block_spec.blocks, betas, densities):
        d_k = len(block)
        h_k = (2.0 * sigma ** 2 / (pi_k * beta_k ** 2 * d_k * (n + 1))) ** (1.0 / (d_k + 2))
        raw.append(h_k)
        if h_k >= 1.0:
            cells.append(1)
        else:
            inv = 1.0 / h_k
            # absorb float dust so an exact integer 1/h is not rounded up
            cells.append(int(math.ceil(inv * (1.0 - 1e-9))))
    return GridStructures(
        blocks=block_spec.blocks,
        cells_per_axis=tuple(cells),
        h=tuple(1.0 / c for c in cells),
        raw_h=tuple(raw),
    )


def _build_grid_tree(block: tuple[int, ...], cells: int) -> Tree:
    """Binary tree whose leaves are the cells of a regular grid on the block."""
    counter = [0]

    def next_id() -> int:
        counter[0] += 1
        return counter[0] - 1

    def build(ranges: list[tuple[int, int]]) -> TreeNode:
        node = TreeNode(id=next_id(), value=0.0)
        for axis, (lo, hi) in enumerate(ranges):
            if hi - lo > 1:
                mid = (lo + hi) // 2
                node.feature = block[axis]
                node.threshold = mid / cells
                left_ranges = list(ranges)
                left_ranges[axis] = (lo, mid)
                right_ranges = list(ranges)
                right_ranges[axis] = (mid, hi)
                node.left = build(left_ranges)
                node.right = build(right_ranges)
                return node
        return node

    root = build([(0, cells)] * len(block))
    tree = Tree(root=root)
    for node in tree.iter_nodes():
        tree.register(node)
    tree.next_id = counter[0]
    return tree


@dataclass
class ErmTreeSum:
    """Least-squares leaf values over fixed grid structures.

    Cells that received no training weight keep value zero and are recorded;
    predictions landing in such a cell are flagged so downstream error
    measurements can exclude them.
    """

    model: FigsModel
    structures: GridStructures
    empty_leaves: tuple[frozenset[int], ...]
    sse: float
    cycles: int
    converged: bool

    def predict_with_flags(self, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        features = np.asarray(features, dtype=np.float64)
        values = predict_raw(self.model, features)
        flagged = np.zeros(features.shape[0], dtype=bool)
        for tree, empty in zip(self.model.trees, self.empty_leaves):
            if not empty:
                continue
            for leaf_id, idx in _leaf_membership(tree, features).items():
                if leaf_id in empty:
                    flagged[idx] = True
        return values, flagged


def fit_erm_tree_sum(
    structures: GridStructures,
    dataset: Dataset,
    *,
    sse_tol: float = 1e-10,
    max_cycles: int = 20000,
) -> ErmTreeSum:
    """Backfit leaf values on the fixed structures to the least-squares fit.

    Cycles over trees assigning each leaf the weighted mean of the residual
    excluding that tree, until a full cycle improves training SSE by less
    than ``sse_tol``.  This block-coordinate descent reaches the least
    squares optimum of the cell-indicator design; empty cells stay at zero.
    """
    d = max(max(block) for block in structures.blocks) + 1
    if dataset.n_features < d:
        raise ValueError("dataset has fewer features than the blocks reference")
    trees = [
        _build_grid_tree(block, cells)
        for block, cells in zip(structures.blocks, structures.cells_per_axis)
    ]
    w = dataset.effective_weights()
    y = dataset.targets
    memberships = []
    empty_leaves = []
    for tree in trees:
        members = _leaf_membership(tree, dataset.features)
        empty = frozenset(
            leaf_id for leaf_id, idx in members.items() if w[idx].sum() <= 0
        )
        memberships.append({k: v for k, v in members.items() if k not in empty})
        empty_leaves.append(empty)

    n = dataset.n_samples
    per_tree = [np.zeros(n) for _ in trees]
    total = np.zeros(n)
    sse = float(np.dot(w, (y - total) ** 2))
    cycles = 0
    converged = False
    while cycles < max_cycles:
        cycles += 1
        for k, tree in enumerate(trees):
            partial = total - per_tree[k]
            target = y - partial
            for leaf_id, idx in memberships[k].items():
                leaf = tree.nodes[leaf_id]
                leaf.value = float(np.dot(w[idx], target[idx]) / w[idx].sum())
                per_tree[k][idx] = leaf.value
            total = partial + per_tree[k]
        new_sse = float(np.dot(w, (y - total) ** 2))
        improvement = sse - new_sse
        sse = new_sse
        if improvement < sse_tol:
            converged = True
            break

    model = FigsModel(
        trees=trees,
        task="regression",
        training_mean=float(np.average(y, weights=w)),
        n_features=dataset.n_features,
        total_splits=sum(tree.n_splits() for tree in trees),
    )
    return ErmTreeSum(
        model=model,
        structures=structures,
        empty_leaves=tuple(empty_leaves),
        sse=sse,
        cycles=cycles,
        converged=converged,
    )


@dataclass
class DisentanglementReport:
    """Whether every tree's split features fit inside one block."""

    tree_feature_sets: list[set[int]]
    violations: list[int]
    passed: bool


def disentanglement_report(model: FigsModel, block_spec: BlockSpec) -> DisentanglementReport:
    blocks = [set(block) for block in block_spec.blocks]
    tree_sets = []
    violations = []
    for index, tree in enumerate(model.trees):
        used = {node.feature for node in tree.iter_nodes() if not node.is_leaf}
        tree_sets.append(used)
        if not any(used <= block for block in blocks):
            violations.append(index)
    return DisentanglementReport(
        tree_feature_sets=tree_sets,
        violations=violations,
        passed=not violations,
    )


@dataclass
class RateResult:
    ns: list[int]
    mean_mse: list[float]
    per_seed_mse: list[list[float]]
    e_fractions: list[float]
    slope: float


def rate_experiment(
    block_spec: BlockSpec,
    n_grid: Sequence[int],
    n_seeds: int,
    *,
    sigma: float,
    density_bound=1.0,
    test_n: int = 2000,
    base_seed: int = 0,
) -> RateResult:
    """Test MSE of the grid oracle across training sizes.

    For each (n, seed): draw uniform features on [0, 1]^d, add N(0, sigma^2)
    noise to the block-spec target, size grids for that n, least-squares fit,
    then measure MSE against noiseless targets on a fresh test set, excluding
    flagged (empty-cell) test points.  The slope is the least-squares slope
    of log mean MSE against log n.
    """
    if block_spec.components is None or block_spec.betas is None:
        raise ValueError("rate experiments need components and betas")
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    d = block_spec.n_features()
    per_seed_mse: list[list[float]] = []
    e_fractions: list[float] = []
    for n_index, n in enumerate(n_grid):
        seed_mse = []
        seed_flagged = []
        for seed in range(n_seeds):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=base_seed, spawn_key=(n_index, seed))
            )
            x_train = rng.random(size=(int(n), d))
            y_clean = block_spec.target(x_train)
            y_train = y_clean + sigma * rng.standard_normal(int(n))
            structures = build_grid_structures(
                block_spec, int(n), sigma, block_spec.betas, density_bound
            )
            erm = fit_erm_tree_sum(structures, Dataset(x_train, y_train))
            x_test = rng.random(size=(test_n, d))
            y_test = block_spec.target(x_test)
            pred, flagged = erm.predict_with_flags(x_test)
            kept = ~flagged
            if not kept.any():
                raise ValueError("every test point fell in an empty cell")
            seed_mse.append(float(np.mean((pred[kept] - y_test[kept]) ** 2)))
            seed_flagged.append(float(flagged.mean()))
        per_seed_mse.append(seed_mse)
        e_fractions.append(float(np.mean(seed_flagged)))
    mean_mse = [float(np.mean(values)) for values in per_seed_mse]
    slope = float(np.polyfit(np.log(np.asarray(n_grid, dtype=float)),
                             np.log(np.asarray(mean_mse)), 1)[0])
    return RateResult(
        ns=[int(n) for n in n_grid],
        mean_mse=mean_mse,
        per_seed_mse=per_seed_mse,
        e_fractions=e_fractions,
        slope=slope,
    )


def sine_block_spec(n_components: int = 5) -> BlockSpec:
    """K univariate smooth components f(x) = sin(2 pi x), gradient bound 2 pi."""
    if n_components < 1:
        raise ValueError("n_components must be >= 1")

    def component(z: np.ndarray) -> np.ndarray:
        return np.sin(2.0 * np.pi * z[:, 0])

    return BlockSpec(
        blocks=tuple((j,) for j in range(n_components)),
        components=tuple(component for _ in range(n_components)),
        betas=tuple(2.0 * np.pi for _ in range(n_components)),
    )
