"""Greedy tree-sum fitting.

A model is a sum of binary regression trees grown jointly: every iteration
scores one candidate split per leaf of every existing tree plus one candidate
root split for a brand-new stump, then commits the single best candidate by
impurity decrease.  With new trees disallowed the loop reduces to CART.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset

__all__ = [
    "NEW_TREE",
    "FitConfig",
    "SplitCandidate",
    "SplitRecord",
    "TreeNode",
    "Tree",
    "FigsModel",
    "weighted_impurity_decrease",
    "stump_feature",
    "find_best_split",
    "fit_figs",
    "fit_cart",
    "predict",
    "predict_proba",
    "predict_raw",
    "truncate",
    "backfit",
    "structurally_equal",
]

NEW_TREE = -1

TASKS = ("regression", "binary_classification")

# Decreases below this fraction of the parent SSE are treated as zero so that
# float dust never spawns a split.
_RELATIVE_DECREASE_FLOOR = 1e-12


@dataclass(frozen=True)
class FitConfig:
    """Knobs for the greedy growth loop.

    max_splits counts committed splits across all trees.  A candidate is
    admissible only when its impurity decrease is strictly greater than
    min_impurity_decrease and both children keep at least min_samples_leaf
    positively weighted samples.  allow_new_trees=False restricts growth to
    a single tree (CART).  backfit_iterations > 0 re-fits leaf values by
    cycling over trees after growth finishes.
    """

    max_splits: int
    min_impurity_decrease: float = 0.0
    min_samples_leaf: int = 1
    allow_new_trees: bool = True
    backfit_iterations: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_splits < 0:
            raise ValueError("max_splits must be >= 0")
        if self.min_impurity_decrease < 0:
            raise ValueError("min_impurity_decrease must be >= 0")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.backfit_iterations < 0:
            raise ValueError("backfit_iterations must be >= 0")


@dataclass(frozen=True)
class SplitCandidate:
    """A potential split of one leaf (tree_index == NEW_TREE for a fresh stump)."""

    tree_index: int
    leaf_id: int
    feature: int
    threshold: float
    impurity_decrease: float

    def sort_key(self) -> tuple:
        # Largest decrease wins; ties prefer existing trees over a new stump,
        # then lowest tree index, feature index, threshold, and leaf id.
        return (
            -self.impurity_decrease,
            self.tree_index == NEW_TREE,
            self.tree_index,
            self.feature,
            self.threshold,
            self.leaf_id,
        )


@dataclass(frozen=True)
class SplitRecord:
    """One committed split, in commit order."""

    iteration: int
    tree_index: int
    node_id: int
    feature: int
    threshold: float
    impurity_decrease: float
    created_tree: bool


@dataclass
class TreeNode:
    """Node of one tree.  ``value`` is the prediction the node carried while it
    was a leaf; internal nodes keep it so the model can be replayed at any
    split budget."""

    id: int
    value: float
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    split_order: int | None = None
    sample_ids: np.ndarray | None = None
    weight_sum: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class Tree:
    root: TreeNode
    nodes: dict[int, TreeNode] = field(default_factory=dict)
    next_id: int = 1

    def __post_init__(self) -> None:
        if not self.nodes:
            self.nodes = {self.root.id: self.root}

    def register(self, node: TreeNode) -> None:
        self.nodes[node.id] = node

    def leaves(self) -> list[TreeNode]:
        return [node for node in self.iter_nodes() if node.is_leaf]

    def iter_nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)

    def n_splits(self) -> int:
        return sum(1 for node in self.iter_nodes() if not node.is_leaf)


@dataclass
class FigsModel:
    """A fitted sum of trees.

    The degenerate zero-split model has no trees and predicts training_mean.
    Otherwise the prediction is the sum over trees of the value of the leaf
    containing the query point; training_mean is retained for reference only.
    """

    trees: list[Tree]
    task: str
    training_mean: float
    n_features: int
    total_splits: int
    feature_names: list[str] | None = None
    split_trace: list[SplitRecord] = field(default_factory=list)
    backfit_sse_history: list[float] | None = None

    def n_trees(self) -> int:
        return len(self.trees)

    def splits_per_tree(self) -> list[int]:
        return [tree.n_splits() for tree in self.trees]

    def all_splits(self) -> list[tuple[int, float]]:
        """(feature, threshold) for every internal node across all trees."""
        out = []
        for tree in self.trees:
            for node in tree.iter_nodes():
                if not node.is_leaf:
                    out.append((node.feature, node.threshold))
        return out


def weighted_impurity_decrease(
    values: np.ndarray,
    weights: np.ndarray | None,
    left_mask: np.ndarray,
) -> float:
    """Weighted SSE of the parent minus the weighted SSEs of the two children.

    ``left_mask`` selects the left child within ``values``.  Both children
    must carry positive weight.  Tiny negative results from cancellation are
    clamped to zero.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    n = values.shape[0]
    if weights is None:
        weights = np.ones(n, dtype=np.float64)
    else:
        weights = np.asarray(weights, dtype=np.float64).ravel()
        if weights.shape[0] != n:
            raise ValueError("weights length does not match values")
        if np.any(weights < 0):
            raise ValueError("weights must be non-negative")
    left_mask = np.asarray(left_mask, dtype=bool).ravel()
    if left_mask.shape[0] != n:
        raise ValueError("left_mask length does not match values")
    w_left = weights[left_mask].sum()
    w_right = weights[~left_mask].sum()
    if w_left <= 0 or w_right <= 0:
        raise ValueError("both sides of a split must carry positive weight")

    def _sse(mask: np.ndarray | None) -> float:
        v = values if mask is None else values[mask]
        w = weights if mask is None else weights[mask]
        mean = np.average(v, weights=w)
        return float(np.sum(w * (v - mean) ** 2))

    decrease = _sse(None) - _sse(left_mask) - _sse(~left_mask)
    return max(decrease, 0.0)


def stump_feature(
    node: TreeNode,
    split: tuple[int, float],
    dataset: Dataset,
) -> np.ndarray:
    """Unit-norm signed indicator of a candidate split of ``node``.

    The vector lives on the full sample axis, is positive on the left child,
    negative on the right child, zero elsewhere, and is normalized so that
    its weighted squared norm is one.  With unit weights the squared inner
    product with the residual equals the impurity decrease of the split.
    """
    if node.sample_ids is None:
        raise ValueError("node has no recorded sample ids")
    feature, threshold = split
    ids = node.sample_ids
    w = dataset.effective_weights()
    go_left = dataset.features[ids, feature] <= threshold
    left_ids = ids[go_left]
    right_ids = ids[~go_left]
    w_left = w[left_ids].sum()
    w_right = w[right_ids].sum()
    if w_left <= 0 or w_right <= 0:
        raise ValueError("split leaves an empty child")
    w_total = w_left + w_right
    norm = np.sqrt(w_total * w_left * w_right)
    psi = np.zeros(dataset.n_samples, dtype=np.float64)
    psi[left_ids] = w_right / norm
    psi[right_ids] = -w_left / norm
    return psi


def _best_split_for_samples(
    features: np.ndarray,
    residuals: np.ndarray,
    weights: np.ndarray,
    ids: np.ndarray,
    feature_indices: np.ndarray,
    min_samples_leaf: int,
    min_impurity_decrease: float,
) -> tuple[int, float, float] | None:
    """Scan one leaf.  Returns (feature, threshold, decrease) or None.

    Zero-weight samples are routed by the tree but excluded from threshold
    candidates, leaf-size counts, and means, so indicator weights reproduce a
    fit on the corresponding subset exactly.
    """
    w_leaf = weights[ids]
    pos = w_leaf > 0
    ids_pos = ids[pos]
    m = ids_pos.shape[0]
    if m < 2 * min_samples_leaf or m < 2:
        return None
    w_pos = w_leaf[pos]
    r_pos = residuals[ids_pos]
    wr_pos = w_pos * r_pos
    w_total = float(w_pos.sum())
    s_total = float(wr_pos.sum())
    parent_sse = max(float(np.dot(wr_pos, r_pos) - s_total * s_total / w_total), 0.0)
    floor = _RELATIVE_DECREASE_FLOOR * parent_sse

    best: tuple[int, float, float] | None = None
    for f in feature_indices:
        xv = features[ids_pos, f]
        order = np.argsort(xv, kind="stable")
        xs = xv[order]
        if xs[0] == xs[-1]:
            continue
        ws = w_pos[order]
        wr = wr_pos[order]
        cum_w = np.cumsum(ws)
        cum_wr = np.cumsum(wr)

        cut = np.nonzero(xs[:-1] < xs[1:])[0]
        if min_samples_leaf > 1:
            cut = cut[(cut + 1 >= min_samples_leaf) & (m - cut - 1 >= min_samples_leaf)]
        if cut.size == 0:
            continue
        thresholds = 0.5 * (xs[cut] + xs[cut + 1])
        # Adjacent floats can round the midpoint onto an endpoint; such a
        # threshold would not separate the two values, so drop it.
        interior = (xs[cut] < thresholds) & (thresholds < xs[cut + 1])
        if not np.all(interior):
            cut = cut[interior]
            if cut.size == 0:
                continue
            thresholds = thresholds[interior]
        w_left = cum_w[cut]
        s_left = cum_wr[cut]
        w_right = w_total - w_left
        s_right = s_total - s_left
        decrease = s_left * s_left / w_left + s_right * s_right / w_right \
            - s_total * s_total / w_total
        np.maximum(decrease, 0.0, out=decrease)
        decrease[decrease < floor] = 0.0
        j = int(np.argmax(decrease))  # first max: lowest threshold on ties
        if decrease[j] <= min_impurity_decrease:
            continue
        # Re-derive the winning decrease with sums taken in leaf order.  The
        # scan above sums in per-feature sorted order, so two features whose
        # cuts induce the same (possibly mirrored) partition can disagree in
        # the last ulp and the lowest-feature tie rule would never fire.
        # Direct masked sums for both children make equal partitions give
        # bitwise-equal decreases: the child terms are then the same floats,
        # added in either order.
        go_left = xv <= thresholds[j]
        w_l = float(w_pos[go_left].sum())
        s_l = float(wr_pos[go_left].sum())
        w_r = float(w_pos[~go_left].sum())
        s_r = float(wr_pos[~go_left].sum())
        dec = s_l * s_l / w_l + s_r * s_r / w_r - s_total * s_total / w_total
        dec = max(dec, 0.0)
        if dec < floor:
            dec = 0.0
        if dec > min_impurity_decrease:
            if best is None or dec > best[2]:  # strict: lowest feature on ties
                best = (int(f), float(thresholds[j]), float(dec))
    return best


def find_best_split(
    dataset: Dataset,
    sample_ids: np.ndarray,
    residuals: np.ndarray,
    feature_subset: np.ndarray | None = None,
    *,
    min_samples_leaf: int = 1,
    min_impurity_decrease: float = 0.0,
    tree_index: int = NEW_TREE,
    leaf_id: int = 0,
) -> SplitCandidate | None:
    """Best admissible split of the given samples on the given residuals.

    Candidate thresholds are midpoints between consecutive distinct observed
    feature values among the positively weighted samples.  Returns None when
    no candidate has a strictly positive (above-threshold) decrease.
    """
    ids = np.asarray(sample_ids, dtype=np.intp).ravel()
    if ids.size == 0:
        raise ValueError("sample_ids must be non-empty")
    residuals = np.asarray(residuals, dtype=np.float64).ravel()
    if residuals.shape[0] != dataset.n_samples:
        raise ValueError("residuals must align with the dataset")
    if not np.all(np.isfinite(residuals)):
        raise ValueError("residuals contain NaN or infinite values")
    if feature_subset is None:
        feature_indices = np.arange(dataset.n_features)
    else:
        feature_indices = np.unique(np.asarray(feature_subset, dtype=np.intp))
        if feature_indices.size == 0:
            raise ValueError("feature_subset must be non-empty")
        if feature_indices[0] < 0 or feature_indices[-1] >= dataset.n_features:
            raise ValueError("feature_subset index out of range")
    found = _best_split_for_samples(
        dataset.features,
        residuals,
        dataset.effective_weights(),
        ids,
        feature_indices,
        min_samples_leaf,
        min_impurity_decrease,
    )
    if found is None:
        return None
    feature, threshold, decrease = found
    return SplitCandidate(tree_index, leaf_id, feature, threshold, decrease)


def _validate_task(task: str, targets: np.ndarray) -> None:
    if task not in TASKS:
        raise ValueError(f"task must be one of {TASKS}, got {task!r}")
    if task == "binary_classification":
        if not np.all(np.isin(targets, (0.0, 1.0))):
            raise ValueError("binary_classification targets must be 0/1")


def fit_figs(
    dataset: Dataset,
    config: FitConfig,
    task: str = "regression",
    *,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> FigsModel:
    """Grow a tree-sum model greedily.

    Each iteration computes residuals against the current sum, scores the
    best split of every leaf of every tree plus a root split for a new stump,
    and commits the single best candidate.  New leaf values are the parent
    value plus the weighted mean residual in the child; a fresh stump starts
    from a root value of zero.  Stops after ``config.max_splits`` commits or
    when no admissible candidate remains.

    ``max_features``, when set, draws a fresh uniform feature subset of that
    size at every iteration (used by the bagging wrapper); ``rng`` supplies
    the stream, defaulting to one seeded from ``config.seed``.
    """
    _validate_task(task, dataset.targets)
    n = dataset.n_samples
    d = dataset.n_features
    w = dataset.effective_weights()
    y = dataset.targets
    training_mean = float(np.average(y, weights=w))

    subsetting = max_features is not None and max_features < d
    if max_features is not None and not 1 <= max_features <= d:
        raise ValueError("max_features must be in [1, n_features]")
    if subsetting and rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(config.seed))

    residuals = y.astype(np.float64).copy()
    all_ids = np.arange(n, dtype=np.intp)
    trees: list[Tree] = []
    trace: list[SplitRecord] = []
    # Cached best candidate per (tree, leaf); valid while no residual under
    # the leaf changed.  Unused when per-iteration feature subsets vary.
    cache: dict[tuple[int, int], SplitCandidate | None] = {}

    def scan(ids: np.ndarray, feature_indices: np.ndarray,
             tree_index: int, leaf_id: int) -> SplitCandidate | None:
        found = _best_split_for_samples(
            dataset.features, residuals, w, ids, feature_indices,
            config.min_samples_leaf, config.min_impurity_decrease,
        )
        if found is None:
            return None
        feature, threshold, decrease = found
        return SplitCandidate(tree_index, leaf_id, feature, threshold, decrease)

    for iteration in range(1, config.max_splits + 1):
        if subsetting:
            feature_indices = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            feature_indices = np.arange(d)

        candidates: list[SplitCandidate] = []
        for k, tree in enumerate(trees):
            for leaf in tree.leaves():
                key = (k, leaf.id)
                if not subsetting and key in cache:
                    cand = cache[key]
                else:
                    cand = scan(leaf.sample_ids, feature_indices, k, leaf.id)
                    if not subsetting:
                        cache[key] = cand
                if cand is not None:
                    candidates.append(cand)
        if config.allow_new_trees or not trees:
            cand = scan(all_ids, feature_indices, NEW_TREE, 0)
            if cand is not None:
                candidates.append(cand)
        if not candidates:
            break
        best = min(candidates, key=SplitCandidate.sort_key)

        if best.tree_index == NEW_TREE:
            node = TreeNode(id=0, value=0.0, sample_ids=all_ids, weight_sum=float(w.sum()))
            tree = Tree(root=node)
            trees.append(tree)
            tree_index = len(trees) - 1
            created_tree = True
        else:
            tree_index = best.tree_index
            tree = trees[tree_index]
            node = tree.nodes[best.leaf_id]
            created_tree = False

        ids = node.sample_ids
        go_left = dataset.features[ids, best.feature] <= best.threshold
        left_ids = ids[go_left]
        right_ids = ids[~go_left]
        w_left = w[left_ids]
        w_right = w[right_ids]
        mean_left = float(np.dot(w_left, residuals[left_ids]) / w_left.sum())
        mean_right = float(np.dot(w_right, residuals[right_ids]) / w_right.sum())
        node.left = TreeNode(
            id=tree.next_id, value=node.value + mean_left,
            sample_ids=left_ids, weight_sum=float(w_left.sum()),
        )
        node.right = TreeNode(
            id=tree.next_id + 1, value=node.value + mean_right,
            sample_ids=right_ids, weight_sum=float(w_right.sum()),
        )
        tree.next_id += 2
        tree.register(node.left)
        tree.register(node.right)
        node.feature = best.feature
        node.threshold = best.threshold
        node.split_order = iteration
        residuals[left_ids] -= mean_left
        residuals[right_ids] -= mean_right
        trace.append(SplitRecord(
            iteration=iteration, tree_index=tree_index, node_id=node.id,
            feature=best.feature, threshold=best.threshold,
            impurity_decrease=best.impurity_decrease, created_tree=created_tree,
        ))

        if not subsetting:
            cache.pop((tree_index, node.id), None)
            changed = np.zeros(n, dtype=bool)
            changed[ids] = True
            stale = [key for key, _ in cache.items()
                     if changed[trees[key[0]].nodes[key[1]].sample_ids].any()]
            for key in stale:
                del cache[key]

    model = FigsModel(
        trees=trees,
        task=task,
        training_mean=training_mean,
        n_features=d,
        total_splits=len(trace),
        feature_names=dataset.feature_names,
        split_trace=trace,
    )
    if config.backfit_iterations > 0 and model.trees:
        model = backfit(model, dataset, config.backfit_iterations)
    return model


def fit_cart(dataset: Dataset, config: FitConfig, task: str = "regression") -> FigsModel:
    """Single-tree special case: identical loop with new trees disallowed."""
    return fit_figs(dataset, replace(config, allow_new_trees=False), task)


def _tree_values(tree: Tree, features: np.ndarray, budget: int | None) -> np.ndarray:
    out = np.empty(features.shape[0], dtype=np.float64)
    stack: list[tuple[TreeNode, np.ndarray]] = [(tree.root, np.arange(features.shape[0], dtype=np.intp))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        stop = node.is_leaf
        if not stop and budget is not None:
            if node.split_order is None:
                raise ValueError("split budgets require a model with a fit trace")
            stop = node.split_order > budget
        if stop:
            out[idx] = node.value
        else:
            go_left = features[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[go_left]))
            stack.append((node.right, idx[~go_left]))
    return out


def _as_feature_matrix(model: FigsModel, x: np.ndarray) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2 or arr.shape[1] != model.n_features:
        raise ValueError(
            f"expected feature matrix with {model.n_features} columns, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("features contain NaN or infinite values")
    return arr, single


def predict_raw(model: FigsModel, x: np.ndarray, *, split_budget: int | None = None) -> np.ndarray | float:
    """Sum over trees of the value of the leaf containing each row.

    ``split_budget`` replays the model as it stood after that many committed
    splits (requires the fit trace).  The zero-tree model predicts the
    training mean.
    """
    arr, single = _as_feature_matrix(model, x)
    if split_budget is not None and split_budget < 0:
        raise ValueError("split_budget must be >= 0")
    out = np.zeros(arr.shape[0], dtype=np.float64)
    active = False
    for tree in model.trees:
        if split_budget is not None:
            if tree.root.split_order is None:
                raise ValueError("split budgets require a model with a fit trace")
            if tree.root.split_order > split_budget:
                continue
        out += _tree_values(tree, arr, split_budget)
        active = True
    if not active:
        # Zero-split state: the degenerate model predicts the training mean.
        out[:] = model.training_mean
    return float(out[0]) if single else out


def predict(model: FigsModel, x: np.ndarray, *, split_budget: int | None = None) -> np.ndarray | float:
    """Raw tree-sum prediction (see ``predict_proba`` for clamped probabilities)."""
    return predict_raw(model, x, split_budget=split_budget)


def predict_proba(model: FigsModel, x: np.ndarray, *, split_budget: int | None = None) -> np.ndarray | float:
    """Tree-sum clamped to [0, 1]; only defined for binary classification."""
    if model.task != "binary_classification":
        raise ValueError("predict_proba is only defined for binary_classification models")
    raw = predict_raw(model, x, split_budget=split_budget)
    if isinstance(raw, float):
        return min(max(raw, 0.0), 1.0)
    return np.clip(raw, 0.0, 1.0)


def _truncate_node(node: TreeNode, budget: int) -> TreeNode:
    if node.is_leaf or (node.split_order is not None and node.split_order > budget):
        return TreeNode(id=node.id, value=node.value,
                        sample_ids=node.sample_ids, weight_sum=node.weight_sum)
    if node.split_order is None:
        raise ValueError("truncation requires a model with a fit trace")
    out = TreeNode(id=node.id, value=node.value, feature=node.feature,
                   threshold=node.threshold, split_order=node.split_order,
                   sample_ids=node.sample_ids, weight_sum=node.weight_sum)
    out.left = _truncate_node(node.left, budget)
    out.right = _truncate_node(node.right, budget)
    return out


def truncate(model: FigsModel, total_splits: int) -> FigsModel:
    """The model as it stood after ``total_splits`` committed splits.

    Greedy growth never revisits earlier decisions, so the truncation equals
    a fresh fit with that budget.
    """
    if total_splits < 0:
        raise ValueError("total_splits must be >= 0")
    trees: list[Tree] = []
    for tree in model.trees:
        if tree.root.split_order is None:
            raise ValueError("truncation requires a model with a fit trace")
        if tree.root.split_order > total_splits:
            continue
        root = _truncate_node(tree.root, total_splits)
        new_tree = Tree(root=root)
        for node in new_tree.iter_nodes():
            new_tree.register(node)
        new_tree.next_id = tree.next_id
        trees.append(new_tree)
    kept = [rec for rec in model.split_trace if rec.iteration <= total_splits]
    return FigsModel(
        trees=trees,
        task=model.task,
        training_mean=model.training_mean,
        n_features=model.n_features,
        total_splits=len(kept),
        feature_names=model.feature_names,
        split_trace=kept,
    )


def _leaf_membership(tree: Tree, features: np.ndarray) -> dict[int, np.ndarray]:
    members: dict[int, np.ndarray] = {}
    stack: list[tuple[TreeNode, np.ndarray]] = [(tree.root, np.arange(features.shape[0], dtype=np.intp))]
    while stack:
        node, idx = stack.pop()
        if node.is_leaf:
            members[node.id] = idx
        else:
            go_left = features[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[go_left]))
            stack.append((node.right, idx[~go_left]))
    return members


def backfit(
    model: FigsModel,
    dataset: Dataset,
    iterations: int,
    *,
    sse_tol: float | None = None,
) -> FigsModel:
    """Cycle over trees, replacing each tree's leaf values by the weighted
    mean of the residual-excluding-that-tree within each leaf.

    Training SSE is non-increasing at every tree update; the per-update SSE
    trajectory is stored on the returned model as ``backfit_sse_history``
    (training SSE before the first update, then after each tree update).
    ``sse_tol`` stops early once a full cycle improves SSE by less than the
    tolerance.  Tree structures are never modified.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not model.trees:
        raise ValueError("backfit requires a model with at least one tree")
    if dataset.n_features != model.n_features:
        raise ValueError("dataset width does not match the model")
    out = copy.deepcopy(model)
    w = dataset.effective_weights()
    y = dataset.targets
    memberships = []
    for tree in out.trees:
        members = _leaf_membership(tree, dataset.features)
        for leaf_id, idx in members.items():
            if w[idx].sum() <= 0:
                raise ValueError(
                    "dataset/model mismatch: a leaf received no positive weight"
                )
        memberships.append(members)

    per_tree = [_tree_values(tree, dataset.features, None) for tree in out.trees]
    total = np.sum(per_tree, axis=0)
    history = [float(np.dot(w, (y - total) ** 2))]
    for _ in range(iterations):
        cycle_start = history[-1]
        for k, tree in enumerate(out.trees):
            partial = total - per_tree[k]
            target = y - partial
            for leaf_id, idx in memberships[k].items():
                leaf = tree.nodes[leaf_id]
                leaf.value = float(np.dot(w[idx], target[idx]) / w[idx].sum())
                per_tree[k][idx] = leaf.value
            total = partial + per_tree[k]
            history.append(float(np.dot(w, (y - total) ** 2)))
        if sse_tol is not None and cycle_start - history[-1] < sse_tol:
            break
    out.backfit_sse_history = history
    return out


def _nodes_equal(a: TreeNode, b: TreeNode) -> bool:
    if a.is_leaf != b.is_leaf:
        return False
    if a.is_leaf:
        return a.value == b.value
    return (
        a.feature == b.feature
        and a.threshold == b.threshold
        and _nodes_equal(a.left, b.left)
        and _nodes_equal(a.right, b.right)
    )


def structurally_equal(a: FigsModel, b: FigsModel) -> bool:
    """Exact equality of tree structures, thresholds, and leaf values."""
    if len(a.trees) != len(b.trees) or a.task != b.task:
        return False
    return all(_nodes_equal(ta.root, tb.root) for ta, tb in zip(a.trees, b.trees))
