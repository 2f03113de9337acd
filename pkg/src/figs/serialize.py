"""Versioned JSON (de)serialization for fitted models.

Floats are emitted with Python's shortest round-trip representation, so a
save/load cycle reproduces thresholds and leaf values bit-exactly.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .core import FigsModel, Tree, TreeNode

FORMAT_VERSION = 1

__all__ = [
    "FORMAT_VERSION",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
    "dump_json",
]


def dump_json(doc: Any, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _tree_to_nodes(tree: Tree) -> list[dict]:
    nodes = sorted(tree.iter_nodes(), key=lambda node: node.id)
    out = []
    for node in nodes:
        if node.is_leaf:
            out.append({"id": node.id, "value": node.value})
        else:
            out.append({
                "id": node.id,
                "feature": node.feature,
                "threshold": node.threshold,
                "left": node.left.id,
                "right": node.right.id,
            })
    return out


def model_to_dict(model: FigsModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "task": model.task,
        "training_mean": model.training_mean,
        "n_features": model.n_features,
        "feature_names": model.feature_names,
        "trees": [{"nodes": _tree_to_nodes(tree)} for tree in model.trees],
    }


def _require(doc: dict, key: str):
    if key not in doc:
        raise ValueError(f"model document is missing required key {key!r}")
    return doc[key]


def _tree_from_nodes(nodes: list[dict]) -> Tree:
    by_id: dict[int, dict] = {}
    for raw in nodes:
        node_id = int(_require(raw, "id"))
        if node_id in by_id:
            raise ValueError(f"duplicate node id {node_id}")
        by_id[node_id] = raw
    if 0 not in by_id:
        raise ValueError("tree document has no root node (id 0)")

    built: dict[int, TreeNode] = {}

    def build(node_id: int) -> TreeNode:
        if node_id in built:
            raise ValueError(f"node id {node_id} referenced more than once")
        raw = by_id.get(node_id)
        if raw is None:
            raise ValueError(f"missing node id {node_id}")
        if "value" in raw:
            node = TreeNode(id=node_id, value=float(raw["value"]))
        else:
            node = TreeNode(
                id=node_id,
                value=0.0,
                feature=int(_require(raw, "feature")),
                threshold=float(_require(raw, "threshold")),
            )
        built[node_id] = node
        if not node.is_leaf:
            node.left = build(int(_require(raw, "left")))
            node.right = build(int(_require(raw, "right")))
        return node

    root = build(0)
    if len(built) != len(by_id):
        raise ValueError("tree document contains unreachable nodes")
    tree = Tree(root=root)
    for node in tree.iter_nodes():
        tree.register(node)
    tree.next_id = max(by_id) + 1
    return tree


def model_from_dict(doc: dict) -> FigsModel:
    version = _require(doc, "format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {version!r}")
    task = _require(doc, "task")
    trees = [_tree_from_nodes(_require(raw, "nodes")) for raw in _require(doc, "trees")]
    for tree in trees:
        if tree.root.is_leaf:
            raise ValueError("serialized trees must contain at least one split")
    names = doc.get("feature_names")
    model = FigsModel(
        trees=trees,
        task=str(task),
        training_mean=float(_require(doc, "training_mean")),
        n_features=int(_require(doc, "n_features")),
        total_splits=sum(tree.n_splits() for tree in trees),
        feature_names=None if names is None else [str(s) for s in names],
    )
    if model.task not in ("regression", "binary_classification"):
        raise ValueError(f"unknown task {model.task!r}")
    if model.n_features < 1:
        raise ValueError("n_features must be >= 1")
    for tree in trees:
        for node in tree.iter_nodes():
            if not node.is_leaf and not 0 <= node.feature < model.n_features:
                raise ValueError(f"split feature {node.feature} out of range")
    return model


def save_model(model: FigsModel, path: str) -> None:
    dump_json(model_to_dict(model), path)


def load_model(path: str) -> FigsModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("model document must be a JSON object")
    return model_from_dict(doc)
