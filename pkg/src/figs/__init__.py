"""Greedy tree-sum models.

Fit sums of binary trees grown jointly (one committed split per iteration
across all trees), with a CART single-tree mode, instance-weighted group
models, bagged ensembles, evaluation diagnostics, seeded synthetic
generators, and grid-based oracles for rate experiments.
"""

from .core import (
    NEW_TREE,
    FigsModel,
    FitConfig,
    SplitCandidate,
    SplitRecord,
    Tree,
    TreeNode,
    backfit,
    find_best_split,
    fit_cart,
    fit_figs,
    predict,
    predict_proba,
    predict_raw,
    structurally_equal,
    stump_feature,
    truncate,
    weighted_impurity_decrease,
)
from .data import Dataset
from .ensemble import (
    EnsembleConfig,
    FigsEnsemble,
    bootstrap_sample,
    fit_bagging_figs,
    load_ensemble,
    predict_ensemble,
    predict_ensemble_proba,
    resolve_max_features,
    save_ensemble,
)
from .metrics import (
    DEFAULT_SENSITIVITY_LEVELS,
    EvalReport,
    budget_curve,
    evaluate,
    label_flip_perturbation,
    r2,
    repeated_split_fraction,
    roc_auc,
    specificity_at_sensitivity,
    split_feature_set,
    stability_analysis,
    stability_score,
)
from .serialize import load_model, model_from_dict, model_to_dict, save_model
from .synthetic import KINDS, GenSpec, generate, regression_function
from .theory import (
    BlockSpec,
    DisentanglementReport,
    ErmTreeSum,
    GridStructures,
    RateResult,
    build_grid_structures,
    disentanglement_report,
    fit_erm_tree_sum,
    rate_experiment,
    sine_block_spec,
)
from .weighting import (
    GFigsModel,
    GroupedDataset,
    MembershipModel,
    class_weights,
    fit_gfigs,
    fit_membership_model,
    load_gfigs,
    load_group_weights_csv,
    membership_weights,
    positive_class_weight,
    predict_gfigs,
    predict_gfigs_proba,
    save_gfigs,
)

__version__ = "0.1.0"
