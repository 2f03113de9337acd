"""Leaf-value refitting on frozen structures."""

import numpy as np
import pytest

import figs
from figs.core import FitConfig, backfit, fit_figs, predict_raw
from figs.serialize import model_from_dict
from conftest import random_dataset
from oracles import leaf_indicator_design, least_squares_sse


def test_single_tree_model_is_a_fixed_point():
    # each leaf already holds its weighted residual mean, so one cycle
    # reproduces the same values up to summation order
    data = random_dataset(1, n=80, d=4, weighted=True)
    model = fit_figs(data, FitConfig(max_splits=6, allow_new_trees=False))
    refit = backfit(model, data, iterations=3)
    before = predict_raw(model, data.features)
    after = predict_raw(refit, data.features)
    np.testing.assert_allclose(after, before, rtol=0, atol=1e-12)


def test_history_starts_at_current_sse_and_never_increases():
    data = random_dataset(8, n=150, d=5)
    model = fit_figs(data, FitConfig(max_splits=12))
    refit = backfit(model, data, iterations=10)
    hist = refit.backfit_sse_history
    w = data.effective_weights()
    sse0 = float(np.dot(w, (data.targets - predict_raw(model, data.features)) ** 2))
    assert hist[0] == pytest.approx(sse0, rel=1e-12)
    assert len(hist) == 1 + 10 * model.n_trees()
    assert all(a >= b - 1e-12 for a, b in zip(hist, hist[1:]))
    assert hist[-1] == pytest.approx(
        float(np.dot(w, (data.targets - predict_raw(refit, data.features)) ** 2)),
        rel=1e-9,
    )


def test_original_model_is_untouched():
    data = random_dataset(14, n=60, d=3)
    model = fit_figs(data, FitConfig(max_splits=8))
    before = predict_raw(model, data.features).copy()
    backfit(model, data, iterations=5)
    assert np.array_equal(predict_raw(model, data.features), before)
    assert model.backfit_sse_history is None


def test_converges_to_least_squares_on_leaf_indicators():
    data = random_dataset(23, n=200, d=5, weighted=True)
    model = fit_figs(data, FitConfig(max_splits=10))
    if model.n_trees() < 2:
        pytest.skip("needs a genuine sum of trees")
    refit = backfit(model, data, iterations=500, sse_tol=1e-13)
    import figs.serialize as ser
    design = leaf_indicator_design(ser.model_to_dict(refit), data.features)
    target_sse = least_squares_sse(design, data.targets, data.effective_weights())
    assert refit.backfit_sse_history[-1] == pytest.approx(target_sse, rel=1e-6, abs=1e-9)


def test_iterations_one_runs_a_single_cycle():
    data = random_dataset(4, n=90, d=4)
    model = fit_figs(data, FitConfig(max_splits=9))
    refit = backfit(model, data, iterations=1)
    assert len(refit.backfit_sse_history) == 1 + model.n_trees()


def test_sse_tol_stops_early():
    data = random_dataset(10, n=120, d=4)
    model = fit_figs(data, FitConfig(max_splits=10))
    capped = backfit(model, data, iterations=1000, sse_tol=1e-10)
    assert len(capped.backfit_sse_history) < 1 + 1000 * model.n_trees()


def test_fit_config_backfit_iterations_applies_after_growth():
    data = random_dataset(33, n=150, d=5)
    grown = fit_figs(data, FitConfig(max_splits=10))
    combined = fit_figs(data, FitConfig(max_splits=10, backfit_iterations=4))
    manual = backfit(grown, data, iterations=4)
    assert figs.structurally_equal(combined, manual)
    assert combined.backfit_sse_history == manual.backfit_sse_history


def test_rejects_models_without_trees():
    data = random_dataset(2, n=20, d=3)
    empty = fit_figs(data, FitConfig(max_splits=0))
    with pytest.raises(ValueError):
        backfit(empty, data, iterations=1)


def test_rejects_bad_iteration_counts_and_widths():
    data = random_dataset(3, n=30, d=3)
    model = fit_figs(data, FitConfig(max_splits=3))
    with pytest.raises(ValueError):
        backfit(model, data, iterations=0)
    narrow = figs.Dataset(features=data.features[:, :2], targets=data.targets)
    with pytest.raises(ValueError):
        backfit(model, narrow, iterations=1)


def test_rejects_leaves_with_no_positive_weight():
    data = random_dataset(6, n=40, d=3)
    model = fit_figs(data, FitConfig(max_splits=4))
    rec = model.split_trace[0]
    # zero out every sample reaching one side of the first split
    w = np.ones(40)
    w[data.features[:, rec.feature] <= rec.threshold] = 0.0
    reweighted = figs.Dataset(features=data.features, targets=data.targets, weights=w)
    with pytest.raises(ValueError):
        backfit(model, reweighted, iterations=1)


def test_two_fixed_stumps_reach_the_analytic_optimum():
    # hand-built structures on one feature each; backfitting must land on the
    # least-squares solution of the 4-column indicator design
    doc = {
        "format_version": 1,
        "task": "regression",
        "training_mean": 0.0,
        "n_features": 2,
        "feature_names": None,
        "trees": [
            {"nodes": [
                {"id": 0, "feature": 0, "threshold": 0.5, "left": 1, "right": 2},
                {"id": 1, "value": 0.0}, {"id": 2, "value": 0.0},
            ]},
            {"nodes": [
                {"id": 0, "feature": 1, "threshold": 0.5, "left": 1, "right": 2},
                {"id": 1, "value": 0.0}, {"id": 2, "value": 0.0},
            ]},
        ],
    }
    model = model_from_dict(doc)
    rng = np.random.default_rng(0)
    x = rng.random((300, 2))
    y = 2.0 * (x[:, 0] > 0.5) - 3.0 * (x[:, 1] > 0.5) + 0.1 * rng.standard_normal(300)
    data = figs.Dataset(features=x, targets=y)
    refit = backfit(model, data, iterations=500, sse_tol=1e-13)
    design = leaf_indicator_design(doc, x)
    assert refit.backfit_sse_history[-1] == pytest.approx(
        least_squares_sse(design, y), rel=1e-8
    )
