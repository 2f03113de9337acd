"""End-to-end command-line flows, run in process through cli.main."""

import json
import subprocess
import sys

import numpy as np
import pandas as pd
import pytest

import figs
from figs import cli
from figs.ensemble import load_ensemble, predict_ensemble
from figs.serialize import load_model


def run_cli(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    doc = json.loads(captured.out) if captured.out.strip() else None
    return code, doc, captured.err


def _write_regression_csv(path, seed=0, n=200, d=5):
    rng = np.random.default_rng(seed)
    x = rng.random((n, d))
    y = 3.0 * x[:, 0] + np.sin(4.0 * x[:, 1]) + 0.1 * rng.standard_normal(n)
    frame = pd.DataFrame(x, columns=[f"f{j}" for j in range(d)])
    frame["y"] = y
    frame.to_csv(path, index=False)


def _write_binary_csv(path, seed=0, n=160, d=4, group=False):
    rng = np.random.default_rng(seed)
    x = rng.random((n, d))
    frame = pd.DataFrame(x, columns=[f"f{j}" for j in range(d)])
    if group:
        groups = np.where(rng.random(n) < 0.5, "young", "old")
        score = np.where(groups == "young", x[:, 0], x[:, 1])
        frame["age_band"] = groups
        frame["label"] = (score + 0.2 * rng.standard_normal(n) > 0.5).astype(int)
    else:
        frame["label"] = (x[:, 0] + 0.15 * rng.standard_normal(n) > 0.5).astype(int)
    frame.to_csv(path, index=False)


def test_synth_fit_predict_eval_round_trip(tmp_path, capsys):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(
        {"kind": "friedman1", "n": 250, "d": 8, "noise_sd": 0.5, "seed": 1}
    ))
    data_csv = tmp_path / "data.csv"
    code, doc, _ = run_cli(capsys, ["synth", "--spec", str(spec_path),
                                    "--out", str(data_csv)])
    assert code == 0
    assert doc["kind"] == "friedman1" and doc["n"] == 250
    frame = pd.read_csv(data_csv)
    assert "target" in frame.columns and "target_noiseless" in frame.columns
    assert (tmp_path / "data.csv.spec.json").exists()

    model_path = tmp_path / "model.json"
    code, doc, _ = run_cli(capsys, [
        "fit", "--input", str(data_csv), "--target", "target",
        "--ignore-cols", "target_noiseless", "--max-splits", "8",
        "--out", str(model_path),
    ])
    assert code == 0
    assert doc["total_splits"] == 8
    assert doc["n_features"] == 8
    assert "train_mse" in doc

    pred_csv = tmp_path / "pred.csv"
    code, doc, _ = run_cli(capsys, ["predict", "--model", str(model_path),
                                    "--input", str(data_csv),
                                    "--out", str(pred_csv)])
    assert code == 0 and doc["model_kind"] == "figs"
    pred = pd.read_csv(pred_csv)
    assert list(pred.columns) == ["prediction"]
    model = load_model(str(model_path))
    feats = frame[[f"x{j}" for j in range(8)]].to_numpy()
    assert np.allclose(pred["prediction"].to_numpy(),
                       figs.predict_raw(model, feats), atol=1e-12)

    code, report, _ = run_cli(capsys, ["eval", "--model", str(model_path),
                                       "--input", str(data_csv),
                                       "--target", "target"])
    assert code == 0
    assert report["command"] == "eval"
    assert 0.0 < report["r2"] <= 1.0


def test_classification_outputs_probabilities(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_binary_csv(data_csv, seed=2)
    model_path = tmp_path / "clf.json"
    code, doc, _ = run_cli(capsys, [
        "fit", "--input", str(data_csv), "--target", "label",
        "--task", "classification", "--max-splits", "5",
        "--out", str(model_path),
    ])
    assert code == 0 and "train_auc" in doc

    pred_csv = tmp_path / "scores.csv"
    code, _, _ = run_cli(capsys, ["predict", "--model", str(model_path),
                                  "--input", str(data_csv),
                                  "--out", str(pred_csv)])
    assert code == 0
    pred = pd.read_csv(pred_csv)
    assert list(pred.columns) == ["prediction", "probability"]
    assert pred["probability"].between(0.0, 1.0).all()

    code, report, _ = run_cli(capsys, [
        "eval", "--model", str(model_path), "--input", str(data_csv),
        "--target", "label", "--levels", "0.9,0.95",
    ])
    assert code == 0
    assert report["auc"] > 0.8
    assert set(report["specificity_at_sensitivity"]) == {"0.9", "0.95"}


def test_grouped_fit_predict_eval(tmp_path, capsys):
    data_csv = tmp_path / "grouped.csv"
    _write_binary_csv(data_csv, seed=3, n=240, group=True)
    model_path = tmp_path / "gfigs.json"
    code, doc, _ = run_cli(capsys, [
        "fit", "--input", str(data_csv), "--target", "label",
        "--task", "classification", "--method", "gfigs",
        "--group-col", "age_band", "--max-splits", "4",
        "--out", str(model_path),
    ])
    assert code == 0
    assert sorted(doc["groups"]) == ["old", "young"]

    # group column name is stored in the model, so predict needs no flag
    pred_csv = tmp_path / "gpred.csv"
    code, doc, _ = run_cli(capsys, ["predict", "--model", str(model_path),
                                    "--input", str(data_csv),
                                    "--out", str(pred_csv)])
    assert code == 0 and doc["model_kind"] == "gfigs"
    assert pd.read_csv(pred_csv)["probability"].between(0.0, 1.0).all()

    code, report, _ = run_cli(capsys, [
        "eval", "--model", str(model_path), "--input", str(data_csv),
        "--target", "label",
    ])
    assert code == 0
    assert sorted(report["per_group"]) == ["old", "young"]
    assert "auc" in report


def test_gfigs_without_group_column_is_an_input_error(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_binary_csv(data_csv, seed=4)
    code, _, err = run_cli(capsys, [
        "fit", "--input", str(data_csv), "--target", "label",
        "--task", "classification", "--method", "gfigs",
        "--max-splits", "3", "--out", str(tmp_path / "m.json"),
    ])
    assert code == 2
    assert "group-col" in err


def test_bagging_fit_and_eval(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_regression_csv(data_csv, seed=5)
    model_path = tmp_path / "bag.json"
    code, doc, _ = run_cli(capsys, [
        "fit", "--input", str(data_csv), "--target", "y",
        "--method", "bagging", "--n-estimators", "3",
        "--max-splits", "4", "--out", str(model_path),
    ])
    assert code == 0
    assert doc["n_members"] == 3
    assert doc["max_features"] == 2  # ceil(5/3) for regression

    code, report, _ = run_cli(capsys, ["eval", "--model", str(model_path),
                                       "--input", str(data_csv),
                                       "--target", "y"])
    assert code == 0
    assert report["kind"] == "bagging"
    assert "mean_member_repeated_split_fraction" in report

    pred_csv = tmp_path / "bpred.csv"
    code, _, _ = run_cli(capsys, ["predict", "--model", str(model_path),
                                  "--input", str(data_csv),
                                  "--out", str(pred_csv)])
    assert code == 0
    ensemble = load_ensemble(str(model_path))
    feats = pd.read_csv(data_csv)[[f"f{j}" for j in range(5)]].to_numpy()
    assert np.allclose(pd.read_csv(pred_csv)["prediction"].to_numpy(),
                       predict_ensemble(ensemble, feats), atol=1e-12)


def test_repeat_fits_are_byte_identical(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_regression_csv(data_csv, seed=6)
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        code, _, _ = run_cli(capsys, [
            "fit", "--input", str(data_csv), "--target", "y",
            "--max-splits", "6", "--out", str(path),
        ])
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_bagging_is_thread_count_invariant(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_regression_csv(data_csv, seed=7, n=150)
    outs = []
    for threads, name in (("1", "t1.json"), ("4", "t4.json")):
        path = tmp_path / name
        code, _, _ = run_cli(capsys, [
            "fit", "--input", str(data_csv), "--target", "y",
            "--method", "bagging", "--n-estimators", "4",
            "--max-splits", "3", "--threads", threads, "--out", str(path),
        ])
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_zero_split_budget_predicts_the_mean(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_regression_csv(data_csv, seed=8, n=50)
    model_path = tmp_path / "flat.json"
    code, doc, _ = run_cli(capsys, [
        "fit", "--input", str(data_csv), "--target", "y",
        "--max-splits", "0", "--out", str(model_path),
    ])
    assert code == 0
    assert doc["total_splits"] == 0 and doc["n_trees"] == 0
    pred_csv = tmp_path / "pred.csv"
    code, _, _ = run_cli(capsys, ["predict", "--model", str(model_path),
                                  "--input", str(data_csv),
                                  "--out", str(pred_csv)])
    assert code == 0
    values = pd.read_csv(pred_csv)["prediction"].to_numpy()
    mean = pd.read_csv(data_csv)["y"].mean()
    assert np.allclose(values, mean, atol=1e-12)


def test_curves_command_writes_budget_rows(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_regression_csv(data_csv, seed=9)
    out_csv = tmp_path / "curve.csv"
    code, doc, _ = run_cli(capsys, [
        "curves", "--input", str(data_csv), "--target", "y",
        "--budgets", "0,2,4", "--max-splits", "4", "--out", str(out_csv),
    ])
    assert code == 0 and doc["budgets"] == [0, 2, 4]
    rows = pd.read_csv(out_csv)
    assert list(rows["split_budget"]) == [0, 2, 4]
    assert rows["mse"].is_monotonic_decreasing
    assert set(rows.columns) >= {"dataset", "method", "mse", "r2",
                                 "repeated_split_fraction"}


def test_curves_budget_beyond_max_splits_is_rejected(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_regression_csv(data_csv, seed=10, n=60)
    code, _, err = run_cli(capsys, [
        "curves", "--input", str(data_csv), "--target", "y",
        "--budgets", "10", "--max-splits", "5",
        "--out", str(tmp_path / "c.csv"),
    ])
    assert code == 2 and "max-splits" in err


def test_stability_command_reports_flip_robustness(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_binary_csv(data_csv, seed=11, n=120)
    code, doc, _ = run_cli(capsys, [
        "stability", "--input", str(data_csv), "--target", "label",
        "--max-splits", "3", "--p", "0.0,0.05", "--seeds", "2",
    ])
    assert code == 0
    assert doc["means"]["0.0"] == 1.0
    assert 0.0 <= doc["means"]["0.05"] <= 1.0
    assert len(doc["scores"]["0.05"]) == 2


def test_stability_requires_binary_targets(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_regression_csv(data_csv, seed=12, n=40)
    code, _, err = run_cli(capsys, [
        "stability", "--input", str(data_csv), "--target", "y",
        "--max-splits", "2",
    ])
    assert code == 2 and "0/1" in err


def test_rate_command_runs_a_configured_experiment(tmp_path, capsys):
    config_path = tmp_path / "rate.json"
    config_path.write_text(json.dumps({
        "components": 2, "n_grid": [200, 400], "seeds": 1, "test_n": 200,
    }))
    out_csv = tmp_path / "rate.csv"
    code, doc, _ = run_cli(capsys, ["rate", "--config", str(config_path),
                                    "--out", str(out_csv)])
    assert code == 0
    assert doc["ns"] == [200, 400]
    assert np.isfinite(doc["slope"])
    rows = pd.read_csv(out_csv)
    assert list(rows.columns) == ["n", "mean_mse", "e_fraction"]
    assert len(rows) == 2


def test_rate_rejects_unknown_config_keys(tmp_path, capsys):
    config_path = tmp_path / "rate.json"
    config_path.write_text(json.dumps({"n_grid": [100], "bogus": 1}))
    code, _, err = run_cli(capsys, ["rate", "--config", str(config_path)])
    assert code == 2 and "bogus" in err


def test_missing_input_file_is_an_input_error(tmp_path, capsys):
    code, _, err = run_cli(capsys, [
        "fit", "--input", str(tmp_path / "nope.csv"), "--target", "y",
        "--max-splits", "2", "--out", str(tmp_path / "m.json"),
    ])
    assert code == 2 and "cannot read" in err


def test_missing_columns_are_input_errors(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_regression_csv(data_csv, seed=13, n=40)
    code, _, err = run_cli(capsys, [
        "fit", "--input", str(data_csv), "--target", "missing",
        "--max-splits", "2", "--out", str(tmp_path / "m.json"),
    ])
    assert code == 2 and "target" in err
    code, _, err = run_cli(capsys, [
        "fit", "--input", str(data_csv), "--target", "y",
        "--ignore-cols", "ghost", "--max-splits", "2",
        "--out", str(tmp_path / "m.json"),
    ])
    assert code == 2 and "ignore-cols" in err


def test_classification_fit_rejects_non_binary_targets(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_regression_csv(data_csv, seed=14, n=40)
    code, _, err = run_cli(capsys, [
        "fit", "--input", str(data_csv), "--target", "y",
        "--task", "classification", "--max-splits", "2",
        "--out", str(tmp_path / "m.json"),
    ])
    assert code == 2 and "0/1" in err


def test_bad_levels_are_input_errors(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_binary_csv(data_csv, seed=15, n=60)
    model_path = tmp_path / "clf.json"
    code, _, _ = run_cli(capsys, [
        "fit", "--input", str(data_csv), "--target", "label",
        "--task", "classification", "--max-splits", "2",
        "--out", str(model_path),
    ])
    assert code == 0
    code, _, err = run_cli(capsys, [
        "eval", "--model", str(model_path), "--input", str(data_csv),
        "--target", "label", "--levels", "2.0",
    ])
    assert code == 2 and "levels" in err


def test_single_class_eval_is_a_compute_error(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_binary_csv(data_csv, seed=16, n=80)
    model_path = tmp_path / "clf.json"
    code, _, _ = run_cli(capsys, [
        "fit", "--input", str(data_csv), "--target", "label",
        "--task", "classification", "--max-splits", "2",
        "--out", str(model_path),
    ])
    assert code == 0
    flat = pd.read_csv(data_csv)
    flat["label"] = 1
    flat_csv = tmp_path / "flat.csv"
    flat.to_csv(flat_csv, index=False)
    code, _, err = run_cli(capsys, [
        "eval", "--model", str(model_path), "--input", str(flat_csv),
        "--target", "label",
    ])
    assert code == 3 and "eval failed" in err


def test_predict_with_missing_feature_columns_fails(tmp_path, capsys):
    data_csv = tmp_path / "train.csv"
    _write_regression_csv(data_csv, seed=17, n=50)
    model_path = tmp_path / "m.json"
    code, _, _ = run_cli(capsys, [
        "fit", "--input", str(data_csv), "--target", "y",
        "--max-splits", "3", "--out", str(model_path),
    ])
    assert code == 0
    trimmed = pd.read_csv(data_csv).drop(columns=["f0"])
    trimmed_csv = tmp_path / "trimmed.csv"
    trimmed.to_csv(trimmed_csv, index=False)
    code, _, err = run_cli(capsys, ["predict", "--model", str(model_path),
                                    "--input", str(trimmed_csv),
                                    "--out", str(tmp_path / "p.csv")])
    assert code == 2 and "f0" in err


def test_console_script_smoke(tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({"kind": "toy", "n": 64, "seed": 0}))
    result = subprocess.run(
        ["figs", "synth", "--spec", str(spec_path),
         "--out", str(tmp_path / "toy.csv")],
        capture_output=True, text=True, timeout=60,
    )
    assert result.returncode == 0, result.stderr
    doc = json.loads(result.stdout)
    assert doc["kind"] == "toy" and doc["n"] == 64
    assert (tmp_path / "toy.csv").exists()
