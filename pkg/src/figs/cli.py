"""Command-line interface.

Subcommands: fit, predict, eval, synth, stability, rate, curves.  Results go
to stdout as JSON (plus CSV/JSON artifacts on disk); diagnostics go to
stderr.  Exit codes: 0 success, 2 input or schema error, 3 compute error.
Every command is deterministic given its flags and seeds; FIGS_THREADS caps
worker threads for ensemble fitting.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np
import pandas as pd

from . import ensemble as ens
from . import metrics, serialize, synthetic, theory, weighting
from .core import (
    FitConfig,
    fit_cart,
    fit_figs,
    predict_proba,
    predict_raw,
)
from .data import Dataset

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_COMPUTE = 3


class InputError(ValueError):
    """Bad file, schema, or flag combination (exit code 2)."""


def _print_json(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def _info(message: str) -> None:
    sys.stderr.write(message + "\n")


def _task_name(raw: str) -> str:
    return "binary_classification" if raw == "classification" else "regression"


def _read_table(path: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if frame.shape[0] == 0:
        raise InputError(f"{path} contains no rows")
    return frame


def _numeric_matrix(frame: pd.DataFrame, columns: list[str], path: str) -> np.ndarray:
    try:
        return frame[columns].to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InputError(f"non-numeric values in feature columns of {path}: {exc}") from exc


def _split_table(
    frame: pd.DataFrame,
    path: str,
    target: str | None,
    weight_col: str | None,
    group_col: str | None,
    ignore: tuple[str, ...] = (),
):
    for name, col in (("target", target), ("weight", weight_col), ("group", group_col)):
        if col is not None and col not in frame.columns:
            raise InputError(f"{name} column {col!r} not found in {path}")
    for col in ignore:
        if col not in frame.columns:
            raise InputError(f"--ignore-cols column {col!r} not found in {path}")
    reserved = {c for c in (target, weight_col, group_col) if c is not None}
    reserved |= set(ignore)
    feature_names = [c for c in frame.columns if c not in reserved]
    if not feature_names:
        raise InputError(f"{path} has no feature columns")
    features = _numeric_matrix(frame, feature_names, path)
    targets = None
    if target is not None:
        try:
            targets = frame[target].to_numpy(dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise InputError(f"non-numeric target column in {path}: {exc}") from exc
    weights = None
    if weight_col is not None:
        try:
            weights = frame[weight_col].to_numpy(dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise InputError(f"non-numeric weight column in {path}: {exc}") from exc
    groups = frame[group_col].astype(str).to_numpy() if group_col is not None else None
    return features, targets, weights, groups, feature_names


def _dataset(features, targets, weights, feature_names) -> Dataset:
    try:
        return Dataset(features, targets, weights, feature_names)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _fit_config(args) -> FitConfig:
    try:
        return FitConfig(
            max_splits=args.max_splits,
            min_impurity_decrease=args.min_impurity_decrease,
            min_samples_leaf=args.min_samples_leaf,
            backfit_iterations=args.backfit,
            seed=args.seed,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _parse_floats(raw: str, flag: str) -> list[float]:
    try:
        values = [float(part) for part in raw.split(",") if part != ""]
    except ValueError as exc:
        raise InputError(f"{flag} must be a comma-separated list of numbers") from exc
    if not values:
        raise InputError(f"{flag} must list at least one value")
    return values


def _parse_ints(raw: str, flag: str) -> list[int]:
    return [int(v) for v in _parse_floats(raw, flag)]


def _load_any(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read model {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path} is not a model document")
    kind = doc.get("kind", "figs")
    try:
        if kind == "gfigs":
            return kind, weighting.gfigs_from_dict(doc)
        if kind == "bagging":
            return kind, ens.ensemble_from_dict(doc)
        return "figs", serialize.model_from_dict(doc)
    except ValueError as exc:
        raise InputError(f"invalid model document {path}: {exc}") from exc


def _model_features(obj, kind: str) -> list[str] | None:
    if kind == "gfigs":
        return obj.feature_names
    if kind == "bagging":
        return obj.members[0].feature_names
    return obj.feature_names


def _matrix_for_model(frame: pd.DataFrame, path: str, obj, kind: str,
                      drop: set[str]) -> np.ndarray:
    names = _model_features(obj, kind)
    if names is not None:
        missing = [c for c in names if c not in frame.columns]
        if missing:
            raise InputError(f"{path} is missing feature columns {missing}")
        return _numeric_matrix(frame, list(names), path)
    columns = [c for c in frame.columns if c not in drop]
    expected = obj.n_features if kind != "gfigs" else \
        next(iter(obj.per_group.values())).n_features
    if len(columns) != expected:
        raise InputError(
            f"{path} has {len(columns)} feature columns, model expects {expected}"
        )
    return _numeric_matrix(frame, columns, path)


# ---------------------------------------------------------------- fit


def _add_fit_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="training CSV with a header row")
    parser.add_argument("--target", required=True, help="name of the target column")
    parser.add_argument("--task", choices=["regression", "classification"],
                        default="regression")
    parser.add_argument("--method", choices=["cart", "figs", "gfigs", "bagging"],
                        default="figs")
    parser.add_argument("--max-splits", type=int, required=True)
    parser.add_argument("--min-impurity-decrease", type=float, default=0.0)
    parser.add_argument("--min-samples-leaf", type=int, default=1)
    parser.add_argument("--backfit", type=int, default=0,
                        help="leaf-value refit cycles after growth")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--weight-col", default=None)
    parser.add_argument("--ignore-cols", default="",
                        help="comma-separated columns to exclude from the features")
    parser.add_argument("--group-col", default=None, help="group column (gfigs)")
    parser.add_argument("--membership-l2", type=float, default=1.0,
                        help="ridge strength (inverse C) of the membership model")
    parser.add_argument("--exclude-features", default="",
                        help="comma-separated feature names the membership model ignores")
    parser.add_argument("--class-weights", action="store_true",
                        help="upweight positive labels by inverse prevalence (gfigs)")
    parser.add_argument("--n-estimators", type=int, default=100)
    parser.add_argument("--max-features", default="auto",
                        help='integer, "d/3", "sqrt", "all", or "auto"')
    parser.add_argument("--no-bootstrap", action="store_true")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for bagging (default FIGS_THREADS or 1)")
    parser.add_argument("--out", required=True, help="where to write the model JSON")


def _train_metric(task: str, scores: np.ndarray, targets: np.ndarray) -> dict:
    if task == "binary_classification":
        return {"train_auc": metrics.roc_auc(scores, targets)}
    return {"train_mse": float(np.mean((scores - targets) ** 2))}


def _ignored(args) -> tuple[str, ...]:
    raw = getattr(args, "ignore_cols", "") or ""
    return tuple(part.strip() for part in raw.split(",") if part.strip())


def cmd_fit(args) -> int:
    frame = _read_table(args.input)
    features, targets, weights, groups, feature_names = _split_table(
        frame, args.input, args.target, args.weight_col, args.group_col,
        _ignored(args),
    )
    task = _task_name(args.task)
    config = _fit_config(args)
    dataset = _dataset(features, targets, weights, feature_names)
    if task == "binary_classification" and not np.all(np.isin(dataset.targets, (0.0, 1.0))):
        raise InputError("classification targets must be 0/1")

    summary: dict = {
        "command": "fit",
        "method": args.method,
        "task": task,
        "n_samples": dataset.n_samples,
        "n_features": dataset.n_features,
    }
    try:
        if args.method in ("figs", "cart"):
            fitter = fit_figs if args.method == "figs" else fit_cart
            model = fitter(dataset, config, task)
            serialize.save_model(model, args.out)
            scores = predict_raw(model, dataset.features)
            summary.update({
                "total_splits": model.total_splits,
                "n_trees": model.n_trees(),
                "splits_per_tree": model.splits_per_tree(),
            })
            summary.update(_train_metric(task, scores, dataset.targets))
        elif args.method == "gfigs":
            if args.group_col is None:
                raise InputError("--method gfigs requires --group-col")
            excluded = _excluded_indices(args.exclude_features, feature_names)
            grouped = weighting.GroupedDataset(dataset, groups)
            model = weighting.fit_gfigs(
                grouped, config, task,
                membership_l2=args.membership_l2,
                excluded_features=excluded,
                use_class_weights=args.class_weights,
                group_column=args.group_col,
            )
            weighting.save_gfigs(model, args.out)
            scores = weighting.predict_gfigs(model, dataset.features, groups)
            summary["groups"] = {
                label: {
                    "total_splits": m.total_splits,
                    "n_trees": m.n_trees(),
                }
                for label, m in sorted(model.per_group.items())
            }
            summary.update(_train_metric(task, scores, dataset.targets))
        else:  # bagging
            try:
                max_features = int(args.max_features)
            except ValueError:
                max_features = args.max_features
            try:
                econfig = ens.EnsembleConfig(
                    base=config,
                    n_estimators=args.n_estimators,
                    max_features=max_features,
                    bootstrap=not args.no_bootstrap,
                    seed=args.seed,
                )
            except ValueError as exc:
                raise InputError(str(exc)) from exc
            bagged = ens.fit_bagging_figs(dataset, econfig, task, n_threads=args.threads)
            ens.save_ensemble(bagged, args.out)
            scores = ens.predict_ensemble(bagged, dataset.features)
            summary.update({
                "n_members": bagged.n_members(),
                "max_features": ens.resolve_max_features(
                    econfig.max_features, dataset.n_features, task
                ),
                "mean_member_splits": float(np.mean(
                    [m.total_splits for m in bagged.members]
                )),
            })
            summary.update(_train_metric(task, scores, dataset.targets))
    except InputError:
        raise
    except ValueError as exc:
        _info(f"fit failed: {exc}")
        return EXIT_COMPUTE
    summary["model_path"] = args.out
    _print_json(summary)
    return EXIT_OK


def _excluded_indices(raw: str, feature_names: list[str]) -> tuple[int, ...]:
    names = [part.strip() for part in raw.split(",") if part.strip()]
    out = []
    for name in names:
        if name not in feature_names:
            raise InputError(f"--exclude-features column {name!r} not in the input")
        out.append(feature_names.index(name))
    return tuple(out)


# ---------------------------------------------------------------- predict


def cmd_predict(args) -> int:
    kind, obj = _load_any(args.model)
    frame = _read_table(args.input)
    group_col = args.group_col or (obj.group_column if kind == "gfigs" else None)
    drop = {group_col} if group_col else set()
    features = _matrix_for_model(frame, args.input, obj, kind, drop)
    if not np.all(np.isfinite(features)):
        raise InputError(f"{args.input} contains non-finite feature values")
    groups = None
    if kind == "gfigs":
        if group_col is None or group_col not in frame.columns:
            raise InputError("grouped models need a group column (--group-col)")
        groups = frame[group_col].astype(str).to_numpy()
        missing = sorted(set(groups) - set(obj.per_group))
        if missing:
            raise InputError(f"input contains unknown groups {missing}")

    try:
        if kind == "figs":
            raw = predict_raw(obj, features)
            task = obj.task
            prob = predict_proba(obj, features) if task == "binary_classification" else None
        elif kind == "gfigs":
            raw = weighting.predict_gfigs(obj, features, groups)
            task = obj.task
            prob = np.clip(raw, 0.0, 1.0) if task == "binary_classification" else None
        else:
            raw = ens.predict_ensemble(obj, features)
            task = obj.task
            prob = ens.predict_ensemble_proba(obj, features) \
                if task == "binary_classification" else None
    except ValueError as exc:
        _info(f"predict failed: {exc}")
        return EXIT_COMPUTE

    out = pd.DataFrame({"prediction": raw})
    if prob is not None:
        out["probability"] = prob
    out.to_csv(args.out, index=False)
    _print_json({
        "command": "predict",
        "model_kind": kind,
        "task": task,
        "n_rows": int(len(out)),
        "out": args.out,
    })
    return EXIT_OK


# ---------------------------------------------------------------- eval


def cmd_eval(args) -> int:
    kind, obj = _load_any(args.model)
    frame = _read_table(args.input)
    group_col = args.group_col or (obj.group_column if kind == "gfigs" else None)
    drop = {args.target} | ({group_col} if group_col else set())
    if args.target not in frame.columns:
        raise InputError(f"target column {args.target!r} not found in {args.input}")
    features = _matrix_for_model(frame, args.input, obj, kind, drop)
    try:
        targets = frame[args.target].to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InputError(f"non-numeric target column: {exc}") from exc
    levels = _parse_floats(args.levels, "--levels")
    if any(not 0.0 < level <= 1.0 for level in levels):
        raise InputError("--levels values must lie in (0, 1]")

    try:
        if kind == "figs":
            dataset = _dataset(features, targets, None, None)
            report = metrics.evaluate(obj, dataset, levels).to_dict()
        elif kind == "gfigs":
            if group_col is None or group_col not in frame.columns:
                raise InputError("grouped models need a group column (--group-col)")
            groups = frame[group_col].astype(str).to_numpy()
            scores = weighting.predict_gfigs(obj, features, groups)
            report = {"kind": "gfigs", "task": obj.task, "n_samples": int(len(targets))}
            if obj.task == "binary_classification":
                report["auc"] = metrics.roc_auc(scores, targets)
                report["specificity_at_sensitivity"] = {
                    repr(level): metrics.specificity_at_sensitivity(scores, targets, level)
                    for level in levels
                }
            else:
                report["r2"] = metrics.r2(scores, targets)
            report["per_group"] = {
                label: {
                    "n_trees": m.n_trees(),
                    "total_splits": m.total_splits,
                    "repeated_split_fraction": metrics.repeated_split_fraction(m),
                }
                for label, m in sorted(obj.per_group.items())
            }
        else:
            scores = ens.predict_ensemble(obj, features)
            report = {
                "kind": "bagging",
                "task": obj.task,
                "n_samples": int(len(targets)),
                "n_members": obj.n_members(),
                "mean_member_repeated_split_fraction": float(np.mean(
                    [metrics.repeated_split_fraction(m) for m in obj.members]
                )),
            }
            if obj.task == "binary_classification":
                report["auc"] = metrics.roc_auc(scores, targets)
                report["specificity_at_sensitivity"] = {
                    repr(level): metrics.specificity_at_sensitivity(scores, targets, level)
                    for level in levels
                }
            else:
                report["r2"] = metrics.r2(scores, targets)
    except InputError:
        raise
    except ValueError as exc:
        _info(f"eval failed: {exc}")
        return EXIT_COMPUTE

    report["command"] = "eval"
    _print_json(report)
    return EXIT_OK


# ---------------------------------------------------------------- synth


def cmd_synth(args) -> int:
    try:
        with open(args.spec, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read spec {args.spec}: {exc}") from exc
    if not isinstance(raw, dict):
        raise InputError("generator spec must be a JSON object")
    allowed = {"kind", "n", "d", "noise_sd", "seed", "balanced"}
    unknown = set(raw) - allowed
    if unknown:
        raise InputError(f"unknown spec keys {sorted(unknown)}")
    try:
        spec = synthetic.GenSpec(**raw)
        dataset, clean = synthetic.generate(spec)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc

    frame = pd.DataFrame(dataset.features, columns=dataset.feature_names)
    frame["target"] = dataset.targets
    if spec.noise_sd > 0:
        frame["target_noiseless"] = clean
    frame.to_csv(args.out, index=False)
    sidecar = args.out + ".spec.json"
    serialize.dump_json(spec.to_dict(), sidecar)
    _print_json({
        "command": "synth",
        "kind": spec.kind,
        "n": dataset.n_samples,
        "d": dataset.n_features,
        "out": args.out,
        "sidecar": sidecar,
    })
    return EXIT_OK


# ---------------------------------------------------------------- stability


def cmd_stability(args) -> int:
    frame = _read_table(args.input)
    features, targets, weights, groups, feature_names = _split_table(
        frame, args.input, args.target, args.weight_col, args.group_col,
        _ignored(args),
    )
    dataset = _dataset(features, targets, weights, feature_names)
    if not np.all(np.isin(dataset.targets, (0.0, 1.0))):
        raise InputError("stability analysis flips labels and requires 0/1 targets")
    config = _fit_config(args)
    p_grid = _parse_floats(args.p, "--p")
    if any(not 0.0 <= p <= 1.0 for p in p_grid):
        raise InputError("--p values must lie in [0, 1]")

    if groups is None:
        def fit_fn(data: Dataset):
            return fit_figs(data, config, "binary_classification")
    else:
        def fit_fn(data: Dataset):
            grouped = weighting.GroupedDataset(data, groups)
            gmodel = weighting.fit_gfigs(
                grouped, config, "binary_classification",
                membership_l2=args.membership_l2,
            )
            out: set[int] = set()
            for member in gmodel.per_group.values():
                out |= metrics.split_feature_set(member)
            return out

    try:
        scores = metrics.stability_analysis(
            dataset, fit_fn, p_grid, args.seeds, seed=args.seed
        )
    except ValueError as exc:
        _info(f"stability analysis failed: {exc}")
        return EXIT_COMPUTE
    _print_json({
        "command": "stability",
        "p_grid": p_grid,
        "n_repeats": args.seeds,
        "scores": {repr(p): scores[p] for p in p_grid},
        "means": {repr(p): float(np.mean(scores[p])) for p in p_grid},
    })
    return EXIT_OK


# ---------------------------------------------------------------- rate


def cmd_rate(args) -> int:
    settings = {
        "components": 5,
        "sigma": 0.5,
        "n_grid": [500, 1000, 2000, 4000],
        "seeds": 5,
        "test_n": 2000,
        "base_seed": 0,
    }
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise InputError("rate config must be a JSON object")
        unknown = set(raw) - set(settings)
        if unknown:
            raise InputError(f"unknown rate config keys {sorted(unknown)}")
        settings.update(raw)

    try:
        spec = theory.sine_block_spec(int(settings["components"]))
        result = theory.rate_experiment(
            spec,
            [int(n) for n in settings["n_grid"]],
            int(settings["seeds"]),
            sigma=float(settings["sigma"]),
            test_n=int(settings["test_n"]),
            base_seed=int(settings["base_seed"]),
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc

    if args.out is not None:
        pd.DataFrame({
            "n": result.ns,
            "mean_mse": result.mean_mse,
            "e_fraction": result.e_fractions,
        }).to_csv(args.out, index=False)
    _print_json({
        "command": "rate",
        "ns": result.ns,
        "mean_mse": result.mean_mse,
        "e_fractions": result.e_fractions,
        "slope": result.slope,
        "out": args.out,
    })
    return EXIT_OK


# ---------------------------------------------------------------- curves


def cmd_curves(args) -> int:
    frame = _read_table(args.input)
    features, targets, weights, _, feature_names = _split_table(
        frame, args.input, args.target, args.weight_col, None, _ignored(args)
    )
    train = _dataset(features, targets, weights, feature_names)
    if args.test_input is not None:
        tframe = _read_table(args.test_input)
        tfeat, ttarg, tw, _, tnames = _split_table(
            tframe, args.test_input, args.target, None, None, _ignored(args)
        )
        if tnames != feature_names:
            raise InputError("test input columns do not match the training input")
        test = _dataset(tfeat, ttarg, tw, tnames)
    else:
        test = train
    task = _task_name(args.task)
    budgets = _parse_ints(args.budgets, "--budgets")
    if any(b < 0 for b in budgets):
        raise InputError("--budgets must be non-negative")
    config = _fit_config(args)
    if config.max_splits < max(budgets):
        raise InputError("--max-splits must cover the largest budget")

    try:
        fitter = fit_figs if args.method == "figs" else fit_cart
        model = fitter(train, config, task)
        rows = metrics.budget_curve(model, test, budgets)
    except ValueError as exc:
        _info(f"curve fit failed: {exc}")
        return EXIT_COMPUTE
    for row in rows:
        row["dataset"] = args.input
        row["method"] = args.method
    columns = ["dataset", "method", "split_budget", "mse", "auc", "r2",
               "n_trees", "total_splits", "repeated_split_fraction"]
    pd.DataFrame(rows)[columns].to_csv(args.out, index=False)
    _print_json({
        "command": "curves",
        "method": args.method,
        "budgets": budgets,
        "out": args.out,
    })
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figs",
        description="Greedy tree-sum models: fit, predict, and evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a model on a CSV")
    _add_fit_flags(p_fit)
    p_fit.set_defaults(handler=cmd_fit)

    p_pred = sub.add_parser("predict", help="score rows with a saved model")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--input", required=True)
    p_pred.add_argument("--group-col", default=None)
    p_pred.add_argument("--out", required=True)
    p_pred.set_defaults(handler=cmd_predict)

    p_eval = sub.add_parser("eval", help="metrics of a saved model on a CSV")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--input", required=True)
    p_eval.add_argument("--target", required=True)
    p_eval.add_argument("--group-col", default=None)
    p_eval.add_argument("--levels", default="0.92,0.94,0.96,0.98",
                        help="sensitivity floors for specificity reporting")
    p_eval.set_defaults(handler=cmd_eval)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("--spec", required=True, help="generator spec JSON")
    p_synth.add_argument("--out", required=True, help="output CSV path")
    p_synth.set_defaults(handler=cmd_synth)

    p_stab = sub.add_parser("stability", help="split-feature stability under label flips")
    p_stab.add_argument("--input", required=True)
    p_stab.add_argument("--target", required=True)
    p_stab.add_argument("--weight-col", default=None)
    p_stab.add_argument("--ignore-cols", default="")
    p_stab.add_argument("--group-col", default=None)
    p_stab.add_argument("--membership-l2", type=float, default=1.0)
    p_stab.add_argument("--max-splits", type=int, required=True)
    p_stab.add_argument("--min-impurity-decrease", type=float, default=0.0)
    p_stab.add_argument("--min-samples-leaf", type=int, default=1)
    p_stab.add_argument("--backfit", type=int, default=0)
    p_stab.add_argument("--seed", type=int, default=0)
    p_stab.add_argument("--p", default="0.01,0.025,0.05",
                        help="label-flip fractions")
    p_stab.add_argument("--seeds", type=int, default=5,
                        help="perturbation repeats per fraction")
    p_stab.set_defaults(handler=cmd_stability)

    p_rate = sub.add_parser("rate", help="error-rate experiment on grid oracles")
    p_rate.add_argument("--config", default=None, help="experiment config JSON")
    p_rate.add_argument("--out", default=None, help="optional CSV of per-n results")
    p_rate.set_defaults(handler=cmd_rate)

    p_curves = sub.add_parser("curves", help="metrics at several split budgets")
    p_curves.add_argument("--input", required=True)
    p_curves.add_argument("--test-input", default=None)
    p_curves.add_argument("--target", required=True)
    p_curves.add_argument("--weight-col", default=None)
    p_curves.add_argument("--ignore-cols", default="")
    p_curves.add_argument("--task", choices=["regression", "classification"],
                          default="regression")
    p_curves.add_argument("--method", choices=["figs", "cart"], default="figs")
    p_curves.add_argument("--max-splits", type=int, required=True)
    p_curves.add_argument("--min-impurity-decrease", type=float, default=0.0)
    p_curves.add_argument("--min-samples-leaf", type=int, default=1)
    p_curves.add_argument("--backfit", type=int, default=0)
    p_curves.add_argument("--seed", type=int, default=0)
    p_curves.add_argument("--budgets", required=True,
                          help="comma-separated split budgets")
    p_curves.add_argument("--out", required=True)
    p_curves.set_defaults(handler=cmd_curves)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InputError as exc:
        _info(f"input error: {exc}")
        return EXIT_INPUT
    except OSError as exc:
        _info(f"i/o error: {exc}")
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001  - compute failures map to exit 3
        _info(f"error: {exc}")
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
