"""Command-line surface: train, tune, evaluate, predict, report.

Exit codes are part of the contract: 0 success, 2 bad flags or configuration,
3 data/schema/artifact errors, 4 training failures.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .classifier import (
    ClassifierSpec,
    KINDS,
    TrainedModel,
    accuracy_on,
    load,
    predict,
    save,
    train,
)
from .dataset import Dataset, load_csv, validate
from .errors import (
    CardioLearnError,
    ConfigurationError,
    SchemaError,
    TrainingError,
)
from .model_selection import CvConfig, ParamGrid, default_grid, grid_search
from .preprocess import SplitConfig, stratified_split
from .report import (
    class_sex_frequency_csv,
    comparison_csv,
    confusion_block_csv,
    confusion_table_csv,
    correlation_csv,
    evaluate_on,
    metrics_csv,
    provenance_mismatch,
    render_confusion_grid_svg,
    render_correlation_svg,
    render_frequency_svg,
    render_metric_bars_svg,
    test_rows_for,
    write_manifest,
)

EXIT_OK = 0
EXIT_BAD_FLAGS = 2
EXIT_DATA_ERROR = 3
EXIT_TRAINING_ERROR = 4

SEED_ENV_VAR = "CARDIOLEARN_SEED"


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV_VAR)
    return int(env) if env else 42


def _parse_kv_lines(path: str) -> list[tuple[str, str]]:
    pairs = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    return pairs


def parse_spec_file(path: str) -> dict[str, str]:
    """Flat key=value file; duplicate keys are rejected."""
    out: dict[str, str] = {}
    for key, value in _parse_kv_lines(path):
        if key in out:
            raise ConfigurationError(f"{path}: duplicate key {key!r}")
        out[key] = value
    return out


def parse_grid_file(path: str) -> dict[str, list[str]]:
    """Flat key=value file where repeated keys form a grid axis."""
    axes: dict[str, list[str]] = {}
    for key, value in _parse_kv_lines(path):
        axes.setdefault(key, []).append(value)
    if not axes:
        raise ConfigurationError(f"{path}: grid file defines no axes")
    return axes


def _load_valid(path: str) -> Dataset:
    data = load_csv(path)
    report = validate(data)
    if not report.is_valid:
        first = report.row_errors[0]
        raise SchemaError(
            f"{path}: {len(report.row_errors)} validation errors; "
            f"first: row {first.row}, column {first.column!r}: {first.rule}"
        )
    return data


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _artifact_path(out: Path, kind: str) -> Path:
    return out / f"{kind}.model"


def _print_split_summary(model: TrainedModel, train_d: Dataset, test_d: Dataset) -> None:
    print(f"train accuracy: {accuracy_on(model, train_d)!r}")
    print(f"test accuracy: {accuracy_on(model, test_d)!r}")


def cmd_train(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    data = _load_valid(args.data)
    split_cfg = SplitConfig(seed=seed)
    train_d, test_d = stratified_split(data, split_cfg)

    hyper = parse_spec_file(args.spec) if args.spec else {}
    spec = ClassifierSpec(
        kind=args.model, hyperparams=hyper, seed=seed, standardize=not args.no_standardize
    )
    model = train(spec, train_d, split=split_cfg)

    out = _out_dir(args.out)
    artifact = _artifact_path(out, args.model)
    save(model, str(artifact))
    write_manifest(out, "train", args.data, seed, spec_file=args.spec)
    print(f"model: {artifact}")
    _print_split_summary(model, train_d, test_d)
    return EXIT_OK


def cmd_tune(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    if args.folds < 2:
        raise ConfigurationError(f"--folds must be >= 2, got {args.folds}")
    data = _load_valid(args.data)
    split_cfg = SplitConfig(seed=seed)
    train_d, test_d = stratified_split(data, split_cfg)

    if args.grid:
        grid = ParamGrid(args.model, dict(parse_grid_file(args.grid)))
    else:
        grid = default_grid(args.model)
    result = grid_search(
        grid,
        train_d,
        CvConfig(folds=args.folds, seed=seed),
        standardize=not args.no_standardize,
    )

    out = _out_dir(args.out)
    grid_csv = out / f"grid_{args.model}.csv"
    grid_csv.write_text(result.to_csv())

    spec = ClassifierSpec(
        kind=args.model,
        hyperparams=result.best_params,
        seed=seed,
        standardize=not args.no_standardize,
    )
    model = train(spec, train_d, split=split_cfg)
    artifact = _artifact_path(out, args.model)
    save(model, str(artifact))
    write_manifest(out, "tune", args.data, seed, grid_file=args.grid)

    best = ", ".join(f"{k}={v}" for k, v in result.best_params.items())
    print(f"best candidate: {best}")
    print(f"cv accuracy: {result.best_mean_score!r}")
    print(f"model: {artifact}")
    print(f"grid results: {grid_csv}")
    _print_split_summary(model, train_d, test_d)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    model = load(args.model)
    data = _load_valid(args.data)
    warning = provenance_mismatch(model, args.data)
    if warning:
        print(f"warning: {warning}", file=sys.stderr)

    if args.split == "test":
        rows = test_rows_for(model, data, seed=args.seed)
    else:
        rows = data
    report, cm = evaluate_on(model, rows, threshold=args.threshold)

    out = _out_dir(args.out)
    (out / "metrics.csv").write_text(metrics_csv(report))
    (out / "confusion.csv").write_text(confusion_block_csv(cm))
    write_manifest(out, "evaluate", args.data, _resolve_seed(args.seed))
    print(
        f"{model.kind}: accuracy={report.accuracy!r} precision={report.precision!r} "
        f"recall={report.recall!r} f1={report.f1!r} auc={report.auc!r}"
    )
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    model = load(args.model)
    record: dict[str, str] = {}
    if args.input:
        record.update(parse_spec_file(args.input))
    for pair in args.pairs:
        if "=" not in pair:
            raise ConfigurationError(f"expected key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        record[key.strip()] = value.strip()
    if not record:
        raise ConfigurationError("no input record: give --input FILE or key=value pairs")

    output = predict(model, record, threshold=args.threshold)
    print(f"label={output.label} score={output.score!r} threshold={args.threshold!r}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    data = _load_valid(args.data)
    models_dir = Path(args.models)
    paths = sorted(models_dir.glob("*.model"))
    if not paths:
        raise ConfigurationError(f"no *.model artifacts found in {models_dir}")

    metric_rows = []
    confusion_rows = []
    for path in paths:
        model = load(str(path))
        rows = test_rows_for(model, data)
        report, cm = evaluate_on(model, rows)
        metric_rows.append((path.stem, report))
        confusion_rows.append((path.stem, cm))

    out = _out_dir(args.out)
    twins = {
        "comparison": (comparison_csv(metric_rows), render_metric_bars_svg),
        "confusion_matrices": (confusion_table_csv(confusion_rows), render_confusion_grid_svg),
        "correlation": (correlation_csv(data), render_correlation_svg),
        "class_sex_frequency": (class_sex_frequency_csv(data), render_frequency_svg),
    }
    for name, (csv_text, renderer) in twins.items():
        (out / f"{name}.csv").write_text(csv_text)
        (out / f"{name}.svg").write_text(renderer(csv_text))
    write_manifest(out, "report", args.data, _resolve_seed(None))
    print(f"report written to {out} ({len(paths)} models)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cardiolearn",
        description="Train, tune, evaluate, and report heart-risk classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="split the data and train one model")
    p_train.add_argument("--data", required=True, help="CSV file with the 12 canonical columns")
    p_train.add_argument("--model", required=True, choices=KINDS)
    p_train.add_argument("--spec", help="key=value hyperparameter file")
    p_train.add_argument("--seed", type=int, help=f"default: ${SEED_ENV_VAR} or 42")
    p_train.add_argument("--out", default=".", help="output directory")
    p_train.add_argument("--no-standardize", action="store_true")
    p_train.set_defaults(func=cmd_train)

    p_tune = sub.add_parser("tune", help="grid search on the training split")
    p_tune.add_argument("--data", required=True)
    p_tune.add_argument("--model", required=True, choices=KINDS)
    p_tune.add_argument("--grid", help="key=value file; repeated keys form axes")
    p_tune.add_argument("--folds", type=int, default=5)
    p_tune.add_argument("--seed", type=int)
    p_tune.add_argument("--out", default=".")
    p_tune.add_argument("--no-standardize", action="store_true")
    p_tune.set_defaults(func=cmd_tune)

    p_eval = sub.add_parser("evaluate", help="metrics for a saved model artifact")
    p_eval.add_argument("--model", required=True, help="model artifact path")
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--split", choices=("test", "all"), default="test")
    p_eval.add_argument("--seed", type=int, help="override the artifact's split seed")
    p_eval.add_argument("--threshold", type=float, default=0.5)
    p_eval.add_argument("--out", default=".")
    p_eval.set_defaults(func=cmd_evaluate)

    p_pred = sub.add_parser("predict", help="score one record")
    p_pred.add_argument("--model", required=True, help="model artifact path")
    p_pred.add_argument("--input", help="key=value record file")
    p_pred.add_argument("--threshold", type=float, default=0.5)
    p_pred.add_argument("pairs", nargs="*", help="inline field=value pairs")
    p_pred.set_defaults(func=cmd_predict)

    p_rep = sub.add_parser("report", help="comparison tables and SVG charts")
    p_rep.add_argument("--data", required=True)
    p_rep.add_argument("--models", required=True, help="directory of *.model artifacts")
    p_rep.add_argument("--out", default=".")
    p_rep.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_FLAGS
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRAINING_ERROR
    except CardioLearnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
