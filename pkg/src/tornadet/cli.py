"""``tornadet`` command line: synth, build-dataset, train, evaluate, ablate, monitor.

Exit codes: 0 success, 1 data or model error, 2 usage error.

Every subcommand accepts ``--config FILE`` holding ``key = value`` lines
(``#`` starts a comment).  Keys are option names without the leading dashes
(``min-gap-days`` or ``min_gap_days``).  Flags given on the command line
override the file, which overrides the built-in defaults.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import sys
from pathlib import Path

from . import __version__
from .classifiers import DEFAULT_PARAMS, DEFAULT_THRESHOLD, KINDS, ModelSpec, fit, load_model, save_model
from .errors import TornadetError
from .evaluation import (
    EvalReport,
    ReportCell,
    evaluate_model,
    run_ablation,
    split_by_year,
    truncate_dataset,
)
from .features import FEATURES_PER_DAY, feature_csv, feature_matrix
from .ingestion import (
    DEFAULT_MIN_GAP_DAYS,
    SnapshotDirectory,
    assemble_dataset,
    parse_snapshot_file,
    read_dataset,
    read_event_catalog,
    select_negatives,
    snapshot_from_document,
    tornado_dates_by_region,
    write_dataset,
)
from .monitor import MonitorState
from .schema import MAX_WINDOW_DAYS, Label
from .synth import DEFAULT_REGIONS, SynthSpec, generate, write_synthetic

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Bad flags or missing inputs named on the command line."""


# -- argument types ----------------------------------------------------------


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text}")
    return v


def _pos_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return v


def _nonneg_float(text):
    v = float(text)
    if not v >= 0 or v == float("inf"):
        raise argparse.ArgumentTypeError(f"expected a finite number >= 0, got {text}")
    return v


def _pos_float(text):
    v = float(text)
    if not 0 < v < float("inf"):
        raise argparse.ArgumentTypeError(f"expected a finite number > 0, got {text}")
    return v


def _probability(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {text}")
    return v


def _window_days(text):
    v = int(text)
    if not 1 <= v <= MAX_WINDOW_DAYS:
        raise argparse.ArgumentTypeError(f"expected 1..{MAX_WINDOW_DAYS}, got {text}")
    return v


def _date(text):
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {text}") from None


def _window_list(text):
    out = [_window_days(part.strip()) for part in text.split(",") if part.strip()]
    if not out:
        raise argparse.ArgumentTypeError("expected a comma-separated list of window sizes")
    return out


def _kind_list(text):
    out = [part.strip() for part in text.split(",") if part.strip()]
    bad = [k for k in out if k not in KINDS]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"unknown kinds {bad}; choose from {', '.join(KINDS)}")
    return out


def _max_features(text):
    if text in ("sqrt", "all"):
        return text
    return _pos_int(text)


def _bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text}")


# -- parser ------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--config", metavar="FILE", help="key = value defaults; command-line flags win")


def _add_model_flags(p):
    g = p.add_argument_group("model hyperparameters (unset flags keep each kind's defaults)")
    g.add_argument("--seed", type=_nonneg_int, default=0, help="model seed (default: 0)")
    g.add_argument("--trees", type=_pos_int, help="random_forest: number of trees (100)")
    g.add_argument("--max-depth", type=_pos_int, help="trees: depth limit (unlimited)")
    g.add_argument("--min-samples-split", type=_pos_int, help="trees: smallest splittable node (2)")
    g.add_argument("--max-features", type=_max_features, help="random_forest: features per split, 'sqrt', 'all' or N (sqrt)")
    g.add_argument("--no-bootstrap", action="store_true", default=None, help="random_forest: grow every tree on all rows")
    g.add_argument("--k", type=_pos_int, help="knn: neighbours (5)")
    g.add_argument("--rounds", type=_pos_int, help="adaboost: boosting rounds (50)")
    g.add_argument("--epochs", type=_pos_int, help="linear_svm: passes over the data (20)")
    g.add_argument("--lam", type=_pos_float, help="linear_svm: L2 penalty (1e-4)")
    g.add_argument("--eta0", type=_pos_float, help="linear_svm: initial step size (0.1)")
    g.add_argument("--var-smoothing", type=_pos_float, help="gaussian_nb: variance floor factor (1e-9)")
    g.add_argument("--n-jobs", type=_pos_int, default=1, help="threads for random_forest fitting (default: 1)")


def _add_split_flags(p):
    p.add_argument("--test-year", type=int, help="windows dated this year form the test set (default: latest year)")
    p.add_argument("--threshold", type=_probability, default=DEFAULT_THRESHOLD, help="alert when probability >= this (default: 0.5)")
    p.add_argument("--out-json", metavar="FILE", help="write the full-precision JSON report here")
    p.add_argument("--out-table", metavar="FILE", help="write the text table here (it is always printed)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tornadet",
        description="Tornado early detection from daily gridded weather snapshots.",
        epilog="Exit codes: 0 success, 1 data or model error, 2 usage error.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("synth", help="generate a seeded synthetic dataset with a known Bayes oracle")
    _add_common(p)
    p.add_argument("--out", metavar="DIR", help="output directory (required)")
    p.add_argument("--seed", type=_nonneg_int, default=0, help="generator seed (default: 0)")
    p.add_argument("--tornado", type=_nonneg_int, default=500, help="tornado windows (default: 500)")
    p.add_argument("--null", type=_nonneg_int, default=500, help="null-event windows (default: 500)")
    p.add_argument("--separation", type=_nonneg_float, default=3.0, help="class offset in noise-sigma units (default: 3)")
    p.add_argument("--window-days", type=_window_days, default=MAX_WINDOW_DAYS, help="days per window (default: 5)")
    p.add_argument("--start-date", type=_date, default=dt.date(1990, 1, 1), help="earliest snapshot date (default: 1990-01-01)")
    p.set_defaults(func=cmd_synth, required=("out",))

    p = sub.add_parser("build-dataset", help="assemble labeled windows from a catalog and snapshot files")
    _add_common(p)
    p.add_argument("--catalog", action="append", metavar="CSV", help="event catalog (repeatable, required)")
    p.add_argument("--snapshots", action="append", metavar="DIR", help="snapshot directory (repeatable, required)")
    p.add_argument("--out", metavar="FILE", help="dataset JSON to write (required)")
    p.add_argument("--window-days", type=_window_days, default=MAX_WINDOW_DAYS, help="days per window (default: 5)")
    p.add_argument("--min-gap-days", type=_nonneg_int, default=DEFAULT_MIN_GAP_DAYS, help="null events closer than this to a same-region tornado are dropped (default: 10)")
    p.add_argument("--features-csv", metavar="FILE", help="also write the feature matrix as CSV")
    p.set_defaults(func=cmd_build_dataset, required=("catalog", "snapshots", "out"))

    p = sub.add_parser("train", help="fit one classifier and save it")
    _add_common(p)
    p.add_argument("--dataset", metavar="FILE", help="dataset JSON (required)")
    p.add_argument("--kind", choices=KINDS, help="classifier kind (required)")
    p.add_argument("--out", metavar="FILE", help="model JSON to write (required)")
    p.add_argument("--window-days", type=_window_days, help="train on the most recent N days (default: all)")
    p.add_argument("--test-year", type=int, help="if set, train only on windows dated before this year")
    _add_model_flags(p)
    p.set_defaults(func=cmd_train, required=("dataset", "kind", "out"))

    p = sub.add_parser("evaluate", help="POD/FAR of one model on the test year")
    _add_common(p)
    p.add_argument("--dataset", metavar="FILE", help="dataset JSON (required)")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--model", metavar="FILE", help="saved model to score")
    src.add_argument("--kind", choices=KINDS, help="fit this kind on the training years instead")
    p.add_argument("--window-days", type=_window_days, help="with --kind: days per window (default: all)")
    _add_split_flags(p)
    _add_model_flags(p)
    p.set_defaults(func=cmd_evaluate, required=("dataset",))

    p = sub.add_parser("ablate", help="classifiers x window sizes POD/FAR table")
    _add_common(p)
    p.add_argument("--dataset", metavar="FILE", help="dataset JSON (required)")
    p.add_argument("--kinds", type=_kind_list, default=list(KINDS), help="comma-separated kinds (default: all six)")
    p.add_argument("--windows", type=_window_list, default=[5, 4, 3, 2, 1], help="comma-separated window sizes (default: 5,4,3,2,1)")
    _add_split_flags(p)
    _add_model_flags(p)
    p.set_defaults(func=cmd_ablate, required=("dataset",))

    p = sub.add_parser("monitor", help="stream snapshots through a model and print alert records")
    _add_common(p)
    p.add_argument("inputs", nargs="*", metavar="SNAPSHOT", help="snapshot files or directories; '-' or none reads stdin lines (paths or JSON documents)")
    p.add_argument("--model", metavar="FILE", help="saved model (required)")
    p.add_argument("--threshold", type=_probability, default=DEFAULT_THRESHOLD, help="alert when probability >= this (default: 0.5)")
    p.add_argument("--window-days", type=_window_days, help="must match the model (default: the model's)")
    p.set_defaults(func=cmd_monitor, required=("model",))
    return parser


# -- config files ------------------------------------------------------------


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _config_defaults(sub: argparse.ArgumentParser, config: dict[str, str]) -> dict:
    actions = {a.dest: a for a in sub._actions if a.option_strings and a.dest not in ("help", "config")}
    out = {}
    for key, text in config.items():
        action = actions.get(key)
        if action is None:
            raise UsageError(f"unknown config key {key!r}")
        try:
            if isinstance(action, argparse._StoreTrueAction):
                value = _bool(text)
            elif isinstance(action, argparse._AppendAction):
                value = [part.strip() for part in text.split(",") if part.strip()]
            else:
                value = action.type(text) if action.type else text
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"config key {key!r}: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config key {key!r}: {value!r} not one of {', '.join(action.choices)}")
        out[key] = value
    return out


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = _subparser(parser, args.command)
    if args.config:
        try:
            cfg = _config_defaults(sub, read_config(args.config))
        except (OSError, UsageError) as exc:
            sub.error(str(exc))
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    missing = [name for name in args.required if getattr(args, name, None) in (None, [])]
    if missing:
        sub.error("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))
    return args


# -- helpers -----------------------------------------------------------------


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _existing_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {path}")
    return p


def _model_spec(args, kind: str) -> ModelSpec:
    flag_to_param = {
        "trees": "n_trees",
        "max_depth": "max_depth",
        "min_samples_split": "min_samples_split",
        "max_features": "max_features",
        "k": "k",
        "rounds": "rounds",
        "epochs": "epochs",
        "lam": "lam",
        "eta0": "eta0",
        "var_smoothing": "var_smoothing",
    }
    params = {}
    for flag, name in flag_to_param.items():
        value = getattr(args, flag, None)
        if value is not None and name in DEFAULT_PARAMS[kind]:
            params[name] = None if value == "all" else value
    if getattr(args, "no_bootstrap", None) and "bootstrap" in DEFAULT_PARAMS[kind]:
        params["bootstrap"] = False
    try:
        return ModelSpec(kind, params, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_dataset(path):
    return read_dataset(_existing_file(path, "dataset"))


def _split(dataset, test_year):
    if len(dataset) == 0:
        raise TornadetError("dataset is empty")
    year = test_year if test_year is not None else max(w.target_date.year for w in dataset.windows)
    train, test = split_by_year(dataset, year)
    return year, train, test


def _emit_report(report: EvalReport, args) -> None:
    table = report.to_table()
    sys.stdout.write(table)
    if args.out_table:
        Path(args.out_table).write_text(table, encoding="utf-8")
    if args.out_json:
        Path(args.out_json).write_bytes(report.to_json())


# -- commands ----------------------------------------------------------------


def cmd_synth(args) -> int:
    try:
        spec = SynthSpec(
            seed=args.seed,
            n_tornado=args.tornado,
            n_null=args.null,
            separation=args.separation,
            window_days=args.window_days,
            start_date=args.start_date,
            regions=DEFAULT_REGIONS,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = generate(spec)
    paths = write_synthetic(result, args.out)
    print(
        f"wrote {len(result.dataset)} windows ({spec.n_tornado} tornado, {spec.n_null} null) "
        f"to {args.out}; Bayes error {result.oracle.bayes_error():.3g}"
    )
    for name, path in paths.items():
        _log(f"{name}: {path}")
    return EXIT_OK


def cmd_build_dataset(args) -> int:
    catalogs = [_existing_file(p, "catalog") for p in args.catalog]
    for d in args.snapshots:
        if not Path(d).is_dir():
            raise UsageError(f"snapshot directory not found: {d}")
    entries = []
    for path in catalogs:
        entries.extend(read_event_catalog(path))
    ids = [e.event_id for e in entries]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise TornadetError(f"event_id {dup!r} appears in more than one catalog")
    nulls = [e for e in entries if e.label is Label.NULL_EVENT]
    kept_nulls = select_negatives(nulls, tornado_dates_by_region(entries), args.min_gap_days)
    kept_ids = {e.event_id for e in kept_nulls}
    catalog = [e for e in entries if e.label is Label.TORNADO or e.event_id in kept_ids]
    filtered = len(nulls) - len(kept_nulls)
    dataset = assemble_dataset(
        catalog,
        SnapshotDirectory(*args.snapshots),
        window_days=args.window_days,
        provenance={
            "source": "catalog",
            "catalogs": [str(p) for p in catalogs],
            "min_gap_days": args.min_gap_days,
            "filtered": filtered,
        },
    )
    write_dataset(dataset, args.out)
    if args.features_csv:
        Path(args.features_csv).write_bytes(feature_csv(dataset.windows))
    n_t = int(dataset.labels().sum())
    print(
        f"{len(entries)} catalogued, {filtered} filtered by the {args.min_gap_days}-day gap rule, "
        f"{dataset.provenance['skipped']} skipped for missing snapshots, "
        f"{len(dataset)} windows written ({n_t} tornado, {len(dataset) - n_t} null)"
    )
    return EXIT_OK


def _training_windows(dataset, args):
    if args.window_days is not None:
        if args.window_days > (dataset.window_days or 0):
            raise TornadetError(f"dataset holds {dataset.window_days}-day windows, asked for {args.window_days}")
        dataset = truncate_dataset(dataset, args.window_days)
    return dataset


def cmd_train(args) -> int:
    spec = _model_spec(args, args.kind)
    dataset = _load_dataset(args.dataset)
    if args.test_year is not None:
        dataset = dataset.replace([w for w in dataset.windows if w.target_date.year < args.test_year])
    if len(dataset) == 0:
        raise TornadetError("no training windows")
    dataset = _training_windows(dataset, args)
    model = fit(spec, feature_matrix(dataset.windows), dataset.labels(), n_jobs=args.n_jobs)
    save_model(model, args.out)
    print(f"trained {model.model_id} on {len(dataset)} windows of {dataset.window_days} days -> {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    if args.model is None and args.kind is None:
        raise UsageError("one of --model or --kind is required")
    dataset = _load_dataset(args.dataset)
    year, train, test = _split(dataset, args.test_year)
    if len(test) == 0:
        raise TornadetError(f"no windows dated {year}")
    if args.model is not None:
        model = load_model(_existing_file(args.model, "model"))
    else:
        if len(train) == 0:
            raise TornadetError(f"no windows dated before {year}")
        spec = _model_spec(args, args.kind)
        train = _training_windows(train, args)
        model = fit(spec, feature_matrix(train.windows), train.labels(), n_jobs=args.n_jobs)
    counts, _ = evaluate_model(model, test, args.threshold)
    days = model.feature_length // FEATURES_PER_DAY
    report = EvalReport(
        (ReportCell(model.spec, days, counts),),
        {
            "threshold": args.threshold,
            "test_year": year,
            "model_id": model.model_id,
            "n_train": len(train) if args.model is None else None,
            "n_test": len(test),
            "provenance": dict(dataset.provenance),
        },
    )
    _emit_report(report, args)
    return EXIT_OK


def cmd_ablate(args) -> int:
    specs = [_model_spec(args, kind) for kind in args.kinds]
    dataset = _load_dataset(args.dataset)
    year, train, test = _split(dataset, args.test_year)
    if len(train) == 0:
        raise TornadetError(f"no windows dated before {year}")
    if len(test) == 0:
        raise TornadetError(f"no windows dated {year}")
    report = run_ablation(
        train,
        test,
        specs,
        windows=args.windows,
        threshold=args.threshold,
        n_jobs=args.n_jobs,
        metadata={"test_year": year, "provenance": dict(dataset.provenance)},
    )
    _emit_report(report, args)
    return EXIT_OK


def _snapshot_sort_key(path: Path):
    region, _, date = path.stem.rpartition("_")
    return (date, region, path.name)


def _monitor_inputs(inputs, stdin):
    """Yield ``(label, loader)`` for every snapshot in arrival order."""
    if not inputs or inputs == ["-"]:
        for n, line in enumerate(stdin, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("{"):
                yield f"<stdin>:{n}", lambda line=line: snapshot_from_document(json.loads(line))
            else:
                yield line, lambda p=line: parse_snapshot_file(Path(p).read_bytes())
        return
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            for f in sorted(p.glob("*.json"), key=_snapshot_sort_key):
                yield str(f), lambda f=f: parse_snapshot_file(f.read_bytes())
        else:
            yield item, lambda p=p: parse_snapshot_file(p.read_bytes())


def cmd_monitor(args, stdin=None, stdout=None) -> int:
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    model = load_model(_existing_file(args.model, "model"))
    state = MonitorState(model, threshold=args.threshold, window_days=args.window_days)
    emitted = skipped = 0
    for label, load in _monitor_inputs(args.inputs, stdin):
        try:
            record = state.feed(load())
        except (TornadetError, OSError, ValueError) as exc:
            skipped += 1
            _log(f"skipped {label}: {exc}")
            continue
        if record is not None:
            stdout.write(record.to_json() + "\n")
            stdout.flush()
            emitted += 1
    _log(f"{emitted} alert records emitted, {skipped} snapshots skipped")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        _log(f"tornadet {args.command}: error: {exc}")
        return EXIT_USAGE
    except (TornadetError, OSError) as exc:
        _log(f"tornadet {args.command}: {type(exc).__name__}: {exc}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
