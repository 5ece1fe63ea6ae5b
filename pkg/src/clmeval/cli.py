"""Command-line interface.

Exit codes: 0 success, 2 usage or data error, 3 degenerate computation.
"""

import argparse
import csv
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .adjusted import MIN_MODES, MONTE_CARLO, AGGREGATES, MeasureConfig
from .calibration import CalibrationEntry, CalibrationSet, SearchSpace, calibrate_k, read_scores_file
from .errors import CLMError, DataError, DegenerateError, SchemaError
from .harness import (
    ScoreTable,
    SweepConfig,
    ablation_sweep,
    improve_clm,
    rank_stability,
    worker_count,
)
from .io import build_report, load_csv, write_dataset_csv, write_report
from .measures import ADJUSTED_NAMES, MEASURE_NAMES, evaluate, get_measure
from .synth import base_datasets, generate_gaussian_pair

_QUIET = False


def _warn(message):
    if not _QUIET:
        print(f"clmeval: warning: {message}", file=sys.stderr)

EXIT_OK, EXIT_DATA, EXIT_DEGENERATE = 0, 2, 3


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ helpers

def _measure_config(args):
    return MeasureConfig(k=args.k if args.k is not None else 1.0, min_mode=args.min_mode,
                         T=args.T, seed=args.seed, p=args.p, agg=args.agg)


def _check_k(args):
    if args.measure in ADJUSTED_NAMES and args.measure != "sc_adj" and args.k is None:
        _warn("k is not calibrated; using k=1 (see the 'calibrate' command)")


def _check_seed(args, config):
    kind = ADJUSTED_NAMES.get(args.measure)
    if kind and kind != "sc_a" and (args.min_mode or "") == MONTE_CARLO and args.seed is None:
        raise UsageError("--seed is required with --min-mode monte_carlo")
    if kind:
        try:
            config.resolve_min_mode(kind)
        except ValueError as err:
            raise UsageError(str(err)) from None


def _csv_inputs(paths):
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(p.glob("*.csv")))
        else:
            out.append(p)
    return out


def _write_manifest(args, outdir, artifacts, extra=None):
    manifest = build_report({"command": args.command, "argv": args.argv, "artifacts": artifacts,
                             **(extra or {})}, seed=args.seed, config={})
    write_report(manifest, outdir / "manifest.json")


def _outdir(args):
    path = Path(args.outdir)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise DataError(f"{path}: cannot create output folder ({err.strerror})") from None
    return path


# ----------------------------------------------------------------- commands

def cmd_score(args):
    _check_k(args)
    config = _measure_config(args)
    _check_seed(args, config)
    table = load_csv(args.input, args.label_column, args.normalization)
    if table.dropped_count:
        _warn(f"{args.input}: dropped {table.dropped_count} row(s) with missing values")
    body = evaluate(args.measure, table.dataset, table.labels, config)
    body.update(dataset=str(args.input), n=int(table.dataset.shape[0]),
                dim=int(table.dataset.shape[1]), dropped_rows=table.dropped_count)
    write_report(build_report(body, seed=args.seed, config=body.pop("config")), args.output, args.format)
    return EXIT_OK


def _rank_one(path, args, config):
    try:
        table = load_csv(path, args.label_column, args.normalization)
        fn = get_measure(args.measure, config)
        return {"dataset": path.stem, "path": str(path), "score": fn(table.dataset, table.labels),
                "error": None}
    except CLMError as err:
        return {"dataset": path.stem, "path": str(path), "score": None,
                "error": f"{type(err).__name__}: {err}"}


def cmd_rank(args):
    _check_k(args)
    config = _measure_config(args)
    _check_seed(args, config)
    paths = _csv_inputs(args.inputs)
    if not paths:
        raise DataError("no dataset files found")
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(lambda p: _rank_one(p, args, config), paths))
    ok = [r for r in results if r["error"] is None]
    failed = [r for r in results if r["error"] is not None]
    for r in failed:
        _warn(f"{r['path']}: {r['error']}")
    if not ok:
        raise DataError("no dataset could be scored")
    ok.sort(key=lambda r: (-r["score"], r["dataset"]))
    for pos, r in enumerate(ok, start=1):
        r["rank"] = pos
    rows = [{"rank": r["rank"], "dataset": r["dataset"], "score": r["score"], "path": r["path"]}
            for r in ok]
    body = {"measure": args.measure, "rows": rows,
            "failures": [{"dataset": r["dataset"], "path": r["path"], "error": r["error"]}
                         for r in failed]}
    write_report(build_report(body, seed=args.seed, config=asdict(config)), args.output, args.format)
    return EXIT_OK


def cmd_calibrate(args):
    if args.measure not in ADJUSTED_NAMES or args.measure == "sc_adj":
        raise UsageError("calibrate needs an adjusted measure with a logistic stage")
    config = MeasureConfig(min_mode=args.min_mode, T=args.T, seed=args.seed, agg=args.agg)
    _check_seed(args, config)
    entries = []
    for path, score in read_scores_file(args.scores):
        table = load_csv(path, args.label_column, args.normalization)
        entries.append(CalibrationEntry(table.dataset, table.labels, score, name=path.stem))
    try:
        cset = CalibrationSet(entries, bins=args.bins)
    except ValueError as err:
        raise SchemaError(str(err)) from None
    search = SearchSpace(k_min=args.k_min, k_max=args.k_max)
    result = calibrate_k(ADJUSTED_NAMES[args.measure], cset, search, config)
    outdir = _outdir(args)
    body = result.to_dict(args.measure, args.bins)
    body["skipped"] = [str(f) for f in result.failed]
    write_report(build_report(body, seed=args.seed, config={**asdict(config), "bins": args.bins,
                                                        "k_min": args.k_min, "k_max": args.k_max}),
                 outdir / "calibration.json")
    _write_manifest(args, outdir, ["calibration.json"])
    print(f"k = {result.k_star:.6g}  (weighted R^2 = {result.objective:.6g})")
    return EXIT_OK


def cmd_generate(args):
    outdir = _outdir(args)
    specs = base_datasets(args.count, args.seed, n=args.n, target_dim=args.dim)
    artifacts, records = [], []
    width = max(3, len(str(args.count - 1)))
    for i, spec in enumerate(specs):
        X, labels = generate_gaussian_pair(spec)
        name = f"dataset_{i:0{width}d}.csv"
        write_dataset_csv(outdir / name, X, labels)
        artifacts.append(name)
        records.append({"file": name, **spec.to_dict()})
    _write_manifest(args, outdir, artifacts, {"datasets": records})
    return EXIT_OK


def cmd_improve(args):
    _check_k(args)
    config = _measure_config(args)
    _check_seed(args, config)
    table = load_csv(args.input, args.label_column, args.normalization)
    fn = get_measure(args.measure, config)
    result = improve_clm(table.dataset, table.labels, fn, args.candidates, args.seed)
    outdir = _outdir(args)
    kept = [name for name, m in zip(table.column_names, result.mask) if m]
    write_dataset_csv(outdir / "improved.csv", table.dataset[:, result.mask], table.labels, kept)
    body = {"measure": args.measure, "dataset": str(args.input),
            "original_score": result.original_score, "score": result.score,
            "selected_columns": kept, "n_failed_candidates": result.n_failed}
    write_report(build_report(body, seed=args.seed, config=asdict(config)), outdir / "improve.json")
    _write_manifest(args, outdir, ["improved.csv", "improve.json"])
    print(f"{args.measure}: {result.original_score:.6g} -> {result.score:.6g} "
          f"with {len(kept)}/{len(result.mask)} columns")
    return EXIT_OK


def cmd_ablation(args):
    config = MeasureConfig(k=args.k if args.k is not None else 1.0, seed=args.seed, T=args.T)
    variants = {name: get_measure(name, config) for name in args.measures}
    sweep = SweepConfig(axis=args.axis, base_count=args.bases, seed=args.seed,
                        base_n=args.base_n, base_dim=args.base_dim)
    workers = args.workers if args.workers else worker_count()
    report = ablation_sweep(variants, sweep, workers=workers)
    outdir = _outdir(args)
    write_report(build_report(report.to_dict(), seed=args.seed,
                              config={"bases": args.bases, "measures": list(args.measures),
                                      "base_n": args.base_n, "base_dim": args.base_dim}),
                 outdir / f"ablation_{args.axis}.json")
    _write_manifest(args, outdir, [f"ablation_{args.axis}.json"])
    for name, avg in report.averages.items():
        print(f"{name}\t{avg:.6f}")
    return EXIT_OK


def read_score_table(path):
    """First column names the dataset, remaining columns are techniques."""
    try:
        with Path(path).open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise DataError(f"{path}: {err.strerror or err}") from None
    if len(rows) < 2 or len(rows[0]) < 3:
        raise SchemaError(f"{path}: need a header, one dataset row and two technique columns")
    header = rows[0]
    names, values = [], []
    for line, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise SchemaError(f"{path}:{line}: expected {len(header)} cells")
        names.append(row[0])
        try:
            values.append([float(c) for c in row[1:]])
        except ValueError:
            raise SchemaError(f"{path}:{line}: non-numeric score") from None
    return ScoreTable(names, header[1:], np.array(values))


def cmd_stability(args):
    table = read_score_table(args.scores)
    try:
        P = rank_stability(table, args.subset, args.sims, args.seed)
    except ValueError as err:
        raise UsageError(str(err)) from None
    body = {"techniques": list(table.techniques), "matrix": P,
            "rows": [{"technique": t, **dict(zip(table.techniques, P[i]))}
                     for i, t in enumerate(table.techniques)]}
    config = {"subset": args.subset, "sims": args.sims}
    report = build_report(body, seed=args.seed, config=config)
    if args.outdir:
        outdir = _outdir(args)
        write_report(report, outdir / "stability.json")
        _write_manifest(args, outdir, ["stability.json"])
    else:
        write_report(report, args.output, args.format)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _add_data_flags(p):
    p.add_argument("--label-column", default="label", help="name of the class label column")
    p.add_argument("--normalization", choices=("min_max", "none"), default="min_max",
                   help="per-column feature scaling applied on load")


def _add_measure_flags(p, measures=MEASURE_NAMES, default=None):
    p.add_argument("--measure", choices=measures, required=default is None, default=default,
                   help="measure name")
    p.add_argument("--k", type=float, default=None, help="logistic growth rate (default 1)")
    p.add_argument("--min-mode", choices=MIN_MODES, default=None,
                   help="worst-score estimator for adjusted measures")
    p.add_argument("--T", type=int, default=100, help="label shuffles for monte_carlo")
    p.add_argument("--agg", choices=tuple(AGGREGATES), default="avg", help="pairwise aggregation")
    p.add_argument("--p", type=float, default=1.0, help="exponent of the baseline I index")


def _add_output_flags(p):
    p.add_argument("--output", default="-", help="report path, '-' for stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="report format")


def build_parser():
    parser = argparse.ArgumentParser(prog="clmeval", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--quiet", action="store_true", help="suppress warnings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score one labeled dataset")
    p.add_argument("--input", required=True, help="dataset CSV")
    _add_data_flags(p)
    _add_measure_flags(p)
    p.add_argument("--seed", type=int, default=None, help="seed (required for monte_carlo)")
    _add_output_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("rank", help="rank datasets by a measure")
    p.add_argument("inputs", nargs="+", help="dataset CSV files or folders of them")
    _add_data_flags(p)
    _add_measure_flags(p, default="ch_adj")
    p.add_argument("--seed", type=int, default=None, help="seed (required for monte_carlo)")
    _add_output_flags(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("calibrate", help="fit k against human separability scores")
    p.add_argument("--scores", required=True, help="CSV with columns dataset,score")
    p.add_argument("--measure", choices=tuple(n for n in ADJUSTED_NAMES if n != "sc_adj"),
                   default="ch_adj", help="adjusted measure")
    p.add_argument("--min-mode", choices=MIN_MODES, default=None, help="worst-score estimator")
    p.add_argument("--T", type=int, default=100, help="label shuffles for monte_carlo")
    p.add_argument("--agg", choices=tuple(AGGREGATES), default="avg", help="pairwise aggregation")
    p.add_argument("--bins", type=int, default=10, help="score bins for the sample weights")
    p.add_argument("--k-min", type=float, default=1e-3, help="smallest k searched")
    p.add_argument("--k-max", type=float, default=1e3, help="largest k searched")
    p.add_argument("--seed", type=int, default=None, help="seed (required for monte_carlo)")
    p.add_argument("--outdir", required=True, help="output folder")
    _add_data_flags(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("generate", help="write random two-Gaussian datasets")
    p.add_argument("--count", type=int, required=True, help="number of datasets")
    p.add_argument("--n", type=int, default=1000, help="points per dataset")
    p.add_argument("--dim", type=int, default=2, help="dimensions per dataset")
    p.add_argument("--seed", type=int, required=True, help="random seed")
    p.add_argument("--outdir", required=True, help="output folder")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("improve", help="search a column subset that raises the measure")
    p.add_argument("--input", required=True, help="dataset CSV")
    _add_data_flags(p)
    _add_measure_flags(p, default="ch_adj")
    p.add_argument("--candidates", type=int, default=1000, help="random column subsets tried")
    p.add_argument("--seed", type=int, required=True, help="random seed")
    p.add_argument("--outdir", required=True, help="output folder")
    p.set_defaults(func=cmd_improve)

    p = sub.add_parser("ablation", help="SMAPE sensitivity sweep over cardinality or dimension")
    p.add_argument("--axis", choices=("cardinality", "dimensionality"), required=True)
    p.add_argument("--measures", nargs="+", choices=MEASURE_NAMES,
                   default=["ch", "ch_adj"], help="measures compared")
    p.add_argument("--bases", type=int, default=200, help="base datasets")
    p.add_argument("--base-n", type=int, default=1000, help="points per base dataset")
    p.add_argument("--base-dim", type=int, default=100, help="dimensions per base dataset")
    p.add_argument("--k", type=float, default=None, help="logistic growth rate (default 1)")
    p.add_argument("--T", type=int, default=100, help="label shuffles for monte_carlo")
    p.add_argument("--workers", type=int, default=0, help="processes (default: CLM_THREADS or CPUs)")
    p.add_argument("--seed", type=int, required=True, help="random seed")
    p.add_argument("--outdir", required=True, help="output folder")
    p.set_defaults(func=cmd_ablation)

    p = sub.add_parser("stability", help="pairwise rank stability of techniques")
    p.add_argument("--scores", required=True, help="CSV: dataset column then one column per technique")
    p.add_argument("--subset", type=int, required=True, help="datasets per simulated benchmark")
    p.add_argument("--sims", type=int, default=1000, help="simulated benchmarks")
    p.add_argument("--seed", type=int, required=True, help="random seed")
    p.add_argument("--outdir", default=None, help="output folder (else --output)")
    _add_output_flags(p)
    p.set_defaults(func=cmd_stability)
    return parser


def main(argv=None):
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    args.argv = argv
    global _QUIET
    _QUIET = args.quiet
    try:
        return args.func(args)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"clmeval: error: {err}", file=sys.stderr)
        return EXIT_DATA
    except DegenerateError as err:
        print(f"clmeval: degenerate: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_DEGENERATE
    except DataError as err:
        print(f"clmeval: data error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as err:
        print(f"clmeval: error: {err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
