"""Command line front end.

Five verbs cover the pipeline end to end: ``gen-data`` writes a synthetic
pool, ``score`` turns predictions into acquisition scores, ``search`` runs
a configured subset search with baselines, ``analyze`` computes consensus,
duplication and accuracy diagnostics, and ``export`` flattens results
documents into plot-ready CSV tables.

Exit codes: 0 on success, 1 for configuration problems (bad flags, bad
config files), 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

from .acquisition import (
    FUNCTION_IDS,
    read_prediction_tensor,
    read_prediction_tensor_csv,
    score_pool,
)
from .analysis import (
    consensus_counts,
    duplication_histogram,
    evaluate,
    selected_unselected_gap,
)
from .datagen import (
    generate_pool_with_metadata,
    read_pool_csv,
    write_metadata_csv,
    write_pool_csv,
)
from .experiment import (
    ConfigError,
    EXPORT_KINDS,
    build_consensus_document,
    config_from_file,
    export_plot_data,
    generator_from_mapping,
    parse_config_file,
    read_results,
    run_experiment,
    write_results,
)
from .learner import CheckpointStore, EnsembleConfig, build_ensemble, predict_pool
from .state import SubsetState


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="experiment config file")
    parser.add_argument("--seed", type=int, help="override the configured seed(s)")
    parser.add_argument("--jobs", type=int, help="parallel trial processes")
    parser.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alsift",
        description="search labeled pools for compact training subsets",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen-data", help="write a synthetic labeled pool")
    _common_flags(p)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("score", help="acquisition scores for a pool or tensor")
    _common_flags(p)
    p.add_argument("--function", required=True, choices=FUNCTION_IDS)
    p.add_argument("--pool", help="pool CSV (features and labels)")
    p.add_argument("--checkpoints", help="checkpoint directory to build members from")
    p.add_argument("--tensor", help="prediction tensor file (.alpt or .csv)")
    p.add_argument("--mode", default="seeds", help="ensemble mode for --checkpoints")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--checkpoints-per-run", type=int, default=1)
    p.add_argument("--stride", type=int, default=1)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("search", help="run the configured subset search")
    _common_flags(p)
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("analyze", help="consensus, duplication and accuracy reports")
    _common_flags(p)
    p.add_argument("--what", required=True, choices=("consensus", "histogram", "eval"))
    p.add_argument("--pool", help="pool CSV")
    p.add_argument("--checkpoints", help="checkpoint directory")
    p.add_argument("--run", type=int, help="run seed for consensus (default: lowest)")
    p.add_argument("--n-max", type=int, help="deepest consensus prefix (default: all)")
    p.add_argument("--subset", help="subset CSV (sample_id, multiplicity)")
    p.add_argument("--csv", action="store_true", help="also write plot-ready tables")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("export", help="flatten results documents into CSV")
    _common_flags(p)
    p.add_argument("--results", required=True, nargs="+", help="results file(s)")
    p.add_argument("--kind", required=True, choices=EXPORT_KINDS)
    p.set_defaults(func=_cmd_export)

    return parser


def _cmd_gen_data(args) -> int:
    if args.config:
        spec = generator_from_mapping(parse_config_file(args.config))
    else:
        spec = generator_from_mapping({})
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    pool, meta = generate_pool_with_metadata(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_pool_csv(out / "pool.csv", pool)
    write_metadata_csv(out / "pool_meta.csv", pool, meta)
    print("wrote %d samples to %s" % (pool.n_samples, out / "pool.csv"))
    return 0


def _cmd_score(args) -> int:
    pool = read_pool_csv(args.pool) if args.pool else None
    if args.tensor:
        if args.tensor.endswith(".csv"):
            tensor = read_prediction_tensor_csv(args.tensor)
        else:
            tensor = read_prediction_tensor(args.tensor)
    elif args.checkpoints and pool is not None:
        store = CheckpointStore.load(args.checkpoints)
        members = build_ensemble(
            store,
            EnsembleConfig(
                mode=args.mode,
                runs=args.runs,
                checkpoints_per_run=args.checkpoints_per_run,
                stride=args.stride,
            ),
        )
        tensor = predict_pool(members, pool)
    else:
        raise ConfigError("score needs --tensor, or --pool plus --checkpoints")

    labels = None
    if args.function == "error_count":
        if pool is None:
            raise ConfigError("error_count scoring needs --pool for labels")
        labels = pool.labels[pool.rows_for(tensor.sample_ids)]
    scores = score_pool(tensor, args.function, labels=labels, seed=args.seed)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "scores.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "score"])
        for sid, value in zip(scores.sample_ids, scores.scores):
            writer.writerow([int(sid), repr(float(value))])
    print("wrote %d %s scores to %s" % (len(scores.scores), args.function, path))
    return 0


def _cmd_search(args) -> int:
    if not args.config:
        raise ConfigError("search needs --config")
    config = config_from_file(args.config)
    if args.seed is not None:
        config = replace(config, seeds=(args.seed,))
    if args.out != ".":
        config = replace(config, out_dir=args.out)
    result = run_experiment(config, jobs=args.jobs)
    path = write_results(result, config.out_dir)
    for trial in result.trials:
        extras = ""
        if trial.random_accuracy is not None:
            extras += " random=%.4f" % trial.random_accuracy
        if trial.full_accuracy is not None:
            extras += " full=%.4f" % trial.full_accuracy
        print(
            "seed=%d subset=%d/%d al=%.4f%s"
            % (
                trial.seed,
                trial.subset_unique,
                trial.subset_total,
                trial.al_accuracy,
                extras,
            )
        )
    for key in sorted(result.aggregate):
        print("%s = %.6g" % (key, result.aggregate[key]))
    print("results appended to %s" % path)
    return 0


def _read_subset_csv(path) -> SubsetState:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:1] != ["sample_id"]:
            raise ValueError("expected header sample_id[, multiplicity]")
        counts: dict[int, int] = {}
        for row in reader:
            if not row:
                continue
            sid = int(row[0])
            mult = int(row[1]) if len(row) > 1 and row[1] else 1
            if sid in counts:
                raise ValueError("duplicate sample id %d in subset file" % sid)
            counts[sid] = mult
    return SubsetState(counts)


def _cmd_analyze(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.what == "histogram":
        if not args.subset:
            raise ConfigError("analyze --what histogram needs --subset")
        hist = duplication_histogram(_read_subset_csv(args.subset))
        print("unique=%d total=%d" % (hist.unique_count, hist.total_count))
        for mult, count in hist.rows():
            print("multiplicity %d: %d" % (mult, count))
        if args.csv:
            path = out / "duplication_histogram.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["multiplicity", "count"])
                writer.writerows(hist.rows())
            print("wrote %s" % path)
        return 0

    if not args.pool or not args.checkpoints:
        raise ConfigError("analyze --what %s needs --pool and --checkpoints" % args.what)
    pool = read_pool_csv(args.pool)
    store = CheckpointStore.load(args.checkpoints)

    if args.what == "consensus":
        runs = store.run_seeds()
        run = args.run if args.run is not None else runs[0]
        epochs = store.epochs(run)
        # newest first, so a prefix of n members means the n latest snapshots
        members = [store.get(run, ep).params for ep in reversed(epochs)]
        tensor = predict_pool(members, pool)
        n_max = args.n_max if args.n_max is not None else len(members)
        report = consensus_counts(tensor, n_max)
        for n, count in enumerate(report.cumulative, start=1):
            print("all-%d-agree: %d / %d" % (n, count, report.eval_size))
        doc_path = out / "analysis_consensus.txt"
        with open(doc_path, "a") as fh:
            fh.write(build_consensus_document(report, source="run%d" % run))
        print("wrote %s" % doc_path)
        if args.csv:
            export_plot_data(read_results(doc_path), "consensus", out)
            print("wrote %s" % (out / "consensus.csv"))
        return 0

    # eval: whole pool, or selected/unselected when a subset is given
    members = [
        store.get(run, store.epochs(run)[-1]).params for run in store.run_seeds()
    ]
    rows: list[tuple[str, str, float, int]] = []
    if args.subset:
        state = _read_subset_csv(args.subset)
        sel, unsel = selected_unselected_gap(members, pool, state)
        print("selected:   n=%d accuracy=%.4f" % (sel.n_samples, sel.accuracy))
        print("unselected: n=%d accuracy=%.4f" % (unsel.n_samples, unsel.accuracy))
        for name, rep in (("selected", sel), ("unselected", unsel)):
            rows.append((name, "all", rep.accuracy, rep.n_samples))
            rows.extend(
                (name, str(cls), acc, rep.n_samples) for cls, acc in sorted(rep.per_class.items())
            )
    else:
        rep = evaluate(members, pool)
        print("pool: n=%d accuracy=%.4f" % (rep.n_samples, rep.accuracy))
        rows.append(("pool", "all", rep.accuracy, rep.n_samples))
        rows.extend(
            ("pool", str(cls), acc, rep.n_samples) for cls, acc in sorted(rep.per_class.items())
        )
    if args.csv:
        path = out / "eval.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["partition", "class", "accuracy", "n_samples"])
            for partition, cls, acc, n in rows:
                writer.writerow([partition, cls, repr(float(acc)), n])
        print("wrote %s" % path)
    return 0


def _cmd_export(args) -> int:
    documents = []
    for path in args.results:
        documents.extend(read_results(path))
    out_path = export_plot_data(documents, args.kind, args.out)
    print("wrote %s" % out_path)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; map those onto the config-error code
        code = exc.code if exc.code is not None else 0
        return 0 if code == 0 else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures keep a distinct exit code
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
