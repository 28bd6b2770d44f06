"""Experiment configs, trial orchestration and results documents.

A config is a line-oriented ``key = value`` file with dotted section
prefixes (pool.*, search.*, ensemble.*, trainer.*, experiment.*). Running
an experiment executes the configured search scheme over a list of trial
seeds, trains baseline subsets for comparison, and appends one
self-describing results document per run to a per-config results file.
Everything in a results document except the ``created`` timestamp and the
``wall_time_s`` lines is a pure function of the config.
"""

from __future__ import annotations

import csv
import hashlib
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .analysis import evaluate
from .datagen import GeneratorSpec, generate_pool, read_pool_csv
from .learner import EnsembleConfig, LabeledPool, TrainConfig
from .schemes import (
    SCHEMES,
    IterationRecord,
    SearchConfig,
    run_scheme,
    train_subset_ensemble,
)
from .state import SubsetState, derive_seed

SCHEMA_VERSION = 1
RESULTS_BANNER = "# subset-search results"

# seed roles for the per-trial derivation chain
_ROLE_POOL = 21
_ROLE_EVAL_POOL = 22
_ROLE_SEARCH = 23
_ROLE_RANDOM_IDS = 24
_ROLE_RANDOM_TRAIN = 25
_ROLE_FULL_TRAIN = 26


class ConfigError(Exception):
    """Raised for malformed or inconsistent experiment configuration."""


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` lines and blank lines are skipped."""
    data: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected key = value" % lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError("line %d: empty key" % lineno)
        if key in data:
            raise ConfigError("line %d: duplicate key %r" % (lineno, key))
        data[key] = value.strip()
    return data


def parse_config_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("cannot read config: %s" % exc) from None
    return parse_config_text(text)


class _TypedMapping:
    """Typed accessors over raw config strings; tracks consumed keys."""

    def __init__(self, data: dict[str, str]):
        self._data = dict(data)
        self._used: set[str] = set()

    def _raw(self, key: str):
        self._used.add(key)
        value = self._data.get(key)
        return None if value in (None, "") else value

    def get_str(self, key: str, default: str | None = None):
        value = self._raw(key)
        return default if value is None else value

    def get_int(self, key: str, default):
        value = self._raw(key)
        if value is None:
            return default
        try:
            return int(value)
        except ValueError:
            raise ConfigError("%s must be an integer, got %r" % (key, value)) from None

    def get_float(self, key: str, default):
        value = self._raw(key)
        if value is None:
            return default
        try:
            return float(value)
        except ValueError:
            raise ConfigError("%s must be a number, got %r" % (key, value)) from None

    def get_bool(self, key: str, default):
        value = self._raw(key)
        if value is None:
            return default
        lowered = value.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ConfigError("%s must be true or false, got %r" % (key, value))

    def get_int_list(self, key: str, default):
        value = self._raw(key)
        if value is None:
            return default
        try:
            return tuple(int(part.strip()) for part in value.split(",") if part.strip())
        except ValueError:
            raise ConfigError("%s must be a comma-separated integer list" % key) from None

    def get_float_list(self, key: str, default):
        value = self._raw(key)
        if value is None:
            return default
        try:
            return tuple(float(part.strip()) for part in value.split(",") if part.strip())
        except ValueError:
            raise ConfigError("%s must be a comma-separated number list" % key) from None

    def reject_unknown(self) -> None:
        unknown = sorted(set(self._data) - self._used)
        if unknown:
            raise ConfigError("unknown config keys: %s" % ", ".join(unknown))


@dataclass
class ExperimentConfig:
    """A fully resolved experiment: data source, search setup, trials."""

    search: SearchConfig
    generator: GeneratorSpec | None = None
    pool_file: str | None = None
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    baseline_random: bool = True
    baseline_full: bool = False
    out_dir: str = "runs"
    jobs: int = 1

    def __post_init__(self):
        if (self.generator is None) == (self.pool_file is None):
            raise ConfigError("configure either a generator or pool.file, not both")
        if not self.seeds:
            raise ConfigError("experiment.seeds must not be empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("experiment.seeds must be distinct")
        if self.jobs < 1:
            raise ConfigError("experiment.jobs must be >= 1")


def _bad_value(exc: ValueError) -> ConfigError:
    return ConfigError(str(exc))


def _generator_fields(m: _TypedMapping) -> GeneratorSpec:
    return GeneratorSpec(
        n_classes=m.get_int("pool.classes", 4),
        clusters_per_class=m.get_int("pool.clusters_per_class", 2),
        samples_per_cluster=m.get_int("pool.samples_per_cluster", 50),
        n_features=m.get_int("pool.features", 6),
        redundancy=m.get_float("pool.redundancy", 0.0),
        label_noise=m.get_float("pool.label_noise", 0.0),
        class_ratios=m.get_float_list("pool.class_ratios", None),
        cluster_std=m.get_float("pool.cluster_std", 1.0),
        center_spread=m.get_float("pool.center_spread", 4.0),
        seed=m.get_int("pool.seed", 0),
    )


def config_from_mapping(data: dict[str, str]) -> ExperimentConfig:
    """Resolve raw config strings into a validated ExperimentConfig.

    Unknown keys and malformed values raise :class:`ConfigError` so CLI
    callers can report them as configuration problems.
    """
    m = _TypedMapping(data)

    pool_file = m.get_str("pool.file")
    generator = None
    if pool_file is None:
        try:
            generator = _generator_fields(m)
        except ValueError as exc:
            raise _bad_value(exc) from None
    else:
        # consume generator keys so a file-based config may not also set them
        for key in list(data):
            if key.startswith("pool.") and key != "pool.file" and data[key]:
                raise ConfigError("pool.file excludes generator key %s" % key)

    scheme = m.get_str("search.scheme")
    function_id = m.get_str("search.function")
    target = m.get_int("search.target_size", None)
    if scheme is None or function_id is None or target is None:
        raise ConfigError("search.scheme, search.function and search.target_size are required")
    if scheme not in SCHEMES:
        raise ConfigError("unknown scheme %r" % scheme)

    try:
        ensemble = EnsembleConfig(
            mode=m.get_str("ensemble.mode", "seeds"),
            runs=m.get_int("ensemble.runs", 5),
            checkpoints_per_run=m.get_int("ensemble.checkpoints_per_run", 20),
            stride=m.get_int("ensemble.stride", 1),
        )
        trainer = TrainConfig(
            arch=m.get_str("trainer.arch", "logistic"),
            hidden=m.get_int("trainer.hidden", 16),
            learning_rate=m.get_float("trainer.learning_rate", 0.1),
            momentum=m.get_float("trainer.momentum", 0.9),
            weight_decay=m.get_float("trainer.weight_decay", 1e-4),
            batch_size=m.get_int("trainer.batch_size", 32),
            lr_decay=m.get_float("trainer.lr_decay", 0.1),
            decay_epochs=m.get_int_list("trainer.decay_epochs", ()),
            max_epochs=m.get_int("trainer.max_epochs", 50),
            patience=m.get_int("trainer.patience", 0),
            fine_tune_rate=m.get_float("trainer.fine_tune_rate", 1e-3),
            fine_tune_epochs=m.get_int("trainer.fine_tune_epochs", None),
            class_weighting=m.get_bool("trainer.class_weighting", False),
            checkpoint_window=m.get_int("trainer.checkpoint_window", 20),
            val_fraction=m.get_float("trainer.val_fraction", 0.1),
        )
        search = SearchConfig(
            scheme=scheme,
            function_id=function_id,
            target_size=target,
            ensemble=ensemble,
            trainer=trainer,
            outlier_fraction=m.get_float("search.outlier_fraction", 0.0),
            acquisition_batch=m.get_int("search.acquisition_batch", None),
            initial_size=m.get_int("search.initial_size", None),
        )
        config = ExperimentConfig(
            search=search,
            generator=generator,
            pool_file=pool_file,
            seeds=m.get_int_list("experiment.seeds", (1, 2, 3, 4, 5)),
            baseline_random=m.get_bool("experiment.baseline_random", True),
            baseline_full=m.get_bool("experiment.baseline_full", False),
            out_dir=m.get_str("experiment.out", "runs"),
            jobs=m.get_int("experiment.jobs", 1),
        )
    except ValueError as exc:
        raise _bad_value(exc) from None
    m.reject_unknown()
    return config


def config_from_file(path) -> ExperimentConfig:
    return config_from_mapping(parse_config_file(path))


def generator_from_mapping(data: dict[str, str]) -> GeneratorSpec:
    """Build just the pool generator from a config mapping.

    Ignores non-pool keys, so a full experiment config works as input.
    """
    m = _TypedMapping({k: v for k, v in data.items() if k.startswith("pool.")})
    if m.get_str("pool.file") is not None:
        raise ConfigError("pool.file points at an existing pool; nothing to generate")
    try:
        spec = _generator_fields(m)
    except ValueError as exc:
        raise _bad_value(exc) from None
    m.reject_unknown()
    return spec


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ",".join(_fmt(v) for v in value)
    if value is None:
        return ""
    return str(value)


def canonical_config_lines(config: ExperimentConfig) -> list[str]:
    """Every knob as a sorted ``key = value`` line; hash input and doc header."""
    pairs: list[tuple[str, object]] = []
    if config.pool_file is not None:
        pairs.append(("pool.file", config.pool_file))
    else:
        g = config.generator
        pairs += [
            ("pool.classes", g.n_classes),
            ("pool.clusters_per_class", g.clusters_per_class),
            ("pool.samples_per_cluster", g.samples_per_cluster),
            ("pool.features", g.n_features),
            ("pool.redundancy", g.redundancy),
            ("pool.label_noise", g.label_noise),
            ("pool.class_ratios", g.class_ratios),
            ("pool.cluster_std", g.cluster_std),
            ("pool.center_spread", g.center_spread),
            ("pool.seed", g.seed),
        ]
    s = config.search
    pairs += [
        ("search.scheme", s.scheme),
        ("search.function", s.function_id),
        ("search.target_size", s.target_size),
        ("search.outlier_fraction", s.outlier_fraction),
        ("search.acquisition_batch", s.acquisition_batch),
        ("search.initial_size", s.initial_size),
        ("ensemble.mode", s.ensemble.mode),
        ("ensemble.runs", s.ensemble.runs),
        ("ensemble.checkpoints_per_run", s.ensemble.checkpoints_per_run),
        ("ensemble.stride", s.ensemble.stride),
        ("trainer.arch", s.trainer.arch),
        ("trainer.hidden", s.trainer.hidden),
        ("trainer.learning_rate", s.trainer.learning_rate),
        ("trainer.momentum", s.trainer.momentum),
        ("trainer.weight_decay", s.trainer.weight_decay),
        ("trainer.batch_size", s.trainer.batch_size),
        ("trainer.lr_decay", s.trainer.lr_decay),
        ("trainer.decay_epochs", s.trainer.decay_epochs),
        ("trainer.max_epochs", s.trainer.max_epochs),
        ("trainer.patience", s.trainer.patience),
        ("trainer.fine_tune_rate", s.trainer.fine_tune_rate),
        ("trainer.fine_tune_epochs", s.trainer.fine_tune_epochs),
        ("trainer.class_weighting", s.trainer.class_weighting),
        ("trainer.checkpoint_window", s.trainer.checkpoint_window),
        ("trainer.val_fraction", s.trainer.val_fraction),
        ("experiment.seeds", config.seeds),
        ("experiment.baseline_random", config.baseline_random),
        ("experiment.baseline_full", config.baseline_full),
    ]
    return sorted("%s = %s" % (key, _fmt(value)) for key, value in pairs)


def config_hash(config: ExperimentConfig) -> str:
    text = "\n".join(canonical_config_lines(config))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------


@dataclass
class TrialRecord:
    """Outcome of one trial seed."""

    seed: int
    iterations: list[IterationRecord]
    subset_items: tuple[tuple[int, int], ...]
    al_accuracy: float
    random_accuracy: float | None
    full_accuracy: float | None
    wall_time_s: float

    @property
    def subset_unique(self) -> int:
        return len(self.subset_items)

    @property
    def subset_total(self) -> int:
        return sum(mult for _, mult in self.subset_items)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trials: list[TrialRecord]
    aggregate: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.aggregate:
            self.aggregate = _aggregate(self.trials)


def _aggregate(trials: list[TrialRecord]) -> dict[str, float]:
    out: dict[str, float] = {"trials": float(len(trials))}
    for name in ("al_accuracy", "random_accuracy", "full_accuracy"):
        values = [getattr(t, name) for t in trials if getattr(t, name) is not None]
        if values:
            out[name + ".mean"] = float(np.mean(values))
            out[name + ".std"] = float(np.std(values))
    randoms = [t for t in trials if t.random_accuracy is not None]
    if randoms:
        out["wins_vs_random"] = float(
            sum(t.al_accuracy >= t.random_accuracy for t in randoms)
        )
    return out


def pools_for_trial(
    config: ExperimentConfig, trial_seed: int
) -> tuple[LabeledPool, LabeledPool]:
    """The training pool and the clean evaluation pool of one trial.

    All trials share one task (the generator seed fixes the cluster
    centers); each trial redraws the samples. The evaluation pool is a
    fresh draw of the same task with redundancy and label noise switched
    off. A pool loaded from a file is shared by all trials and evaluated
    in-sample.
    """
    if config.pool_file is not None:
        pool = read_pool_csv(config.pool_file)
        return pool, pool
    g = config.generator
    pool = generate_pool(
        replace(g, sample_seed=derive_seed(g.seed, _ROLE_POOL, trial_seed))
    )
    eval_pool = generate_pool(
        replace(
            g,
            redundancy=0.0,
            label_noise=0.0,
            sample_seed=derive_seed(g.seed, _ROLE_EVAL_POOL, trial_seed),
        )
    )
    return pool, eval_pool


def run_trial(config: ExperimentConfig, trial_seed: int) -> TrialRecord:
    """Run the scheme and its baselines for one trial seed."""
    start = time.perf_counter()
    pool, eval_pool = pools_for_trial(config, trial_seed)
    search = replace(config.search, seed=derive_seed(trial_seed, _ROLE_SEARCH))
    result = run_scheme(pool, search)
    al_accuracy = evaluate(result.members, eval_pool).accuracy

    random_accuracy = None
    if config.baseline_random:
        size = min(search.target_size, pool.n_samples)
        rng = np.random.default_rng(derive_seed(trial_seed, _ROLE_RANDOM_IDS))
        ids = rng.choice(np.sort(pool.sample_ids), size=size, replace=False)
        _, members = train_subset_ensemble(
            pool,
            SubsetState.from_ids(ids),
            search.ensemble,
            search.trainer,
            derive_seed(trial_seed, _ROLE_RANDOM_TRAIN),
        )
        random_accuracy = evaluate(members, eval_pool).accuracy

    full_accuracy = None
    if config.baseline_full:
        _, members = train_subset_ensemble(
            pool,
            SubsetState.from_ids(pool.sample_ids),
            search.ensemble,
            search.trainer,
            derive_seed(trial_seed, _ROLE_FULL_TRAIN),
        )
        full_accuracy = evaluate(members, eval_pool).accuracy

    items = tuple(sorted((int(k), int(v)) for k, v in result.state.multiplicity.items()))
    return TrialRecord(
        seed=int(trial_seed),
        iterations=result.records,
        subset_items=items,
        al_accuracy=al_accuracy,
        random_accuracy=random_accuracy,
        full_accuracy=full_accuracy,
        wall_time_s=time.perf_counter() - start,
    )


def _run_trial_star(args) -> TrialRecord:
    return run_trial(*args)


def run_experiment(config: ExperimentConfig, jobs: int | None = None) -> ExperimentResult:
    """Run every trial seed, serially or across processes.

    Args:
        config: resolved experiment configuration.
        jobs: process count; defaults to ``config.jobs``. Trial results
            are deterministic either way; only wall time changes.
    """
    jobs = config.jobs if jobs is None else max(1, int(jobs))
    work = [(config, seed) for seed in config.seeds]
    if jobs == 1 or len(work) == 1:
        trials = [run_trial(*args) for args in work]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(work))) as pool:
            trials = list(pool.map(_run_trial_star, work))
    return ExperimentResult(config, trials)


# ---------------------------------------------------------------------------
# Results documents
# ---------------------------------------------------------------------------


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def build_document(result: ExperimentResult, created: str | None = None) -> str:
    """Render one results document. Only ``created`` and ``wall_time_s``
    lines vary between identical runs."""
    config = result.config
    lines = [
        RESULTS_BANNER,
        "schema_version = %d" % SCHEMA_VERSION,
        "config_hash = %s" % config_hash(config),
        "created = %s" % (created if created is not None else _utc_now()),
    ]
    lines.extend("config.%s" % line for line in canonical_config_lines(config))
    for trial in result.trials:
        lines.append("[trial seed=%d]" % trial.seed)
        lines.append("wall_time_s = %s" % repr(round(trial.wall_time_s, 3)))
        lines.append("subset_unique = %d" % trial.subset_unique)
        lines.append("subset_total = %d" % trial.subset_total)
        lines.append("subset_file = %s" % subset_filename(config, trial.seed))
        lines.append("al_accuracy = %s" % repr(trial.al_accuracy))
        if trial.random_accuracy is not None:
            lines.append("random_accuracy = %s" % repr(trial.random_accuracy))
        if trial.full_accuracy is not None:
            lines.append("full_accuracy = %s" % repr(trial.full_accuracy))
        for rec in trial.iterations:
            prefix = "iteration.%d" % rec.iteration
            lines.append("%s.unique = %d" % (prefix, rec.unique_count))
            lines.append("%s.total = %d" % (prefix, rec.total_count))
            lines.append("%s.added = %d" % (prefix, len(rec.added)))
            lines.append("%s.score_min = %s" % (prefix, repr(rec.score_min)))
            lines.append("%s.score_mean = %s" % (prefix, repr(rec.score_mean)))
            lines.append("%s.score_max = %s" % (prefix, repr(rec.score_max)))
            lines.append("%s.pool_accuracy = %s" % (prefix, repr(rec.pool_accuracy)))
            for mult, count in rec.histogram:
                lines.append("%s.hist.%d = %d" % (prefix, mult, count))
    lines.append("[aggregate]")
    for key in sorted(result.aggregate):
        lines.append("%s = %s" % (key, repr(result.aggregate[key])))
    lines.append("[end]")
    return "\n".join(lines) + "\n"


def subset_filename(config: ExperimentConfig, seed: int) -> str:
    return "subset_%s_seed%d.csv" % (config_hash(config), seed)


def results_filename(config: ExperimentConfig) -> str:
    return "results_%s.txt" % config_hash(config)


def write_results(result: ExperimentResult, out_dir) -> Path:
    """Append the run's document to the per-config results file.

    Also writes one subset table per trial (sample_id, multiplicity).
    Appending to a results file whose stored config lines differ from
    this run's raises :class:`ConfigError`.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / results_filename(result.config)
    ours = ["config.%s" % line for line in canonical_config_lines(result.config)]
    if path.exists():
        stored = [
            line
            for line in path.read_text().splitlines()
            if line.startswith("config.")
        ]
        if stored[: len(ours)] != ours:
            raise ConfigError(
                "results file %s holds a different configuration" % path.name
            )
    with open(path, "a") as fh:
        fh.write(build_document(result))
    for trial in result.trials:
        with open(out / subset_filename(result.config, trial.seed), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sample_id", "multiplicity"])
            writer.writerows(trial.subset_items)
    return path


@dataclass
class ResultsDocument:
    """One parsed document: header key/values plus named sections."""

    header: dict[str, str]
    sections: list[tuple[str, dict[str, str]]]

    def config(self) -> dict[str, str]:
        return {
            key[len("config.") :]: value
            for key, value in self.header.items()
            if key.startswith("config.")
        }

    def trials(self) -> list[tuple[int, dict[str, str]]]:
        out = []
        for name, data in self.sections:
            if name.startswith("trial seed="):
                out.append((int(name.split("=", 1)[1]), data))
        return out

    def aggregate(self) -> dict[str, str]:
        for name, data in self.sections:
            if name == "aggregate":
                return data
        return {}


def read_results(path) -> list[ResultsDocument]:
    """Parse every document appended to a results file."""
    documents: list[ResultsDocument] = []
    current: ResultsDocument | None = None
    section: dict[str, str] | None = None
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line == RESULTS_BANNER:
            current = ResultsDocument({}, [])
            documents.append(current)
            section = None
            continue
        if line.startswith("#"):
            continue
        if current is None:
            raise ValueError("results file does not start with %r" % RESULTS_BANNER)
        if line == "[end]":
            section = None
            continue
        if line.startswith("[") and line.endswith("]"):
            section = {}
            current.sections.append((line[1:-1], section))
            continue
        key, _, value = line.partition("=")
        target = current.header if section is None else section
        target[key.strip()] = value.strip()
    if not documents:
        raise ValueError("no results documents in file")
    return documents


# ---------------------------------------------------------------------------
# Plot data exports
# ---------------------------------------------------------------------------

EXPORT_KINDS = ("learning_curve", "histogram", "consensus", "scheme_comparison")


def export_plot_data(documents: list[ResultsDocument], kind: str, out_dir) -> Path:
    """Write one plot-ready CSV for the requested figure kind.

    ``learning_curve`` and ``histogram`` flatten per-iteration trial
    lines; ``consensus`` reads consensus sections produced by the analyze
    step; ``scheme_comparison`` tabulates aggregate accuracies of any
    number of documents side by side.
    """
    if kind not in EXPORT_KINDS:
        raise ValueError("unknown export kind %r" % kind)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / ("%s.csv" % kind)
    rows: list[list] = []

    if kind == "learning_curve":
        header = ["config_hash", "trial_seed", "iteration", "subset_total", "pool_accuracy"]
        for doc in documents:
            chash = doc.header.get("config_hash", "")
            for seed, data in doc.trials():
                for it in _iteration_indices(data):
                    rows.append(
                        [
                            chash,
                            seed,
                            it,
                            data["iteration.%d.total" % it],
                            data["iteration.%d.pool_accuracy" % it],
                        ]
                    )
    elif kind == "histogram":
        header = ["config_hash", "trial_seed", "iteration", "multiplicity", "count"]
        for doc in documents:
            chash = doc.header.get("config_hash", "")
            for seed, data in doc.trials():
                for key in sorted(data):
                    parts = key.split(".")
                    if len(parts) == 4 and parts[0] == "iteration" and parts[2] == "hist":
                        rows.append([chash, seed, int(parts[1]), int(parts[3]), data[key]])
        rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    elif kind == "consensus":
        header = ["source", "series", "index", "count"]
        for doc in documents:
            source = doc.header.get("config_hash", doc.header.get("source", ""))
            for name, data in doc.sections:
                if name != "consensus":
                    continue
                for key in sorted(data):
                    for series in ("cumulative", "pairwise"):
                        prefix = series + "."
                        if key.startswith(prefix):
                            rows.append([source, series, int(key[len(prefix) :]), data[key]])
        rows.sort(key=lambda r: (r[0], r[1], r[2]))
    else:
        header = [
            "config_hash",
            "scheme",
            "function",
            "target_size",
            "al_accuracy_mean",
            "al_accuracy_std",
            "random_accuracy_mean",
            "random_accuracy_std",
            "full_accuracy_mean",
            "full_accuracy_std",
        ]
        for doc in documents:
            cfg = doc.config()
            agg = doc.aggregate()
            rows.append(
                [
                    doc.header.get("config_hash", ""),
                    cfg.get("search.scheme", ""),
                    cfg.get("search.function", ""),
                    cfg.get("search.target_size", ""),
                    agg.get("al_accuracy.mean", ""),
                    agg.get("al_accuracy.std", ""),
                    agg.get("random_accuracy.mean", ""),
                    agg.get("random_accuracy.std", ""),
                    agg.get("full_accuracy.mean", ""),
                    agg.get("full_accuracy.std", ""),
                ]
            )

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _iteration_indices(trial_data: dict[str, str]) -> list[int]:
    found = set()
    for key in trial_data:
        parts = key.split(".")
        if len(parts) >= 3 and parts[0] == "iteration" and parts[2] == "total":
            found.add(int(parts[1]))
    return sorted(found)


def build_consensus_document(report, source: str, created: str | None = None) -> str:
    """Small analysis document holding one consensus report."""
    lines = [
        RESULTS_BANNER,
        "schema_version = %d" % SCHEMA_VERSION,
        "source = %s" % source,
        "created = %s" % (created if created is not None else _utc_now()),
        "[consensus]",
        "eval_size = %d" % report.eval_size,
    ]
    lines.extend(
        "cumulative.%d = %d" % (n + 1, count) for n, count in enumerate(report.cumulative)
    )
    lines.extend(
        "pairwise.%d = %d" % (i + 1, count) for i, count in enumerate(report.pairwise)
    )
    lines.append("[end]")
    return "\n".join(lines) + "\n"
