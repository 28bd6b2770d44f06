"""Subset search schemes driven by ensemble acquisition scores.

Four ways to pick a training subset of size ``target_size`` out of a
labeled pool:

* ``pretrain``: score with an ensemble trained on the full pool, select
  once, fine-tune the pretrained weights on the subset.
* ``compress``: same selection, but the subset model trains from scratch.
* ``build_up``: start from a small random subset and let a subset-trained
  ensemble grow it through a doubling schedule.
* ``automatic_duplication``: like build-up, but every iteration scores the
  whole pool and re-selected samples gain multiplicity instead of being
  skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .acquisition import FUNCTION_IDS, AcquisitionScores, score_pool
from .learner import (
    CheckpointStore,
    EnsembleConfig,
    LabeledPool,
    ModelParams,
    TrainConfig,
    build_ensemble,
    fine_tune,
    predict_pool,
    train,
)
from .state import SubsetState, derive_seed

SCHEMES = ("pretrain", "compress", "build_up", "automatic_duplication")

# role codes mixed into derived seeds; keeps the rng streams of training,
# initialization, scoring and fine-tuning disjoint
_ROLE_TRAIN = 1
_ROLE_INIT = 2
_ROLE_SCORE = 3
_ROLE_TUNE = 4


def select_top_k(scores: AcquisitionScores, k: int, excluded=frozenset()) -> np.ndarray:
    """The k highest-scoring sample ids outside ``excluded``.

    Ties break toward the lower sample id. Returned in rank order.
    """
    k = int(k)
    if k < 0:
        raise ValueError("k must be non-negative")
    ids = scores.sample_ids
    vals = scores.scores
    if excluded:
        keep = ~np.isin(ids, np.fromiter((int(i) for i in excluded), dtype=np.uint64))
        ids, vals = ids[keep], vals[keep]
    if k > len(ids):
        raise ValueError("k=%d exceeds the %d available candidates" % (k, len(ids)))
    order = np.lexsort((ids, -vals))
    return ids[order[:k]].copy()


def outlier_window_select(
    scores: AcquisitionScores, k: int, fraction: float, excluded=frozenset()
) -> np.ndarray:
    """Skip the very highest scores, then take the next k.

    The top ``floor(fraction * N)`` candidates (N counted after exclusion)
    are treated as likely outliers and passed over; selection starts just
    below them. ``fraction`` 0 reduces to plain top-k.
    """
    k = int(k)
    if k < 0:
        raise ValueError("k must be non-negative")
    if not 0.0 <= fraction < 1.0:
        raise ValueError("outlier fraction must be in [0, 1)")
    ids = scores.sample_ids
    vals = scores.scores
    if excluded:
        keep = ~np.isin(ids, np.fromiter((int(i) for i in excluded), dtype=np.uint64))
        ids, vals = ids[keep], vals[keep]
    skip = int(fraction * len(ids))
    if skip + k > len(ids):
        raise ValueError(
            "window [%d, %d) exceeds the %d available candidates" % (skip, skip + k, len(ids))
        )
    order = np.lexsort((ids, -vals))
    return ids[order[skip : skip + k]].copy()


def growth_schedule(target_size: int) -> list[int]:
    """Doubling subset sizes ending at the target: [t/8, t/4, t/2, t]."""
    target_size = int(target_size)
    if target_size < 8:
        raise ValueError("growth schedule needs a target of at least 8")
    return [target_size // 8, target_size // 4, target_size // 2, target_size]


@dataclass
class SearchConfig:
    """Everything a search scheme needs besides the pool itself."""

    scheme: str
    function_id: str
    target_size: int
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    trainer: TrainConfig = field(default_factory=TrainConfig)
    outlier_fraction: float = 0.0
    acquisition_batch: int | None = None
    initial_size: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError("unknown scheme %r" % self.scheme)
        if self.function_id not in FUNCTION_IDS:
            raise ValueError("unknown acquisition function %r" % self.function_id)
        if self.target_size < 1:
            raise ValueError("target size must be positive")
        if not 0.0 <= self.outlier_fraction < 1.0:
            raise ValueError("outlier fraction must be in [0, 1)")
        if self.scheme == "automatic_duplication":
            if self.acquisition_batch is None or self.acquisition_batch < 1:
                raise ValueError("automatic duplication needs a positive acquisition_batch")
        if self.initial_size is not None and self.initial_size < 1:
            raise ValueError("initial size must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class IterationRecord:
    """What one search iteration did: sizes, additions, score spread."""

    iteration: int
    unique_count: int
    total_count: int
    added: tuple[int, ...]
    score_min: float
    score_mean: float
    score_max: float
    pool_accuracy: float
    histogram: tuple[tuple[int, int], ...]


@dataclass
class SubsetResult:
    """Final state of a search run plus its per-iteration trail."""

    scheme: str
    function_id: str
    records: list[IterationRecord]
    state: SubsetState
    members: list[ModelParams]
    store: CheckpointStore


def _ensemble_trainer(config: SearchConfig) -> TrainConfig:
    # the rolling window must span what the ensemble mode will read back
    needed = config.ensemble.epochs_needed
    if config.trainer.checkpoint_window >= needed:
        return config.trainer
    return replace(config.trainer, checkpoint_window=needed)


def _train_store(
    pool: LabeledPool, subset: SubsetState, config: SearchConfig, iteration: int
) -> CheckpointStore:
    store = CheckpointStore()
    trainer = _ensemble_trainer(config)
    for r in range(config.ensemble.runs_needed):
        run_seed = derive_seed(config.seed, _ROLE_TRAIN, iteration, r)
        store.add_run(train(pool, subset, trainer, seed=run_seed).checkpoints)
    return store


def train_subset_ensemble(
    pool: LabeledPool,
    subset: SubsetState,
    ensemble: EnsembleConfig,
    trainer: TrainConfig,
    seed: int,
) -> tuple[CheckpointStore, list[ModelParams]]:
    """Train the runs an ensemble mode needs and assemble its members.

    The trainer's checkpoint window is widened if the mode reads back a
    longer epoch span than the window would keep.
    """
    if trainer.checkpoint_window < ensemble.epochs_needed:
        trainer = replace(trainer, checkpoint_window=ensemble.epochs_needed)
    store = CheckpointStore()
    for r in range(ensemble.runs_needed):
        run_seed = derive_seed(seed, _ROLE_TRAIN, 0, r)
        store.add_run(train(pool, subset, trainer, seed=run_seed).checkpoints)
    return store, build_ensemble(store, ensemble)


def _pool_scores(members, pool: LabeledPool, config: SearchConfig, iteration: int) -> AcquisitionScores:
    tensor = predict_pool(members, pool)
    labels = pool.labels if config.function_id == "error_count" else None
    seed = None
    if config.function_id == "random":
        seed = derive_seed(config.seed, _ROLE_SCORE, iteration)
    return score_pool(tensor, config.function_id, labels=labels, seed=seed)


def _select(scores: AcquisitionScores, k: int, config: SearchConfig, excluded=frozenset()) -> np.ndarray:
    if config.outlier_fraction > 0.0:
        return outlier_window_select(scores, k, config.outlier_fraction, excluded)
    return select_top_k(scores, k, excluded)


def _pool_accuracy(members, pool: LabeledPool) -> float:
    probs = predict_pool(members, pool).data.astype(np.float64).mean(axis=1)
    return float(np.mean(np.argmax(probs, axis=1) == pool.labels))


def _histogram(state: SubsetState) -> tuple[tuple[int, int], ...]:
    counts: dict[int, int] = {}
    for mult in state.multiplicity.values():
        counts[mult] = counts.get(mult, 0) + 1
    return tuple(sorted(counts.items()))


def _record(
    iteration: int,
    state: SubsetState,
    scores: AcquisitionScores | None,
    excluded,
    added,
    accuracy: float,
) -> IterationRecord:
    if scores is None:
        lo = mean = hi = float("nan")
    else:
        vals = scores.scores
        if excluded:
            keep = ~np.isin(
                scores.sample_ids, np.fromiter((int(i) for i in excluded), dtype=np.uint64)
            )
            vals = vals[keep]
        lo, mean, hi = float(vals.min()), float(vals.mean()), float(vals.max())
    return IterationRecord(
        iteration,
        state.unique_count,
        state.total_count,
        tuple(int(i) for i in added),
        lo,
        mean,
        hi,
        accuracy,
        _histogram(state),
    )


def _random_initial_ids(pool: LabeledPool, size: int, seed: int) -> np.ndarray:
    if size > pool.n_samples:
        raise ValueError("initial size exceeds the pool")
    rng = np.random.default_rng(seed)
    return rng.choice(np.sort(pool.sample_ids), size=size, replace=False)


def _acquire_once(pool: LabeledPool, config: SearchConfig):
    """Full-pool ensemble, its scores, and the one-shot selection."""
    if config.target_size > pool.n_samples:
        raise ValueError("target size exceeds the pool")
    full = SubsetState.from_ids(pool.sample_ids)
    store = _train_store(pool, full, config, iteration=0)
    members = build_ensemble(store, config.ensemble)
    scores = _pool_scores(members, pool, config, iteration=0)
    chosen = _select(scores, config.target_size, config)
    return store, scores, chosen


def run_pretrain(pool: LabeledPool, config: SearchConfig) -> SubsetResult:
    """Select once with a full-pool ensemble, then fine-tune it on the subset."""
    store, scores, chosen = _acquire_once(pool, config)
    state = SubsetState.from_ids(chosen)
    trainer = _ensemble_trainer(config)
    sub_store = CheckpointStore()
    for r, run in enumerate(store.run_seeds()):
        source = store.get(run, store.epochs(run)[-1]).params
        tune_seed = derive_seed(config.seed, _ROLE_TUNE, 0, r)
        sub_store.add_run(fine_tune(pool, state, source, trainer, seed=tune_seed).checkpoints)
    members = build_ensemble(sub_store, config.ensemble)
    rec = _record(0, state, scores, frozenset(), chosen, _pool_accuracy(members, pool))
    return SubsetResult(config.scheme, config.function_id, [rec], state, members, sub_store)


def run_compress(pool: LabeledPool, config: SearchConfig) -> SubsetResult:
    """Select once with a full-pool ensemble, then train from scratch on the subset."""
    _, scores, chosen = _acquire_once(pool, config)
    state = SubsetState.from_ids(chosen)
    sub_store = _train_store(pool, state, config, iteration=1)
    members = build_ensemble(sub_store, config.ensemble)
    rec = _record(0, state, scores, frozenset(), chosen, _pool_accuracy(members, pool))
    return SubsetResult(config.scheme, config.function_id, [rec], state, members, sub_store)


def run_build_up(pool: LabeledPool, config: SearchConfig) -> SubsetResult:
    """Grow a subset through the doubling schedule.

    Starts from a random subset of an eighth of the target, trains an
    ensemble on it, and each iteration moves the highest-scoring unseen
    samples over until the schedule tops out at the target. The ensemble
    retrained after each growth step scores the next one.
    """
    if config.target_size > pool.n_samples:
        raise ValueError("target size exceeds the pool")
    sizes = growth_schedule(config.target_size)
    init = _random_initial_ids(pool, sizes[0], derive_seed(config.seed, _ROLE_INIT))
    state = SubsetState.from_ids(init)
    store = _train_store(pool, state, config, iteration=0)
    members = build_ensemble(store, config.ensemble)
    records = [_record(0, state, None, frozenset(), init, _pool_accuracy(members, pool))]

    for iteration, size in enumerate(sizes[1:], start=1):
        scores = _pool_scores(members, pool, config, iteration)
        excluded = {int(i) for i in state.ids()}
        chosen = _select(scores, size - state.unique_count, config, excluded)
        state = state.with_new_ids(chosen)
        store = _train_store(pool, state, config, iteration)
        members = build_ensemble(store, config.ensemble)
        records.append(
            _record(iteration, state, scores, excluded, chosen, _pool_accuracy(members, pool))
        )
    return SubsetResult(config.scheme, config.function_id, records, state, members, store)


def run_automatic_duplication(pool: LabeledPool, config: SearchConfig) -> SubsetResult:
    """Grow a training multiset; re-selected samples gain multiplicity.

    Every iteration scores the entire pool, including samples already in
    the subset. The top ``acquisition_batch`` ids each receive one more
    occurrence (the final batch shrinks to land exactly on the target
    total count), and the ensemble retrains on the enlarged multiset.
    """
    batch = int(config.acquisition_batch or 0)
    initial = config.initial_size
    if initial is None:
        initial = max(1, config.target_size // 8)
    if initial > config.target_size:
        raise ValueError("initial size exceeds the target")
    init = _random_initial_ids(pool, initial, derive_seed(config.seed, _ROLE_INIT))
    state = SubsetState.from_ids(init)
    store = _train_store(pool, state, config, iteration=0)
    members = build_ensemble(store, config.ensemble)
    records = [_record(0, state, None, frozenset(), init, _pool_accuracy(members, pool))]

    iteration = 0
    while state.total_count < config.target_size:
        iteration += 1
        k = min(batch, config.target_size - state.total_count)
        scores = _pool_scores(members, pool, config, iteration)
        chosen = _select(scores, k, config)
        state = state.with_added_copies(chosen)
        store = _train_store(pool, state, config, iteration)
        members = build_ensemble(store, config.ensemble)
        records.append(
            _record(iteration, state, scores, frozenset(), chosen, _pool_accuracy(members, pool))
        )
    return SubsetResult(config.scheme, config.function_id, records, state, members, store)


_RUNNERS = {
    "pretrain": run_pretrain,
    "compress": run_compress,
    "build_up": run_build_up,
    "automatic_duplication": run_automatic_duplication,
}


def run_scheme(pool: LabeledPool, config: SearchConfig) -> SubsetResult:
    """Dispatch to the runner named by ``config.scheme``."""
    return _RUNNERS[config.scheme](pool, config)
