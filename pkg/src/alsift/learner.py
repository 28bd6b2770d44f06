"""Deterministic SGD training of small classifiers and checkpoint ensembles.

Models are multinomial logistic regression or a one-hidden-layer ReLU
network, trained in float64 with momentum SGD, weight decay on weight
matrices, and optional inverse-frequency class weighting. Each run keeps a
rolling window of end-of-epoch checkpoints; ensembles are assembled from
stored checkpoints across runs, across epochs, or both.
"""

from __future__ import annotations

import csv
import math
import re
import struct
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .acquisition import PredictionTensor
from .state import SubsetState, subset_hash

ARCHITECTURES = ("logistic", "mlp")
ENSEMBLE_MODES = ("single", "seeds", "checkpoints", "combined")

_MASK64 = (1 << 64) - 1


def _mix64(value: int) -> int:
    """splitmix64 finalizer; stable scrambling of sample ids."""
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass
class LabeledPool:
    """Feature matrix, labels and stable sample ids for a labeled pool."""

    features: np.ndarray
    labels: np.ndarray
    sample_ids: np.ndarray
    n_classes: int
    _row_of: dict[int, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        self.sample_ids = np.ascontiguousarray(self.sample_ids, dtype=np.uint64)
        self.n_classes = int(self.n_classes)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D (samples, features) array")
        n = self.features.shape[0]
        if self.labels.shape != (n,) or self.sample_ids.shape != (n,):
            raise ValueError("labels and sample_ids must match the sample count")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features must be finite")
        if self.n_classes < 2:
            raise ValueError("need at least two classes")
        if n and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise ValueError("labels out of range [0, %d)" % self.n_classes)
        self._row_of = {int(sid): row for row, sid in enumerate(self.sample_ids)}
        if len(self._row_of) != n:
            raise ValueError("sample ids must be unique")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def rows_for(self, ids) -> np.ndarray:
        """Row indices for the given sample ids, in the given order."""
        try:
            return np.asarray([self._row_of[int(sid)] for sid in ids], dtype=np.int64)
        except KeyError as exc:
            raise KeyError("unknown sample id %s" % exc.args[0]) from None


@dataclass
class ModelParams:
    """Weights of one classifier.

    ``tensors`` is (W, b) for logistic regression and (W1, b1, W2, b2)
    for the one-hidden-layer network. All tensors are float64.
    """

    arch: str
    n_features: int
    n_classes: int
    hidden: int
    tensors: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.arch not in ARCHITECTURES:
            raise ValueError("unknown architecture %r" % self.arch)
        self.tensors = tuple(np.asarray(t, dtype=np.float64) for t in self.tensors)
        d, k, h = self.n_features, self.n_classes, self.hidden
        if self.arch == "logistic":
            expected = [(d, k), (k,)]
        else:
            if h < 1:
                raise ValueError("mlp needs a positive hidden width")
            expected = [(d, h), (h,), (h, k), (k,)]
        got = [t.shape for t in self.tensors]
        if got != expected:
            raise ValueError("tensor shapes %s do not match %s" % (got, expected))

    def copy(self) -> "ModelParams":
        return ModelParams(
            self.arch,
            self.n_features,
            self.n_classes,
            self.hidden,
            tuple(t.copy() for t in self.tensors),
        )

    def weight_matrix_flags(self) -> tuple[bool, ...]:
        """True for tensors that are weight matrices (decayed), False for biases."""
        return tuple(t.ndim == 2 for t in self.tensors)


def init_params(
    arch: str, n_features: int, n_classes: int, hidden: int, rng: np.random.Generator
) -> ModelParams:
    """Gaussian weights scaled by 1/sqrt(fan-in); zero biases."""
    if arch == "logistic":
        w = rng.normal(0.0, 1.0 / math.sqrt(n_features), (n_features, n_classes))
        tensors = (w, np.zeros(n_classes))
    elif arch == "mlp":
        w1 = rng.normal(0.0, 1.0 / math.sqrt(n_features), (n_features, hidden))
        w2 = rng.normal(0.0, 1.0 / math.sqrt(hidden), (hidden, n_classes))
        tensors = (w1, np.zeros(hidden), w2, np.zeros(n_classes))
    else:
        raise ValueError("unknown architecture %r" % arch)
    return ModelParams(arch, n_features, n_classes, hidden if arch == "mlp" else 0, tensors)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _forward(params: ModelParams, features: np.ndarray):
    if params.arch == "logistic":
        w, b = params.tensors
        return features @ w + b, None
    w1, b1, w2, b2 = params.tensors
    hidden = np.maximum(features @ w1 + b1, 0.0)
    return hidden @ w2 + b2, hidden


def predict_proba(params: ModelParams, features: np.ndarray) -> np.ndarray:
    """Class probabilities for one feature vector or a (N, D) batch."""
    features = np.asarray(features, dtype=np.float64)
    single = features.ndim == 1
    if single:
        features = features[None, :]
    if features.shape[1] != params.n_features:
        raise ValueError(
            "feature width %d does not match model width %d"
            % (features.shape[1], params.n_features)
        )
    probs = _softmax(_forward(params, features)[0])
    return probs[0] if single else probs


def inverse_frequency_weights(labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Per-class weights total / (K * count_k); uniform counts give all ones.

    Classes absent from ``labels`` get weight 0, which is never consulted
    because no sample carries them.
    """
    labels = np.asarray(labels, dtype=np.int64)
    counts = np.bincount(labels, minlength=n_classes).astype(np.float64)
    weights = np.zeros(n_classes)
    present = counts > 0
    weights[present] = len(labels) / (n_classes * counts[present])
    return weights


def loss_and_gradients(
    params: ModelParams,
    features: np.ndarray,
    labels: np.ndarray,
    class_weights: np.ndarray | None = None,
    weight_decay: float = 0.0,
):
    """Regularized cross-entropy and gradients for every parameter tensor.

    The objective is mean(w_y * CE) + (wd / 2) * sum of squared weight
    matrix entries; biases are not decayed. Returns ``(loss, grads)`` with
    ``grads`` ordered like ``params.tensors``.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = features.shape[0]
    if n == 0:
        raise ValueError("empty batch")
    logits, hidden = _forward(params, features)
    probs = _softmax(logits)
    rows = np.arange(n)
    if class_weights is None:
        sample_w = np.ones(n)
    else:
        sample_w = np.asarray(class_weights, dtype=np.float64)[labels]
    log_probs = np.log(np.maximum(probs[rows, labels], 1e-300))
    loss = float(-(sample_w * log_probs).mean())

    dlogits = probs.copy()
    dlogits[rows, labels] -= 1.0
    dlogits *= sample_w[:, None] / n

    if params.arch == "logistic":
        w, _ = params.tensors
        grads = [features.T @ dlogits, dlogits.sum(axis=0)]
        if weight_decay:
            loss += 0.5 * weight_decay * float((w * w).sum())
            grads[0] += weight_decay * w
    else:
        w1, _, w2, _ = params.tensors
        g_w2 = hidden.T @ dlogits
        g_b2 = dlogits.sum(axis=0)
        dhidden = dlogits @ w2.T
        dhidden[hidden <= 0.0] = 0.0
        g_w1 = features.T @ dhidden
        g_b1 = dhidden.sum(axis=0)
        grads = [g_w1, g_b1, g_w2, g_b2]
        if weight_decay:
            loss += 0.5 * weight_decay * float((w1 * w1).sum() + (w2 * w2).sum())
            grads[0] += weight_decay * w1
            grads[2] += weight_decay * w2
    return loss, tuple(grads)


@dataclass
class TrainConfig:
    """Hyperparameters for one SGD run."""

    arch: str = "logistic"
    hidden: int = 16
    learning_rate: float = 0.1
    momentum: float = 0.9
    weight_decay: float = 1e-4
    batch_size: int = 32
    lr_decay: float = 0.1
    decay_epochs: tuple[int, ...] = ()
    max_epochs: int = 50
    patience: int = 0
    fine_tune_rate: float = 1e-3
    fine_tune_epochs: int | None = None
    class_weighting: bool = False
    checkpoint_window: int = 20
    val_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.arch not in ARCHITECTURES:
            raise ValueError("unknown architecture %r" % self.arch)
        if self.learning_rate <= 0.0:
            raise ValueError("learning rate must be positive")
        if self.fine_tune_rate < 0.0:
            raise ValueError("fine-tune rate must be non-negative")
        if not 0.0 < self.lr_decay <= 1.0:
            raise ValueError("lr decay factor must be in (0, 1]")
        if self.momentum < 0.0 or self.momentum >= 1.0:
            raise ValueError("momentum must be in [0, 1)")
        if self.weight_decay < 0.0:
            raise ValueError("weight decay must be non-negative")
        if self.batch_size < 1 or self.max_epochs < 0 or self.patience < 0:
            raise ValueError("batch size, epochs and patience must be non-negative")
        if self.fine_tune_epochs is not None and self.fine_tune_epochs < 0:
            raise ValueError("fine-tune epochs must be non-negative")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("validation fraction must be in [0, 1)")
        if self.checkpoint_window < 1:
            raise ValueError("checkpoint window must be >= 1")
        self.decay_epochs = tuple(int(e) for e in self.decay_epochs)


@dataclass
class Checkpoint:
    """One end-of-epoch snapshot of a training run."""

    params: ModelParams
    run_seed: int
    epoch: int
    subset_digest: str = ""
    val_accuracy: float = float("nan")

    def __post_init__(self):
        self.run_seed = int(self.run_seed)
        self.epoch = int(self.epoch)
        if self.run_seed < 0:
            raise ValueError("run seed must be non-negative")
        if self.epoch < 0:
            raise ValueError("epoch must be non-negative")


@dataclass
class TrainResult:
    checkpoints: list[Checkpoint]
    train_loss: list[float]
    val_accuracy: list[float]

    @property
    def final_params(self) -> ModelParams:
        return self.checkpoints[-1].params


def _validation_split(ids: list[int], fraction: float) -> tuple[list[int], list[int]]:
    """Id-stable split: ranks ids by a hash and holds out the top fraction."""
    ids = sorted(ids)
    n_val = int(len(ids) * fraction)
    if n_val == 0:
        return ids, []
    hashes = np.asarray([_mix64(i) for i in ids], dtype=np.uint64)
    order = np.lexsort((np.asarray(ids, dtype=np.uint64), hashes))
    val = sorted(int(ids[i]) for i in order[len(ids) - n_val :])
    train = sorted(set(ids) - set(val))
    return train, val


def _accuracy(params: ModelParams, features: np.ndarray, labels: np.ndarray) -> float:
    probs = predict_proba(params, features)
    return float(np.mean(np.argmax(probs, axis=1) == labels))


def _run_sgd(
    pool: LabeledPool,
    subset: SubsetState,
    config: TrainConfig,
    seed: int,
    start: ModelParams | None,
    learning_rate: float,
    max_epochs: int,
) -> TrainResult:
    if subset.total_count == 0:
        raise ValueError("empty training subset")
    train_ids, val_ids = _validation_split(
        [int(s) for s in subset.ids()], config.val_fraction
    )
    expanded = [sid for sid in train_ids for _ in range(subset.multiplicity[sid])]
    rows = pool.rows_for(expanded)
    features = pool.features[rows]
    labels = pool.labels[rows]
    if val_ids:
        val_rows = pool.rows_for(val_ids)
        val_features, val_labels = pool.features[val_rows], pool.labels[val_rows]
    else:
        val_features, val_labels = features, labels

    class_weights = None
    if config.class_weighting:
        class_weights = inverse_frequency_weights(labels, pool.n_classes)

    rng = np.random.default_rng(seed)
    if start is None:
        params = init_params(config.arch, pool.n_features, pool.n_classes, config.hidden, rng)
    else:
        if start.n_features != pool.n_features or start.n_classes != pool.n_classes:
            raise ValueError("model shape does not match the pool")
        params = start.copy()
    velocity = [np.zeros_like(t) for t in params.tensors]

    digest = subset_hash(subset)
    checkpoints: deque[Checkpoint] = deque(maxlen=config.checkpoint_window)
    train_losses: list[float] = []
    val_accs: list[float] = []
    n_rows = len(rows)
    lr = learning_rate
    decay_at = set(config.decay_epochs)
    best_val = -np.inf
    stale = 0

    if max_epochs == 0:
        # nothing to optimize; snapshot the starting point
        acc = _accuracy(params, val_features, val_labels)
        checkpoints.append(Checkpoint(params.copy(), seed, 0, digest, acc))
        return TrainResult(list(checkpoints), [], [acc])

    for epoch in range(1, max_epochs + 1):
        if epoch in decay_at:
            lr *= config.lr_decay
        perm = rng.permutation(n_rows)
        for lo in range(0, n_rows, config.batch_size):
            batch = perm[lo : lo + config.batch_size]
            _, grads = loss_and_gradients(
                params, features[batch], labels[batch], class_weights, config.weight_decay
            )
            for i, grad in enumerate(grads):
                velocity[i] = config.momentum * velocity[i] + grad
                params.tensors[i][...] -= lr * velocity[i]
        epoch_loss, _ = loss_and_gradients(
            params, features, labels, class_weights, config.weight_decay
        )
        if not math.isfinite(epoch_loss):
            raise RuntimeError(
                "non-finite training loss at epoch %d (lr=%g); lower the learning rate"
                % (epoch, lr)
            )
        acc = _accuracy(params, val_features, val_labels)
        train_losses.append(epoch_loss)
        val_accs.append(acc)
        checkpoints.append(Checkpoint(params.copy(), seed, epoch, digest, acc))
        if acc > best_val:
            best_val = acc
            stale = 0
        else:
            stale += 1
        if config.patience > 0 and stale >= config.patience:
            break

    return TrainResult(list(checkpoints), train_losses, val_accs)


def train(
    pool: LabeledPool,
    subset: SubsetState,
    config: TrainConfig,
    seed: int | None = None,
) -> TrainResult:
    """Train a fresh model on a subset of the pool.

    Each sample appears in every epoch as many times as its multiplicity.
    A held-out validation part (``config.val_fraction`` of the unique ids,
    chosen by an id-stable hash) drives early stopping when
    ``config.patience`` > 0. The rolling checkpoint window keeps the last
    ``config.checkpoint_window`` end-of-epoch snapshots.

    Args:
        pool: the labeled pool the subset indexes into.
        subset: training multiset of sample ids.
        config: hyperparameters.
        seed: run seed; defaults to ``config.seed``. Controls both the
            weight initialization and the per-epoch shuffles.

    Returns:
        TrainResult with checkpoints plus per-epoch loss and accuracy.
    """
    run_seed = config.seed if seed is None else int(seed)
    return _run_sgd(pool, subset, config, run_seed, None, config.learning_rate, config.max_epochs)


def fine_tune(
    pool: LabeledPool,
    subset: SubsetState,
    params: ModelParams,
    config: TrainConfig,
    seed: int | None = None,
) -> TrainResult:
    """Continue training existing weights on a subset at the fine-tune rate.

    With ``config.fine_tune_epochs`` (or ``config.max_epochs``) equal to 0,
    or a fine-tune rate of 0, the input weights come back unchanged as an
    epoch-0 checkpoint.
    """
    run_seed = config.seed if seed is None else int(seed)
    epochs = config.fine_tune_epochs
    if epochs is None:
        epochs = config.max_epochs
    return _run_sgd(pool, subset, config, run_seed, params, config.fine_tune_rate, epochs)


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------


@dataclass
class EnsembleConfig:
    """How to assemble ensemble members from stored checkpoints.

    Modes: ``single`` (one checkpoint), ``seeds`` (one per run),
    ``checkpoints`` (several epochs of one run), ``combined`` (both axes).
    """

    mode: str = "seeds"
    runs: int = 5
    checkpoints_per_run: int = 20
    stride: int = 1
    run_seed: int | None = None

    def __post_init__(self):
        if self.mode not in ENSEMBLE_MODES:
            raise ValueError("unknown ensemble mode %r" % self.mode)
        if self.runs < 1 or self.checkpoints_per_run < 1 or self.stride < 1:
            raise ValueError("runs, checkpoints per run and stride must be >= 1")

    @property
    def member_count(self) -> int:
        if self.mode == "single":
            return 1
        if self.mode == "seeds":
            return self.runs
        if self.mode == "checkpoints":
            return self.checkpoints_per_run
        return self.runs * self.checkpoints_per_run

    @property
    def runs_needed(self) -> int:
        """Number of independent training runs the mode consumes."""
        if self.mode in ("single", "checkpoints"):
            return 1
        return self.runs

    @property
    def epochs_needed(self) -> int:
        """Stored-epoch span the mode reads from each run."""
        if self.mode in ("single", "seeds"):
            return 1
        return (self.checkpoints_per_run - 1) * self.stride + 1


class CheckpointStore:
    """Checkpoints indexed by (run seed, epoch)."""

    def __init__(self):
        self._items: dict[tuple[int, int], Checkpoint] = {}

    def __len__(self) -> int:
        return len(self._items)

    def add(self, checkpoint: Checkpoint) -> None:
        key = (checkpoint.run_seed, checkpoint.epoch)
        if key in self._items:
            raise ValueError("checkpoint for run %d epoch %d already stored" % key)
        self._items[key] = checkpoint

    def add_run(self, checkpoints) -> None:
        for ckpt in checkpoints:
            self.add(ckpt)

    def run_seeds(self) -> list[int]:
        return sorted({run for run, _ in self._items})

    def epochs(self, run_seed: int) -> list[int]:
        eps = sorted(ep for run, ep in self._items if run == int(run_seed))
        if not eps:
            raise KeyError("no checkpoints stored for run %d" % run_seed)
        return eps

    def get(self, run_seed: int, epoch: int) -> Checkpoint:
        try:
            return self._items[(int(run_seed), int(epoch))]
        except KeyError:
            raise KeyError("no checkpoint for run %d epoch %d" % (run_seed, epoch)) from None

    def save(self, dir_path) -> None:
        """Write every checkpoint plus a metadata table to a directory."""
        out = Path(dir_path)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "store_meta.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["run_seed", "epoch", "val_accuracy", "subset_digest"])
            for run, epoch in sorted(self._items):
                ckpt = self._items[(run, epoch)]
                writer.writerow([run, epoch, repr(ckpt.val_accuracy), ckpt.subset_digest])
                write_checkpoint(out / checkpoint_filename(run, epoch), ckpt)

    @classmethod
    def load(cls, dir_path) -> "CheckpointStore":
        src = Path(dir_path)
        paths = sorted(src.glob("*.alck"))
        if not paths:
            raise FileNotFoundError("no checkpoint files under %s" % src)
        meta: dict[tuple[int, int], tuple[float, str]] = {}
        meta_path = src / "store_meta.csv"
        if meta_path.exists():
            with open(meta_path, newline="") as fh:
                for row in csv.DictReader(fh):
                    key = (int(row["run_seed"]), int(row["epoch"]))
                    meta[key] = (float(row["val_accuracy"]), row["subset_digest"])
        store = cls()
        for path in paths:
            ckpt = read_checkpoint(path)
            extra = meta.get((ckpt.run_seed, ckpt.epoch))
            if extra is not None:
                ckpt.val_accuracy, ckpt.subset_digest = extra
            store.add(ckpt)
        return store


def _best_checkpoint(store: CheckpointStore, run: int) -> Checkpoint:
    epochs = store.epochs(run)
    best = None
    for epoch in epochs:
        ckpt = store.get(run, epoch)
        if math.isnan(ckpt.val_accuracy):
            continue
        if best is None or ckpt.val_accuracy > best.val_accuracy:
            best = ckpt
    # runs without validation metrics fall back to the newest snapshot
    return best if best is not None else store.get(run, epochs[-1])


def _strided_tail(store: CheckpointStore, run: int, count: int, stride: int) -> list[Checkpoint]:
    epochs = store.epochs(run)
    picks = [len(epochs) - 1 - stride * i for i in range(count)]
    if picks[-1] < 0:
        raise ValueError(
            "run %d stores %d checkpoints; %d at stride %d requested"
            % (run, len(epochs), count, stride)
        )
    return [store.get(run, epochs[i]) for i in reversed(picks)]


def build_ensemble(store: CheckpointStore, config: EnsembleConfig) -> list[ModelParams]:
    """Pick ensemble members out of a checkpoint store.

    ``single``: newest checkpoint of one run. ``seeds``: per run, the
    checkpoint with the best validation accuracy (newest when no metrics
    are stored). ``checkpoints``: the newest ``checkpoints_per_run``
    snapshots of one run, ``stride`` epochs apart. ``combined``: the
    checkpoint selection applied to each of ``runs`` runs. Members come
    back ordered by (run seed, epoch).
    """
    runs = store.run_seeds()
    if not runs:
        raise ValueError("empty checkpoint store")

    def pick_run() -> int:
        if config.run_seed is not None:
            if config.run_seed not in runs:
                raise ValueError("run %d not present in the store" % config.run_seed)
            return config.run_seed
        return runs[0]

    if config.mode == "single":
        run = pick_run()
        return [store.get(run, store.epochs(run)[-1]).params]
    if config.mode == "checkpoints":
        run = pick_run()
        return [c.params for c in _strided_tail(store, run, config.checkpoints_per_run, config.stride)]
    if len(runs) < config.runs:
        raise ValueError("store holds %d runs; %d requested" % (len(runs), config.runs))
    chosen = runs[: config.runs]
    if config.mode == "seeds":
        return [_best_checkpoint(store, run).params for run in chosen]
    members = []
    for run in chosen:
        members.extend(
            c.params for c in _strided_tail(store, run, config.checkpoints_per_run, config.stride)
        )
    return members


def predict_pool(members, pool: LabeledPool, ids=None) -> PredictionTensor:
    """Stack member predictions over pool samples into a prediction tensor.

    Args:
        members: sequence of ModelParams sharing input width and class count.
        pool: pool to predict on.
        ids: sample ids to cover; defaults to the whole pool in pool order.

    Returns:
        PredictionTensor of shape (len(ids), len(members), K).
    """
    members = list(members)
    if not members:
        raise ValueError("empty ensemble")
    for m in members:
        if m.n_features != pool.n_features or m.n_classes != pool.n_classes:
            raise ValueError("member shape does not match the pool")
    if ids is None:
        ids = pool.sample_ids
    ids = np.asarray([int(i) for i in ids], dtype=np.uint64)
    rows = pool.rows_for(ids)
    features = pool.features[rows]
    stacked = np.stack([predict_proba(m, features) for m in members], axis=1)
    return PredictionTensor(stacked.astype(np.float32), ids)


# ---------------------------------------------------------------------------
# Checkpoint files
# ---------------------------------------------------------------------------

_ALCK_MAGIC = b"ALCK"
_ALCK_VERSION = 1
_ALCK_HEADER = struct.Struct("<4sH8sIIIQI")
_FILENAME_RE = re.compile(r"run(\d+)_ep(\d+)\.alck$")


def checkpoint_filename(run_seed: int, epoch: int) -> str:
    return "run%d_ep%d.alck" % (run_seed, epoch)


def write_checkpoint(path, checkpoint: Checkpoint) -> None:
    """Binary checkpoint: header then float32 tensors in declared order."""
    params = checkpoint.params
    arch_tag = params.arch.encode()
    if len(arch_tag) > 8:
        raise ValueError("architecture tag too long")
    header = _ALCK_HEADER.pack(
        _ALCK_MAGIC,
        _ALCK_VERSION,
        arch_tag.ljust(8, b"\0"),
        params.n_features,
        params.n_classes,
        params.hidden,
        checkpoint.run_seed,
        checkpoint.epoch,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for tensor in params.tensors:
            fh.write(tensor.astype("<f4").tobytes(order="C"))


def _tensor_shapes(arch: str, d: int, k: int, hidden: int) -> list[tuple[int, ...]]:
    if arch == "logistic":
        return [(d, k), (k,)]
    return [(d, hidden), (hidden,), (hidden, k), (k,)]


def read_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        raw = fh.read(_ALCK_HEADER.size)
        if len(raw) < _ALCK_HEADER.size:
            raise ValueError("truncated checkpoint file")
        magic, version, arch_tag, d, k, hidden, run_seed, epoch = _ALCK_HEADER.unpack(raw)
        if magic != _ALCK_MAGIC:
            raise ValueError("not a checkpoint file (bad magic)")
        if version != _ALCK_VERSION:
            raise ValueError("unsupported checkpoint version %d" % version)
        arch = arch_tag.rstrip(b"\0").decode()
        if arch not in ARCHITECTURES:
            raise ValueError("unknown architecture tag %r" % arch)
        tensors = []
        for shape in _tensor_shapes(arch, d, k, hidden):
            n_items = int(np.prod(shape))
            block = np.frombuffer(fh.read(4 * n_items), dtype="<f4")
            if block.size != n_items:
                raise ValueError("truncated checkpoint tensors")
            tensors.append(block.reshape(shape).astype(np.float64))
    params = ModelParams(arch, d, k, hidden, tuple(tensors))
    return Checkpoint(params, run_seed, epoch)


__all__ = [
    "ARCHITECTURES",
    "ENSEMBLE_MODES",
    "LabeledPool",
    "ModelParams",
    "TrainConfig",
    "TrainResult",
    "Checkpoint",
    "CheckpointStore",
    "EnsembleConfig",
    "init_params",
    "predict_proba",
    "inverse_frequency_weights",
    "loss_and_gradients",
    "train",
    "fine_tune",
    "build_ensemble",
    "predict_pool",
    "checkpoint_filename",
    "write_checkpoint",
    "read_checkpoint",
]
