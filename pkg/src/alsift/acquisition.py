"""Ensemble uncertainty scores for classification vectors and detection maps.

Everything in this module is a pure function over probability arrays. An
ensemble prediction is an (E, K) matrix with one probability row per member;
a pool of predictions is an (N, E, K) tensor wrapped in
:class:`PredictionTensor`. Scores use natural logarithms throughout.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

# Clamp applied inside logarithms. Exact zeros still contribute exactly 0
# to entropies via the 0 * log 0 convention.
LOG_EPS = 1e-12

# Probability vectors must sum to 1 within this tolerance.
SUM_TOL = 1e-6

# Mutual information more negative than this signals a real bug instead of
# floating-point cancellation; anything in (-MI_CLAMP, 0) is clamped to 0.
MI_CLAMP = 1e-9

FUNCTION_IDS = ("entropy", "mutual_information", "variation_ratios", "error_count", "random")

# Functions applicable to detection heatmaps (no labels, no randomness).
DETECTION_FUNCTION_IDS = ("entropy", "mutual_information", "variation_ratios")


def _check_rows(probs: np.ndarray) -> np.ndarray:
    """Validate an array whose last axis holds probability vectors."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape[-1] < 1:
        raise ValueError("invalid distribution: no classes")
    if not np.all(np.isfinite(probs)):
        raise ValueError("invalid distribution: non-finite entries")
    if np.any(probs < 0.0) or np.any(probs > 1.0):
        raise ValueError("invalid distribution: entries outside [0, 1]")
    sums = probs.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > SUM_TOL):
        raise ValueError("invalid distribution: rows must sum to 1 within %g" % SUM_TOL)
    return probs


def _check_members(members: np.ndarray) -> np.ndarray:
    members = np.asarray(members, dtype=np.float64)
    if members.ndim != 2:
        raise ValueError("ensemble must be a 2-D (members, classes) array")
    if members.shape[0] < 1:
        raise ValueError("empty ensemble")
    return _check_rows(members)


def _entropy_rows(probs: np.ndarray) -> np.ndarray:
    """Entropy in nats along the last axis, with 0 * log 0 = 0."""
    terms = np.where(probs > 0.0, probs * np.log(np.maximum(probs, LOG_EPS)), 0.0)
    return -terms.sum(axis=-1)


def predictive_mean(members: np.ndarray) -> np.ndarray:
    """Element-wise mean of the member distributions.

    Args:
        members: (E, K) array, one probability row per ensemble member.

    Returns:
        Length-K marginal probability vector.
    """
    members = _check_members(members)
    return members.mean(axis=0)


def entropy(probs: np.ndarray) -> float:
    """Entropy of a single probability vector, in nats."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1:
        raise ValueError("invalid distribution: expected a 1-D vector")
    probs = _check_rows(probs)
    return float(_entropy_rows(probs))


def _clamp_mutual_information(values: np.ndarray) -> np.ndarray:
    if np.any(values < -MI_CLAMP):
        raise ValueError(
            "mutual information below -%g; member rows are inconsistent" % MI_CLAMP
        )
    return np.maximum(values, 0.0)


def mutual_information(members: np.ndarray) -> float:
    """Entropy of the mean prediction minus the mean member entropy.

    Zero when all members agree exactly (regardless of how uncertain each
    one is); large when members disagree. Tiny negative values from
    floating-point cancellation are clamped to 0.
    """
    members = _check_members(members)
    total = _entropy_rows(members.mean(axis=0))
    expected = _entropy_rows(members).mean()
    return float(_clamp_mutual_information(np.asarray(total - expected)))


def _member_votes(members: np.ndarray) -> np.ndarray:
    # argmax ties resolve to the lowest class index
    return np.argmax(members, axis=-1)


def variation_ratios(members: np.ndarray) -> float:
    """Fraction of members whose top class differs from the majority vote.

    Per-member argmax ties and majority-vote ties both resolve to the
    lowest class index, so the score is deterministic.
    """
    members = _check_members(members)
    n_members, n_classes = members.shape
    votes = _member_votes(members)
    counts = np.bincount(votes, minlength=n_classes)
    mode = int(np.argmax(counts))
    return 1.0 - counts[mode] / n_members


def error_count(members: np.ndarray, label: int) -> float:
    """Fraction of members whose top class differs from the true label."""
    members = _check_members(members)
    n_members, n_classes = members.shape
    label = int(label)
    if not 0 <= label < n_classes:
        raise ValueError("label %d out of range [0, %d)" % (label, n_classes))
    votes = _member_votes(members)
    return 1.0 - np.count_nonzero(votes == label) / n_members


@dataclass
class PredictionTensor:
    """Per-sample, per-member class probabilities for a pool.

    ``data`` has shape (N, E, K) and is stored as float32 to match the
    on-disk format; score computations promote to float64.
    """

    data: np.ndarray
    sample_ids: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        self.sample_ids = np.ascontiguousarray(self.sample_ids, dtype=np.uint64)
        if self.data.ndim != 3:
            raise ValueError("prediction tensor must be (samples, members, classes)")
        if self.sample_ids.shape != (self.data.shape[0],):
            raise ValueError("sample_ids length must match the sample axis")
        if len(np.unique(self.sample_ids)) != len(self.sample_ids):
            raise ValueError("sample_ids must be unique")
        _check_rows(self.data.astype(np.float64))

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def n_members(self) -> int:
        return self.data.shape[1]

    @property
    def n_classes(self) -> int:
        return self.data.shape[2]


@dataclass
class AcquisitionScores:
    """Per-sample scores produced by one acquisition function."""

    function_id: str
    scores: np.ndarray
    sample_ids: np.ndarray

    def __post_init__(self):
        self.scores = np.ascontiguousarray(self.scores, dtype=np.float64)
        self.sample_ids = np.ascontiguousarray(self.sample_ids, dtype=np.uint64)
        if self.function_id not in FUNCTION_IDS:
            raise ValueError("unknown acquisition function %r" % self.function_id)
        if self.scores.shape != self.sample_ids.shape:
            raise ValueError("scores and sample_ids must have equal length")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores must be finite")


def score_pool(
    tensor: PredictionTensor,
    function_id: str,
    labels: np.ndarray | None = None,
    seed: int | None = None,
) -> AcquisitionScores:
    """Apply one acquisition function to every sample of a pool.

    Args:
        tensor: pool predictions, (N, E, K).
        function_id: one of ``FUNCTION_IDS``.
        labels: true class indices, required for ``error_count``.
        seed: RNG seed, required for ``random``. The random baseline emits
            seeded uniform draws so downstream selection code is shared.

    Returns:
        AcquisitionScores aligned with ``tensor.sample_ids``.
    """
    if function_id not in FUNCTION_IDS:
        raise ValueError("unknown acquisition function %r" % function_id)
    data = tensor.data.astype(np.float64)
    n_samples, n_members, n_classes = data.shape

    if function_id == "entropy":
        scores = _entropy_rows(data.mean(axis=1))
    elif function_id == "mutual_information":
        total = _entropy_rows(data.mean(axis=1))
        expected = _entropy_rows(data).mean(axis=1)
        scores = _clamp_mutual_information(total - expected)
    elif function_id == "variation_ratios":
        votes = _member_votes(data)
        counts = (votes[:, :, None] == np.arange(n_classes)).sum(axis=1)
        agree = counts[np.arange(n_samples), np.argmax(counts, axis=1)]
        scores = 1.0 - agree / n_members
    elif function_id == "error_count":
        if labels is None:
            raise ValueError("error_count scoring requires labels")
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (n_samples,):
            raise ValueError("labels length must match the sample axis")
        if np.any(labels < 0) or np.any(labels >= n_classes):
            raise ValueError("labels out of range")
        votes = _member_votes(data)
        scores = 1.0 - (votes == labels[:, None]).sum(axis=1) / n_members
    else:  # random
        if seed is None:
            raise ValueError("random scoring requires a seed")
        scores = np.random.default_rng(seed).random(n_samples)

    return AcquisitionScores(function_id, scores, tensor.sample_ids)


# ---------------------------------------------------------------------------
# Detection heatmaps
# ---------------------------------------------------------------------------


def _as_heatmap_stack(maps) -> np.ndarray:
    try:
        stack = np.asarray(maps, dtype=np.float64)
    except ValueError as exc:
        raise ValueError("heatmaps must share one (height, width) shape") from exc
    if stack.ndim != 4:
        raise ValueError("heatmaps must be shaped (members, classes, height, width)")
    if stack.shape[0] < 1:
        raise ValueError("empty ensemble")
    if min(stack.shape[1:]) < 1:
        raise ValueError("heatmaps must be non-empty")
    if not np.all(np.isfinite(stack)) or np.any(stack < 0.0) or np.any(stack > 1.0):
        raise ValueError("heatmap cells must be probabilities in [0, 1]")
    return stack


def detection_heatmaps(maps, function_id: str) -> np.ndarray:
    """Per-class acquisition heatmaps for object-center probability maps.

    ``maps`` is (members, classes, height, width); every cell holds the
    probability that an object of that class is centered there. Each cell
    is treated as an independent binary classifier with distribution
    [q, 1 - q] and scored across members, producing one acquisition map
    per class for inspection.
    """
    if function_id not in DETECTION_FUNCTION_IDS:
        raise ValueError(
            "function %r not applicable to detection maps" % function_id
        )
    stack = _as_heatmap_stack(maps)
    n_members = stack.shape[0]
    binary = np.stack([stack, 1.0 - stack], axis=-1)  # (E, C, H, W, 2)

    if function_id == "entropy":
        return _entropy_rows(binary.mean(axis=0))
    if function_id == "mutual_information":
        total = _entropy_rows(binary.mean(axis=0))
        expected = _entropy_rows(binary).mean(axis=0)
        return _clamp_mutual_information(total - expected)

    # variation ratios: vote 0 means "object present" wins (q >= 0.5)
    votes_present = (stack >= 0.5).sum(axis=0)
    votes_absent = n_members - votes_present
    agree = np.where(votes_present >= votes_absent, votes_present, votes_absent)
    return 1.0 - agree / n_members


def detection_image_score(maps, function_id: str) -> float:
    """Single image-level score: the maximum cell value over all classes."""
    return float(detection_heatmaps(maps, function_id).max())


# ---------------------------------------------------------------------------
# Prediction tensor files
# ---------------------------------------------------------------------------

_ALPT_MAGIC = b"ALPT"
_ALPT_VERSION = 1
_ALPT_HEADER = struct.Struct("<4sHIII")


def write_prediction_tensor(path, tensor: PredictionTensor) -> None:
    """Write a tensor in the binary pool-prediction format.

    Layout: magic ``ALPT``, u16 version, u32 N, u32 E, u32 K, then
    N*E*K little-endian f32 in (sample, member, class) order, then N
    little-endian u64 sample ids.
    """
    n, e, k = tensor.data.shape
    with open(path, "wb") as fh:
        fh.write(_ALPT_HEADER.pack(_ALPT_MAGIC, _ALPT_VERSION, n, e, k))
        fh.write(tensor.data.astype("<f4").tobytes(order="C"))
        fh.write(tensor.sample_ids.astype("<u8").tobytes())


def read_prediction_tensor(path) -> PredictionTensor:
    with open(path, "rb") as fh:
        header = fh.read(_ALPT_HEADER.size)
        if len(header) < _ALPT_HEADER.size:
            raise ValueError("truncated prediction tensor file")
        magic, version, n, e, k = _ALPT_HEADER.unpack(header)
        if magic != _ALPT_MAGIC:
            raise ValueError("not a prediction tensor file (bad magic)")
        if version != _ALPT_VERSION:
            raise ValueError("unsupported prediction tensor version %d" % version)
        raw_data = fh.read(4 * n * e * k)
        if len(raw_data) != 4 * n * e * k:
            raise ValueError("truncated prediction tensor data")
        data = np.frombuffer(raw_data, dtype="<f4")
        raw_ids = fh.read(8 * n)
        if len(raw_ids) != 8 * n:
            raise ValueError("truncated sample id block")
        ids = np.frombuffer(raw_ids, dtype="<u8")
    return PredictionTensor(data.reshape(n, e, k).copy(), ids.copy())


def read_prediction_tensor_csv(path) -> PredictionTensor:
    """Read the CSV form: columns sample_id, member, p_0..p_{K-1}.

    Rows may appear in any order but must cover the full (sample, member)
    grid. Samples keep their order of first appearance.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(row for row in fh if not row.startswith("#"))
        header = next(reader, None)
        if header is None or len(header) < 3 or header[0] != "sample_id" or header[1] != "member":
            raise ValueError("expected header sample_id, member, p_0..p_{K-1}")
        n_classes = len(header) - 2
        if [h.strip() for h in header[2:]] != ["p_%d" % i for i in range(n_classes)]:
            raise ValueError("probability columns must be named p_0..p_%d" % (n_classes - 1))
        rows: dict[tuple[int, int], list[float]] = {}
        order: list[int] = []
        seen: set[int] = set()
        max_member = -1
        for row in reader:
            if not row:
                continue
            sid, member = int(row[0]), int(row[1])
            key = (sid, member)
            if key in rows:
                raise ValueError("duplicate row for sample %d member %d" % key)
            if sid not in seen:
                seen.add(sid)
                order.append(sid)
            rows[key] = [float(v) for v in row[2:]]
            max_member = max(max_member, member)
    n_members = max_member + 1
    if n_members < 1 or not order:
        raise ValueError("empty prediction tensor CSV")
    data = np.empty((len(order), n_members, n_classes), dtype=np.float32)
    for i, sid in enumerate(order):
        for e in range(n_members):
            try:
                data[i, e] = rows[(sid, e)]
            except KeyError:
                raise ValueError("missing row for sample %d member %d" % (sid, e)) from None
    return PredictionTensor(data, np.asarray(order, dtype=np.uint64))
