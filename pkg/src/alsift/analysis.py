"""Diagnostics over ensembles and selected subsets.

Covers three questions: how much do ensemble members agree with each other
(consensus), how concentrated is a training multiset (duplication
histogram), and how well does a model ensemble classify a given id set
(evaluation, including the selected/unselected split of a pool).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acquisition import PredictionTensor
from .learner import LabeledPool, predict_pool
from .state import SubsetState


@dataclass
class ConsensusReport:
    """Agreement counts among ensemble members on a fixed sample set.

    ``cumulative[n-1]`` counts samples where members 1..n all predict the
    same class; ``pairwise[i]`` counts samples where members i and i+1
    agree. Member order is the tensor's member axis order.
    """

    eval_size: int
    cumulative: tuple[int, ...]
    pairwise: tuple[int, ...]


def consensus_counts(tensor: PredictionTensor, n_max: int) -> ConsensusReport:
    """Count all-agree and consecutive-pair agreement over the member axis.

    Args:
        tensor: pool predictions, (N, E, K).
        n_max: deepest prefix to evaluate; cumulative counts cover
            n = 1..n_max. Must be within the member axis.
    """
    n_max = int(n_max)
    if not 1 <= n_max <= tensor.n_members:
        raise ValueError("n_max must be in [1, %d]" % tensor.n_members)
    votes = np.argmax(tensor.data, axis=2)  # (N, E), ties toward class 0
    base = votes[:, 0]
    agree = np.ones(tensor.n_samples, dtype=bool)
    cumulative = [tensor.n_samples]
    for n in range(2, n_max + 1):
        agree &= votes[:, n - 1] == base
        cumulative.append(int(agree.sum()))
    pairwise = tuple(
        int((votes[:, i] == votes[:, i + 1]).sum()) for i in range(tensor.n_members - 1)
    )
    return ConsensusReport(tensor.n_samples, tuple(cumulative), pairwise)


@dataclass
class DuplicationHistogram:
    """How many subset ids occur once, twice, three times and so on."""

    counts: dict[int, int]

    def __post_init__(self):
        cleaned = {}
        for mult, count in self.counts.items():
            mult, count = int(mult), int(count)
            if mult < 1 or count < 0:
                raise ValueError("multiplicities must be >= 1 and counts >= 0")
            if count:
                cleaned[mult] = count
        self.counts = cleaned

    @property
    def unique_count(self) -> int:
        return sum(self.counts.values())

    @property
    def total_count(self) -> int:
        return sum(mult * count for mult, count in self.counts.items())

    def rows(self) -> list[tuple[int, int]]:
        return sorted(self.counts.items())


def duplication_histogram(state: SubsetState) -> DuplicationHistogram:
    """Histogram of occurrence counts for a training multiset."""
    counts: dict[int, int] = {}
    for mult in state.multiplicity.values():
        counts[mult] = counts.get(mult, 0) + 1
    return DuplicationHistogram(counts)


@dataclass
class EvalReport:
    """Accuracy of an ensemble (predictive-mean vote) on an id set."""

    n_samples: int
    accuracy: float
    per_class: dict[int, float]


def _fused_votes(members, pool: LabeledPool, ids) -> tuple[np.ndarray, np.ndarray]:
    tensor = predict_pool(members, pool, ids)
    mean = tensor.data.astype(np.float64).mean(axis=1)
    labels = pool.labels[pool.rows_for(tensor.sample_ids)]
    return np.argmax(mean, axis=1), labels


def evaluate(members, pool: LabeledPool, ids=None) -> EvalReport:
    """Score an ensemble on the given sample ids.

    Member probabilities are averaged and the highest-mean class wins
    (ties toward the lower class index). Per-class accuracies cover the
    classes that actually appear in ``ids``.

    Args:
        members: sequence of ModelParams.
        pool: pool holding features and labels.
        ids: sample ids to evaluate; defaults to the whole pool.
    """
    if ids is not None:
        ids = list(ids)
        if not ids:
            raise ValueError("empty evaluation id set")
    votes, labels = _fused_votes(members, pool, ids)
    per_class = {}
    for cls in np.unique(labels):
        mask = labels == cls
        per_class[int(cls)] = float(np.mean(votes[mask] == cls))
    return EvalReport(len(labels), float(np.mean(votes == labels)), per_class)


def selected_unselected_gap(
    members, pool: LabeledPool, state: SubsetState
) -> tuple[EvalReport, EvalReport]:
    """Evaluate separately on subset members and on the rest of the pool."""
    selected = {int(i) for i in state.ids()}
    unknown = selected - {int(i) for i in pool.sample_ids}
    if unknown:
        raise KeyError("unknown sample id %d" % sorted(unknown)[0])
    unselected = [int(i) for i in pool.sample_ids if int(i) not in selected]
    if not selected or not unselected:
        raise ValueError("empty partition: subset must split the pool in two")
    return (
        evaluate(members, pool, sorted(selected)),
        evaluate(members, pool, unselected),
    )


def consensus_rows(report: ConsensusReport) -> list[tuple]:
    """Plot-ready rows (kind, index, count) for the two consensus series."""
    rows: list[tuple] = [("cumulative", n + 1, c) for n, c in enumerate(report.cumulative)]
    rows.extend(("pairwise", i + 1, c) for i, c in enumerate(report.pairwise))
    return rows
