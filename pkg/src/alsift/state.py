"""Training-subset bookkeeping shared by the trainer and the search schemes."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np


def derive_seed(*parts: int) -> int:
    """Deterministic child seed from integer context parts.

    Mixing goes through numpy's SeedSequence so nearby part tuples give
    unrelated streams.
    """
    cleaned = [int(p) for p in parts]
    return int(np.random.SeedSequence(cleaned).generate_state(1, dtype=np.uint64)[0])


@dataclass
class SubsetState:
    """A multiset of pool sample ids.

    ``multiplicity`` maps sample id to a positive repeat count. Plain
    subsets keep every count at 1; duplication-based search increments
    counts instead of adding new ids.
    """

    multiplicity: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for sid, count in self.multiplicity.items():
            sid, count = int(sid), int(count)
            if count < 1:
                raise ValueError("multiplicity for sample %d must be >= 1" % sid)
            cleaned[sid] = count
        self.multiplicity = cleaned

    @classmethod
    def from_ids(cls, ids) -> "SubsetState":
        """Subset with multiplicity 1 for each id; duplicates rejected."""
        ids = [int(i) for i in ids]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate ids in subset initializer")
        return cls({sid: 1 for sid in ids})

    @property
    def unique_count(self) -> int:
        return len(self.multiplicity)

    @property
    def total_count(self) -> int:
        return sum(self.multiplicity.values())

    def ids(self) -> np.ndarray:
        """Unique member ids in ascending order."""
        return np.asarray(sorted(self.multiplicity), dtype=np.uint64)

    def as_training_ids(self) -> np.ndarray:
        """Expanded id list with each id repeated by its multiplicity.

        Ordering is ascending by id, so the expansion is deterministic;
        the trainer shuffles per epoch on top of this.
        """
        out = np.empty(self.total_count, dtype=np.uint64)
        pos = 0
        for sid in sorted(self.multiplicity):
            count = self.multiplicity[sid]
            out[pos : pos + count] = sid
            pos += count
        return out

    def with_new_ids(self, ids) -> "SubsetState":
        """Copy with previously unseen ids added at multiplicity 1."""
        merged = dict(self.multiplicity)
        for sid in ids:
            sid = int(sid)
            if sid in merged:
                raise ValueError("sample %d is already in the subset" % sid)
            merged[sid] = 1
        return SubsetState(merged)

    def with_added_copies(self, ids) -> "SubsetState":
        """Copy with one more occurrence of each given id (new ids start at 1)."""
        merged = dict(self.multiplicity)
        for sid in ids:
            sid = int(sid)
            merged[sid] = merged.get(sid, 0) + 1
        return SubsetState(merged)


def subset_hash(state: SubsetState) -> str:
    """Stable 16-hex-digit digest of a subset multiset."""
    payload = ";".join(
        "%d:%d" % (sid, state.multiplicity[sid]) for sid in sorted(state.multiplicity)
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]
