"""Text normalization and hashed word k-shingles."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import xxhash

from .corpus import ManuscriptRecord

DEFAULT_K = 3
DEFAULT_SEED = 0x5EED_D0C5

# Never produced by normalize(), so a k-gram containing it can only come from
# gluing the title to the abstract.
FIELD_SEPARATOR = "\x1f"

_NON_WORD = re.compile(r"[\W_]+")
_UINT64 = (1 << 64) - 1


def normalize(text: str) -> list[str]:
    """NFKC-normalize, lowercase, turn punctuation into spaces, split on whitespace."""
    if not text:
        return []
    text = unicodedata.normalize("NFKC", text).lower()
    return _NON_WORD.sub(" ", text).split()


def hash64(text: str, seed: int = DEFAULT_SEED) -> int:
    return xxhash.xxh64_intdigest(text.encode("utf-8"), seed=seed & _UINT64)


@dataclass(frozen=True, eq=False)
class ShingleSet:
    """Sorted, duplicate-free uint64 shingle hashes of one manuscript."""

    manuscript_id: str
    shingles: np.ndarray
    token_count: int

    @classmethod
    def from_values(cls, manuscript_id: str, values: Iterable[int],
                    token_count: int | None = None) -> "ShingleSet":
        arr = np.unique(np.fromiter(values, dtype=np.uint64))
        return cls(manuscript_id, arr, arr.size if token_count is None else token_count)

    @property
    def too_short(self) -> bool:
        return self.shingles.size == 0

    def __len__(self) -> int:
        return int(self.shingles.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ShingleSet):
            return NotImplemented
        return (
            self.manuscript_id == other.manuscript_id
            and self.token_count == other.token_count
            and np.array_equal(self.shingles, other.shingles)
        )

    def as_set(self) -> set[int]:
        return set(self.shingles.tolist())


def _grams(tokens: Sequence[str], k: int) -> Iterable[str]:
    for i in range(len(tokens) - k + 1):
        gram = tokens[i : i + k]
        if FIELD_SEPARATOR not in gram:
            yield " ".join(gram)


def shingle_tokens(manuscript_id: str, tokens: Sequence[str], k: int = DEFAULT_K,
                   seed: int = DEFAULT_SEED) -> ShingleSet:
    if k < 1:
        raise ValueError(f"shingle size must be >= 1, got {k}")
    hashes = np.fromiter(
        (hash64(g, seed) for g in _grams(tokens, k)), dtype=np.uint64
    )
    n_words = sum(1 for t in tokens if t != FIELD_SEPARATOR)
    return ShingleSet(manuscript_id, np.unique(hashes), n_words)


def shingle(record: ManuscriptRecord, k: int = DEFAULT_K, seed: int = DEFAULT_SEED) -> ShingleSet:
    """Shingle title and abstract jointly; no k-gram spans the two fields.

    The result is ``too_short`` when no k-gram fits inside either field. Such
    records are left out of the index.
    """
    tokens = normalize(record.title) + [FIELD_SEPARATOR] + normalize(record.abstract)
    return shingle_tokens(record.id, tokens, k, seed)


def shingle_corpus(records: Iterable[ManuscriptRecord], k: int = DEFAULT_K,
                   seed: int = DEFAULT_SEED) -> list[ShingleSet]:
    return [shingle(r, k, seed) for r in records]


def exact_jaccard(a: ShingleSet, b: ShingleSet) -> float:
    """|a & b| / |a | b|, with two empty sets defined as 0."""
    x, y = a.shingles, b.shingles
    if x.size == 0 and y.size == 0:
        return 0.0
    inter = np.intersect1d(x, y, assume_unique=True).size
    return inter / (x.size + y.size - inter)
