"""Banded LSH over MinHash signatures, plus exact-Jaccard verification."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import xxhash

from .minhash import FamilyMismatchError, HashFamily, MinHashSignature
from .shingling import ShingleSet, exact_jaccard

DEFAULT_BANDS = 16
DEFAULT_ROWS = 8
DEFAULT_THRESHOLD = 0.8


class ConfigurationError(ValueError):
    pass


class IndexFrozenError(RuntimeError):
    pass


def band_key(values: np.ndarray, band: int) -> int:
    """64-bit key of one band's values, salted with the band number."""
    return xxhash.xxh64_intdigest(values.astype("<u8").tobytes(), seed=band)


def s_curve(s: float, b: int = DEFAULT_BANDS, r: int = DEFAULT_ROWS) -> float:
    """Probability that a pair agreeing on each row w.p. ``s`` shares a band."""
    return 1.0 - (1.0 - s**r) ** b


class LshIndex:
    """``b`` hash tables, each mapping a band key to the ids filed under it.

    Buckets keep ids in insertion order. Once frozen the index refuses
    inserts and may be queried from several threads.
    """

    def __init__(self, b: int = DEFAULT_BANDS, r: int = DEFAULT_ROWS,
                 family: Optional[HashFamily] = None):
        if b < 1 or r < 1:
            raise ConfigurationError("bands and rows must be positive")
        if family is not None and family.n != b * r:
            raise ConfigurationError(
                f"bands*rows = {b * r} does not match {family.n} hash functions"
            )
        self.b = b
        self.r = r
        self.family = family
        self.seed: Optional[int] = family.seed if family is not None else None
        self.ids: list[str] = []
        self.tables: list[dict[int, list[str]]] = [{} for _ in range(b)]
        self.frozen = False
        self._rows: dict[str, int] = {}
        self._sigs: list[np.ndarray] = []
        self._matrix: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.b * self.r

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, manuscript_id: object) -> bool:
        return manuscript_id in self._rows

    def band_keys(self, values: np.ndarray) -> list[int]:
        if values.size != self.n:
            raise ConfigurationError(
                f"signature length {values.size} != bands*rows = {self.n}"
            )
        r = self.r
        return [band_key(values[j * r : (j + 1) * r], j) for j in range(self.b)]

    def insert(self, sig: MinHashSignature) -> None:
        if self.frozen:
            raise IndexFrozenError("index is frozen")
        if self.seed is None:
            self.seed = sig.seed
        elif sig.seed != self.seed:
            raise FamilyMismatchError(f"{sig.manuscript_id}: signature from family {sig.seed}, "
                                      f"index uses {self.seed}")
        if sig.manuscript_id in self._rows:
            raise ValueError(f"{sig.manuscript_id} already indexed")
        keys = self.band_keys(sig.values)
        self._rows[sig.manuscript_id] = len(self.ids)
        self.ids.append(sig.manuscript_id)
        self._sigs.append(np.asarray(sig.values, dtype=np.uint64))
        for table, key in zip(self.tables, keys):
            table.setdefault(key, []).append(sig.manuscript_id)

    def freeze(self) -> "LshIndex":
        self.frozen = True
        self._matrix = (np.vstack(self._sigs) if self._sigs
                        else np.empty((0, self.n), dtype=np.uint64))
        return self

    @property
    def signatures(self) -> np.ndarray:
        if self._matrix is None:
            raise IndexFrozenError("freeze the index first")
        return self._matrix

    def signature(self, manuscript_id: str) -> MinHashSignature:
        row = self._rows[manuscript_id]
        return MinHashSignature(manuscript_id, self._sigs[row], self.seed)

    def bucket_sizes(self) -> list[int]:
        return [len(bucket) for table in self.tables for bucket in table.values()]


def build(signatures: Iterable[MinHashSignature], b: int = DEFAULT_BANDS,
          r: int = DEFAULT_ROWS, family: Optional[HashFamily] = None) -> LshIndex:
    index = LshIndex(b, r, family)
    for sig in signatures:
        index.insert(sig)
    return index.freeze()


def _canonical(x: str, y: str) -> tuple[str, str]:
    return (x, y) if x < y else (y, x)


def candidates(index: LshIndex) -> set[tuple[str, str]]:
    """Unordered id pairs sharing at least one band bucket."""
    if not index.frozen:
        raise IndexFrozenError("candidates() needs a frozen index")
    out: set[tuple[str, str]] = set()
    for table in index.tables:
        for bucket in table.values():
            if len(bucket) > 1:
                for x, y in combinations(bucket, 2):
                    if x != y:
                        out.add(_canonical(x, y))
    return out


@dataclass(frozen=True, order=True)
class VerifiedPair:
    id_a: str
    id_b: str
    jaccard: float
    estimated: float

    def to_dict(self) -> dict:
        return asdict(self)


def _estimate(index: Optional[LshIndex], x: str, y: str) -> float:
    if index is None or x not in index or y not in index:
        return math.nan
    a, b = index.signature(x).values, index.signature(y).values
    return float(np.count_nonzero(a == b)) / a.size


def verify(pairs: Iterable[tuple[str, str]], shingle_sets: Mapping[str, ShingleSet],
           t: float = DEFAULT_THRESHOLD, index: Optional[LshIndex] = None) -> list[VerifiedPair]:
    """Keep the candidates whose exact Jaccard is at least ``t`` (inclusive).

    ``estimated`` is taken from ``index`` signatures when an index is given,
    else NaN. Output is sorted by id pair.
    """
    out = []
    for x, y in pairs:
        x, y = _canonical(x, y)
        for pid in (x, y):
            if pid not in shingle_sets:
                raise KeyError(f"no shingle set for manuscript {pid!r}")
        j = exact_jaccard(shingle_sets[x], shingle_sets[y])
        if j >= t:
            out.append(VerifiedPair(x, y, j, _estimate(index, x, y)))
    out.sort()
    return out


def query(index: LshIndex, signature: MinHashSignature, shingles: ShingleSet,
          shingle_sets: Mapping[str, ShingleSet],
          t: float = DEFAULT_THRESHOLD) -> list[VerifiedPair]:
    """Screen one probe against the indexed corpus."""
    if not index.frozen:
        raise IndexFrozenError("query() needs a frozen index")
    if index.seed is not None and signature.seed != index.seed:
        raise FamilyMismatchError(
            f"probe signed with family {signature.seed}, index uses {index.seed}"
        )
    probe = signature.manuscript_id
    hits: dict[str, None] = {}
    for table, key in zip(index.tables, index.band_keys(signature.values)):
        for mid in table.get(key, ()):
            if mid != probe:
                hits[mid] = None
    out = []
    for mid in hits:
        if mid not in shingle_sets:
            raise KeyError(f"no shingle set for manuscript {mid!r}")
        j = exact_jaccard(shingles, shingle_sets[mid])
        if j >= t:
            other = index.signature(mid).values
            est = float(np.count_nonzero(other == signature.values)) / other.size
            x, y = _canonical(probe, mid)
            out.append(VerifiedPair(x, y, j, est))
    out.sort()
    return out


def pairs_to_csv(pairs: Sequence[VerifiedPair]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id_a", "id_b", "jaccard", "estimated"])
    for p in pairs:
        writer.writerow([p.id_a, p.id_b, repr(p.jaccard), repr(p.estimated)])
    return buf.getvalue()


def pairs_to_jsonl(pairs: Sequence[VerifiedPair]) -> str:
    return "".join(json.dumps(p.to_dict(), sort_keys=True) + "\n" for p in pairs)


def pairs_from_csv(text: str) -> list[VerifiedPair]:
    rows = csv.DictReader(io.StringIO(text))
    return [VerifiedPair(r["id_a"], r["id_b"], float(r["jaccard"]), float(r["estimated"]))
            for r in rows]
