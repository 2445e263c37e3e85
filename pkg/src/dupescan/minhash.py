"""MinHash signatures over an affine hash family modulo 2**61 - 1.

All arithmetic is exact: products of two 61-bit residues are split into
32-bit limbs so that nothing overflows uint64, then folded using
2**61 == 1 (mod p).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .shingling import ShingleSet

MERSENNE_P = (1 << 61) - 1
DEFAULT_NUM_HASHES = 128

_P = np.uint64(MERSENNE_P)
_M32 = np.uint64(0xFFFFFFFF)
_M29 = np.uint64((1 << 29) - 1)
_S61 = np.uint64(61)
_S32 = np.uint64(32)
_S29 = np.uint64(29)
_S3 = np.uint64(3)


class FamilyMismatchError(ValueError):
    pass


def _fold(x: np.ndarray) -> np.ndarray:
    """Reduce values < 2**64 modulo p (single fold plus one correction)."""
    x = (x & _P) + (x >> _S61)
    return np.where(x >= _P, x - _P, x)


def mulmod(a, s: np.ndarray) -> np.ndarray:
    """(a * s) mod p for residues ``a``, ``s`` < p (broadcasting)."""
    a = np.asarray(a, dtype=np.uint64)
    a1, a0 = a >> _S32, a & _M32
    s1, s0 = s >> _S32, s & _M32
    hi = (a1 * s1) << _S3                      # * 2**64 == * 8
    mid = a1 * s0 + a0 * s1                    # < 2**62
    mid = (mid >> _S29) + ((mid & _M29) << _S32)  # * 2**32, folded at 2**61
    lo = a0 * s0
    lo = (lo & _P) + (lo >> _S61)
    return _fold(hi + mid + lo)


def affine_hash(a, b, s: np.ndarray) -> np.ndarray:
    """(a * s + b) mod p for raw 64-bit shingle hashes ``s`` (broadcasting)."""
    return _fold(mulmod(a, _fold(np.asarray(s, dtype=np.uint64))) + np.asarray(b, dtype=np.uint64))


# elements per intermediate (hashes x shingles) block
_BLOCK_ELEMS = 1 << 21


def _hash_rows(family: "HashFamily", flat: np.ndarray):
    """Yield (slice, block) with block[i, j] = h_i(flat[j]) over hash-function slices."""
    step = max(1, _BLOCK_ELEMS // max(flat.size, 1))
    s = _fold(flat)[None, :]
    for lo in range(0, family.n, step):
        sl = slice(lo, min(lo + step, family.n))
        yield sl, _fold(mulmod(family.a[sl, None], s) + family.b[sl, None])


@dataclass(frozen=True, eq=False)
class HashFamily:
    seed: int
    a: np.ndarray
    b: np.ndarray

    @classmethod
    def from_seed(cls, seed: int, n: int = DEFAULT_NUM_HASHES) -> "HashFamily":
        if n < 1:
            raise ValueError("a hash family needs at least one function")
        rng = np.random.default_rng(seed)
        a = rng.integers(1, MERSENNE_P, size=n, dtype=np.uint64)
        b = rng.integers(0, MERSENNE_P, size=n, dtype=np.uint64)
        return cls(seed, a, b)

    @property
    def n(self) -> int:
        return int(self.a.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HashFamily):
            return NotImplemented
        return (self.seed == other.seed and np.array_equal(self.a, other.a)
                and np.array_equal(self.b, other.b))

    def __hash__(self) -> int:
        return hash((self.seed, self.n))


@dataclass(frozen=True, eq=False)
class MinHashSignature:
    manuscript_id: str
    values: np.ndarray
    seed: int

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MinHashSignature):
            return NotImplemented
        return (self.manuscript_id == other.manuscript_id and self.seed == other.seed
                and np.array_equal(self.values, other.values))


def sign(shingles: ShingleSet, family: HashFamily) -> MinHashSignature:
    """values[i] = min over shingles s of (a_i * s + b_i) mod p."""
    if shingles.too_short:
        raise ValueError(f"{shingles.manuscript_id}: cannot sign an empty shingle set")
    values = np.empty(family.n, dtype=np.uint64)
    for sl, block in _hash_rows(family, shingles.shingles):
        values[sl] = block.min(axis=1)
    return MinHashSignature(shingles.manuscript_id, values, family.seed)


def _sign_block(sets: Sequence[ShingleSet], family: HashFamily) -> np.ndarray:
    flat = np.concatenate([s.shingles for s in sets])
    sizes = np.fromiter((s.shingles.size for s in sets), dtype=np.int64, count=len(sets))
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    out = np.empty((len(sets), family.n), dtype=np.uint64)
    for sl, block in _hash_rows(family, flat):
        out[:, sl] = np.minimum.reduceat(block, starts, axis=1).T
    return out


def sign_matrix(sets: Sequence[ShingleSet], family: HashFamily, threads: int = 1,
                block: int = 512) -> np.ndarray:
    """Signatures for many sets as a ``(len(sets), n)`` uint64 matrix.

    Row i is bit-identical to ``sign(sets[i], family).values`` whatever the
    block size or thread count.
    """
    for s in sets:
        if s.too_short:
            raise ValueError(f"{s.manuscript_id}: cannot sign an empty shingle set")
    if not sets:
        return np.empty((0, family.n), dtype=np.uint64)
    chunks = [sets[i : i + block] for i in range(0, len(sets), block)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _sign_block(c, family), chunks))
    else:
        parts = [_sign_block(c, family) for c in chunks]
    return np.vstack(parts)


def sign_many(sets: Sequence[ShingleSet], family: HashFamily,
              threads: int = 1) -> list[MinHashSignature]:
    mat = sign_matrix(sets, family, threads)
    return [MinHashSignature(s.manuscript_id, row, family.seed) for s, row in zip(sets, mat)]


def estimate_jaccard(a: MinHashSignature, b: MinHashSignature) -> float:
    """Fraction of signature positions on which the two minima agree."""
    if a.seed != b.seed:
        raise FamilyMismatchError(f"signatures from different families ({a.seed} vs {b.seed})")
    if a.values.size != b.values.size:
        raise FamilyMismatchError(
            f"signature lengths differ ({a.values.size} vs {b.values.size})"
        )
    return float(np.count_nonzero(a.values == b.values)) / a.values.size
