import struct

import numpy as np
import pytest

from dupescan.config import PipelineConfig
from dupescan.corpus import Corpus
from dupescan.lsh import build
from dupescan.lsh import candidates, verify
from dupescan.pipeline import detect, shingle_records
from dupescan.snapshot import (MAGIC, SnapshotError, SnapshotVersionError, dumps, load_snapshot,
                               loads, save_snapshot)
from dupescan.synth import SynthSpec, generate_synthetic


@pytest.fixture(scope="module")
def indexed():
    sc = generate_synthetic(SynthSpec(size=100, near_duplicate_rate=0.2, seed=5))
    corpus = Corpus.from_records(sc.records)
    det = detect(corpus, PipelineConfig())
    return corpus, det


def test_empty_round_trip(tmp_path):
    corpus, index = Corpus(), build([])
    save_snapshot(tmp_path / "e.snap", corpus, index)
    c2, i2 = load_snapshot(tmp_path / "e.snap")
    assert len(c2) == 0 and len(i2) == 0 and candidates(i2) == set()


def test_round_trip_is_lossless_and_byte_stable(indexed, tmp_path):
    corpus, det = indexed
    blob = dumps(corpus, det.index, {"k": 3})
    c2, i2, cfg = loads(blob)
    assert c2 == corpus and cfg == {"k": 3}
    assert i2.ids == det.index.ids
    assert np.array_equal(i2.signatures, det.index.signatures)
    assert i2.family == det.index.family
    for t1, t2 in zip(det.index.tables, i2.tables):
        assert {k: v for k, v in t1.items()} == t2
    # serialize twice: second pass must reproduce the first byte for byte
    assert dumps(c2, i2, cfg) == blob
    save_snapshot(tmp_path / "a.snap", c2, i2, cfg)
    assert (tmp_path / "a.snap").read_bytes() == blob


def test_loaded_index_gives_same_pairs(indexed):
    corpus, det = indexed
    c2, i2, _ = loads(dumps(corpus, det.index))
    sets, _ = shingle_records(c2.records, PipelineConfig())
    assert verify(sorted(candidates(i2)), sets, 0.8, i2) == det.pairs
    assert det.pairs


def test_unknown_version_rejected(indexed):
    corpus, det = indexed
    blob = bytearray(dumps(corpus, det.index))
    struct.pack_into("<I", blob, len(MAGIC), 99)
    with pytest.raises(SnapshotVersionError, match="99"):
        loads(bytes(blob))


@pytest.mark.parametrize("mangle", [
    lambda b: b"NOTASNAP" + b[8:],
    lambda b: b[:20],
    lambda b: b[:-1] + bytes([b[-1] ^ 0xFF]),
    lambda b: b[: len(MAGIC) + 12] + b"X" + b[len(MAGIC) + 13:],
    lambda b: b[: len(MAGIC) + 4] + (2**40).to_bytes(8, "little") + b[len(MAGIC) + 12:],
])
def test_corrupt_snapshot_rejected(indexed, mangle):
    corpus, det = indexed
    with pytest.raises(SnapshotError):
        loads(mangle(dumps(corpus, det.index)))


def test_unfrozen_index_cannot_be_saved(indexed):
    from dupescan.lsh import LshIndex
    with pytest.raises(SnapshotError):
        dumps(indexed[0], LshIndex())
