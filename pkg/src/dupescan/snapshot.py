"""Binary snapshot of a corpus and its LSH index.

Layout::

    magic        b"DUPESCAN-SNAP\\n"   (14 bytes)
    version      uint32 little-endian
    header_len   uint64 little-endian
    header       UTF-8 JSON (sorted keys, compact): records, index metadata,
                 array directory, SHA-256 of the payload, optional config
    payload      raw little-endian arrays, concatenated in directory order

Every container is written in a canonical order (records in corpus order,
bucket keys ascending), so saving a loaded snapshot reproduces the file
byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import struct
from typing import Optional

import numpy as np

from .corpus import Corpus, ManuscriptRecord
from .lsh import LshIndex
from .minhash import HashFamily

MAGIC = b"DUPESCAN-SNAP\n"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<IQ")


class SnapshotError(ValueError):
    pass


class SnapshotVersionError(SnapshotError):
    pass


def _index_arrays(index: LshIndex) -> dict[str, np.ndarray]:
    rows = {mid: i for i, mid in enumerate(index.ids)}
    counts, keys, sizes, members = [], [], [], []
    for table in index.tables:
        counts.append(len(table))
        for key in sorted(table):
            bucket = table[key]
            keys.append(key)
            sizes.append(len(bucket))
            members.extend(rows[m] for m in bucket)
    arrays = {
        "signatures": index.signatures.astype("<u8"),
        "band_bucket_counts": np.asarray(counts, dtype="<i8"),
        "bucket_keys": np.asarray(keys, dtype="<u8"),
        "bucket_sizes": np.asarray(sizes, dtype="<i8"),
        "bucket_members": np.asarray(members, dtype="<i8"),
    }
    if index.family is not None:
        arrays["family_a"] = index.family.a.astype("<u8")
        arrays["family_b"] = index.family.b.astype("<u8")
    return arrays


def dumps(corpus: Corpus, index: LshIndex, config: Optional[dict] = None) -> bytes:
    if not index.frozen:
        raise SnapshotError("only a frozen index can be saved")
    missing = [m for m in index.ids if m not in corpus]
    if missing:
        raise SnapshotError(f"index holds ids missing from the corpus, e.g. {missing[0]!r}")
    arrays = _index_arrays(index)
    directory, chunks, offset = [], [], 0
    for name, arr in arrays.items():
        raw = np.ascontiguousarray(arr).tobytes()
        directory.append({"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape),
                          "offset": offset, "nbytes": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    payload = b"".join(chunks)
    header = {
        "format_version": FORMAT_VERSION,
        "config": config,
        "records": [r.to_dict() for r in corpus.records],
        "index": {"bands": index.b, "rows": index.r, "seed": index.seed, "ids": index.ids},
        "arrays": directory,
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode()
    return MAGIC + _PREFIX.pack(FORMAT_VERSION, len(head)) + head + payload


def _read_arrays(directory, payload: bytes) -> dict[str, np.ndarray]:
    arrays = {}
    for entry in directory:
        raw = payload[entry["offset"] : entry["offset"] + entry["nbytes"]]
        arr = np.frombuffer(raw, dtype=np.dtype(entry["dtype"])).reshape(entry["shape"])
        arrays[entry["name"]] = arr.astype(arr.dtype.newbyteorder("="), copy=True)
    return arrays


def loads(data: bytes) -> tuple[Corpus, LshIndex, Optional[dict]]:
    if not data.startswith(MAGIC):
        raise SnapshotError("not a dupescan snapshot (bad magic)")
    pos = len(MAGIC)
    if len(data) < pos + _PREFIX.size:
        raise SnapshotError("truncated snapshot")
    version, head_len = _PREFIX.unpack_from(data, pos)
    if version != FORMAT_VERSION:
        raise SnapshotVersionError(
            f"snapshot format version {version} is not supported (expected {FORMAT_VERSION})"
        )
    pos += _PREFIX.size
    if len(data) < pos + head_len:
        raise SnapshotError("truncated snapshot header")
    try:
        header = json.loads(data[pos : pos + head_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"corrupt snapshot header: {exc}") from exc
    if not isinstance(header, dict):
        raise SnapshotError("corrupt snapshot header: not an object")
    payload = data[pos + head_len :]
    if hashlib.sha256(payload).hexdigest() != header.get("payload_sha256"):
        raise SnapshotError("snapshot payload checksum mismatch")

    try:
        arrays = _read_arrays(header["arrays"], payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotError(f"corrupt array directory: {exc}") from exc

    try:
        corpus = Corpus.from_records(ManuscriptRecord.from_dict(r) for r in header["records"])
    except ValueError as exc:
        raise SnapshotError(f"corrupt record in snapshot: {exc}") from exc

    meta = header["index"]
    family = None
    if "family_a" in arrays:
        family = HashFamily(meta["seed"], arrays["family_a"].astype(np.uint64),
                            arrays["family_b"].astype(np.uint64))
    index = LshIndex(meta["bands"], meta["rows"], family)
    index.seed = meta["seed"]
    ids = list(meta["ids"])
    sigs = arrays["signatures"].astype(np.uint64)
    index.ids = ids
    index._rows = {m: i for i, m in enumerate(ids)}
    index._sigs = list(sigs)
    keys = arrays["bucket_keys"].tolist()
    sizes = arrays["bucket_sizes"].tolist()
    members = arrays["bucket_members"].tolist()
    k = m = 0
    for band, count in enumerate(arrays["band_bucket_counts"].tolist()):
        table = index.tables[band]
        for _ in range(count):
            table[keys[k]] = [ids[i] for i in members[m : m + sizes[k]]]
            m += sizes[k]
            k += 1
    index.freeze()
    return corpus, index, header.get("config")


def save_snapshot(path, corpus: Corpus, index: LshIndex, config: Optional[dict] = None) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(corpus, index, config))


def load_snapshot(path) -> tuple[Corpus, LshIndex]:
    corpus, index, _ = load_snapshot_with_config(path)
    return corpus, index


def load_snapshot_with_config(path) -> tuple[Corpus, LshIndex, Optional[dict]]:
    with open(path, "rb") as fh:
        return loads(fh.read())
