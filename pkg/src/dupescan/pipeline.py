"""End-to-end run: ingest -> shingle -> sign -> index -> verify -> analytics."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

from . import __version__
from .config import PipelineConfig
from .corpus import Corpus, ManuscriptRecord, ingest_file
from .dedup import (ClassificationPolicy, DuplicateCluster, PairClassification, StatsReport,
                    SIMULTANEOUS, PUBLISHED_DUPLICATE, classify_clusters, cluster,
                    flags_to_jsonl, stats)
from .journeys import Journey, build_journeys, export_journeys, journeys_to_jsonl
from .lsh import LshIndex, VerifiedPair, build, candidates, pairs_to_csv, pairs_to_jsonl, query, verify
from .minhash import HashFamily, MinHashSignature, sign, sign_matrix
from .shingling import ShingleSet, shingle
from .snapshot import save_snapshot

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"stage {stage!r} failed: {exc}")
        self.stage = stage
        self.original = exc


@dataclass
class Detection:
    shingle_sets: dict[str, ShingleSet]
    too_short: list[str]
    index: LshIndex
    candidates: set[tuple[str, str]]
    pairs: list[VerifiedPair]


@dataclass
class Analysis:
    clusters: list[DuplicateCluster]
    classifications: list[PairClassification]
    simultaneous: list[PairClassification]
    published_duplicates: list[PairClassification]
    journeys: list[Journey]
    stats: StatsReport


@dataclass
class PipelineResult:
    corpus: Corpus
    detection: Detection
    analysis: Analysis
    timings: dict[str, float] = field(default_factory=dict)
    out_dir: Optional[Path] = None


class _Timer:
    def __init__(self):
        self.timings: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        t0 = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except Exception as exc:
            raise StageError(name, exc) from exc
        self.timings[name] = time.perf_counter() - t0
        log.info("%-10s %.3fs", name, self.timings[name])


def shingle_records(records: Sequence[ManuscriptRecord], config: PipelineConfig
                    ) -> tuple[dict[str, ShingleSet], list[str]]:
    sets, short = {}, []
    for rec in records:
        s = shingle(rec, config.k, config.seed)
        if s.too_short:
            short.append(rec.id)
        else:
            sets[rec.id] = s
    if short:
        log.warning("%d record(s) too short to shingle at k=%d", len(short), config.k)
    return sets, short


def family_for(config: PipelineConfig) -> HashFamily:
    return HashFamily.from_seed(config.seed, config.num_hashes)


def build_index(sets: dict[str, ShingleSet], config: PipelineConfig, threads: int = 1,
                family: Optional[HashFamily] = None) -> LshIndex:
    family = family or family_for(config)
    ordered = list(sets.values())
    matrix = sign_matrix(ordered, family, threads)
    sigs = (MinHashSignature(s.manuscript_id, row, family.seed) for s, row in zip(ordered, matrix))
    return build(sigs, config.bands, config.rows, family)


def detect(corpus: Corpus, config: PipelineConfig, threads: int = 1,
           timer: Optional[_Timer] = None) -> Detection:
    timer = timer or _Timer()
    with timer.stage("shingle"):
        sets, short = shingle_records(corpus.records, config)
    with timer.stage("index"):
        index = build_index(sets, config, threads)
    with timer.stage("candidates"):
        cands = candidates(index)
    with timer.stage("verify"):
        pairs = verify(sorted(cands), sets, config.threshold, index)
    return Detection(sets, short, index, cands, pairs)


def analyze(corpus: Corpus, pairs: Sequence[VerifiedPair], config: PipelineConfig,
            timer: Optional[_Timer] = None) -> Analysis:
    timer = timer or _Timer()
    policy = ClassificationPolicy(config.analysis_date, config.withdrawn_as_rejection)
    with timer.stage("cluster"):
        clusters = cluster(pairs)
    with timer.stage("classify"):
        classes = classify_clusters(corpus, clusters, policy)
        simul = sorted((c for c in classes if SIMULTANEOUS in c.labels),
                       key=lambda c: (-c.overlap_days, c.ids))
        published = sorted((c for c in classes if PUBLISHED_DUPLICATE in c.labels),
                           key=lambda c: c.ids)
    with timer.stage("journeys"):
        journeys = build_journeys(corpus, clusters)
    with timer.stage("stats"):
        report = stats(corpus, clusters, classes, journeys)
    return Analysis(clusters, classes, simul, published, journeys, report)


def screen(index: LshIndex, indexed: dict[str, ShingleSet], probes: Sequence[ManuscriptRecord],
           config: PipelineConfig) -> dict[str, list[VerifiedPair]]:
    """Match each probe record against an indexed corpus."""
    family = index.family or family_for(config)
    out = {}
    for rec in probes:
        s = shingle(rec, config.k, config.seed)
        out[rec.id] = [] if s.too_short else query(index, sign(s, family), s, indexed,
                                                   config.threshold)
    return out


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _write(out: Path, name: str, text: str, digests: dict[str, str]) -> None:
    data = text.encode("utf-8")
    (out / name).write_bytes(data)
    digests[name] = _sha256(data)


def write_outputs(out: Path, result: PipelineResult, config: PipelineConfig,
                  input_path: Optional[Path], input_digest: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    digests: dict[str, str] = {}
    det, ana = result.detection, result.analysis
    save_snapshot(out / "index.snap", result.corpus, det.index, config.to_dict())
    digests["index.snap"] = _sha256((out / "index.snap").read_bytes())
    _write(out, "pairs.csv", pairs_to_csv(det.pairs), digests)
    _write(out, "pairs.jsonl", pairs_to_jsonl(det.pairs), digests)
    _write(out, "clusters.jsonl",
           "".join(json.dumps(c.to_dict(), sort_keys=True) + "\n" for c in ana.clusters), digests)
    _write(out, "classifications.jsonl", flags_to_jsonl(ana.classifications), digests)
    _write(out, "simultaneous.jsonl", flags_to_jsonl(ana.simultaneous), digests)
    _write(out, "published_duplicates.jsonl", flags_to_jsonl(ana.published_duplicates), digests)
    _write(out, "journeys.jsonl", journeys_to_jsonl(ana.journeys), digests)
    _write(out, "journeys.dot", export_journeys(ana.journeys), digests)
    _write(out, "stats.json", ana.stats.to_json(), digests)
    _write(out, "stats.txt", ana.stats.to_table(), digests)
    manifest = {
        "tool": "dupescan",
        "version": __version__,
        "config": config.to_dict(),
        "seed": config.seed,
        "input": {
            "name": input_path.name if input_path else None,
            "sha256": input_digest,
            "records": len(result.corpus),
            "rejected_lines": [str(e) for e in result.corpus.rejected],
        },
        "too_short": det.too_short,
        "stages": list(result.timings),
        "outputs": digests,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")


def run_pipeline(config: PipelineConfig, input_path, out_dir=None, threads: int = 1,
                 skip_duplicate_ids: bool = False) -> PipelineResult:
    """Run every stage on a JSONL file; write reports to ``out_dir`` if given.

    The output directory depends only on the config and the input bytes.
    Stage timings are logged and returned, never written.
    """
    timer = _Timer()
    input_path = Path(input_path)
    with timer.stage("ingest"):
        raw = input_path.read_bytes()
        corpus = ingest_file(input_path, skip_duplicate_ids=skip_duplicate_ids)
    det = detect(corpus, config, threads, timer)
    ana = analyze(corpus, det.pairs, config, timer)
    result = PipelineResult(corpus, det, ana, timer.timings)
    if out_dir is not None:
        with timer.stage("write"):
            write_outputs(Path(out_dir), result, config, input_path, _sha256(raw))
        result.out_dir = Path(out_dir)
    return result


def effective_threads(requested: Optional[int]) -> int:
    if requested is None or requested < 1:
        return os.cpu_count() or 1
    return requested
