"""Duplicate clusters and the editorial analytics built on them."""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .corpus import Corpus, Decision, ManuscriptRecord
from .lsh import VerifiedPair

RESUBMISSION = "resubmission"
SIMULTANEOUS = "simultaneous"
PUBLISHED_DUPLICATE = "published_duplicate"
OTHER = "other"

# highest severity first
SEVERITY = (PUBLISHED_DUPLICATE, SIMULTANEOUS, RESUBMISSION, OTHER)

_ACCEPTED = (Decision.ACCEPTED, Decision.PUBLISHED)


class UnionFind:
    def __init__(self):
        self.parent: dict[str, str] = {}
        self.size: dict[str, int] = {}

    def add(self, x: str) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1

    def find(self, x: str) -> str:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: str, y: str) -> None:
        self.add(x)
        self.add(y)
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]

    def groups(self) -> list[list[str]]:
        out: dict[str, list[str]] = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return list(out.values())


@dataclass(frozen=True)
class DuplicateCluster:
    cluster_id: int
    member_ids: tuple[str, ...]
    pairs: tuple[VerifiedPair, ...]

    def __len__(self) -> int:
        return len(self.member_ids)

    def to_dict(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "member_ids": list(self.member_ids),
            "pairs": [[p.id_a, p.id_b] for p in self.pairs],
        }


def cluster(pairs: Iterable[VerifiedPair]) -> list[DuplicateCluster]:
    """Connected components of the verified-pair graph.

    Members are sorted, and clusters are numbered in order of their smallest
    member id, so the result does not depend on the order of ``pairs``.
    """
    pairs = sorted(pairs)
    uf = UnionFind()
    for p in pairs:
        uf.union(p.id_a, p.id_b)
    groups = sorted(sorted(g) for g in uf.groups())
    where = {m: i for i, g in enumerate(groups) for m in g}
    by_cluster: list[list[VerifiedPair]] = [[] for _ in groups]
    for p in pairs:
        by_cluster[where[p.id_a]].append(p)
    return [DuplicateCluster(i, tuple(g), tuple(ps))
            for i, (g, ps) in enumerate(zip(groups, by_cluster))]


@dataclass(frozen=True)
class ClassificationPolicy:
    """``analysis_date`` closes the active interval of pending manuscripts
    (default: latest date in the corpus)."""

    analysis_date: Optional[dt.date] = None
    withdrawn_as_rejection: bool = False

    def resolve(self, corpus: Corpus) -> "ClassificationPolicy":
        if self.analysis_date is not None:
            return self
        return ClassificationPolicy(corpus.max_date(), self.withdrawn_as_rejection)


def active_interval(rec: ManuscriptRecord, analysis_date: Optional[dt.date]) -> tuple[dt.date, dt.date]:
    if rec.decided_at is not None:
        return rec.submitted_at, rec.decided_at
    return rec.submitted_at, analysis_date or rec.submitted_at


def overlap_days(a: ManuscriptRecord, b: ManuscriptRecord, analysis_date: Optional[dt.date]) -> int:
    """Number of calendar days both manuscripts were active (inclusive bounds)."""
    sa, ea = active_interval(a, analysis_date)
    sb, eb = active_interval(b, analysis_date)
    return max(0, (min(ea, eb) - max(sa, sb)).days + 1)


def chronological(a: ManuscriptRecord, b: ManuscriptRecord) -> tuple[ManuscriptRecord, ManuscriptRecord]:
    return (a, b) if (a.submitted_at, a.id) <= (b.submitted_at, b.id) else (b, a)


@dataclass(frozen=True)
class PairClassification:
    """Label of one intra-cluster pair.

    ``kind`` is the most severe label in ``labels``. ``earlier``/``later``
    are chronological, independent of argument order. ``jaccard`` is None
    for pairs linked only through other cluster members.
    """

    earlier: str
    later: str
    kind: str
    labels: tuple[str, ...]
    overlap_days: int
    evidence: dict = field(compare=False)
    jaccard: Optional[float] = None

    @property
    def ids(self) -> tuple[str, str]:
        return tuple(sorted((self.earlier, self.later)))

    def to_dict(self) -> dict:
        return {
            "earlier": self.earlier,
            "later": self.later,
            "kind": self.kind,
            "labels": list(self.labels),
            "overlap_days": self.overlap_days,
            "jaccard": self.jaccard,
            "evidence": self.evidence,
        }


def _evidence(rec: ManuscriptRecord, interval: tuple[dt.date, dt.date]) -> dict:
    return {
        "id": rec.id,
        "journal_id": rec.journal_id,
        "submitted_at": rec.submitted_at.isoformat(),
        "decided_at": rec.decided_at.isoformat() if rec.decided_at else None,
        "decision": rec.decision.value,
        "active_until": interval[1].isoformat(),
    }


def classify_pair(pair, corpus: Corpus, policy: ClassificationPolicy = ClassificationPolicy()
                  ) -> PairClassification:
    """Label a pair of manuscripts; ``pair`` is a VerifiedPair or an id 2-tuple."""
    if isinstance(pair, VerifiedPair):
        x, y, jaccard = pair.id_a, pair.id_b, pair.jaccard
    else:
        (x, y), jaccard = pair, None
    policy = policy.resolve(corpus)
    first, second = chronological(corpus[x], corpus[y])
    overlap = overlap_days(first, second, policy.analysis_date)

    rejections = {Decision.REJECTED}
    if policy.withdrawn_as_rejection:
        rejections.add(Decision.WITHDRAWN)

    labels = []
    if first.decision in _ACCEPTED and second.decision in _ACCEPTED:
        labels.append(PUBLISHED_DUPLICATE)
    if overlap >= 1 and first.journal_id != second.journal_id:
        labels.append(SIMULTANEOUS)
    if (first.decision in rejections and first.decided_at is not None
            and second.submitted_at > first.decided_at):
        labels.append(RESUBMISSION)
    if not labels:
        labels.append(OTHER)

    a_int = active_interval(first, policy.analysis_date)
    b_int = active_interval(second, policy.analysis_date)
    return PairClassification(
        earlier=first.id,
        later=second.id,
        kind=labels[0],
        labels=tuple(labels),
        overlap_days=overlap,
        evidence={"earlier": _evidence(first, a_int), "later": _evidence(second, b_int),
                  "analysis_date": policy.analysis_date.isoformat() if policy.analysis_date else None},
        jaccard=jaccard,
    )


def classify_clusters(corpus: Corpus, clusters: Sequence[DuplicateCluster],
                      policy: ClassificationPolicy = ClassificationPolicy()) -> list[PairClassification]:
    """Classify every pair of members inside every cluster."""
    policy = policy.resolve(corpus)
    out = []
    for c in clusters:
        direct = {(p.id_a, p.id_b): p for p in c.pairs}
        for x, y in combinations(c.member_ids, 2):
            out.append(classify_pair(direct.get((x, y), (x, y)), corpus, policy))
    return out


def find_simultaneous(corpus: Corpus, clusters: Sequence[DuplicateCluster],
                      policy: ClassificationPolicy = ClassificationPolicy()) -> list[PairClassification]:
    """Pairs active at different journals on at least one common day, longest overlap first."""
    flags = [c for c in classify_clusters(corpus, clusters, policy) if SIMULTANEOUS in c.labels]
    flags.sort(key=lambda c: (-c.overlap_days, c.ids))
    return flags


def find_published_duplicates(corpus: Corpus, clusters: Sequence[DuplicateCluster],
                              policy: ClassificationPolicy = ClassificationPolicy()
                              ) -> list[PairClassification]:
    flags = [c for c in classify_clusters(corpus, clusters, policy)
             if PUBLISHED_DUPLICATE in c.labels]
    flags.sort(key=lambda c: c.ids)
    return flags


@dataclass(frozen=True)
class StatsReport:
    total_manuscripts: int
    manuscripts_with_earlier_duplicate: int
    earlier_duplicate_fraction: float
    verified_pairs: int
    clustered_pairs: int
    resubmission_pairs_verified: int
    resubmission_pair_fraction: float
    resubmission_pairs_clustered: int
    resubmission_pair_fraction_clustered: float
    simultaneous_manuscripts: int
    simultaneous_manuscript_fraction: float
    simultaneous_pairs: int
    published_duplicate_pair_count: int
    transfers: int = 0
    bad_transfers: int = 0
    bad_transfer_fraction: float = 0.0

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        rows = [
            ("manuscripts", f"{self.total_manuscripts}"),
            ("with earlier near-duplicate",
             f"{self.manuscripts_with_earlier_duplicate} ({self.earlier_duplicate_fraction:.2%})"),
            ("verified pairs", f"{self.verified_pairs}"),
            ("resubmission pairs / verified",
             f"{self.resubmission_pairs_verified} ({self.resubmission_pair_fraction:.2%})"),
            ("resubmission pairs / clustered",
             f"{self.resubmission_pairs_clustered} of {self.clustered_pairs} "
             f"({self.resubmission_pair_fraction_clustered:.2%})"),
            ("simultaneous manuscripts",
             f"{self.simultaneous_manuscripts} ({self.simultaneous_manuscript_fraction:.2%})"),
            ("published duplicate pairs", f"{self.published_duplicate_pair_count}"),
            ("bad transfers",
             f"{self.bad_transfers} of {self.transfers} ({self.bad_transfer_fraction:.2%})"),
        ]
        width = max(len(k) for k, _ in rows)
        return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


def _frac(num: int, den: int) -> float:
    return num / den if den else 0.0


def earlier_duplicate_ids(corpus: Corpus, clusters: Sequence[DuplicateCluster]) -> set[str]:
    """Members with at least one cluster-mate submitted on a strictly earlier day."""
    out = set()
    for c in clusters:
        first = min(corpus[m].submitted_at for m in c.member_ids)
        out.update(m for m in c.member_ids if corpus[m].submitted_at > first)
    return out


def stats(corpus: Corpus, clusters: Sequence[DuplicateCluster],
          classifications: Sequence[PairClassification], journeys: Sequence = ()) -> StatsReport:
    """Corpus-level rates; fractions use the whole corpus as denominator
    except the pair fractions and the bad-transfer fraction (per transfer)."""
    n = len(corpus)
    earlier = earlier_duplicate_ids(corpus, clusters)
    verified = [c for c in classifications if c.jaccard is not None]
    resub_verified = sum(RESUBMISSION in c.labels for c in verified)
    resub_all = sum(RESUBMISSION in c.labels for c in classifications)
    simul = [c for c in classifications if SIMULTANEOUS in c.labels]
    simul_ids = {m for c in simul for m in (c.earlier, c.later)}
    published = sum(PUBLISHED_DUPLICATE in c.labels for c in classifications)
    transfers = sum(len(j.steps) - 1 for j in journeys)
    bad = sum(len(j.bad_transfer_steps) for j in journeys)
    return StatsReport(
        total_manuscripts=n,
        manuscripts_with_earlier_duplicate=len(earlier),
        earlier_duplicate_fraction=_frac(len(earlier), n),
        verified_pairs=len(verified),
        clustered_pairs=len(classifications),
        resubmission_pairs_verified=resub_verified,
        resubmission_pair_fraction=_frac(resub_verified, len(verified)),
        resubmission_pairs_clustered=resub_all,
        resubmission_pair_fraction_clustered=_frac(resub_all, len(classifications)),
        simultaneous_manuscripts=len(simul_ids),
        simultaneous_manuscript_fraction=_frac(len(simul_ids), n),
        simultaneous_pairs=len(simul),
        published_duplicate_pair_count=published,
        transfers=transfers,
        bad_transfers=bad,
        bad_transfer_fraction=_frac(bad, transfers),
    )


def flags_to_jsonl(flags: Iterable[PairClassification]) -> str:
    return "".join(json.dumps(f.to_dict(), sort_keys=True) + "\n" for f in flags)
