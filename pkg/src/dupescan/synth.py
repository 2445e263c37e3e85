"""Synthetic manuscript corpora with planted near-duplicate structure.

Every planted cluster is a set of independent light perturbations of one
hidden template, so all of its members are pairwise near-duplicates. The
cluster kinds are:

* ``chain``: resubmission chain, every member but the last rejected,
  journals all distinct;
* ``bad_transfer``: three-member chain J1 -> J2 -> J1;
* ``simultaneous``: two members active at different journals at once;
* ``published_duplicate``: two non-overlapping members, both accepted or
  published, at different journals.

Planted rates are exact by construction: ``near_duplicate_rate * size``
manuscripts have an earlier cluster-mate, ``simultaneous_rate * size``
manuscripts sit in a simultaneous pair, and ``bad_transfer_rate`` of all
journey transfers revisit a journal.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import json
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from .corpus import Decision, ManuscriptRecord
from .shingling import DEFAULT_K, exact_jaccard, shingle_tokens

_SYLLABLES = [c + v for c in "bcdfghklmnprstvz" for v in "aeiou"] + ["qua", "tri", "ost", "ent"]

CHAIN, BAD_TRANSFER, SIMULTANEOUS, PUBLISHED = (
    "chain", "bad_transfer", "simultaneous", "published_duplicate")


class InfeasibleSpecError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    size: int = 1000
    near_duplicate_rate: float = 0.0
    simultaneous_rate: float = 0.0
    bad_transfer_rate: float = 0.0
    published_duplicates: int = 0
    replace_fraction: float = 0.005
    delete_fraction: float = 0.0
    journals: int = 200
    start_date: dt.date = dt.date(2018, 1, 1)
    end_date: dt.date = dt.date(2020, 10, 31)
    seed: int = 0
    threshold: float = 0.8
    k: int = DEFAULT_K
    vocabulary: int = 5000
    title_words: tuple[int, int] = (6, 14)
    abstract_words: tuple[int, int] = (60, 160)

    def __post_init__(self):
        for name in ("start_date", "end_date"):
            v = getattr(self, name)
            if isinstance(v, str):
                object.__setattr__(self, name, dt.date.fromisoformat(v))
        for name in ("title_words", "abstract_words"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def validate(self) -> None:
        for name in ("near_duplicate_rate", "simultaneous_rate", "bad_transfer_rate",
                     "replace_fraction", "delete_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InfeasibleSpecError(f"{name} must be in [0, 1] (got {v})")
        if self.size < 0 or self.published_duplicates < 0:
            raise InfeasibleSpecError("size and published_duplicates must be non-negative")
        if self.journals < 4:
            raise InfeasibleSpecError("need at least 4 journals")
        if (self.end_date - self.start_date).days < 800:
            raise InfeasibleSpecError("date range must span at least 800 days")
        if self.title_words[0] < 1 or self.abstract_words[0] < 0:
            raise InfeasibleSpecError("word-count ranges must be positive")
        if self.vocabulary < 100:
            raise InfeasibleSpecError("vocabulary too small for unrelated texts")
        bound = self.pairwise_jaccard_estimate()
        if bound < self.threshold:
            raise InfeasibleSpecError(
                f"perturbation too aggressive: two planted duplicates of the shortest "
                f"document are expected near Jaccard {bound:.3f} < threshold {self.threshold}"
            )

    def edits(self, n_tokens: int) -> tuple[int, int]:
        rep = round(self.replace_fraction * n_tokens)
        dele = round(self.delete_fraction * n_tokens)
        if self.replace_fraction > 0:
            rep = max(rep, 1)
        if self.delete_fraction > 0:
            dele = max(dele, 1)
        return rep, dele

    def pairwise_jaccard_estimate(self) -> float:
        """Jaccard of two members of the shortest template when every edit
        lands in its own k-gram window."""
        n = self.title_words[0] + self.abstract_words[0]
        shingles = max(self.title_words[0] - self.k + 1, 0) + max(self.abstract_words[0] - self.k + 1, 0)
        if shingles == 0:
            return 0.0
        rep, dele = self.edits(n)
        changed = min(self.k * (rep + dele), shingles)
        return (shingles - 2 * changed) / (shingles + 2 * changed) if changed else 1.0

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["start_date"] = self.start_date.isoformat()
        d["end_date"] = self.end_date.isoformat()
        d["title_words"] = list(self.title_words)
        d["abstract_words"] = list(self.abstract_words)
        return d


@dataclass
class SynthCorpus:
    records: list[ManuscriptRecord]
    truth: dict

    def to_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    def truth_json(self) -> str:
        return json.dumps(self.truth, indent=2, sort_keys=True) + "\n"

    def write(self, corpus_path, truth_path) -> None:
        with open(corpus_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_jsonl())
        with open(truth_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.truth_json())


def _vocabulary(rng: np.random.Generator, size: int) -> list[str]:
    words: dict[str, None] = {}
    while len(words) < size:
        n = int(rng.integers(2, 5))
        words["".join(_SYLLABLES[i] for i in rng.integers(0, len(_SYLLABLES), n))] = None
    return list(words)


@dataclass
class _Doc:
    title: list[str]
    abstract: list[str]


@dataclass
class _Member:
    journal: str
    submitted: dt.date
    decided: Optional[dt.date]
    decision: Decision
    transferred_from: Optional[int] = None  # position within its cluster


class _Generator:
    def __init__(self, spec: SynthSpec):
        self.spec = spec
        self.rng = np.random.default_rng(spec.seed)
        self.vocab = _vocabulary(self.rng, spec.vocabulary)
        self.journal_ids = [f"J{i:04d}" for i in range(1, spec.journals + 1)]
        self.span_days = (spec.end_date - spec.start_date).days

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]."""
        return int(self.rng.integers(lo, hi + 1))

    def choice(self, options, p=None):
        return options[int(self.rng.choice(len(options), p=p))]

    def words(self, n: int) -> list[str]:
        return [self.vocab[i] for i in self.rng.integers(0, len(self.vocab), n)]

    def template(self) -> _Doc:
        s = self.spec
        return _Doc(self.words(self.randint(*s.title_words)),
                    self.words(self.randint(*s.abstract_words)))

    def perturb(self, doc: _Doc) -> _Doc:
        tokens = [(0, w) for w in doc.title] + [(1, w) for w in doc.abstract]
        rep, dele = self.spec.edits(len(tokens))
        if rep:
            for pos in self.rng.choice(len(tokens), size=min(rep, len(tokens)), replace=False):
                field, old = tokens[pos]
                new = old
                while new == old:
                    new = self.words(1)[0]
                tokens[pos] = (field, new)
        if dele:
            drop = set(self.rng.choice(len(tokens), size=min(dele, len(tokens) - 1),
                                       replace=False).tolist())
            tokens = [t for i, t in enumerate(tokens) if i not in drop]
        return _Doc([w for f, w in tokens if f == 0], [w for f, w in tokens if f == 1])

    def shingled(self, doc: _Doc):
        return shingle_tokens("", doc.title + ["\x1f"] + doc.abstract, self.spec.k)

    def cluster_texts(self, m: int) -> list[_Doc]:
        """``m`` perturbations of one template, all pairwise at or above threshold."""
        for _ in range(100):
            base = self.template()
            docs = [self.perturb(base) for _ in range(m)]
            sets = [self.shingled(d) for d in docs]
            if all(exact_jaccard(a, b) >= self.spec.threshold for a, b in combinations(sets, 2)):
                return docs
        raise InfeasibleSpecError(
            "could not draw planted duplicates above the threshold; lower the perturbation"
        )

    def review_days(self) -> int:
        return self.randint(14, 120)

    def place(self, members: list[_Member], span: int) -> None:
        """Shift a cluster timeline (laid out from day 0) to a random start date."""
        offset = dt.timedelta(days=self.randint(0, self.span_days - span))
        base = self.spec.start_date + offset
        for m in members:
            m.submitted = base + (m.submitted - dt.date.min)
            if m.decided is not None:
                m.decided = base + (m.decided - dt.date.min)

    def final_decision(self) -> Decision:
        return self.choice([Decision.REJECTED, Decision.ACCEPTED, Decision.PUBLISHED,
                            Decision.PENDING, Decision.WITHDRAWN], p=[0.35, 0.25, 0.2, 0.1, 0.1])

    def chain(self, journals: list[str]) -> list[_Member]:
        day0 = dt.date.min
        members, t = [], 0
        for i, j in enumerate(journals):
            sub = day0 + dt.timedelta(days=t)
            last = i == len(journals) - 1
            decision = self.final_decision() if last else Decision.REJECTED
            dur = self.review_days()
            decided = None if decision is Decision.PENDING else sub + dt.timedelta(days=dur)
            src = i - 1 if i and self.rng.random() < 0.5 else None
            members.append(_Member(j, sub, decided, decision, src))
            t += dur + self.randint(1, 45)
        self.place(members, t)
        return members

    def simultaneous(self) -> list[_Member]:
        ja, jb = self.distinct_journals(2)
        day0 = dt.date.min
        dur_a = self.randint(30, 120)
        a = _Member(ja, day0, day0 + dt.timedelta(days=dur_a),
                    self.choice([Decision.REJECTED, Decision.WITHDRAWN], p=[0.8, 0.2]))
        b_sub = day0 + dt.timedelta(days=self.randint(1, dur_a - 1))
        b_decision = self.final_decision()
        b_dec = None if b_decision is Decision.PENDING else b_sub + dt.timedelta(days=self.review_days())
        b = _Member(jb, b_sub, b_dec, b_decision)
        self.place([a, b], dur_a + 130)
        return [a, b]

    def published_pair(self) -> list[_Member]:
        ja, jb = self.distinct_journals(2)
        day0 = dt.date.min
        dur_a, gap, dur_b = self.review_days(), self.randint(1, 45), self.review_days()
        accepted = [Decision.ACCEPTED, Decision.PUBLISHED]
        a = _Member(ja, day0, day0 + dt.timedelta(days=dur_a), self.choice(accepted))
        b_sub = a.decided + dt.timedelta(days=gap)
        b = _Member(jb, b_sub, b_sub + dt.timedelta(days=dur_b), self.choice(accepted))
        self.place([a, b], dur_a + gap + dur_b)
        return [a, b]

    def distinct_journals(self, n: int) -> list[str]:
        idx = self.rng.choice(len(self.journal_ids), size=n, replace=False)
        return [self.journal_ids[i] for i in idx]

    def singleton(self) -> _Member:
        decision = self.choice(list(Decision), p=[0.1, 0.45, 0.2, 0.15, 0.1])
        sub = self.spec.start_date + dt.timedelta(days=self.randint(0, self.span_days - 130))
        decided = None if decision is Decision.PENDING else sub + dt.timedelta(days=self.review_days())
        return _Member(self.choice(self.journal_ids), sub, decided, decision)


def plan_clusters(spec: SynthSpec, rng: np.random.Generator) -> list[tuple[str, int]]:
    """(kind, member count) for every planted cluster."""
    n = spec.size
    with_earlier = round(spec.near_duplicate_rate * n)
    n_simul = round(spec.simultaneous_rate * n / 2)
    n_bad = round(spec.bad_transfer_rate * with_earlier)
    n_pub = spec.published_duplicates
    rest = with_earlier - n_simul - n_pub - 2 * n_bad
    if rest < 0:
        raise InfeasibleSpecError(
            "near_duplicate_rate too low to hold the planted simultaneous, "
            "published-duplicate and bad-transfer clusters"
        )
    plan = ([(SIMULTANEOUS, 2)] * n_simul + [(PUBLISHED, 2)] * n_pub
            + [(BAD_TRANSFER, 3)] * n_bad)
    while rest > 0:
        m = min(int(rng.choice([2, 3, 4], p=[0.6, 0.3, 0.1])), rest + 1)
        plan.append((CHAIN, m))
        rest -= m - 1
    if sum(m for _, m in plan) > n:
        raise InfeasibleSpecError("planted clusters need more manuscripts than the corpus size")
    return plan


def generate_synthetic(spec: SynthSpec) -> SynthCorpus:
    """Deterministic corpus plus ground truth for ``spec``.

    Raises :class:`InfeasibleSpecError` before producing anything if the
    spec cannot be honoured.
    """
    spec.validate()
    g = _Generator(spec)
    plan = plan_clusters(spec, g.rng)

    entries: list[tuple[_Doc, _Member, int]] = []  # (text, member, cluster number or -1)
    clusters: list[tuple[str, list[int]]] = []
    for kind, m in plan:
        if kind == SIMULTANEOUS:
            members = g.simultaneous()
        elif kind == PUBLISHED:
            members = g.published_pair()
        elif kind == BAD_TRANSFER:
            j1, j2 = g.distinct_journals(2)
            members = g.chain([j1, j2, j1])
        else:
            members = g.chain(g.distinct_journals(m))
        docs = g.cluster_texts(len(members))
        start = len(entries)
        entries.extend((d, mem, len(clusters)) for d, mem in zip(docs, members))
        clusters.append((kind, list(range(start, start + len(members)))))
    while len(entries) < spec.size:
        entries.append((g.template(), g.singleton(), -1))

    order = g.rng.permutation(len(entries))
    width = max(6, len(str(len(entries))))
    ids = [""] * len(entries)
    for new_pos, old in enumerate(order):
        ids[old] = f"M{new_pos + 1:0{width}d}"

    records = []
    for old in order:
        doc, mem, ci = entries[old]
        src = None
        if ci >= 0 and mem.transferred_from is not None:
            src = ids[clusters[ci][1][mem.transferred_from]]
        records.append(ManuscriptRecord(
            id=ids[old],
            journal_id=mem.journal,
            title=_sentence(doc.title, end=""),
            abstract=_paragraph(doc.abstract, g.rng),
            submitted_at=mem.submitted,
            decided_at=mem.decided,
            decision=mem.decision,
            transferred_from=src,
        ))
    return SynthCorpus(records, _truth(spec, entries, clusters, ids))


def _sentence(words: list[str], end: str = ".") -> str:
    if not words:
        return ""
    return " ".join([words[0].capitalize(), *words[1:]]) + end


def _paragraph(words: list[str], rng: np.random.Generator) -> str:
    out, i = [], 0
    while i < len(words):
        n = int(rng.integers(8, 21))
        out.append(_sentence(words[i : i + n]))
        i += n
    return " ".join(out)


def _truth(spec: SynthSpec, entries, clusters, ids) -> dict:
    n = spec.size
    out_clusters, dup_pairs, simul, published, bad = [], [], [], [], []
    earlier: set[str] = set()
    transfers = 0
    for ci, (kind, members) in enumerate(clusters):
        chron = sorted(members, key=lambda e: (entries[e][1].submitted, ids[e]))
        mids = [ids[e] for e in chron]
        out_clusters.append({"kind": kind, "members": mids})
        dup_pairs.extend(sorted((min(a, b), max(a, b))) for a, b in combinations(mids, 2))
        first = entries[chron[0]][1].submitted
        earlier.update(ids[e] for e in chron if entries[e][1].submitted > first)
        transfers += len(mids) - 1
        pair = sorted(mids)
        if kind == SIMULTANEOUS:
            simul.append(pair)
        elif kind == PUBLISHED:
            published.append(pair)
        elif kind == BAD_TRANSFER:
            last = entries[chron[-1]][1]
            bad.append({"cluster": ci, "manuscript_id": mids[-1], "journal_id": last.journal})
    simul_ids = {m for p in simul for m in p}
    return {
        "spec": spec.to_dict(),
        "clusters": out_clusters,
        "duplicate_pairs": sorted(dup_pairs),
        "duplicate_relationships": len(earlier),
        "earlier_duplicate_ids": sorted(earlier),
        "simultaneous_pairs": sorted(simul),
        "published_duplicate_pairs": sorted(published),
        "bad_transfers": bad,
        "transfers": transfers,
        "rates": {
            "earlier_duplicate_fraction": len(earlier) / n if n else 0.0,
            "simultaneous_manuscript_fraction": len(simul_ids) / n if n else 0.0,
            "bad_transfer_fraction": len(bad) / transfers if transfers else 0.0,
        },
    }
