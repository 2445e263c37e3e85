"""Manuscript journeys, bad transfers and transfer recommendations."""

from __future__ import annotations

import datetime as dt
import json
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .corpus import Corpus, Decision
from .dedup import DuplicateCluster

log = logging.getLogger(__name__)

DEFAULT_MIN_SUPPORT = 3


@dataclass(frozen=True)
class JourneyStep:
    manuscript_id: str
    journal_id: str
    submitted_at: dt.date
    decision: Decision
    decided_at: Optional[dt.date]
    transferred_from: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "manuscript_id": self.manuscript_id,
            "journal_id": self.journal_id,
            "submitted_at": self.submitted_at.isoformat(),
            "decision": self.decision.value,
            "decided_at": self.decided_at.isoformat() if self.decided_at else None,
            "transferred_from": self.transferred_from,
        }


@dataclass(frozen=True)
class Journey:
    cluster_id: int
    steps: tuple[JourneyStep, ...]
    bad_transfer_steps: tuple[int, ...]

    def predecessor(self, i: int) -> Optional[int]:
        """Index of the step that step ``i`` was transferred from.

        An explicit ``transferred_from`` naming an earlier step wins;
        otherwise the previous step is assumed.
        """
        if i == 0:
            return None
        src = self.steps[i].transferred_from
        if src is not None:
            for j in range(i):
                if self.steps[j].manuscript_id == src:
                    return j
        return i - 1

    def to_dict(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "steps": [s.to_dict() for s in self.steps],
            "bad_transfer_steps": list(self.bad_transfer_steps),
        }


def mark_bad_transfers(journals: Sequence[str]) -> tuple[int, ...]:
    seen: set[str] = set()
    bad = []
    for i, j in enumerate(journals):
        if j in seen:
            bad.append(i)
        seen.add(j)
    return tuple(bad)


def build_journey(corpus: Corpus, c: DuplicateCluster) -> Journey:
    recs = sorted((corpus[m] for m in c.member_ids), key=lambda r: (r.submitted_at, r.id))
    steps = tuple(
        JourneyStep(r.id, r.journal_id, r.submitted_at, r.decision, r.decided_at, r.transferred_from)
        for r in recs
    )
    return Journey(c.cluster_id, steps, mark_bad_transfers([s.journal_id for s in steps]))


def build_journeys(corpus: Corpus, clusters: Iterable[DuplicateCluster]) -> list[Journey]:
    """One journey per cluster of two or more manuscripts, in cluster order."""
    return [build_journey(corpus, c) for c in clusters if len(c.member_ids) >= 2]


@dataclass(frozen=True)
class Destination:
    journal_id: str
    rate: float
    support: int
    accepted: int

    def to_dict(self) -> dict:
        return {"journal_id": self.journal_id, "rate": self.rate,
                "support": self.support, "accepted": self.accepted}


@dataclass(frozen=True)
class TransferRecommendation:
    from_journal: str
    ranked_destinations: tuple[Destination, ...]

    def to_dict(self) -> dict:
        return {"from_journal": self.from_journal,
                "ranked_destinations": [d.to_dict() for d in self.ranked_destinations]}


def smoothed_rate(accepted: int, total: int) -> float:
    return (accepted + 1) / (total + 2)


def transfer_outcomes(journeys: Iterable[Journey], from_journal: str) -> dict[str, list[int]]:
    """journal -> [accepted, total] over steps sent on right after a rejection at ``from_journal``.

    Pending destination steps have no outcome yet and are not counted.
    """
    counts: dict[str, list[int]] = {}
    for jr in journeys:
        for i, step in enumerate(jr.steps):
            p = jr.predecessor(i)
            if p is None:
                continue
            src = jr.steps[p]
            if src.journal_id != from_journal or src.decision is not Decision.REJECTED:
                continue
            if step.journal_id == from_journal or step.decision is Decision.PENDING:
                continue
            c = counts.setdefault(step.journal_id, [0, 0])
            c[0] += step.decision in (Decision.ACCEPTED, Decision.PUBLISHED)
            c[1] += 1
    return counts


def recommend_transfers(journeys: Sequence[Journey], from_journal: str,
                        min_support: int = DEFAULT_MIN_SUPPORT) -> TransferRecommendation:
    """Rank destinations by add-one smoothed acceptance after a rejection at ``from_journal``."""
    if not any(s.journal_id == from_journal for jr in journeys for s in jr.steps):
        log.warning("journal %r does not occur in any journey", from_journal)
        return TransferRecommendation(from_journal, ())
    dests = [
        Destination(j, smoothed_rate(acc, tot), tot, acc)
        for j, (acc, tot) in transfer_outcomes(journeys, from_journal).items()
        if tot >= min_support
    ]
    dests.sort(key=lambda d: (-d.rate, -d.support, d.journal_id))
    return TransferRecommendation(from_journal, tuple(dests))


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def _q(s: str) -> str:
    return '"' + _esc(s) + '"'


def _journey_body(journey: Journey) -> list[str]:
    lines = [f"  // cluster {journey.cluster_id}"]
    for s in journey.steps:
        # \n is DOT's centered line break
        label = '"' + _esc(s.journal_id) + "\\n" + s.submitted_at.isoformat() + '"'
        lines.append(f"  {_q(s.manuscript_id)} [label={label}];")
    bad = set(journey.bad_transfer_steps)
    for i in range(1, len(journey.steps)):
        edge = f"  {_q(journey.steps[i - 1].manuscript_id)} -> {_q(journey.steps[i].manuscript_id)}"
        lines.append(edge + (" [color=red];" if i in bad else ";"))
    return lines


_HEADER = ["  rankdir=LR;", "  node [shape=box];"]


def export_journey(journey: Journey) -> str:
    """DOT graph: one node per step, one edge per consecutive pair, revisits in red."""
    lines = [f"digraph journey_{journey.cluster_id} {{", *_HEADER, *_journey_body(journey), "}"]
    return "\n".join(lines) + "\n"


def export_journeys(journeys: Sequence[Journey]) -> str:
    if not journeys:
        return "digraph journeys {\n}\n"
    lines = ["digraph journeys {", *_HEADER]
    for jr in journeys:
        lines.extend(_journey_body(jr))
    lines.append("}")
    return "\n".join(lines) + "\n"


def journeys_to_jsonl(journeys: Iterable[Journey]) -> str:
    return "".join(json.dumps(j.to_dict(), sort_keys=True) + "\n" for j in journeys)
