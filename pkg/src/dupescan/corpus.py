"""Manuscript records and JSONL ingestion."""

from __future__ import annotations

import datetime as dt
import enum
import json
import logging
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional, Sequence, Union

log = logging.getLogger(__name__)

RECORD_FIELDS = (
    "id",
    "journal_id",
    "title",
    "abstract",
    "submitted_at",
    "decided_at",
    "decision",
    "transferred_from",
)


class Decision(str, enum.Enum):
    PENDING = "pending"
    REJECTED = "rejected"
    ACCEPTED = "accepted"
    PUBLISHED = "published"
    WITHDRAWN = "withdrawn"

    def __str__(self) -> str:
        return self.value


class ValidationError(ValueError):
    """A record violates the schema or one of its invariants."""


class DuplicateIdError(ValidationError):
    def __init__(self, record_id: str, line: int, first_line: int):
        super().__init__(
            f"line {line}: duplicate id {record_id!r} (first seen on line {first_line})"
        )
        self.record_id = record_id
        self.line = line


@dataclass(frozen=True)
class ManuscriptRecord:
    id: str
    journal_id: str
    title: str
    abstract: str
    submitted_at: dt.date
    decided_at: Optional[dt.date]
    decision: Decision
    transferred_from: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.decision, Decision):
            object.__setattr__(self, "decision", Decision(self.decision))
        if not self.id:
            raise ValidationError("id must be non-empty")
        if self.decided_at is not None and self.decided_at < self.submitted_at:
            raise ValidationError(
                f"{self.id}: decided_at {self.decided_at} precedes submitted_at {self.submitted_at}"
            )
        if (self.decision is Decision.PENDING) != (self.decided_at is None):
            raise ValidationError(
                f"{self.id}: decided_at must be absent exactly when decision is pending"
            )

    @classmethod
    def from_dict(cls, obj: dict) -> "ManuscriptRecord":
        if not isinstance(obj, dict):
            raise ValidationError("record must be a JSON object")
        unknown = set(obj) - set(RECORD_FIELDS)
        if unknown:
            raise ValidationError(f"unknown fields: {sorted(unknown)}")
        for name in ("id", "journal_id", "title", "submitted_at", "decision"):
            if obj.get(name) is None:
                raise ValidationError(f"missing required field {name!r}")
        for name in ("id", "journal_id", "title"):
            if not isinstance(obj[name], str):
                raise ValidationError(f"field {name!r} must be a string")
        abstract = obj.get("abstract") or ""
        if not isinstance(abstract, str):
            raise ValidationError("field 'abstract' must be a string")
        transferred_from = obj.get("transferred_from")
        if transferred_from is not None and not isinstance(transferred_from, str):
            raise ValidationError("field 'transferred_from' must be a string or null")
        try:
            decision = Decision(obj["decision"])
        except ValueError:
            raise ValidationError(f"unknown decision {obj['decision']!r}") from None
        return cls(
            id=obj["id"],
            journal_id=obj["journal_id"],
            title=obj["title"],
            abstract=abstract,
            submitted_at=_parse_date(obj["submitted_at"], "submitted_at"),
            decided_at=_parse_date(obj.get("decided_at"), "decided_at"),
            decision=decision,
            transferred_from=transferred_from,
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "journal_id": self.journal_id,
            "title": self.title,
            "abstract": self.abstract,
            "submitted_at": self.submitted_at.isoformat(),
            "decided_at": self.decided_at.isoformat() if self.decided_at else None,
            "decision": self.decision.value,
            "transferred_from": self.transferred_from,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


def _parse_date(value, name: str) -> Optional[dt.date]:
    if value is None:
        return None
    if not isinstance(value, str):
        raise ValidationError(f"field {name!r} must be a YYYY-MM-DD string")
    try:
        return dt.date.fromisoformat(value)
    except ValueError:
        raise ValidationError(f"field {name!r}: invalid date {value!r}") from None


@dataclass(frozen=True)
class LineError:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


@dataclass
class Corpus:
    """Ordered, id-indexed collection of manuscript records.

    ``rejected`` carries the per-line problems found during ingestion; it
    takes no part in equality.
    """

    records: tuple[ManuscriptRecord, ...] = ()
    id_index: dict[str, int] = field(default_factory=dict)
    rejected: list[LineError] = field(default_factory=list, compare=False, repr=False)

    @classmethod
    def from_records(cls, records: Iterable[ManuscriptRecord]) -> "Corpus":
        records = tuple(records)
        index: dict[str, int] = {}
        for pos, rec in enumerate(records):
            if rec.id in index:
                raise ValidationError(f"duplicate id {rec.id!r}")
            index[rec.id] = pos
        return cls(records, index)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ManuscriptRecord]:
        return iter(self.records)

    def __contains__(self, record_id: object) -> bool:
        return record_id in self.id_index

    def __getitem__(self, record_id: str) -> ManuscriptRecord:
        try:
            return self.records[self.id_index[record_id]]
        except KeyError:
            raise KeyError(f"unknown manuscript id {record_id!r}") from None

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    def max_date(self) -> Optional[dt.date]:
        dates = [r.submitted_at for r in self.records]
        dates += [r.decided_at for r in self.records if r.decided_at is not None]
        return max(dates) if dates else None

    def to_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)


Source = Union[str, IO[str], Iterable[str]]


def ingest(stream: Source, skip_duplicate_ids: bool = False) -> Corpus:
    """Load a JSONL record stream into a :class:`Corpus`.

    Malformed or invalid lines are skipped and recorded in
    ``corpus.rejected`` with their 1-based line numbers. A repeated id raises
    :class:`DuplicateIdError` unless ``skip_duplicate_ids`` is set, in which
    case the later occurrence is skipped and recorded like any other bad line.
    Blank lines are ignored.
    """
    if isinstance(stream, str):
        stream = stream.splitlines()
    records: list[ManuscriptRecord] = []
    index: dict[str, int] = {}
    first_line: dict[str, int] = {}
    rejected: list[LineError] = []

    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            rec = ManuscriptRecord.from_dict(json.loads(line))
        except json.JSONDecodeError as exc:
            rejected.append(LineError(lineno, f"malformed JSON: {exc.msg}"))
            continue
        except ValidationError as exc:
            rejected.append(LineError(lineno, str(exc)))
            continue
        if rec.id in index:
            err = DuplicateIdError(rec.id, lineno, first_line[rec.id])
            if not skip_duplicate_ids:
                raise err
            rejected.append(LineError(lineno, f"duplicate id {rec.id!r}"))
            continue
        index[rec.id] = len(records)
        first_line[rec.id] = lineno
        records.append(rec)

    for err in rejected:
        log.warning("skipped %s", err)
    return Corpus(tuple(records), index, rejected)


def ingest_file(path, skip_duplicate_ids: bool = False) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return ingest(fh, skip_duplicate_ids=skip_duplicate_ids)


def write_jsonl(records: Sequence[ManuscriptRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")
