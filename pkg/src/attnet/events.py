"""Event and follower-edge ingestion.

Two line-oriented inputs are supported:

* events, as JSONL (``{"user", "ts", "kind", "id", "tags"}``) or as headerless
  CSV ``user,ts,kind,id,tags`` with semicolon-joined tags;
* follower edges, as headerless CSV ``follower,followee``.

Malformed lines are skipped and tallied in a :class:`ParseReport`; only an
unreadable source is fatal.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, NamedTuple, Sequence, Union

Source = Union[str, os.PathLike, BinaryIO, bytes]

MAX_REASONS = 10
EVENT_KEYS = frozenset({"user", "ts", "kind", "id", "tags"})


class IngestError(Exception):
    """Raised when a source cannot be read at all."""


class Kind(str, enum.Enum):
    TWEET = "tweet"
    RETWEET = "retweet"


class Event(NamedTuple):
    """One tweet or retweet. For a retweet, ``content_id`` is the original tweet's id."""

    user_id: str
    timestamp: int
    kind: Kind
    content_id: str
    hashtags: tuple[str, ...] = ()


class FollowEdge(NamedTuple):
    follower: str
    followee: str


@dataclass(frozen=True)
class TimeWindow:
    """Half-open interval ``[start, end)`` in epoch seconds."""

    start: int
    end: int

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"window start must precede end, got [{self.start}, {self.end})")

    def __contains__(self, ts: int) -> bool:
        return self.start <= ts < self.end

    @classmethod
    def from_bounds(cls, start: int | None, end: int | None) -> "TimeWindow | None":
        """Build a window from optional bounds; ``None`` for both means unbounded."""
        if start is None and end is None:
            return None
        return cls(0 if start is None else start, 2**63 - 1 if end is None else end)


@dataclass
class ParseReport:
    read: int = 0
    accepted: int = 0
    rejected: int = 0
    duplicates: int = 0
    reasons: list[str] = field(default_factory=list)

    def reject(self, lineno: int, reason: str) -> None:
        self.rejected += 1
        if len(self.reasons) < MAX_REASONS:
            self.reasons.append(f"line {lineno}: {reason}")

    @property
    def reject_fraction(self) -> float:
        return self.rejected / self.read if self.read else 0.0

    def merge(self, other: "ParseReport") -> None:
        self.read += other.read
        self.accepted += other.accepted
        self.rejected += other.rejected
        self.duplicates += other.duplicates
        room = MAX_REASONS - len(self.reasons)
        if room > 0:
            self.reasons.extend(other.reasons[:room])

    def as_dict(self) -> dict:
        return {
            "read": self.read,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "duplicates": self.duplicates,
            "reasons": list(self.reasons),
        }


def _read_bytes(source: Source) -> bytes:
    if isinstance(source, bytes):
        return source
    try:
        if isinstance(source, (str, os.PathLike)):
            with open(source, "rb") as fh:
                return fh.read()
        data = source.read()
    except OSError as exc:
        raise IngestError(f"cannot read source: {exc}") from exc
    return data.encode("utf-8") if isinstance(data, str) else data


def normalize_tags(tags: Iterable[str]) -> tuple[str, ...]:
    """Lowercase, strip a leading ``#``, drop empties and repeats (first occurrence wins)."""
    seen = []
    for tag in tags:
        tag = tag.strip().lstrip("#").lower()
        if tag and tag not in seen:
            seen.append(tag)
    return tuple(seen)


def _validate(user, ts, kind, cid, tags) -> Event:
    if not isinstance(user, str) or not user:
        raise ValueError("user must be a non-empty string")
    if isinstance(ts, bool) or not isinstance(ts, int):
        raise ValueError("ts must be an integer")
    if ts < 0:
        raise ValueError("ts must be >= 0")
    try:
        kind = Kind(kind)
    except ValueError:
        raise ValueError(f"unknown kind {kind!r}") from None
    if not isinstance(cid, str) or not cid:
        raise ValueError("id must be a non-empty string")
    if not isinstance(tags, (list, tuple)) or not all(isinstance(t, str) for t in tags):
        raise ValueError("tags must be a list of strings")
    return Event(user, ts, kind, cid, normalize_tags(tags))


def _parse_jsonl_line(text: str) -> Event:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    extra = obj.keys() - EVENT_KEYS
    if extra:
        raise ValueError(f"unexpected keys {sorted(extra)}")
    missing = {"user", "ts", "kind", "id"} - obj.keys()
    if missing:
        raise ValueError(f"missing keys {sorted(missing)}")
    return _validate(obj["user"], obj["ts"], obj["kind"], obj["id"], obj.get("tags", []))


def _parse_csv_line(text: str) -> Event:
    rows = list(csv.reader([text]))
    if len(rows) != 1 or len(rows[0]) not in (4, 5):
        raise ValueError("expected 4 or 5 comma-separated fields")
    row = rows[0]
    try:
        ts = int(row[1])
    except ValueError:
        raise ValueError(f"ts is not an integer: {row[1]!r}") from None
    tags = row[4].split(";") if len(row) == 5 and row[4] else []
    return _validate(row[0], ts, row[2], row[3], tags)


_LINE_PARSERS = {"jsonl": _parse_jsonl_line, "csv": _parse_csv_line}


def _parse_chunk(lines: Sequence[bytes], first_lineno: int, parse_line) -> tuple[list[Event], ParseReport]:
    events = []
    report = ParseReport()
    for offset, raw in enumerate(lines):
        lineno = first_lineno + offset
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            report.read += 1
            report.reject(lineno, "invalid UTF-8")
            continue
        text = text.strip()
        if not text:
            continue
        report.read += 1
        try:
            events.append(parse_line(text))
        except ValueError as exc:
            report.reject(lineno, str(exc))
            continue
        report.accepted += 1
    return events, report


def parse_events(source: Source, format: str = "jsonl", threads: int = 1) -> tuple[list[Event], ParseReport]:
    """Parse an event log into :class:`Event` records, in input order.

    ``source`` is a path, a binary stream, or raw bytes. With ``threads > 1`` the
    lines are parsed in contiguous chunks whose results are concatenated in order,
    so the output never depends on the thread count.
    """
    try:
        parse_line = _LINE_PARSERS[format]
    except KeyError:
        raise ValueError(f"unknown event format {format!r}") from None
    lines = _read_bytes(source).splitlines()
    threads = max(1, int(threads))
    if threads == 1 or len(lines) < 2 * threads:
        return _parse_chunk(lines, 1, parse_line)

    size = -(-len(lines) // threads)
    starts = range(0, len(lines), size)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda s: _parse_chunk(lines[s:s + size], s + 1, parse_line), starts))
    events: list[Event] = []
    report = ParseReport()
    for chunk_events, chunk_report in parts:
        events.extend(chunk_events)
        report.merge(chunk_report)
    return events, report


def parse_follow_edges(source: Source) -> tuple[list[FollowEdge], ParseReport]:
    """Parse ``follower,followee`` lines; drops self-loops and repeated edges."""
    report = ParseReport()
    seen: set[FollowEdge] = set()
    edges: list[FollowEdge] = []
    for lineno, raw in enumerate(_read_bytes(source).splitlines(), start=1):
        try:
            text = raw.decode("utf-8").strip()
        except UnicodeDecodeError:
            report.read += 1
            report.reject(lineno, "invalid UTF-8")
            continue
        if not text:
            continue
        report.read += 1
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 2 or not parts[0] or not parts[1]:
            report.reject(lineno, "expected 'follower,followee'")
            continue
        if parts[0] == parts[1]:
            report.reject(lineno, f"self-loop on {parts[0]!r}")
            continue
        edge = FollowEdge(parts[0], parts[1])
        if edge in seen:
            report.duplicates += 1
            continue
        seen.add(edge)
        edges.append(edge)
        report.accepted += 1
    return edges, report


def filter_window(events: Iterable[Event], window: TimeWindow | None) -> list[Event]:
    """Events with ``start <= ts < end``, order preserved. ``None`` keeps everything."""
    if window is None:
        return list(events)
    start, end = window.start, window.end
    return [e for e in events if start <= e.timestamp < end]


def format_event(event: Event, format: str = "jsonl") -> str:
    if format == "jsonl":
        return json.dumps(
            {
                "user": event.user_id,
                "ts": event.timestamp,
                "kind": event.kind.value,
                "id": event.content_id,
                "tags": list(event.hashtags),
            },
            ensure_ascii=False,
            separators=(",", ":"),
        )
    if format == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="").writerow(
            [event.user_id, event.timestamp, event.kind.value, event.content_id, ";".join(event.hashtags)]
        )
        return buf.getvalue()
    raise ValueError(f"unknown event format {format!r}")


def write_events(events: Iterable[Event], fh, format: str = "jsonl") -> None:
    """Write events to a text stream, one record per line."""
    for event in events:
        fh.write(format_event(event, format))
        fh.write("\n")


def write_follow_edges(edges: Iterable[FollowEdge], fh) -> None:
    for edge in edges:
        fh.write(f"{edge.follower},{edge.followee}\n")
