"""Ingest pipeline and last-known-position store.

Documents are parsed whole before any state changes, so a rejected event
leaves the store untouched.  Every node in a relay chain leaves its mark:
ingest stamps the stored copy with this node's processing step, forward
stamps the outgoing copy.  Framing on the wire and in the journal is a
4-byte big-endian length followed by the document bytes.
"""

from __future__ import annotations

import socketserver
import struct
import threading
import time
from bisect import insort
from dataclasses import dataclass, replace
from pathlib import Path as FilePath
from typing import BinaryIO, Callable, Iterator, Optional

from .errors import (
    EmptyWhere,
    NotWellFormed,
    SchemaViolation,
    SinkUnavailable,
    UnknownSubject,
    Unresolvable,
)
from .model import Gazetteer, Id
from .temporal import Time
from .trails import Manual, ObservedNode, ObservedTrail, RecordingPolicy, record_observation
from .wire import (
    LocationEvent,
    Observation,
    ProcessingStep,
    parse_location_event,
    serialize_location_event,
)

__all__ = [
    "EventStore",
    "StreamServer",
    "forward",
    "read_journal",
    "serve",
]

_FRAME_CAP = 64 * 1024 * 1024  # refuse absurd lengths rather than allocate


def _wall_clock() -> Time:
    return Time(int(time.time() * 1000))


def write_frame(sink: BinaryIO, document: bytes):
    sink.write(struct.pack(">I", len(document)))
    sink.write(document)


def read_frame(source: BinaryIO) -> Optional[bytes]:
    """One length-prefixed document, or None at a clean end of stream."""
    header = source.read(4)
    if not header:
        return None
    if len(header) < 4:
        raise EOFError("truncated frame header")
    (length,) = struct.unpack(">I", header)
    if length > _FRAME_CAP:
        raise EOFError(f"frame of {length} bytes exceeds the cap")
    body = b""
    while len(body) < length:
        chunk = source.read(length - len(body))
        if not chunk:
            raise EOFError("truncated frame body")
        body += chunk
    return body


@dataclass(frozen=True)
class _Entry:
    millis: int
    arrival: int
    observation: Observation

    def __lt__(self, other):
        return (self.millis, self.arrival) < (other.millis, other.arrival)


class EventStore:
    """Per-subject observation histories with trail upkeep.

    One lock serializes all updates, which trivially gives per-subject
    ordering; readers take the same lock and so always see a consistent
    snapshot.  No cross-form identity resolution happens: phone and email
    IDs for the same person stay separate subjects.
    """

    def __init__(
        self,
        step_label: str = "processed",
        clock: Callable[[], Time] | None = None,
        policy: RecordingPolicy | None = None,
        journal: str | FilePath | None = None,
        gazetteer: Gazetteer | None = None,
    ):
        self.step_label = step_label
        self._clock = clock if clock is not None else _wall_clock
        self._policy = policy if policy is not None else Manual()
        self._journal = FilePath(journal) if journal is not None else None
        self._gazetteer = gazetteer
        self._lock = threading.Lock()
        self._history: dict[str, list[_Entry]] = {}
        self._events: dict[str, list[LocationEvent]] = {}
        self._trails: dict[str, ObservedTrail] = {}
        self._subjects: dict[str, Id] = {}
        self._arrivals = 0

    # -- writes --

    def ingest(self, document: bytes) -> int:
        """Merge one document; returns how many observations were new.

        Parsing happens before any mutation, so a SchemaViolation leaves
        the store exactly as it was.
        """
        event = parse_location_event(document)
        step = ProcessingStep(self._clock(), self.step_label)
        stored = replace(
            event, processing_sequence=event.processing_sequence + (step,)
        )
        key = event.id.key
        with self._lock:
            self._subjects.setdefault(key, event.id)
            history = self._history.setdefault(key, [])
            known = set(e.observation for e in history)
            accepted = 0
            for obs in event.observations:
                if obs in known:
                    continue
                self._arrivals += 1
                insort(
                    history,
                    _Entry(obs.time_of_observation.epoch_millis, self._arrivals, obs),
                )
                known.add(obs)
                accepted += 1
            self._events.setdefault(key, []).append(stored)
            if accepted:
                self._refresh_trail(key, event.id, history)
            if self._journal is not None:
                with open(self._journal, "ab") as sink:
                    write_frame(sink, bytes(document))
        return accepted

    def _refresh_trail(self, key: str, subject: Id, history: list[_Entry]):
        # replay the whole history: an insertion in the middle can change
        # which candidates the policy admits
        trail = ObservedTrail(subject)
        for entry in history:
            node = ObservedNode(entry.observation.time_of_observation, entry.observation.where)
            try:
                trail = record_observation(trail, node, self._policy, self._gazetteer)
            except (Unresolvable, EmptyWhere):
                continue  # histories may hold wheres a spatial policy cannot place
        self._trails[key] = trail

    # -- reads --

    def query_last(self, subject: Id) -> Observation:
        """The freshest observation: maximal timestamp, with the later
        arrival winning ties."""
        with self._lock:
            history = self._history.get(subject.key)
            if not history:
                raise UnknownSubject(f"no observations for {subject.key}")
            return history[-1].observation

    def observations(self, subject: Id) -> tuple[Observation, ...]:
        with self._lock:
            history = self._history.get(subject.key)
            if history is None:
                raise UnknownSubject(f"no observations for {subject.key}")
            return tuple(e.observation for e in history)

    def events_for(self, subject: Id) -> tuple[LocationEvent, ...]:
        with self._lock:
            events = self._events.get(subject.key)
            if events is None:
                raise UnknownSubject(f"no observations for {subject.key}")
            return tuple(events)

    def trail_for(self, subject: Id) -> ObservedTrail:
        with self._lock:
            trail = self._trails.get(subject.key)
            if trail is None:
                raise UnknownSubject(f"no observations for {subject.key}")
            return trail

    def subjects(self) -> tuple[Id, ...]:
        with self._lock:
            return tuple(self._subjects.values())

    def replay(self, journal: str | FilePath) -> int:
        """Re-ingest a journal; duplicate observations fall out naturally."""
        total = 0
        for document in read_journal(journal):
            total += self.ingest(document)
        return total


def forward(store: EventStore, event: LocationEvent, sink: BinaryIO) -> LocationEvent:
    """Stamp the event with this node's step and write it length-prefixed.

    Returns the stamped copy.  The stamp is unconditional: relaying
    without ingesting still leaves a trace in the processing sequence.
    """
    step = ProcessingStep(store._clock(), store.step_label)
    stamped = replace(event, processing_sequence=event.processing_sequence + (step,))
    document = serialize_location_event(stamped)
    try:
        write_frame(sink, document)
        flush = getattr(sink, "flush", None)
        if flush is not None:
            flush()
    except OSError as exc:
        raise SinkUnavailable(str(exc)) from exc
    return stamped


def read_journal(path: str | FilePath) -> Iterator[bytes]:
    with open(path, "rb") as source:
        while True:
            document = read_frame(source)
            if document is None:
                return
            yield document


class _IngestHandler(socketserver.StreamRequestHandler):
    def handle(self):
        store: EventStore = self.server.store  # type: ignore[attr-defined]
        report = self.server.report  # type: ignore[attr-defined]
        while True:
            try:
                document = read_frame(self.rfile)
            except EOFError as exc:
                report(f"stream ended badly: {exc}")
                return
            if document is None:
                return
            try:
                accepted = store.ingest(document)
            except (NotWellFormed, SchemaViolation) as exc:
                report(f"rejected: {exc}")
                continue
            report(f"accepted={accepted}")


class StreamServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def serve(
    store: EventStore,
    port: int,
    host: str = "127.0.0.1",
    report: Callable[[str], None] | None = None,
) -> StreamServer:
    """Bind a threading ingest server; the caller drives serve_forever."""
    server = StreamServer((host, port), _IngestHandler)
    server.store = store  # type: ignore[attr-defined]
    server.report = report if report is not None else (lambda line: None)  # type: ignore[attr-defined]
    return server
