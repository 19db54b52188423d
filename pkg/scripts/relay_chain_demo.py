"""Walk one location event through a three-node relay chain.

A PDA produces the event, a relay node forwards it, and a server ingests
it.  Each hop stamps a processing step, so the document that lands in the
server store carries its whole history.  Everything runs in-process over
byte pipes; the wire bytes between hops are printed so the framing and
the growing processingSequence are visible.

Run from the repo root:

    python3 scripts/relay_chain_demo.py
"""

import io
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from gloss.eventd import EventStore, forward, read_frame
from gloss.model import (
    Id,
    IdKind,
    LatLongCoordinate,
    PhysicalLocation,
    Where,
)
from gloss.temporal import Time
from gloss.wire import (
    LocationEvent,
    Observation,
    parse_location_event,
    serialize_location_event,
)


def fixed_clock(lexical_times):
    """Hand out the given instants one per call; deterministic output."""
    queue = [Time.from_lexical(t) for t in lexical_times]

    def clock() -> Time:
        return queue.pop(0)

    return clock


def show(label: str, document: bytes):
    print(f"--- {label} ({len(document)} bytes) ---")
    print(document.decode("utf-8"))
    print()


def main():
    subject = Id(IdKind.PHONE, "+447941615809")
    sighting = Observation(
        time_of_observation=Time.from_lexical("2003-05-16T18:31:59"),
        where=Where(
            PhysicalLocation(
                LatLongCoordinate(56.340232849121094, -2.86754378657099878)
            )
        ),
    )
    event = LocationEvent(subject, (), (sighting,))

    pda = EventStore(
        step_label="processed on PDA",
        clock=fixed_clock(["2003-05-16T18:31:59"]),
    )
    relay = EventStore(
        step_label="routed through node 18B6",
        clock=fixed_clock(["2003-05-16T18:32:01"]),
    )
    server = EventStore(
        step_label="received on server",
        clock=fixed_clock(["2003-05-16T18:32:02.42"]),
    )

    # hop 1: PDA -> relay
    pipe1 = io.BytesIO()
    forward(pda, event, pipe1)
    pipe1.seek(0)
    frame1 = read_frame(pipe1)
    show("on the wire after the PDA", frame1)

    # hop 2: relay -> server
    pipe2 = io.BytesIO()
    forward(relay, parse_location_event(frame1), pipe2)
    pipe2.seek(0)
    frame2 = read_frame(pipe2)
    show("on the wire after the relay", frame2)

    # final hop: the server keeps it
    accepted = server.ingest(frame2)
    print(f"server accepted {accepted} new observation(s)")
    (stored,) = server.events_for(subject)
    print("processing sequence as stored:")
    for step in stored.processing_sequence:
        print(f"  {step.date_time.lexical()}  {step.description}")
    print()

    last = server.query_last(subject)
    coord = last.where.payload.coordinate
    print(
        f"last known position of {subject.key}: "
        f"{coord.latitude:.6f}, {coord.longitude:.6f} "
        f"at {last.time_of_observation.lexical()}"
    )

    # round-trip sanity: the stored event re-serializes to stable bytes
    again = parse_location_event(serialize_location_event(stored))
    assert again == stored
    print("round-trip check: ok")


if __name__ == "__main__":
    main()
