"""Trails: observed snail trails, distilled archetypal graphs, themed sets.

Distillation clusters observation points by single linkage at a caller-set
epsilon, drops one node per cluster at the spherical centroid, and derives
directed edges from consecutive-observation cluster transitions.  All
exhaustive searches are capped at 12 nodes and error beyond that rather
than silently approximate.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from pathlib import Path as FilePath
from typing import Optional, Union

from .errors import (
    EmptyInput,
    NoOrderExists,
    OutOfOrderObservation,
    TooLarge,
    UnknownEndpoint,
    Unresolvable,
)
from .geo import (
    distance_in_metres,
    great_circle_distance,
    resolved_point,
    spherical_centroid,
)
from .model import (
    Distance,
    DistanceUnit,
    Gazetteer,
    Id,
    IdKind,
    Information,
    LatLongCoordinate,
    ModeTransport,
    PhysicalLocation,
    Region,
    Where,
    make_id,
)
from .temporal import SymbolicTime, TemporalRegion, Time, When
from .wire import (
    LocationEvent,
    Observation,
    parse_location_event,
    serialize_location_event,
    serialize_where,
)

__all__ = [
    "ObservedNode",
    "ObservedTrail",
    "ArchetypalNode",
    "TrailEdge",
    "ArchetypalTrail",
    "IntentionalNode",
    "IntentionalTrail",
    "Path",
    "Route",
    "FixedTime",
    "FixedSpatial",
    "Manual",
    "Proximity",
    "RecordingPolicy",
    "record_observation",
    "distill_archetypal",
    "recommended_order",
    "routes_through",
    "export_observed",
    "import_observed",
    "export_archetypal",
]

_SEARCH_CAP = 12


def _when_millis(when: When) -> int:
    """Order key for a When: instants order by themselves, period sets by
    their earliest start."""
    if isinstance(when, Time):
        return when.epoch_millis
    if isinstance(when, TemporalRegion):
        return min(p.start.epoch_millis for p in when.periods)
    if isinstance(when, SymbolicTime):
        return min(p.start.epoch_millis for p in when.denotes.periods)
    raise TypeError(f"not a When: {when!r}")


@dataclass(frozen=True)
class ObservedNode:
    when: When
    where: Where
    info: Optional[Information] = None


@dataclass(frozen=True)
class ObservedTrail:
    """A snail trail: one subject, observations in non-decreasing time order."""

    subject: Id
    nodes: tuple[ObservedNode, ...] = ()

    def __post_init__(self):
        keys = [_when_millis(n.when) for n in self.nodes]
        if any(a > b for a, b in zip(keys, keys[1:])):
            raise OutOfOrderObservation("trail timestamps must be non-decreasing")


@dataclass(frozen=True)
class ArchetypalNode:
    key: str
    where: Where
    info: Information = Information()


@dataclass(frozen=True)
class TrailEdge:
    source: str
    target: str
    mode: Optional[ModeTransport] = None
    median_travel_seconds: Optional[float] = None


@dataclass(frozen=True)
class ArchetypalTrail:
    """Directed place graph with a recommended full-coverage visit order."""

    nodes: tuple[ArchetypalNode, ...]
    edges: tuple[TrailEdge, ...] = ()
    recommended_order: tuple[str, ...] = ()

    def __post_init__(self):
        keys = [n.key for n in self.nodes]
        key_set = set(keys)
        if len(key_set) != len(keys):
            raise ValueError("duplicate node keys")
        for e in self.edges:
            if e.source not in key_set or e.target not in key_set:
                raise ValueError(f"edge {e.source}->{e.target} leaves the node set")
        if sorted(self.recommended_order) != sorted(keys):
            raise ValueError("recommended order must visit every node exactly once")
        pairs = {(e.source, e.target) for e in self.edges}
        for a, b in zip(self.recommended_order, self.recommended_order[1:]):
            if (a, b) not in pairs:
                raise ValueError(f"recommended order step {a}->{b} is not an edge")


@dataclass(frozen=True)
class IntentionalNode:
    where: Where
    info: Information = Information()


@dataclass(frozen=True)
class IntentionalTrail:
    """Theme-linked unordered set of places."""

    theme: str
    nodes: frozenset[IntentionalNode]

    def __init__(self, theme: str, nodes):
        object.__setattr__(self, "theme", theme)
        object.__setattr__(self, "nodes", frozenset(nodes))


@dataclass(frozen=True)
class Path:
    from_where: Where
    to_where: Where
    mode: Optional[ModeTransport] = None


@dataclass(frozen=True)
class Route:
    """A chain of paths: each hop starts where the previous one ended."""

    paths: tuple[Path, ...] = ()

    def __post_init__(self):
        for a, b in zip(self.paths, self.paths[1:]):
            if a.to_where != b.from_where:
                raise ValueError("route paths must chain end-to-start")


# --- recording policies ---


@dataclass(frozen=True)
class FixedTime:
    interval_seconds: float


@dataclass(frozen=True)
class FixedSpatial:
    min_distance: Distance


@dataclass(frozen=True)
class Manual:
    pass


@dataclass(frozen=True)
class Proximity:
    designated: tuple[Region, ...]
    threshold: Distance


RecordingPolicy = Union[FixedTime, FixedSpatial, Manual, Proximity]


_point = resolved_point


def record_observation(
    trail: ObservedTrail,
    candidate: ObservedNode,
    policy: RecordingPolicy,
    gazetteer: Gazetteer | None = None,
) -> ObservedTrail:
    """Append the candidate iff the policy admits it; the first observation
    is always kept.  Returns the (possibly unchanged) trail."""
    if trail.nodes:
        last = trail.nodes[-1]
        if _when_millis(candidate.when) < _when_millis(last.when):
            raise OutOfOrderObservation("candidate is earlier than the last node")
    if not trail.nodes:
        keep = True
    elif isinstance(policy, Manual):
        keep = True
    elif isinstance(policy, FixedTime):
        delta = (_when_millis(candidate.when) - _when_millis(last.when)) / 1000.0
        keep = delta >= policy.interval_seconds
    elif isinstance(policy, FixedSpatial):
        moved = great_circle_distance(
            _point(last.where, gazetteer), _point(candidate.where, gazetteer)
        )
        keep = moved.value >= distance_in_metres(policy.min_distance)
    elif isinstance(policy, Proximity):
        p = _point(candidate.where, gazetteer)
        reach = distance_in_metres(policy.threshold)
        keep = False
        for region in policy.designated:
            anchor = region.distinguished_point.coordinate
            if anchor is None:
                raise Unresolvable("designated region has no distinguished coordinate")
            if great_circle_distance(anchor, p).value <= reach:
                keep = True
                break
    else:
        raise TypeError(f"not a recording policy: {policy!r}")
    if not keep:
        return trail
    return ObservedTrail(trail.subject, trail.nodes + (candidate,))


# --- distillation ---


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _cluster_assignment(coords: list[LatLongCoordinate], eps_m: float) -> list[int]:
    """Single-linkage components at threshold eps_m, numbered by first
    appearance in input order."""
    uf = _UnionFind(len(coords))
    for i in range(len(coords)):
        for j in range(i + 1, len(coords)):
            if great_circle_distance(coords[i], coords[j]).value <= eps_m:
                uf.union(i, j)
    numbers: dict[int, int] = {}
    out = []
    for i in range(len(coords)):
        root = uf.find(i)
        if root not in numbers:
            numbers[root] = len(numbers)
        out.append(numbers[root])
    return out


def _merge_info(nodes: list[ObservedNode]) -> Information:
    info: list[str] = []
    links: list[str] = []
    for n in nodes:
        if n.info is None:
            continue
        for text in n.info.info:
            if text not in info:
                info.append(text)
        for link in n.info.links:
            if link not in links:
                links.append(link)
    return Information(tuple(info), tuple(links))


def _smallest_hamiltonian(keys: list[str], pairs: set[tuple[str, str]]):
    """Lexicographically smallest full visit order over directed pairs, or
    None.  Caller enforces the size cap."""
    order = sorted(keys)
    target = len(order)

    def extend(path: list[str], used: set[str]):
        if len(path) == target:
            return list(path)
        for nxt in order:
            if nxt in used or (path and (path[-1], nxt) not in pairs):
                continue
            path.append(nxt)
            used.add(nxt)
            found = extend(path, used)
            if found is not None:
                return found
            path.pop()
            used.remove(nxt)
        return None

    return extend([], set())


def distill_archetypal(
    trails: list[ObservedTrail],
    epsilon: Distance,
    gazetteer: Gazetteer | None = None,
) -> ArchetypalTrail:
    """Collapse observed trails into a place graph.

    Nodes are single-linkage clusters at epsilon (keys n0, n1, ... by first
    appearance), placed at the spherical centroid with member info merged.
    Edges follow observed cluster transitions, annotated with the median
    travel time.  The recommended order is the most frequent observed
    sequence that covers every node exactly once; when no observed sequence
    qualifies, an exhaustive search over the edges stands in.
    """
    eps_m = distance_in_metres(epsilon)
    if eps_m <= 0:
        raise ValueError("epsilon must be positive")
    flat: list[ObservedNode] = []
    spans: list[tuple[int, int]] = []  # [start, end) into flat, one per trail
    for trail in trails:
        start = len(flat)
        flat.extend(trail.nodes)
        spans.append((start, len(flat)))
    if not flat:
        raise EmptyInput("no observations to distill")
    coords = [_point(n.where, gazetteer) for n in flat]
    assignment = _cluster_assignment(coords, eps_m)
    n_clusters = max(assignment) + 1
    members: list[list[int]] = [[] for _ in range(n_clusters)]
    for i, c in enumerate(assignment):
        members[c].append(i)
    nodes = []
    for c in range(n_clusters):
        centroid = spherical_centroid([coords[i] for i in members[c]])
        merged = _merge_info([flat[i] for i in members[c]])
        nodes.append(
            ArchetypalNode(f"n{c}", Where(PhysicalLocation(centroid)), merged)
        )
    key_of = [f"n{c}" for c in range(n_clusters)]

    edge_deltas: dict[tuple[str, str], list[float]] = {}
    sequences: list[tuple[tuple[str, ...], int]] = []  # (collapsed seq, first-obs ms)
    for (start, end), trail in zip(spans, trails):
        seq: list[str] = []
        for i in range(start, end):
            key = key_of[assignment[i]]
            if not seq or seq[-1] != key:
                seq.append(key)
            if i > start and assignment[i] != assignment[i - 1]:
                hop = (key_of[assignment[i - 1]], key)
                delta = (
                    _when_millis(flat[i].when) - _when_millis(flat[i - 1].when)
                ) / 1000.0
                edge_deltas.setdefault(hop, []).append(delta)
        if seq:
            sequences.append((tuple(seq), _when_millis(trail.nodes[0].when)))

    edges = tuple(
        TrailEdge(u, v, None, statistics.median(deltas))
        for (u, v), deltas in edge_deltas.items()
    )

    all_keys = set(key_of)
    covering: dict[tuple[str, ...], list[int]] = {}
    for seq, first_ms in sequences:
        if len(seq) == n_clusters and set(seq) == all_keys:
            covering.setdefault(seq, []).append(first_ms)
    if covering:
        best = min(
            covering.items(), key=lambda kv: (-len(kv[1]), min(kv[1]), kv[0])
        )[0]
    else:
        if n_clusters > _SEARCH_CAP:
            raise NoOrderExists(
                "no observed sequence covers every node and the graph is too"
                " large for exhaustive search"
            )
        pairs = set(edge_deltas)
        found = _smallest_hamiltonian(key_of, pairs)
        if found is None:
            raise NoOrderExists("the observed transitions admit no full visit order")
        best = tuple(found)
    return ArchetypalTrail(tuple(nodes), edges, best)


def recommended_order(
    trail: ArchetypalTrail, mode: Optional[ModeTransport] = None
) -> tuple[str, ...]:
    """The stored order, or with a mode the smallest full visit order over
    that mode's edges."""
    if mode is None:
        return trail.recommended_order
    if len(trail.nodes) > _SEARCH_CAP:
        raise TooLarge(f"mode search capped at {_SEARCH_CAP} nodes")
    pairs = {(e.source, e.target) for e in trail.edges if e.mode is mode}
    found = _smallest_hamiltonian([n.key for n in trail.nodes], pairs)
    if found is None:
        raise NoOrderExists(f"no full visit order over {mode.value} edges")
    return tuple(found)


def _where_key(w: Where) -> bytes:
    # canonical bytes double as a stable sort key and an equality surrogate
    return serialize_where(w)


def routes_through(
    trail: IntentionalTrail,
    start: Where,
    end: Where,
    connectivity: set[Path] | frozenset[Path] | tuple[Path, ...],
) -> list[Route]:
    """Every simple route from start to end over the given paths, shortest
    first, deterministically ordered."""
    member_keys = {_where_key(n.where) for n in trail.nodes}
    start_key, end_key = _where_key(start), _where_key(end)
    if start_key not in member_keys:
        raise UnknownEndpoint("start is not a node of the trail")
    if end_key not in member_keys:
        raise UnknownEndpoint("end is not a node of the trail")
    if len(trail.nodes) > _SEARCH_CAP:
        raise TooLarge(f"route search capped at {_SEARCH_CAP} nodes")

    outgoing: dict[bytes, list[tuple[bytes, Path]]] = {}
    for p in connectivity:
        fk, tk = _where_key(p.from_where), _where_key(p.to_where)
        if fk in member_keys and tk in member_keys:
            outgoing.setdefault(fk, []).append((tk, p))
    for options in outgoing.values():
        options.sort(key=lambda kv: (kv[0], "" if kv[1].mode is None else kv[1].mode.value))

    routes: list[Route] = []

    def walk(at: bytes, visited: set[bytes], acc: list[Path]):
        if at == end_key:
            # simple routes cannot pass through the end and come back
            routes.append(Route(tuple(acc)))
            return
        for tk, p in outgoing.get(at, ()):
            if tk in visited:
                continue
            visited.add(tk)
            acc.append(p)
            walk(tk, visited, acc)
            acc.pop()
            visited.remove(tk)

    walk(start_key, {start_key}, [])

    def route_sort_key(r: Route):
        hops = tuple(
            (
                _where_key(p.from_where),
                _where_key(p.to_where),
                "" if p.mode is None else p.mode.value,
            )
            for p in r.paths
        )
        return (len(r.paths), hops)

    routes.sort(key=route_sort_key)
    return routes


# ---------------------------------------------------------------------------
# Import/export


def _format_policy(policy: RecordingPolicy) -> str:
    if isinstance(policy, Manual):
        return "manual"
    if isinstance(policy, FixedTime):
        return f"fixed-time {policy.interval_seconds!r}"
    if isinstance(policy, FixedSpatial):
        d = policy.min_distance
        return f"fixed-spatial {d.value!r} {d.unit.value}"
    if isinstance(policy, Proximity):
        d = policy.threshold
        return f"proximity {d.value!r} {d.unit.value}"
    raise TypeError(f"not a recording policy: {policy!r}")


def _parse_policy(text: str) -> RecordingPolicy:
    tokens = text.split()
    if tokens == ["manual"]:
        return Manual()
    if tokens[0] == "fixed-time" and len(tokens) == 2:
        return FixedTime(float(tokens[1]))
    if tokens[0] in ("fixed-spatial", "proximity") and len(tokens) >= 3:
        value = float(tokens[1])
        unit = DistanceUnit(" ".join(tokens[2:]))
        d = Distance(value, unit)
        if tokens[0] == "fixed-spatial":
            return FixedSpatial(d)
        return Proximity((), d)
    raise ValueError(f"bad policy line: {text!r}")


def export_observed(
    trail: ObservedTrail, policy: RecordingPolicy, directory
) -> FilePath:
    """Write one locationEvent file per node plus a manifest; returns the
    manifest path.  Only instant-stamped (Time) nodes can travel this way."""
    directory = FilePath(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [f"subject {trail.subject.key}", f"policy {_format_policy(policy)}"]
    for i, node in enumerate(trail.nodes):
        if not isinstance(node.when, Time):
            raise ValueError("only Time-stamped nodes can be exported")
        event = LocationEvent(
            trail.subject,
            (),
            (Observation(time_of_observation=node.when, where=node.where),),
        )
        name = f"{i:04d}.xml"
        (directory / name).write_bytes(serialize_location_event(event))
        lines.append(f"event {name}")
        if node.info is not None:
            for text in node.info.info:
                lines.append(f"info {text}")
            for link in node.info.links:
                lines.append(f"link {link}")
    manifest = directory / "trail.manifest"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


def parse_id_key(key: str) -> Id:
    """Read the `<kind>:<value>` form used by manifests and the CLI."""
    kind_text, sep, value = key.partition(":")
    if not sep:
        raise ValueError(f"expected <kind>:<value>, got {key!r}")
    try:
        kind = IdKind(kind_text)
    except ValueError:
        raise ValueError(f"unknown ID kind {kind_text!r}") from None
    return make_id(kind, value)


def import_observed(manifest_path) -> tuple[ObservedTrail, RecordingPolicy]:
    """Rebuild a trail from a manifest written by export_observed."""
    manifest_path = FilePath(manifest_path)
    base = manifest_path.parent
    subject: Optional[Id] = None
    policy: RecordingPolicy = Manual()
    nodes: list[ObservedNode] = []
    pending_info: list[str] = []
    pending_links: list[str] = []

    def flush_info():
        if not nodes or (not pending_info and not pending_links):
            return
        node = nodes[-1]
        nodes[-1] = ObservedNode(
            node.when, node.where, Information(tuple(pending_info), tuple(pending_links))
        )
        pending_info.clear()
        pending_links.clear()

    for raw in manifest_path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        keyword, _, rest = line.partition(" ")
        if keyword == "subject":
            subject = parse_id_key(rest.strip())
        elif keyword == "policy":
            policy = _parse_policy(rest.strip())
        elif keyword == "event":
            flush_info()
            event = parse_location_event((base / rest.strip()).read_bytes())
            for obs in event.observations:
                nodes.append(ObservedNode(obs.time_of_observation, obs.where))
        elif keyword == "info":
            pending_info.append(rest)
        elif keyword == "link":
            pending_links.append(rest.strip())
        else:
            raise ValueError(f"bad manifest line: {raw!r}")
    flush_info()
    if subject is None:
        raise ValueError("manifest names no subject")
    return ObservedTrail(subject, tuple(nodes)), policy


def export_archetypal(trail: ArchetypalTrail) -> str:
    """Plain-text adjacency listing: nodes with their points and notes,
    then directed edges."""
    lines = []
    for node in trail.nodes:
        try:
            p = _point(node.where, None)
            lat, lon = repr(p.latitude), repr(p.longitude)
        except Exception:
            lat = lon = "-"
        lines.append(f"node {node.key} {lat} {lon}")
        for text in node.info.info:
            lines.append(f"info {text}")
        for link in node.info.links:
            lines.append(f"link {link}")
    for e in trail.edges:
        mode = e.mode.value if e.mode is not None else "-"
        seconds = repr(e.median_travel_seconds) if e.median_travel_seconds is not None else "-"
        lines.append(f"edge {e.source} {e.target} {mode} {seconds}")
    lines.append(f"order {' '.join(trail.recommended_order)}")
    return "\n".join(lines) + "\n"
