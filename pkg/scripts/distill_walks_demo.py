"""Distill noisy observed walks into an archetypal trail.

Synthesizes GPS-like walks over four spots in St Andrews (jittered fixes,
varying dwell and travel times), collapses them into a place graph at a
120 m clustering radius, and prints the result: nodes at cluster
centroids, edges with median travel times, and the recommended visit
order.  Ends with the route query: every simple way from the first spot
to the last over the distilled edges.

Run from the repo root:

    python3 scripts/distill_walks_demo.py
"""

import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from gloss.geo import destination_point
from gloss.model import (
    Distance,
    DistanceUnit,
    Id,
    IdKind,
    Information,
    LatLongCoordinate,
    PhysicalLocation,
    Where,
)
from gloss.temporal import Time
from gloss.trails import (
    IntentionalNode,
    IntentionalTrail,
    ObservedNode,
    ObservedTrail,
    Path as TrailPath,
    distill_archetypal,
    export_archetypal,
    routes_through,
)

SPOTS = [
    ("harbour", LatLongCoordinate(56.3409, -2.7810)),
    ("cathedral", LatLongCoordinate(56.3398, -2.7875)),
    ("town centre", LatLongCoordinate(56.3414, -2.7955)),
    ("west sands", LatLongCoordinate(56.3466, -2.8033)),
]

EPSILON = Distance(120.0, DistanceUnit.M)


def noisy_walk(rng, subject, spot_order, start_s):
    """One walk: a jittered fix at each spot, 3-9 minutes between them."""
    nodes = []
    t = start_s
    for name, coord in spot_order:
        fix = destination_point(coord, rng.uniform(0, 360), rng.uniform(0, 40))
        nodes.append(
            ObservedNode(
                Time(t * 1000),
                Where(PhysicalLocation(fix)),
                Information(info=(f"near the {name}",)),
            )
        )
        t += rng.randint(180, 540)
    return ObservedTrail(subject, tuple(nodes))


def main():
    rng = random.Random(20030516)
    subject = Id(IdKind.EMAIL, "graham@dcs.st-and.ac.uk")

    walks = []
    start = 0
    for day in range(6):
        order = list(SPOTS)
        if day == 5:
            # one contrarian walk in the reverse direction
            order.reverse()
        walks.append(noisy_walk(rng, subject, order, start))
        start += 86_400

    total = sum(len(w.nodes) for w in walks)
    print(f"distilling {len(walks)} walks, {total} fixes, epsilon 120 m\n")

    trail = distill_archetypal(walks, EPSILON)
    print(export_archetypal(trail))

    print("cluster centroids:")
    for node in trail.nodes:
        c = node.where.payload.coordinate
        notes = "; ".join(node.info.info)
        print(f"  {node.key}  {c.latitude:.5f}, {c.longitude:.5f}  ({notes})")
    print()

    print("recommended order:", " -> ".join(trail.recommended_order))
    print()

    # route query over the distilled graph
    wheres = {n.key: n.where for n in trail.nodes}
    themed = IntentionalTrail(
        "seafront circuit", [IntentionalNode(w) for w in wheres.values()]
    )
    connectivity = {
        TrailPath(wheres[e.source], wheres[e.target]) for e in trail.edges
    }
    first, last = trail.recommended_order[0], trail.recommended_order[-1]
    routes = routes_through(themed, wheres[first], wheres[last], connectivity)
    key_of = {v: k for k, v in wheres.items()}
    print(f"simple routes {first} -> {last} over the observed edges:")
    for route in routes:
        hops = [first] + [key_of[p.to_where] for p in route.paths]
        print("  " + " -> ".join(hops))


if __name__ == "__main__":
    main()
