"""Unit-safe quantity conversion and spherical geometry.

All geometry runs on a sphere of radius 6 371 000 m using the haversine
formula; regions are closed, so boundary points count as contained.
"""

from __future__ import annotations

import math

from .errors import (
    CoincidentPoints,
    MissingCoordinate,
    UnitKindMismatch,
    Unresolvable,
    UnsupportedBounds,
)
from .model import (
    Altitude,
    AltitudeUnit,
    CircularBounds,
    Distance,
    DistanceUnit,
    Gazetteer,
    Horizon,
    LatLongCoordinate,
    RectangularBounds,
    Region,
    Speed,
    SpeedUnit,
    Where,
    resolve_region,
)

__all__ = [
    "EARTH_RADIUS_M",
    "convert_quantity",
    "distance_in_metres",
    "great_circle_distance",
    "initial_bearing",
    "destination_point",
    "spherical_centroid",
    "contains",
    "intersects",
    "resolved_point",
    "distance_between_wheres",
]

EARTH_RADIUS_M = 6_371_000.0

# metres (or metres/second) per unit
_DISTANCE_FACTORS = {
    DistanceUnit.M: 1.0,
    DistanceUnit.KM: 1000.0,
    DistanceUnit.MILES: 1609.344,
    DistanceUnit.NAUTICAL_MILES: 1852.0,
}
_SPEED_FACTORS = {
    SpeedUnit.M_PER_S: 1.0,
    SpeedUnit.KM_PER_H: 1000.0 / 3600.0,
    SpeedUnit.MILES_PER_H: 1609.344 / 3600.0,
    SpeedUnit.KNOTS: 1852.0 / 3600.0,
}
_ALTITUDE_FACTORS = {
    AltitudeUnit.METRES: 1.0,
    AltitudeUnit.FEET: 0.3048,
}

_KINDS = [
    (Altitude, AltitudeUnit, _ALTITUDE_FACTORS),
    (Distance, DistanceUnit, _DISTANCE_FACTORS),
    (Speed, SpeedUnit, _SPEED_FACTORS),
]


def convert_quantity(q, target_unit):
    """Convert a quantity to another unit of the same kind.

    Accepts the unit enum member or its wire string.  Raises
    UnitKindMismatch when the target belongs to a different kind.
    """
    for cls, unit_cls, factors in _KINDS:
        if isinstance(q, cls):
            if not isinstance(target_unit, unit_cls):
                try:
                    target_unit = unit_cls(target_unit)
                except ValueError:
                    raise UnitKindMismatch(
                        f"{target_unit!r} is not a {cls.__name__} unit"
                    ) from None
            if target_unit is q.unit:
                return q
            return cls(q.value * factors[q.unit] / factors[target_unit], target_unit)
    raise UnitKindMismatch(f"not a quantity: {q!r}")


def distance_in_metres(d: Distance) -> float:
    return d.value * _DISTANCE_FACTORS[d.unit]


def great_circle_distance(a: LatLongCoordinate, b: LatLongCoordinate) -> Distance:
    """Haversine distance between two coordinates, in metres."""
    lat1, lon1, lat2, lon2 = map(
        math.radians, (a.latitude, a.longitude, b.latitude, b.longitude)
    )
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return Distance(2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h))))


def initial_bearing(a: LatLongCoordinate, b: LatLongCoordinate) -> float:
    """Forward azimuth from a to b, degrees in [0, 360)."""
    if a.latitude == b.latitude and a.longitude == b.longitude:
        raise CoincidentPoints("bearing undefined between identical points")
    lat1, lat2 = math.radians(a.latitude), math.radians(b.latitude)
    dlon = math.radians(b.longitude - a.longitude)
    y = math.sin(dlon) * math.cos(lat2)
    x = math.cos(lat1) * math.sin(lat2) - math.sin(lat1) * math.cos(lat2) * math.cos(dlon)
    return math.degrees(math.atan2(y, x)) % 360.0


def destination_point(
    start: LatLongCoordinate, bearing_deg: float, distance_m: float
) -> LatLongCoordinate:
    """Point reached travelling distance_m along the initial bearing."""
    delta = distance_m / EARTH_RADIUS_M
    theta = math.radians(bearing_deg)
    lat1 = math.radians(start.latitude)
    lon1 = math.radians(start.longitude)
    lat2 = math.asin(
        math.sin(lat1) * math.cos(delta) + math.cos(lat1) * math.sin(delta) * math.cos(theta)
    )
    lon2 = lon1 + math.atan2(
        math.sin(theta) * math.sin(delta) * math.cos(lat1),
        math.cos(delta) - math.sin(lat1) * math.sin(lat2),
    )
    lon_deg = math.degrees(lon2)
    lon_deg = (lon_deg + 180.0) % 360.0 - 180.0
    return LatLongCoordinate(math.degrees(lat2), lon_deg)


def spherical_centroid(points: list[LatLongCoordinate]) -> LatLongCoordinate:
    """Normalised 3-D vector mean projected back to the sphere.

    Robust near the antimeridian; for a degenerate (balanced) point set the
    first point is returned so the result stays deterministic.
    """
    if not points:
        raise ValueError("centroid of no points")
    sx = sy = sz = 0.0
    for p in points:
        lat, lon = math.radians(p.latitude), math.radians(p.longitude)
        sx += math.cos(lat) * math.cos(lon)
        sy += math.cos(lat) * math.sin(lon)
        sz += math.sin(lat)
    norm = math.sqrt(sx * sx + sy * sy + sz * sz)
    if norm < 1e-9:
        return points[0]
    lat = math.asin(max(-1.0, min(1.0, sz / norm)))
    lon = math.atan2(sy, sx)
    return LatLongCoordinate(math.degrees(lat), math.degrees(lon))


def _require_point(loc, what: str) -> LatLongCoordinate:
    if loc.coordinate is None:
        raise MissingCoordinate(f"{what} has no coordinate")
    return loc.coordinate


def _rect_intervals(b: RectangularBounds):
    tl = _require_point(b.top_left, "rectangle topLeft")
    br = _require_point(b.bottom_right, "rectangle bottomRight")
    # topLeft is the max-lat/min-lon corner; antimeridian crossing unsupported
    if tl.longitude > br.longitude or tl.latitude < br.latitude:
        raise UnsupportedBounds("rectangle corners violate topLeft/bottomRight convention")
    return br.latitude, tl.latitude, tl.longitude, br.longitude


def contains(bounds, p: LatLongCoordinate) -> bool:
    """Closed point-in-bounds test for circular and rectangular bounds."""
    if isinstance(bounds, CircularBounds):
        centre = _require_point(bounds.centre, "circle centre")
        return great_circle_distance(centre, p).value <= distance_in_metres(bounds.radius)
    if isinstance(bounds, RectangularBounds):
        lat_lo, lat_hi, lon_lo, lon_hi = _rect_intervals(bounds)
        return lat_lo <= p.latitude <= lat_hi and lon_lo <= p.longitude <= lon_hi
    raise UnsupportedBounds(f"cannot test containment against {type(bounds).__name__}")


def _circle_rect_intersects(circle: CircularBounds, rect: RectangularBounds) -> bool:
    centre = _require_point(circle.centre, "circle centre")
    lat_lo, lat_hi, lon_lo, lon_hi = _rect_intervals(rect)
    closest_lat = min(max(centre.latitude, lat_lo), lat_hi)
    closest_lon = min(max(centre.longitude, lon_lo), lon_hi)
    # local equirectangular frame at the circle centre
    dy = math.radians(closest_lat - centre.latitude) * EARTH_RADIUS_M
    dx = (
        math.radians(closest_lon - centre.longitude)
        * math.cos(math.radians(centre.latitude))
        * EARTH_RADIUS_M
    )
    return math.hypot(dx, dy) <= distance_in_metres(circle.radius)


def intersects(r1: Region, r2: Region) -> bool:
    """Overlap test between two regions with concrete bounds."""
    b1, b2 = r1.bounds, r2.bounds
    for b in (b1, b2):
        if not isinstance(b, (CircularBounds, RectangularBounds)):
            raise UnsupportedBounds(f"cannot intersect {type(b).__name__}")
    if isinstance(b1, CircularBounds) and isinstance(b2, CircularBounds):
        c1 = _require_point(b1.centre, "circle centre")
        c2 = _require_point(b2.centre, "circle centre")
        reach = distance_in_metres(b1.radius) + distance_in_metres(b2.radius)
        return great_circle_distance(c1, c2).value <= reach
    if isinstance(b1, RectangularBounds) and isinstance(b2, RectangularBounds):
        a_lat_lo, a_lat_hi, a_lon_lo, a_lon_hi = _rect_intervals(b1)
        b_lat_lo, b_lat_hi, b_lon_lo, b_lon_hi = _rect_intervals(b2)
        return (
            a_lat_lo <= b_lat_hi
            and b_lat_lo <= a_lat_hi
            and a_lon_lo <= b_lon_hi
            and b_lon_lo <= a_lon_hi
        )
    if isinstance(b1, CircularBounds):
        return _circle_rect_intersects(b1, b2)
    return _circle_rect_intersects(b2, b1)


def resolved_point(where: Where, gazetteer: Gazetteer | None = None) -> LatLongCoordinate:
    """Collapse a where to its distinguished coordinate."""
    region = resolve_region(where, gazetteer)
    coordinate = region.distinguished_point.coordinate
    if coordinate is None:
        raise Unresolvable("resolved region has no distinguished coordinate")
    return coordinate


def distance_between_wheres(
    a: Where, b: Where, gazetteer: Gazetteer | None = None
) -> Distance:
    """Great-circle distance between the distinguished points of the
    resolved regions of two Wheres."""
    ra = resolve_region(a, gazetteer)
    rb = resolve_region(b, gazetteer)
    pa = _require_point(ra.distinguished_point, "distinguished point")
    pb = _require_point(rb.distinguished_point, "distinguished point")
    return great_circle_distance(pa, pb)
