"""Time ontology: instants, periods, temporal regions and the Swatch beat clock.

Instants are stored as milliseconds since the POSIX epoch, UTC.  The lexical
form understood on the wire is the dateTime subset ``YYYY-MM-DDThh:mm:ss[.fff]``
with an optional ``Z``/``+hh:mm`` suffix; zone-less stamps are read as UTC.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from enum import Enum
from functools import total_ordering

from .errors import OutOfRange

__all__ = [
    "TemporalSystem",
    "Time",
    "Period",
    "TemporalRegion",
    "TemporalBounds",
    "SymbolicTime",
    "When",
    "TimeOfDay",
    "period_contains",
    "region_contains",
    "utc_to_swatch",
]

_DATETIME_RE = re.compile(
    r"(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})(\.\d+)?(Z|[+-]\d{2}:\d{2})?$"
)
_TIME_RE = re.compile(r"(\d{2}):(\d{2}):(\d{2})(\.\d+)?$")

MILLIS_PER_DAY = 86_400_000
# Swatch beats run on fixed UTC+1 (no daylight saving), 1000 beats per day.
_BMT_OFFSET_MILLIS = 3_600_000
_MILLIS_PER_BEAT = 86_400.0


class TemporalSystem(Enum):
    """Closed set of representation systems."""

    UTC = "UTC"
    SWATCH = "SwatchTime"


@total_ordering
@dataclass(frozen=True)
class Time:
    """An absolute instant plus the system it was expressed in.

    Ordering compares instants only; equality also compares the system.
    """

    epoch_millis: int
    system: TemporalSystem = TemporalSystem.UTC

    def __lt__(self, other: "Time") -> bool:
        return self.epoch_millis < other.epoch_millis

    @classmethod
    def from_lexical(cls, text: str) -> "Time":
        """Parse a dateTime lexical form, lossless to milliseconds.

        Raises ValueError for anything outside the supported subset.
        """
        m = _DATETIME_RE.match(text.strip())
        if m is None:
            raise ValueError(f"malformed dateTime: {text!r}")
        year, month, day, hour, minute, second = (int(g) for g in m.groups()[:6])
        frac, zone = m.group(7), m.group(8)
        if zone is None or zone == "Z":
            tz = timezone.utc
        else:
            sign = 1 if zone[0] == "+" else -1
            oh, om = int(zone[1:3]), int(zone[4:6])
            tz = timezone(sign * timedelta(hours=oh, minutes=om))
        dt = datetime(year, month, day, hour, minute, second, tzinfo=tz)
        millis = int(round(dt.timestamp() * 1000))
        if frac:
            millis += int(round(float(frac) * 1000))
        return cls(millis)

    def to_datetime(self) -> datetime:
        return datetime.fromtimestamp(self.epoch_millis / 1000, tz=timezone.utc)

    def lexical(self) -> str:
        """Canonical zone-less UTC form, fractional seconds trimmed."""
        whole, ms = divmod(self.epoch_millis, 1000)
        dt = datetime.fromtimestamp(whole, tz=timezone.utc)
        base = dt.strftime("%Y-%m-%dT%H:%M:%S")
        if ms:
            return base + f".{ms:03d}".rstrip("0")
        return base


@dataclass(frozen=True)
class Period:
    """A contiguous closed span of time; start must not exceed end."""

    start: Time
    end: Time

    def __post_init__(self):
        if self.start.epoch_millis > self.end.epoch_millis:
            # start must lie in (-inf, end]
            raise OutOfRange(
                "Period.start", self.start.epoch_millis, (None, self.end.epoch_millis)
            )


@dataclass(frozen=True)
class TemporalRegion:
    """A non-empty set of periods."""

    periods: frozenset[Period]

    def __init__(self, periods):
        object.__setattr__(self, "periods", frozenset(periods))
        if not self.periods:
            raise ValueError("temporal region needs at least one period")


@dataclass(frozen=True)
class TemporalBounds:
    """Bounding analogue of spatial bounds: one or more periods."""

    periods: frozenset[Period]

    def __init__(self, periods):
        object.__setattr__(self, "periods", frozenset(periods))
        if not self.periods:
            raise ValueError("temporal bounds need at least one period")


@dataclass(frozen=True)
class SymbolicTime:
    """A named time ("lunchtime") denoting an explicit temporal region."""

    name: str
    denotes: TemporalRegion


When = Time | SymbolicTime | TemporalRegion


@dataclass(frozen=True)
class TimeOfDay:
    """A time of day detached from any date, in [0, 86400) seconds."""

    seconds_since_midnight: float

    def __post_init__(self):
        if not 0 <= self.seconds_since_midnight < 86_400:
            raise ValueError("time of day outside [0, 86400)")

    @classmethod
    def from_lexical(cls, text: str) -> "TimeOfDay":
        m = _TIME_RE.match(text.strip())
        if m is None:
            raise ValueError(f"malformed time: {text!r}")
        hour, minute, second = int(m.group(1)), int(m.group(2)), int(m.group(3))
        if hour > 23 or minute > 59 or second > 59:
            raise ValueError(f"time fields out of range: {text!r}")
        # integer millisecond arithmetic so lexical round-trips are exact
        ms = min(round(float(m.group(4)) * 1000), 999) if m.group(4) else 0
        return cls(((hour * 3600 + minute * 60 + second) * 1000 + ms) / 1000.0)

    def lexical(self) -> str:
        # millisecond-quantized, so values built from lexical forms round-trip
        total_ms = min(round(self.seconds_since_midnight * 1000), 86_399_999)
        whole, ms = divmod(total_ms, 1000)
        h, rem = divmod(whole, 3600)
        m, s = divmod(rem, 60)
        base = f"{h:02d}:{m:02d}:{s:02d}"
        if ms:
            base += f".{ms:03d}".rstrip("0")
        return base


def period_contains(p: Period, t: Time) -> bool:
    """Closed containment: start <= t <= end."""
    return p.start.epoch_millis <= t.epoch_millis <= p.end.epoch_millis


def region_contains(r: TemporalRegion, t: Time) -> bool:
    """True iff any member period contains the instant."""
    return any(period_contains(p, t) for p in r.periods)


def utc_to_swatch(t: Time) -> float:
    """Beats since the most recent midnight UTC+1, in [0, 1000)."""
    return ((t.epoch_millis + _BMT_OFFSET_MILLIS) % MILLIS_PER_DAY) / _MILLIS_PER_BEAT
