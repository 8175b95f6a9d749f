"""UTC calendar-month arithmetic for the monthly observation grid.

All panel bookkeeping runs on whole UTC calendar months anchored at each
developer's first-appearance month. Months are represented as an integer
``year * 12 + (month - 1)`` so ordinary integer arithmetic moves the grid.
"""

from __future__ import annotations

from datetime import datetime, timezone

# Mean Gregorian month, used only to express raw durations in month units.
DAYS_PER_MONTH = 30.4375


def month_of(ts: datetime) -> int:
    """Index of the UTC calendar month containing ``ts``."""
    ts = to_utc(ts)
    return ts.year * 12 + (ts.month - 1)


def month_start(index: int) -> datetime:
    """First instant of the month with the given index."""
    year, month0 = divmod(index, 12)
    return datetime(year, month0 + 1, 1, tzinfo=timezone.utc)


def months_between(a: int, b: int) -> int:
    """Whole months from month-index ``a`` to ``b`` (may be negative)."""
    return b - a


def to_utc(ts: datetime) -> datetime:
    """Coerce a timestamp to timezone-aware UTC; naive input is rejected."""
    if ts.tzinfo is None:
        raise ValueError("naive datetime; all timestamps must be timezone-aware")
    return ts.astimezone(timezone.utc)


def duration_months(start: datetime, end: datetime) -> float:
    """Fractional months between two instants (mean-month convention)."""
    delta = to_utc(end) - to_utc(start)
    return delta.total_seconds() / (86400.0 * DAYS_PER_MONTH)


def isoformat_z(ts: datetime) -> str:
    """ISO-8601 UTC with a trailing ``Z``, second precision unless finer."""
    ts = to_utc(ts).replace(tzinfo=None)
    if ts.microsecond:
        return ts.isoformat() + "Z"
    return ts.isoformat(timespec="seconds") + "Z"


def parse_iso_utc(text: str, field: str = "timestamp") -> datetime:
    """Parse strict ISO-8601 into UTC; names the offending field on error."""
    raw = text.strip()
    if raw.endswith("Z"):
        raw = raw[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ValueError(f"invalid timestamp in field {field!r}: {text!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)
