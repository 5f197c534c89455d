"""Futures contract chains and spot series: parsing, calendar, windowing.

Contract CSV layout (header required)::

    asset,contract_year,contract_month,date,high,low,close,volume,open_interest[,expiry_override]

Spot CSV layout::

    asset,date,price

Dates are ISO-8601, decimals use '.', values are comma separated.
"""

from __future__ import annotations

import calendar
import csv
import datetime as dt
import io
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

from .errors import (
    BarAfterExpiryError,
    DomainError,
    DuplicateRowError,
    EmptyJoinError,
    FormatError,
    OrderingError,
    RowError,
    RowIssue,
)

CONTRACT_HEADER = (
    "asset",
    "contract_year",
    "contract_month",
    "date",
    "high",
    "low",
    "close",
    "volume",
    "open_interest",
)
CONTRACT_HEADER_WITH_EXPIRY = CONTRACT_HEADER + ("expiry_override",)
SPOT_HEADER = ("asset", "date", "price")

KNOWN_ASSETS = ("bitcoin", "gold", "oil")

MONTH_ABBR = ("Jan", "Feb", "Mar", "Apr", "May", "Jun",
              "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")


def normalize_asset(name: str) -> str:
    name = name.strip()
    if not name:
        raise DomainError("asset name must be non-empty")
    lowered = name.lower()
    return lowered if lowered in KNOWN_ASSETS else name


def asset_sort_key(asset: str) -> tuple[int, str]:
    """Canonical asset order: bitcoin, gold, oil, then custom names alphabetically."""
    if asset in KNOWN_ASSETS:
        return (KNOWN_ASSETS.index(asset), "")
    return (len(KNOWN_ASSETS), asset)


def contract_label(contract_month: tuple[int, int]) -> str:
    """``(2018, 3)`` -> ``'Mar-18'``."""
    year, month = contract_month
    return f"{MONTH_ABBR[month - 1]}-{year % 100:02d}"


@dataclass(frozen=True)
class DailyBar:
    date: dt.date
    high: float
    low: float
    close: float
    volume: float
    open_interest: float

    @property
    def has_nonpositive_price(self) -> bool:
        return self.high <= 0 or self.low <= 0


@dataclass(frozen=True)
class ContractSeries:
    asset: str
    contract_month: tuple[int, int]
    expiry: dt.date
    bars: tuple[DailyBar, ...]
    expiry_overridden: bool = False

    def __post_init__(self):
        for prev, nxt in zip(self.bars, self.bars[1:]):
            if nxt.date <= prev.date:
                raise OrderingError(
                    f"{self.label}: bars not strictly increasing at {nxt.date.isoformat()}"
                )

    @property
    def label(self) -> str:
        return f"{self.asset} {contract_label(self.contract_month)}"

    @property
    def dates(self) -> list[dt.date]:
        return [b.date for b in self.bars]

    def flagged_bars(self) -> list[DailyBar]:
        """Bars carrying a non-positive high or low (accepted on ingest)."""
        return [b for b in self.bars if b.has_nonpositive_price]

    def __len__(self) -> int:
        return len(self.bars)


@dataclass(frozen=True)
class SpotSeries:
    asset: str
    points: tuple[tuple[dt.date, float], ...]

    def __post_init__(self):
        for (d0, _), (d1, _) in zip(self.points, self.points[1:]):
            if d1 <= d0:
                raise OrderingError(
                    f"spot {self.asset}: dates not strictly increasing at {d1.isoformat()}"
                )
        for d, p in self.points:
            if not math.isfinite(p):
                raise DomainError(f"spot {self.asset}: non-finite price on {d.isoformat()}")

    def as_dict(self) -> dict[dt.date, float]:
        return dict(self.points)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ObservationRow:
    date: dt.date
    dv: float
    m: int
    v: float
    o: float


@dataclass(frozen=True)
class ObservationPanel:
    asset: str
    contract_month: tuple[int, int]
    rows: tuple[ObservationRow, ...]
    dropped: dict[str, int] = field(default_factory=dict)
    unmatched: int = 0

    @property
    def dropped_rows(self) -> int:
        return sum(self.dropped.values())

    @property
    def label(self) -> str:
        return contract_label(self.contract_month)

    def __len__(self) -> int:
        return len(self.rows)


# --------------------------------------------------------------------------
# calendar


def last_friday(year: int, month: int) -> dt.date:
    if not 1 <= month <= 12:
        raise DomainError(f"month must be in 1..12, got {month}")
    last_day = calendar.monthrange(year, month)[1]
    d = dt.date(year, month, last_day)
    # Monday=0 .. Friday=4
    return d - dt.timedelta(days=(d.weekday() - 4) % 7)


def maturity_counter(series: ContractSeries, date: dt.date) -> int:
    """Trading days in ``series`` strictly after ``date``, up to and including expiry."""
    if date > series.expiry:
        raise DomainError(f"{date.isoformat()} is after expiry {series.expiry.isoformat()}")
    dates = series.dates
    if date not in dates:
        raise DomainError(f"{date.isoformat()} is not a bar date of {series.label}")
    return sum(1 for d in dates if date < d <= series.expiry)


def maturity_counters(series: ContractSeries) -> list[int]:
    """Maturity counter for every bar, in bar order."""
    live = [b for b in series.bars if b.date <= series.expiry]
    if len(live) != len(series.bars):
        raise DomainError(f"{series.label} has bars after expiry")
    n = len(series.bars)
    return [n - 1 - i for i in range(n)]


def window_last_n(series: ContractSeries, window_days: int) -> ContractSeries:
    if window_days <= 0:
        raise DomainError(f"window_days must be positive, got {window_days}")
    live = [b for b in series.bars if b.date <= series.expiry]
    return replace(series, bars=tuple(live[-window_days:]))


def align_with_spot(
    series: ContractSeries, spot: SpotSeries
) -> tuple[list[tuple[DailyBar, float]], int]:
    """Inner join of contract bars and spot prices on date.

    Returns the joined pairs and the number of dates present on only one
    side, restricted to the contract's own date range.
    """
    if series.asset != spot.asset:
        raise DomainError(f"asset mismatch: contract {series.asset!r}, spot {spot.asset!r}")
    prices = spot.as_dict()
    pairs = [(b, prices[b.date]) for b in series.bars if b.date in prices]
    if not pairs:
        raise EmptyJoinError(f"{series.label}: no dates shared with the spot series")
    if series.bars:
        lo, hi = series.bars[0].date, series.bars[-1].date
        bar_dates = set(series.dates)
        spot_only = sum(1 for d in prices if lo <= d <= hi and d not in bar_dates)
    else:
        spot_only = 0
    dropped = (len(series.bars) - len(pairs)) + spot_only
    return pairs, dropped


# --------------------------------------------------------------------------
# parsing


def _text(data: bytes | str) -> str:
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise FormatError(f"input is not valid UTF-8: {exc}") from None
    return data


def _parse_date(raw: str) -> dt.date:
    return dt.date.fromisoformat(raw.strip())


def _parse_float(name: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{name}: cannot parse {raw!r} as a number") from None
    if not math.isfinite(value):
        raise ValueError(f"{name}: non-finite value {raw!r}")
    return value


def _read_rows(text: str, expected: tuple[str, ...], *optional: tuple[str, ...]):
    reader = csv.reader(io.StringIO(text))
    try:
        header = tuple(h.strip() for h in next(reader))
    except StopIteration:
        raise FormatError(f"missing header; expected {','.join(expected)}") from None
    allowed = (expected,) + optional
    if header not in allowed:
        raise FormatError(
            f"header mismatch: got {','.join(header)!r}, expected {','.join(expected)!r}"
            + "".join(f" or {','.join(o)!r}" for o in optional)
        )
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        yield reader.line_num, header, row


def parse_contract_csv(data: bytes | str) -> list[ContractSeries]:
    """Parse the contract CSV into one :class:`ContractSeries` per (asset, month).

    Every malformed row is collected and reported together in a
    :class:`RowError`. Duplicate (contract, date) pairs raise
    :class:`DuplicateRowError`; bars after expiry raise
    :class:`BarAfterExpiryError`.
    """
    text = _text(data)
    issues: list[RowIssue] = []
    groups: dict[tuple[str, tuple[int, int]], dict[dt.date, DailyBar]] = {}
    overrides: dict[tuple[str, tuple[int, int]], dt.date] = {}
    first_line: dict[tuple[str, tuple[int, int]], dict[dt.date, int]] = {}

    for line, header, row in _read_rows(text, CONTRACT_HEADER, CONTRACT_HEADER_WITH_EXPIRY):
        if len(row) != len(header):
            issues.append(RowIssue(line, f"expected {len(header)} fields, got {len(row)}"))
            continue
        rec = dict(zip(header, (c.strip() for c in row)))
        try:
            asset = normalize_asset(rec["asset"])
            year = int(rec["contract_year"])
            month = int(rec["contract_month"])
            if not 1 <= month <= 12:
                raise ValueError(f"contract_month: {month} outside 1..12")
            date = _parse_date(rec["date"])
            high = _parse_float("high", rec["high"])
            low = _parse_float("low", rec["low"])
            close = _parse_float("close", rec["close"])
            volume = _parse_float("volume", rec["volume"])
            oi = _parse_float("open_interest", rec["open_interest"])
            if volume < 0 or oi < 0:
                raise ValueError("volume and open_interest must be non-negative")
            if high > 0 and low > 0 and low > high:
                raise ValueError(f"low {low} exceeds high {high}")
            override = rec.get("expiry_override") or ""
            expiry = _parse_date(override) if override else None
        except (ValueError, DomainError) as exc:
            issues.append(RowIssue(line, str(exc)))
            continue

        key = (asset, (year, month))
        bars = groups.setdefault(key, {})
        lines = first_line.setdefault(key, {})
        if date in bars:
            raise DuplicateRowError(f"{asset} {contract_label((year, month))}", date, line)
        bars[date] = DailyBar(date, high, low, close, volume, oi)
        lines[date] = line
        if expiry is not None:
            previous = overrides.setdefault(key, expiry)
            if previous != expiry:
                issues.append(RowIssue(line, f"conflicting expiry_override {expiry.isoformat()}"))

    if issues:
        raise RowError(issues)

    out = []
    for key in sorted(groups, key=lambda k: (asset_sort_key(k[0]), k[1])):
        asset, cm = key
        expiry = overrides.get(key) or last_friday(*cm)
        bars = tuple(groups[key][d] for d in sorted(groups[key]))
        late = [b for b in bars if b.date > expiry]
        if late:
            raise BarAfterExpiryError(f"{asset} {contract_label(cm)}", late[0].date, expiry)
        out.append(ContractSeries(asset, cm, expiry, bars, expiry_overridden=key in overrides))
    return out


def parse_spot_csv(data: bytes | str) -> SpotSeries:
    text = _text(data)
    issues: list[RowIssue] = []
    assets: set[str] = set()
    points: list[tuple[dt.date, float]] = []
    for line, header, row in _read_rows(text, SPOT_HEADER):
        if len(row) != len(header):
            issues.append(RowIssue(line, f"expected {len(header)} fields, got {len(row)}"))
            continue
        rec = dict(zip(header, (c.strip() for c in row)))
        try:
            asset = normalize_asset(rec["asset"])
            date = _parse_date(rec["date"])
            if not rec["price"]:
                raise ValueError("price: missing")
            price = _parse_float("price", rec["price"])
        except (ValueError, DomainError) as exc:
            issues.append(RowIssue(line, str(exc)))
            continue
        if points and date <= points[-1][0]:
            raise OrderingError(
                f"line {line}: date {date.isoformat()} does not follow {points[-1][0].isoformat()}"
            )
        assets.add(asset)
        points.append((date, price))
    if issues:
        raise RowError(issues)
    if len(assets) > 1:
        raise FormatError(f"spot file mixes assets: {', '.join(sorted(assets))}")
    if not assets:
        raise FormatError("spot file has no rows")
    return SpotSeries(assets.pop(), tuple(points))


def parse_spot_csv_multi(data: bytes | str) -> dict[str, SpotSeries]:
    """Spot file holding several assets; dates must increase within each asset."""
    text = _text(data)
    per_asset: dict[str, list[str]] = {}
    lines = text.splitlines()
    if not lines:
        raise FormatError(f"missing header; expected {','.join(SPOT_HEADER)}")
    header = lines[0]
    for raw in lines[1:]:
        if not raw.strip():
            continue
        asset = normalize_asset(raw.split(",", 1)[0])
        per_asset.setdefault(asset, []).append(raw)
    if not per_asset:
        for _ in _read_rows(header + "\n", SPOT_HEADER):
            pass
        return {}
    return {a: parse_spot_csv("\n".join([header] + rows) + "\n") for a, rows in per_asset.items()}


# --------------------------------------------------------------------------
# serialization


def _fmt(x: float) -> str:
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def format_contract_csv(series: Iterable[ContractSeries]) -> str:
    """Serialize contract series; the override column is written only when needed."""
    series = list(series)
    with_override = any(s.expiry_overridden for s in series)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CONTRACT_HEADER_WITH_EXPIRY if with_override else CONTRACT_HEADER)
    for s in series:
        year, month = s.contract_month
        for b in s.bars:
            row = [s.asset, year, month, b.date.isoformat(), _fmt(b.high), _fmt(b.low),
                   _fmt(b.close), _fmt(b.volume), _fmt(b.open_interest)]
            if with_override:
                row.append(s.expiry.isoformat() if s.expiry_overridden else "")
            w.writerow(row)
    return buf.getvalue()


def format_spot_csv(spot: SpotSeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SPOT_HEADER)
    for d, p in spot.points:
        w.writerow([spot.asset, d.isoformat(), _fmt(p)])
    return buf.getvalue()
