"""Reading EOD close files and cutting them into analysis windows."""
from __future__ import annotations

import csv
import datetime as dt
import gzip
import io
import logging
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

from .exceptions import DomainError, NoWindowsError, ParseError
from .market import SampleWindow, decimals_to_panel

log = logging.getLogger(__name__)

HEADER = ("date", "ticker", "close")
DEFAULT_COVERAGE = 0.95
_GZIP_MAGIC = b"\x1f\x8b"


@dataclass(frozen=True)
class RawQuote:
    date: dt.date
    ticker: str
    close: Decimal


@dataclass
class PanelDataset:
    """Quotes grouped by ticker: ``quotes[ticker][date] -> close``."""
    quotes: dict = field(default_factory=dict)

    @property
    def tickers(self):
        return sorted(self.quotes)

    @property
    def dates(self):
        return sorted(set().union(*(q.keys() for q in self.quotes.values())))

    @property
    def coverage(self):
        return {tk: len(q) for tk, q in sorted(self.quotes.items())}

    def __len__(self):
        return sum(len(q) for q in self.quotes.values())

    def add(self, quote: RawQuote, line=None):
        per = self.quotes.setdefault(quote.ticker, {})
        if quote.date in per:
            raise ParseError(
                f"duplicate quote for date {quote.date.isoformat()} ticker {quote.ticker}", line)
        per[quote.date] = quote.close

    def records(self):
        for tk in self.tickers:
            for d, c in sorted(self.quotes[tk].items()):
                yield RawQuote(d, tk, c)


def _decode(data: bytes) -> str:
    if data[:2] == _GZIP_MAGIC:
        data = gzip.decompress(data)
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not UTF-8 ({exc.reason})") from exc


def parse_eod_csv(stream) -> PanelDataset:
    """Parse ``date,ticker,close`` records from bytes, a path-free binary
    stream, or already-decoded text. Gzip input is detected by magic bytes."""
    if hasattr(stream, "read"):
        stream = stream.read()
    text = stream if isinstance(stream, str) else _decode(bytes(stream))
    ds = PanelDataset()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return ds
    if tuple(h.strip().lower() for h in header) != HEADER:
        raise ParseError(f"expected header 'date,ticker,close', got {','.join(header)!r}", 1)
    for row in reader:
        line = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line)
        ds_date, ticker, close = (f.strip() for f in row)
        try:
            date = dt.date.fromisoformat(ds_date)
        except ValueError:
            raise ParseError(f"bad date {ds_date!r}", line) from None
        if not ticker:
            raise ParseError("empty ticker", line)
        try:
            price = Decimal(close)
        except InvalidOperation:
            raise ParseError(f"non-numeric close {close!r}", line) from None
        if not price.is_finite() or price <= 0:
            raise ParseError(f"close must be positive, got {close!r}", line)
        ds.add(RawQuote(date, ticker, price), line)
    return ds


def read_eod_csv(path) -> PanelDataset:
    with open(path, "rb") as fh:
        return parse_eod_csv(fh.read())


def quarterly_ranges(dates):
    """Calendar quarters (Jan-Mar, Apr-Jun, Jul-Sep, Oct-Dec) spanned by ``dates``."""
    keys = sorted({(d.year, (d.month - 1) // 3) for d in dates})
    out = []
    for year, q in keys:
        lo = dt.date(year, 3 * q + 1, 1)
        hi = dt.date(year + (q == 3), (3 * q + 3) % 12 + 1, 1) - dt.timedelta(days=1)
        out.append((f"{year}-Q{q + 1}", lo, hi))
    return out


def _resolve_scheme(scheme, dates):
    if scheme in (None, "quarterly"):
        return quarterly_ranges(dates)
    if scheme == "whole":
        return [("all", dates[0], dates[-1])]
    out = []
    for i, item in enumerate(scheme):
        if len(item) == 3:
            label, lo, hi = item
        else:
            lo, hi = item
            label = f"{lo.isoformat()}..{hi.isoformat()}"
        if hi < lo:
            raise DomainError(f"window {label}: end before start")
        out.append((label, lo, hi))
    return out


def partition_windows(dataset: PanelDataset, scheme="quarterly",
                      coverage=DEFAULT_COVERAGE) -> list:
    """Cut the dataset into SampleWindows.

    ``scheme`` is ``"quarterly"``, ``"whole"`` or a list of ``(lo, hi)`` /
    ``(label, lo, hi)`` inclusive date ranges. In each window a ticker quoted
    on fewer than ``coverage`` of the window's candidate dates is dropped; the
    grid is the set of dates on which every remaining ticker is quoted.
    """
    if not len(dataset):
        raise NoWindowsError("no analyzable windows: empty dataset")
    all_dates = dataset.dates
    windows = []
    for label, lo, hi in _resolve_scheme(scheme, all_dates):
        cand = [d for d in all_dates if lo <= d <= hi]
        if not cand:
            log.warning("window %s: no quotes, skipped", label)
            continue
        dropped = {}
        kept = []
        for tk in dataset.tickers:
            quoted = [d for d in cand if d in dataset.quotes[tk]]
            if not quoted:
                continue
            frac = len(quoted) / len(cand)
            if frac < coverage:
                dropped[tk] = f"quoted on {len(quoted)}/{len(cand)} dates"
                continue
            kept.append(tk)
        grid = [d for d in cand if all(d in dataset.quotes[tk] for tk in kept)]
        if kept and len(grid) < len(cand):
            log.info("window %s: %d dates lost to grid intersection", label,
                     len(cand) - len(grid))
        if not kept or len(grid) < 2:
            log.warning("window %s: fewer than 2 common trading dates, skipped", label)
            continue
        for tk, reason in dropped.items():
            log.info("window %s: dropped %s (%s)", label, tk, reason)
        rows = [[dataset.quotes[tk][d] for d in grid] for tk in kept]
        prices, exponent = decimals_to_panel(rows)
        windows.append(SampleWindow(label, tuple(kept), tuple(grid), prices,
                                    exponent, dropped))
    if not windows:
        raise NoWindowsError("no analyzable windows")
    return windows


def window_accounting(dataset: PanelDataset, window: SampleWindow, lo, hi):
    """Split the quotes dated in ``[lo, hi]`` into placed / dropped-ticker /
    off-grid counts. The three always sum to the quotes in range."""
    grid = set(window.dates)
    kept = set(window.tickers)
    placed = dropped = off_grid = 0
    for tk, q in dataset.quotes.items():
        for d in q:
            if not lo <= d <= hi:
                continue
            if tk not in kept:
                dropped += 1
            elif d in grid:
                placed += 1
            else:
                off_grid += 1
    return {"placed": placed, "dropped_ticker": dropped, "off_grid": off_grid}


def write_eod_csv(fh, window: SampleWindow):
    """Write a window in the ingestion schema, ticker-major."""
    fh.write("date,ticker,close\n")
    dates = [d.isoformat() if hasattr(d, "isoformat") else str(d) for d in window.dates]
    for tk, s in zip(window.tickers, window.series):
        for d, c in zip(dates, s.closes):
            fh.write(f"{d},{tk},{c}\n")


def dataset_from_window(window: SampleWindow) -> PanelDataset:
    ds = PanelDataset()
    for s in window.series:
        for d, c in zip(s.dates, s.closes):
            ds.add(RawQuote(d, s.ticker, c))
    return ds

