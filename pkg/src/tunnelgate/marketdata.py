"""OHLC ingestion, realized volatility, range detection, and breakout reports.

The CSV grammar is fixed: header ``date,open,high,low,close,volume``,
ISO-8601 dates, decimal prices, UTF-8.  Rows may arrive in any order and
are sorted on load; duplicate dates are rejected.

Analytics are read-only over immutable series:

* realized volatility: sample standard deviation of close-to-close log
  returns, annualized by sqrt(252),
* range detection: quantile bands over trailing lows/highs plus a
  flatness score that rejects trending windows,
* volatility-drop detection: a short trailing window measured against a
  long window ending one short-window earlier,
* breakout reports: the detected box width K fed through the barrier
  model to produce the d and T columns.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import barrier as _barrier
from . import model as _model
from .errors import (
    BarInvariantError,
    CsvParseError,
    EmptySeriesError,
    InsufficientDataError,
    InvalidParameterError,
)

TRADING_DAYS_PER_YEAR = 252.0

CSV_HEADER = ("date", "open", "high", "low", "close", "volume")


@dataclass(frozen=True)
class Bar:
    """One daily OHLC bar."""

    date: dt.date
    open: float
    high: float
    low: float
    close: float
    volume: int

    def __post_init__(self) -> None:
        prices = (self.open, self.high, self.low, self.close)
        if not all(math.isfinite(p) and p > 0.0 for p in prices):
            raise BarInvariantError(f"bar {self.date}: prices must be finite and > 0")
        if self.low > min(self.open, self.close):
            raise BarInvariantError(
                f"bar {self.date}: low {self.low} above min(open, close)"
            )
        if self.high < max(self.open, self.close):
            raise BarInvariantError(
                f"bar {self.date}: high {self.high} below max(open, close)"
            )
        if self.volume < 0:
            raise BarInvariantError(f"bar {self.date}: negative volume {self.volume}")


@dataclass(frozen=True)
class PriceSeries:
    """Date-ordered, non-empty sequence of bars for one instrument."""

    symbol: str
    bars: tuple[Bar, ...]

    def __post_init__(self) -> None:
        if not self.bars:
            raise EmptySeriesError(f"{self.symbol}: series has no bars")
        for prev, cur in zip(self.bars, self.bars[1:]):
            if cur.date <= prev.date:
                raise BarInvariantError(
                    f"{self.symbol}: bar dates must strictly increase "
                    f"({prev.date} then {cur.date})"
                )

    def __len__(self) -> int:
        return len(self.bars)

    def closes(self) -> np.ndarray:
        return np.array([b.close for b in self.bars])

    def lows(self) -> np.ndarray:
        return np.array([b.low for b in self.bars])

    def highs(self) -> np.ndarray:
        return np.array([b.high for b in self.bars])


@dataclass(frozen=True)
class RangeDetection:
    """Detected support/resistance band over a trailing window of bars."""

    support: float
    resistance: float
    window: tuple[int, int]
    flatness: float


@dataclass(frozen=True)
class VolatilityDrop:
    """Short-window volatility falling to `ratio` of the preceding long-window level."""

    sigma_before: float
    sigma_after: float
    ratio: float
    at: int


@dataclass(frozen=True)
class BreakoutReport:
    """One report row: box geometry plus the recomputed d and T columns.

    transmission is None when the instrument is not range-bound; the
    regime field carries the flag instead of the row being dropped.
    """

    symbol: str
    start_date: dt.date
    end_date: dt.date
    r: float
    sigma: float
    price_at_resistance: float
    price_at_support: float
    width_k: float
    penetration_d: float
    transmission: float | None
    vol_fall_before: float | None
    vol_fall_after: float | None
    regime: str


def load_csv(path) -> PriceSeries:
    """Parse one instrument's OHLC file into a validated, date-sorted series.

    The symbol is the file stem.  Raises CsvParseError (with the offending
    line number), BarInvariantError (naming the bar), or EmptySeriesError.
    """
    path = Path(path)
    bars: list[Bar] = []
    seen: dict[dt.date, int] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError(f"{path}: file is empty, expected header line") from None
        if tuple(h.strip().lower() for h in header) != CSV_HEADER:
            raise CsvParseError(
                f"{path}: line 1: expected header {','.join(CSV_HEADER)}, got {','.join(header)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 6:
                raise CsvParseError(f"{path}: line {lineno}: expected 6 fields, got {len(row)}")
            try:
                date = dt.date.fromisoformat(row[0].strip())
                o, h, l, c = (float(v) for v in row[1:5])
                volume = int(float(row[5]))
            except ValueError as exc:
                raise CsvParseError(f"{path}: line {lineno}: {exc}") from None
            if date in seen:
                raise CsvParseError(
                    f"{path}: line {lineno}: duplicate date {date} (first seen on line {seen[date]})"
                )
            seen[date] = lineno
            try:
                bars.append(Bar(date=date, open=o, high=h, low=l, close=c, volume=volume))
            except BarInvariantError as exc:
                raise BarInvariantError(f"{path}: line {lineno}: {exc}") from None
    if not bars:
        raise EmptySeriesError(f"{path}: no data rows after the header")
    bars.sort(key=lambda b: b.date)
    return PriceSeries(symbol=path.stem, bars=tuple(bars))


def _annualized_sigma(closes: np.ndarray) -> float:
    """Sample stdev (ddof=1) of log returns, annualized by sqrt(252)."""
    if closes.size < 3:
        raise InsufficientDataError(
            f"need >= 3 closes for a sample standard deviation, got {closes.size}"
        )
    returns = np.diff(np.log(closes))
    return float(np.std(returns, ddof=1) * math.sqrt(TRADING_DAYS_PER_YEAR))


def estimate_volatility(series: PriceSeries, window: int) -> float:
    """Annualized close-to-close volatility over the trailing `window` bars."""
    if window < 2:
        raise InvalidParameterError(f"window must be >= 2 bars, got {window}")
    if len(series) < window:
        raise InsufficientDataError(
            f"{series.symbol}: window of {window} bars exceeds series length {len(series)}"
        )
    return _annualized_sigma(series.closes()[-window:])


def detect_range(
    series: PriceSeries,
    window: int,
    band_quantiles: tuple[float, float] = (0.05, 0.95),
    flatness_threshold: float = 0.6,
) -> RangeDetection | None:
    """Detect a support/resistance band over the trailing `window` bars.

    Support is the lower quantile of lows, resistance the upper quantile
    of highs.  The flatness score 1 - |slope| * window / (resistance -
    support) (clamped to [0, 1], slope from a linear fit of closes)
    rejects trending windows; returns None when no flat, positive-width
    band exists.
    """
    if window < 5:
        raise InvalidParameterError(f"window must be >= 5 bars, got {window}")
    lo_q, hi_q = band_quantiles
    if not (0.0 <= lo_q < hi_q <= 1.0):
        raise InvalidParameterError(f"band quantiles must satisfy 0 <= lo < hi <= 1, got {band_quantiles}")
    if len(series) < window:
        raise InsufficientDataError(
            f"{series.symbol}: window of {window} bars exceeds series length {len(series)}"
        )
    start = len(series) - window
    support = float(np.quantile(series.lows()[start:], lo_q))
    resistance = float(np.quantile(series.highs()[start:], hi_q))
    if resistance <= support:
        return None
    closes = series.closes()[start:]
    slope = float(np.polyfit(np.arange(window), closes, 1)[0])
    flatness = 1.0 - abs(slope) * window / (resistance - support)
    flatness = min(1.0, max(0.0, flatness))
    if flatness < flatness_threshold:
        return None
    return RangeDetection(
        support=support,
        resistance=resistance,
        window=(start, len(series) - 1),
        flatness=flatness,
    )


def detect_vol_drop(
    series: PriceSeries,
    long_window: int,
    short_window: int,
    ratio_threshold: float = 0.75,
) -> list[VolatilityDrop]:
    """Find bars where short-window volatility fell to <= ratio_threshold
    of the long-window level measured one short-window earlier."""
    if short_window < 2 or long_window <= short_window:
        raise InvalidParameterError(
            f"need long_window > short_window >= 2, got {long_window}, {short_window}"
        )
    if not (0.0 < ratio_threshold < 1.0):
        raise InvalidParameterError(f"ratio threshold must be in (0, 1), got {ratio_threshold}")
    if len(series) < long_window + short_window:
        raise InsufficientDataError(
            f"{series.symbol}: need >= {long_window + short_window} bars, have {len(series)}"
        )
    closes = series.closes()
    drops: list[VolatilityDrop] = []
    for at in range(long_window + short_window - 1, len(series)):
        after = _annualized_sigma(closes[at - short_window + 1 : at + 1])
        before = _annualized_sigma(closes[at - short_window - long_window + 1 : at - short_window + 1])
        if before <= 0.0 or after <= 0.0:
            continue
        ratio = after / before
        if ratio <= ratio_threshold:
            drops.append(
                VolatilityDrop(sigma_before=before, sigma_after=after, ratio=ratio, at=at)
            )
    return drops


def build_report(
    series: PriceSeries,
    r: float,
    detection: RangeDetection,
    drop: VolatilityDrop | None,
    sigma: float,
) -> BreakoutReport:
    """Assemble one report row from a detected range and market parameters.

    d and T are recomputed from (r, sigma, K) through the barrier model.
    A trending instrument (lambda K^2 >= 1) is not an error: the row is
    flagged by its regime and the transmission column is left empty.
    """
    params = _model.MarketParams(r=r, sigma=sigma)
    bounds = _model.RangeBound(support=detection.support, resistance=detection.resistance)
    geometry = _model.barrier_geometry(params, bounds)
    regime = _model.classify_regime(_model.compute_lambda(params), geometry)
    transmission = None
    if regime is _model.Regime.RANGE_BOUND:
        transmission = _barrier.transmission_wkb(params, bounds).t_wkb
    return BreakoutReport(
        symbol=series.symbol,
        start_date=series.bars[0].date,
        end_date=series.bars[-1].date,
        r=r,
        sigma=sigma,
        price_at_resistance=detection.resistance,
        price_at_support=detection.support,
        width_k=bounds.width_k,
        penetration_d=geometry.d,
        transmission=transmission,
        vol_fall_before=drop.sigma_before if drop else None,
        vol_fall_after=drop.sigma_after if drop else None,
        regime=regime.value,
    )
