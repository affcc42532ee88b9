"""Tick parsing, fixed-period resampling, log-returns, and cleaning rules.

Input format: headerless UTF-8 CSV, one trade per line, ``unix_seconds,price,amount``
(the Bitcoincharts dump layout).  Prices are resampled onto a regular
bar grid and returns are percent log differences.
"""

import io
import json
from dataclasses import dataclass, field

import numpy as np

OUTLIER_THRESHOLD_DEFAULT = 40.0


class TickParseError(ValueError):
    """Malformed tick input; carries the 1-based line number."""

    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass
class TickSeries:
    """Raw trades: parallel arrays of timestamp (s), price, amount."""

    timestamps: np.ndarray
    prices: np.ndarray
    amounts: np.ndarray
    input_was_sorted: bool = True

    def __len__(self):
        return len(self.timestamps)


@dataclass
class PriceSeries:
    """Regular price grid: bar i sits at start_time + i * delta_t."""

    delta_t_minutes: int
    start_time: int
    prices: np.ndarray
    observed: np.ndarray  # bool per bar; False = gap-filled (price carried over)

    def __len__(self):
        return len(self.prices)

    def bar_times(self):
        step = self.delta_t_minutes * 60
        return self.start_time + step * np.arange(len(self.prices), dtype=np.int64)


@dataclass
class ReturnSeries:
    """Percent log-returns at a fixed sampling period."""

    delta_t_minutes: int
    times: np.ndarray
    values: np.ndarray
    removed_outliers: list = field(default_factory=list)

    def __len__(self):
        return len(self.values)


def _as_text_lines(source):
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return io.StringIO(data)
    raise TypeError("source must be str, bytes, or a file-like object")


def parse_ticks(source) -> TickSeries:
    """Parse `timestamp,price,amount` lines into a TickSeries.

    Empty lines are skipped.  Records are returned in timestamp order; a
    stable sort is applied when the input is out of order (recorded in
    ``input_was_sorted``) so that "last trade wins" semantics survive.
    """
    ts, px, am = [], [], []
    for lineno, raw in enumerate(_as_text_lines(source), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise TickParseError(lineno, f"expected 3 fields, got {len(parts)}")
        try:
            t = int(parts[0])
            p = float(parts[1])
            a = float(parts[2])
        except ValueError as exc:
            raise TickParseError(lineno, str(exc)) from None
        if not np.isfinite(p) or p <= 0.0:
            raise ValueError(f"line {lineno}: nonpositive or non-finite price {parts[1]}")
        if a < 0.0:
            raise ValueError(f"line {lineno}: negative amount {parts[2]}")
        ts.append(t)
        px.append(p)
        am.append(a)

    timestamps = np.asarray(ts, dtype=np.int64)
    prices = np.asarray(px, dtype=np.float64)
    amounts = np.asarray(am, dtype=np.float64)
    was_sorted = bool(np.all(np.diff(timestamps) >= 0)) if len(timestamps) > 1 else True
    if not was_sorted:
        order = np.argsort(timestamps, kind="stable")
        timestamps, prices, amounts = timestamps[order], prices[order], amounts[order]
    return TickSeries(timestamps, prices, amounts, input_was_sorted=was_sorted)


def ticks_to_csv(ticks: TickSeries) -> str:
    """Serialize back to the input format (round-trips bit-identically)."""
    lines = [
        f"{t},{float(p)!r},{float(a)!r}"
        for t, p, a in zip(ticks.timestamps, ticks.prices, ticks.amounts)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def resample_last(ticks: TickSeries, delta_t_minutes: int) -> PriceSeries:
    """Resample to a regular grid: bar price = last trade in [start, start + dt).

    Bar boundaries are aligned to multiples of delta_t since the epoch.
    Bars with no trades carry the previous bar's price and are flagged as
    gap-filled.  Bars before the first trade are excluded.
    """
    if len(ticks) == 0:
        raise ValueError("cannot resample an empty TickSeries")
    if delta_t_minutes < 1:
        raise ValueError("delta_t_minutes must be >= 1")

    step = int(delta_t_minutes) * 60
    first_bar = int(ticks.timestamps[0]) // step
    last_bar = int(ticks.timestamps[-1]) // step
    n_bars = last_bar - first_bar + 1

    # Last tick strictly before each bar end; bar 0 always contains a tick.
    ends = (first_bar + 1 + np.arange(n_bars, dtype=np.int64)) * step
    idx = np.searchsorted(ticks.timestamps, ends, side="left") - 1
    starts = ends - step
    observed = ticks.timestamps[idx] >= starts
    prices = ticks.prices[idx]  # gap-filled bars inherit the last earlier trade

    return PriceSeries(
        delta_t_minutes=int(delta_t_minutes),
        start_time=first_bar * step,
        prices=np.asarray(prices, dtype=np.float64),
        observed=observed,
    )


def log_returns(series: PriceSeries) -> ReturnSeries:
    """Percent log-returns: 100 * (ln p[i+1] - ln p[i]); one per bar pair."""
    if len(series) < 2:
        raise ValueError("need at least 2 bars to form returns")
    values = 100.0 * np.diff(np.log(series.prices))
    times = series.bar_times()[1:]
    return ReturnSeries(series.delta_t_minutes, times, values)


def filter_outliers(
    returns: ReturnSeries,
    threshold: float = OUTLIER_THRESHOLD_DEFAULT,
    mode: str = "positive-only",
) -> ReturnSeries:
    """Drop outlier returns; dropped entries are recorded, never lost.

    ``positive-only`` removes r > threshold (the literal published rule);
    ``symmetric`` removes |r| > threshold.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if mode == "positive-only":
        drop = returns.values > threshold
    elif mode == "symmetric":
        drop = np.abs(returns.values) > threshold
    else:
        raise ValueError(f"unknown outlier mode {mode!r}")

    removed = list(returns.removed_outliers) + [
        (int(t), float(v))
        for t, v in zip(returns.times[drop], returns.values[drop])
    ]
    return ReturnSeries(
        returns.delta_t_minutes,
        returns.times[~drop],
        returns.values[~drop],
        removed_outliers=removed,
    )


def _fmt(x):
    return format(float(x), ".17g")


def prices_to_csv(series: PriceSeries) -> str:
    out = ["timestamp,value,flag"]
    for t, p, obs in zip(series.bar_times(), series.prices, series.observed):
        out.append(f"{t},{_fmt(p)},{'observed' if obs else 'gap-filled'}")
    return "\n".join(out) + "\n"


def returns_to_csv(returns: ReturnSeries) -> str:
    out = ["timestamp,value,flag"]
    for t, v in zip(returns.times, returns.values):
        out.append(f"{t},{_fmt(v)},ok")
    return "\n".join(out) + "\n"


def returns_to_json(returns: ReturnSeries) -> str:
    doc = {
        "delta_t_minutes": returns.delta_t_minutes,
        "n_returns": int(len(returns)),
        "removed_outliers": [
            {"timestamp": t, "value": v} for t, v in returns.removed_outliers
        ],
        "times": [int(t) for t in returns.times],
        "values": [float(v) for v in returns.values],
    }
    return json.dumps(doc, indent=2)


def read_returns_csv(source) -> ReturnSeries:
    """Read a returns CSV produced by `returns_to_csv` (flag column optional)."""
    text = _as_text_lines(source).read()
    times, values = [], []
    delta_t = None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if lines and lines[0].lower().startswith("timestamp"):
        lines = lines[1:]
    for ln in lines:
        parts = ln.split(",")
        times.append(int(parts[0]))
        values.append(float(parts[1]))
    times = np.asarray(times, dtype=np.int64)
    if len(times) > 1:
        gaps = np.diff(times)
        step = int(np.min(gaps)) if len(gaps) else 0
        if step > 0 and step % 60 == 0:
            delta_t = step // 60
    return ReturnSeries(delta_t or 1, times, np.asarray(values, dtype=np.float64))
