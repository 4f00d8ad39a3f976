"""Kline parsing, grid alignment, joint min-max normalization, windowing.

One timestep is a 4-hour bar by default.  All assets are normalized with a
single (min, max) pair taken over the whole retained matrix, so relative
price magnitudes between assets survive normalization.  Those statistics
cover the full period, not just the training span; the resulting leakage
caveat is documented in the README.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateRange,
    EmptyFile,
    GapTooLarge,
    MalformedRow,
    NonMonotonicTime,
    RangeUncovered,
    SeriesTooShort,
)

STEP_MS = 4 * 3600 * 1000  # 4-hour bars

INPUT_LEN = 24
OUTPUT_LEN = 3
STRIDE = 24


@dataclass(frozen=True)
class KlineRecord:
    open_time: int  # epoch milliseconds
    open: float
    high: float
    low: float
    close: float
    volume: float


@dataclass
class MarketFrame:
    """Time-aligned normalized close-price matrix, target asset first."""

    asset_ids: list[str]
    timestamps: np.ndarray  # (T,) epoch ms, uniform spacing
    prices: np.ndarray  # (T, m+1) normalized, target in column 0
    norm_min: float
    norm_max: float
    timestep_ms: int = STEP_MS
    norm_scope: str = "all"

    @property
    def n_related(self) -> int:
        return len(self.asset_ids) - 1

    @property
    def n_steps(self) -> int:
        return self.prices.shape[0]

    def denormalize(self, values):
        """Map normalized values back to price units."""
        return np.asarray(values) * (self.norm_max - self.norm_min) + self.norm_min


@dataclass
class Window:
    """One sample: related-asset input block, target context, and label.

    The target asset never appears in ``input``; its in-window history is
    carried separately as ``target_context`` and is consumed only by the
    distance-weight computations, never by the models.
    """

    index: int
    input: np.ndarray  # (in_len, m) related assets only
    target_context: np.ndarray  # (in_len,) target asset
    label: np.ndarray  # (out_len,) future target values
    start_row: int = field(default=0)


def parse_klines(path, timestep_ms: int = STEP_MS) -> list[KlineRecord]:
    """Parse one kline CSV into close-price records on the timestep grid.

    Expects Binance kline column order (open_time, open, high, low, close,
    volume, ...); trailing columns are ignored.  Rows whose open_time does
    not sit on the ``timestep_ms`` grid are dropped.
    """
    records: list[KlineRecord] = []
    last_time = None
    n_rows = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            n_rows += 1
            parts = line.split(",")
            if len(parts) < 6:
                raise MalformedRow(f"{path}:{lineno}: expected >=6 fields, got {len(parts)}")
            try:
                t = int(parts[0])
                o, h, lo, c, v = (float(p) for p in parts[1:6])
            except ValueError as exc:
                raise MalformedRow(f"{path}:{lineno}: {exc}") from None
            if last_time is not None and t <= last_time:
                raise NonMonotonicTime(f"{path}:{lineno}: open_time {t} <= previous {last_time}")
            last_time = t
            if not (o > 0 and h > 0 and lo > 0 and c > 0):
                raise MalformedRow(f"{path}:{lineno}: non-positive price")
            if not (lo <= c <= h):
                raise MalformedRow(f"{path}:{lineno}: close {c} outside [low, high]")
            if t % timestep_ms != 0:
                continue
            records.append(KlineRecord(t, o, h, lo, c, v))
    if n_rows == 0:
        raise EmptyFile(f"{path}: no rows")
    return records


def align_frames(series, start: int, end: int, max_gap: int = 2,
                 timestep_ms: int = STEP_MS):
    """Align assets on the [start, end) grid; returns (timestamps, raw matrix).

    ``series`` is a list of (asset_id, records) with the target asset first.
    Interior gaps of at most ``max_gap`` grid steps are filled by carrying
    the previous close forward.
    """
    grid = np.arange(start, end, timestep_ms, dtype=np.int64)
    if grid.size == 0:
        raise RangeUncovered(f"empty grid for [{start}, {end})")
    raw = np.empty((grid.size, len(series)), dtype=np.float64)
    for col, (asset_id, records) in enumerate(series):
        if not records:
            raise RangeUncovered(f"{asset_id}: no records")
        by_time = {r.open_time: r.close for r in records}
        first = records[0].open_time
        last = records[-1].open_time
        if first > grid[0]:
            raise RangeUncovered(f"{asset_id}: data begins at {first}, after start {grid[0]}")
        if last < grid[-1]:
            raise RangeUncovered(f"{asset_id}: data ends at {last}, before {grid[-1]}")
        gap_run = 0
        prev = None
        for row, t in enumerate(grid):
            close = by_time.get(int(t))
            if close is None:
                gap_run += 1
                if gap_run > max_gap:
                    raise GapTooLarge(
                        f"{asset_id}: gap of {gap_run} steps at {int(t)} exceeds max_gap={max_gap}"
                    )
                if prev is None:
                    raise RangeUncovered(f"{asset_id}: no value at or before start {grid[0]}")
                close = prev
            else:
                gap_run = 0
            raw[row, col] = close
            prev = close
    return grid, raw


def normalize_global(asset_ids, timestamps, raw: np.ndarray,
                     timestep_ms: int = STEP_MS, norm_scope: str = "all") -> MarketFrame:
    """Jointly min-max normalize the raw matrix into a MarketFrame.

    ``norm_scope="related"`` computes the statistics over the related-asset
    columns only (column 0 excluded); the default uses the whole matrix.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.size == 0:
        raise DegenerateRange("empty matrix")
    stats = raw[:, 1:] if norm_scope == "related" else raw
    gmin = float(stats.min())
    gmax = float(stats.max())
    if gmax == gmin:
        raise DegenerateRange(f"global max == global min == {gmin}")
    prices = (raw - gmin) / (gmax - gmin)
    return MarketFrame(
        asset_ids=list(asset_ids),
        timestamps=np.asarray(timestamps, dtype=np.int64),
        prices=prices,
        norm_min=gmin,
        norm_max=gmax,
        timestep_ms=timestep_ms,
        norm_scope=norm_scope,
    )


def segment_windows(frame: MarketFrame, in_len: int = INPUT_LEN,
                    out_len: int = OUTPUT_LEN, stride: int = STRIDE) -> list[Window]:
    """Cut the frame into non-overlapping input/label windows."""
    T = frame.n_steps
    if T < in_len + out_len:
        raise SeriesTooShort(f"need at least {in_len + out_len} steps, have {T}")
    count = (T - in_len - out_len) // stride + 1
    windows = []
    for k in range(count):
        s = k * stride
        windows.append(
            Window(
                index=k,
                input=frame.prices[s:s + in_len, 1:],
                target_context=frame.prices[s:s + in_len, 0],
                label=frame.prices[s + in_len:s + in_len + out_len, 0],
                start_row=s,
            )
        )
    return windows


def window_count(T: int, in_len: int = INPUT_LEN, out_len: int = OUTPUT_LEN,
                 stride: int = STRIDE) -> int:
    """Closed-form window count used to cross-check segmentation."""
    if T < in_len + out_len:
        return 0
    return (T - in_len - out_len) // stride + 1
