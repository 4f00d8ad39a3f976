"""Regenerate the bundled 4-hour kline fixture under data/fixture/.

Eight USDT pairs, 4200 bars from 2018-06-01, written in exchange kline
column order (open_time, open, high, low, close, volume, close_time,
quote_volume, trades, taker_base, taker_quote, ignore).  The related
assets track a shared latent walk a few bars ahead of the target, so the
fixture carries a real lead-lag signal for the pipeline to find.

The output is deterministic; the files are committed, so rerun this only
when the fixture itself should change.
"""

import argparse
from pathlib import Path

import numpy as np

START_MS = 1527811200000  # 2018-06-01T00:00:00Z
STEP_MS = 4 * 3600 * 1000
BARS = 4200
SEED = 20180601

# (asset, price low, price high, lag in bars, typical volume)
TARGET = ("BTCUSDT", 3156.26, 13960.76, 0, 9000.0)
RELATED = [
    ("ETHUSDT", 83.0, 625.0, 6, 70000.0),
    ("LTCUSDT", 23.0, 146.0, 6, 300000.0),
    ("EOSUSDT", 1.8, 15.0, 12, 2500000.0),
    ("IOTAUSDT", 0.12, 1.6, 12, 8000000.0),
    ("XRPUSDT", 0.17, 0.75, 18, 40000000.0),
    ("XLMUSDT", 0.04, 0.32, 18, 30000000.0),
    ("ADAUSDT", 0.027, 0.21, 24, 60000000.0),
]
MAX_LAG = max(lag for _, _, _, lag, _ in RELATED)
IDIO_BLEND = 0.25  # weight of each asset's own walk vs the shared one


def smooth_walk(rng, length):
    """Unit-interval random walk with short-range smoothing."""
    steps = rng.normal(size=length + 8)
    steps = np.convolve(steps, np.ones(5) / 5, mode="valid")[:length]
    walk = np.cumsum(steps)
    lo, hi = walk.min(), walk.max()
    return (walk - lo) / (hi - lo)


def ohlc_rows(rng, closes, volume_scale):
    """Expand a close series into full kline rows with consistent OHLC."""
    opens = np.empty_like(closes)
    opens[0] = closes[0] * (1 + rng.normal(0, 0.002))
    opens[1:] = closes[:-1]
    spread = np.abs(rng.normal(0, 0.004, size=closes.size)) + 0.001
    highs = np.maximum(opens, closes) * (1 + spread)
    lows = np.minimum(opens, closes) * (1 - spread)
    volumes = volume_scale * rng.lognormal(0.0, 0.55, size=closes.size)
    rows = []
    for i in range(closes.size):
        t = START_MS + i * STEP_MS
        c = closes[i]
        v = volumes[i]
        trades = int(v / volume_scale * 40000) + 1
        rows.append(
            f"{t},{opens[i]:.8f},{highs[i]:.8f},{lows[i]:.8f},{c:.8f},"
            f"{v:.8f},{t + STEP_MS - 1},{v * c:.8f},{trades},"
            f"{v * 0.5:.8f},{v * c * 0.5:.8f},0"
        )
    return rows


def make_fixture(out_dir: Path) -> None:
    rng = np.random.default_rng(SEED)
    latent = smooth_walk(rng, BARS + MAX_LAG)

    out_dir.mkdir(parents=True, exist_ok=True)
    target_closes = (
        TARGET[1] + latent[:BARS] * (TARGET[2] - TARGET[1])
    )
    files = {TARGET[0]: ohlc_rows(rng, target_closes, TARGET[4])}

    for asset, lo, hi, lag, vol in RELATED:
        own = smooth_walk(rng, BARS)
        shape = (1 - IDIO_BLEND) * latent[lag:lag + BARS] + IDIO_BLEND * own
        closes = lo + shape * (hi - lo)
        files[asset] = ohlc_rows(rng, closes, vol)

    # two missing bars in ETHUSDT: exercises carry-forward fill
    eth = files["ETHUSDT"]
    files["ETHUSDT"] = eth[:2000] + eth[2002:]

    # a few half-step rows in IOTAUSDT: exercises off-grid dropping
    iota = files["IOTAUSDT"]
    extra = []
    for i, row in enumerate(iota):
        extra.append(row)
        if i in (500, 1500, 2500):
            parts = row.split(",")
            parts[0] = str(int(parts[0]) + STEP_MS // 2)
            parts[6] = str(int(parts[6]) + STEP_MS // 2)
            extra.append(",".join(parts))
    files["IOTAUSDT"] = extra

    for asset, rows in files.items():
        path = out_dir / f"{asset}.csv"
        path.write_text("\n".join(rows) + "\n")
        print(f"wrote {path} ({len(rows)} rows)")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out", type=Path,
        default=Path(__file__).resolve().parent.parent / "data" / "fixture",
    )
    args = parser.parse_args()
    make_fixture(args.out)


if __name__ == "__main__":
    main()
