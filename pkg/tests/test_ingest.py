import numpy as np
import pytest

from leadlag import ingest
from leadlag.errors import (
    DegenerateRange,
    EmptyFile,
    GapTooLarge,
    MalformedRow,
    NonMonotonicTime,
    RangeUncovered,
    SeriesTooShort,
)

H4 = ingest.STEP_MS
T0 = 1527811200000  # 2018-06-01T00:00:00Z, on the 4h grid


def write_klines(path, rows):
    with open(path, "w") as fh:
        for r in rows:
            fh.write(",".join(str(v) for v in r) + "\n")
    return path


def simple_row(t, close=7502.6):
    return (t, close - 2.5, close + 9.4, close - 14.3, close, 134.2)


def test_parse_extracts_close():
    rows = [(1527811200000, 7500.1, 7512.0, 7488.3, 7502.6, 134.2)]
    path = write_klines("/tmp/k1.csv", rows)
    recs = ingest.parse_klines(path)
    assert len(recs) == 1
    assert recs[0].close == 7502.6
    assert recs[0].open_time == 1527811200000


def test_parse_keeps_order(tmp_path):
    rows = [simple_row(T0), simple_row(T0 + H4), simple_row(T0 + 2 * H4)]
    recs = ingest.parse_klines(write_klines(tmp_path / "k.csv", rows))
    assert [r.open_time for r in recs] == [T0, T0 + H4, T0 + 2 * H4]


def test_parse_ignores_trailing_columns(tmp_path):
    rows = [simple_row(T0) + (T0 + H4 - 1, 999.9, 12345)]
    recs = ingest.parse_klines(write_klines(tmp_path / "k.csv", rows))
    assert len(recs) == 1


def test_parse_drops_off_grid_rows(tmp_path):
    rows = [simple_row(T0), simple_row(T0 + H4 // 2), simple_row(T0 + H4)]
    # middle row is mid-bar: non-monotonic? no, increasing; just off-grid
    recs = ingest.parse_klines(write_klines(tmp_path / "k.csv", rows))
    assert [r.open_time for r in recs] == [T0, T0 + H4]


def test_parse_malformed_close(tmp_path):
    rows = [(T0, 7500.1, 7512.0, 7488.3, "abc", 134.2)]
    with pytest.raises(MalformedRow):
        ingest.parse_klines(write_klines(tmp_path / "k.csv", rows))


def test_parse_nonmonotonic(tmp_path):
    rows = [simple_row(T0 + H4), simple_row(T0)]
    with pytest.raises(NonMonotonicTime):
        ingest.parse_klines(write_klines(tmp_path / "k.csv", rows))


def test_parse_empty_file(tmp_path):
    with pytest.raises(EmptyFile):
        ingest.parse_klines(write_klines(tmp_path / "k.csv", []))


def test_parse_rejects_nonpositive_price(tmp_path):
    rows = [(T0, 1.0, 1.0, -0.5, 1.0, 5.0)]
    with pytest.raises(MalformedRow):
        ingest.parse_klines(write_klines(tmp_path / "k.csv", rows))


def make_records(times, closes):
    return [ingest.KlineRecord(t, c, c, c, c, 1.0) for t, c in zip(times, closes)]


def test_align_full_coverage():
    times = [T0 + k * H4 for k in range(10)]
    series = [
        ("BTC", make_records(times, np.linspace(7000, 7100, 10))),
        ("ETH", make_records(times, np.linspace(500, 510, 10))),
    ]
    grid, raw = ingest.align_frames(series, T0, T0 + 10 * H4)
    assert raw.shape == (10, 2)
    assert grid[0] == T0 and grid[-1] == T0 + 9 * H4


def test_align_carries_forward_small_gap():
    times = [T0 + k * H4 for k in range(10) if k != 4]
    series = [("BTC", make_records(times, range(100, 109)))]
    _, raw = ingest.align_frames(series, T0, T0 + 10 * H4, max_gap=2)
    assert raw[4, 0] == raw[3, 0]  # carried from previous bar


def test_align_gap_too_large():
    times = [T0, T0 + H4, T0 + 5 * H4]
    series = [("BTC", make_records(times, [1.0, 2.0, 3.0]))]
    with pytest.raises(GapTooLarge):
        ingest.align_frames(series, T0, T0 + 6 * H4, max_gap=2)


def test_align_range_uncovered():
    # asset whose data begins 3 days after start
    late = T0 + 18 * H4
    times = [late + k * H4 for k in range(10)]
    series = [("BTC", make_records(times, range(10)))]
    with pytest.raises(RangeUncovered):
        ingest.align_frames(series, T0, T0 + 20 * H4)


def test_normalize_target_extremes_map_to_unit_interval():
    raw = np.array([[3156.26, 5000.0], [13960.76, 6200.0]])
    grid = np.array([T0, T0 + H4])
    frame = ingest.normalize_global(["BTC", "ETH"], grid, raw)
    assert frame.prices[0, 0] == 0.0
    assert frame.prices[1, 0] == 1.0
    assert frame.norm_min == 3156.26 and frame.norm_max == 13960.76


def test_normalize_affine_example():
    raw = np.array([[1.0, 2.0], [3.0, 5.0]])
    frame = ingest.normalize_global(["a", "b"], [T0, T0 + H4], raw)
    assert frame.prices.tolist() == [[0.0, 0.25], [0.5, 1.0]]


def test_normalize_degenerate():
    raw = np.full((3, 2), 7.0)
    with pytest.raises(DegenerateRange):
        ingest.normalize_global(["a", "b"], [T0, T0 + H4, T0 + 2 * H4], raw)


def test_normalize_order_preserving_and_invertible():
    rng = np.random.default_rng(3)
    raw = rng.uniform(10, 5000, size=(40, 3))
    grid = T0 + H4 * np.arange(40)
    frame = ingest.normalize_global(["a", "b", "c"], grid, raw)
    flat_raw = raw.ravel()
    flat_norm = frame.prices.ravel()
    order = np.argsort(flat_raw)
    assert (np.diff(flat_norm[order]) >= 0).all()
    back = frame.denormalize(frame.prices)
    assert np.abs((back - raw) / raw).max() < 1e-9


def test_normalize_related_scope():
    raw = np.array([[100.0, 1.0, 2.0], [200.0, 3.0, 5.0]])
    frame = ingest.normalize_global(["t", "a", "b"], [T0, T0 + H4], raw,
                                    norm_scope="related")
    assert frame.norm_min == 1.0 and frame.norm_max == 5.0
    assert frame.prices[:, 1:].min() == 0.0 and frame.prices[:, 1:].max() == 1.0


def make_frame(T, m=2, seed=0):
    rng = np.random.default_rng(seed)
    raw = rng.uniform(1, 10, size=(T, m + 1))
    grid = T0 + H4 * np.arange(T)
    ids = ["TGT"] + [f"A{i}" for i in range(m)]
    return ingest.normalize_global(ids, grid, raw)


def test_segment_exact_boundary():
    windows = ingest.segment_windows(make_frame(27))
    assert len(windows) == 1


def test_segment_count_formula_4200():
    # floor((4200 - 27) / 24) + 1 == 174
    windows = ingest.segment_windows(make_frame(4200))
    assert len(windows) == 174
    assert ingest.window_count(4200) == 174


def test_segment_too_short():
    with pytest.raises(SeriesTooShort):
        ingest.segment_windows(make_frame(26))


def test_segment_shapes_and_content():
    frame = make_frame(100, m=3)
    windows = ingest.segment_windows(frame)
    for k, w in enumerate(windows):
        s = k * 24
        assert w.input.shape == (24, 3)
        assert w.target_context.shape == (24,)
        assert w.label.shape == (3,)
        assert np.array_equal(w.input, frame.prices[s:s + 24, 1:])
        assert np.array_equal(w.target_context, frame.prices[s:s + 24, 0])
        assert np.array_equal(w.label, frame.prices[s + 24:s + 27, 0])


def test_windows_tile_prefix():
    frame = make_frame(96)
    windows = ingest.segment_windows(frame)
    # consecutive inputs are disjoint and contiguous
    for a, b in zip(windows, windows[1:]):
        assert b.start_row == a.start_row + 24


def test_ingest_deterministic(tmp_path):
    rng = np.random.default_rng(5)
    times = [T0 + k * H4 for k in range(30)]
    rows = [simple_row(t, close=float(c)) for t, c in zip(times, rng.uniform(5000, 9000, 30))]
    p = write_klines(tmp_path / "k.csv", rows)
    r1 = ingest.parse_klines(p)
    r2 = ingest.parse_klines(p)
    assert r1 == r2
