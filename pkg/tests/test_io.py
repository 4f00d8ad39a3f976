"""Bit-exact round-trips for every on-disk format."""

import numpy as np
import pytest

from leadlag import experiments as ex
from leadlag import io, nn
from leadlag.errors import MalformedRow
from leadlag.ingest import MarketFrame


def sample_frame(seed=0, T=60, m=2):
    spec = ex.SyntheticMarketSpec(m=m, lags=(6,) * m, noise_sigma=0.02,
                                  T=T, seed=seed)
    return ex.generate_synthetic(spec)


def awkward_floats(rng, size):
    """Values that expose any non-exact float serialization."""
    vals = rng.uniform(-1e6, 1e6, size=size)
    vals[::7] = rng.uniform(0, 1, size=vals[::7].shape) / 3.0
    vals[::11] = np.nextafter(vals[::11], np.inf)
    vals.flat[0] = 1e-308
    if vals.size > 1:
        vals.flat[1] = 0.1 + 0.2  # 0.30000000000000004
    return vals


def test_fmt_round_trips_exactly():
    rng = np.random.default_rng(0)
    for x in awkward_floats(rng, 200):
        assert float(io.fmt(x)) == x
    for x in (0.0, -0.0, 1.0 / 3.0, np.pi, 13960.76, 3156.26):
        assert float(io.fmt(x)) == float(x)


def test_frame_round_trip_bit_exact(tmp_path):
    frame = sample_frame()
    path = tmp_path / "frame.csv"
    io.save_frame(path, frame, config_hash="abc123")
    back = io.load_frame(path)
    assert back.asset_ids == frame.asset_ids
    assert np.array_equal(back.timestamps, frame.timestamps)
    assert np.array_equal(back.prices, frame.prices)
    assert back.norm_min == frame.norm_min
    assert back.norm_max == frame.norm_max
    assert back.timestep_ms == frame.timestep_ms
    assert back.norm_scope == frame.norm_scope


def test_frame_rewrite_is_byte_identical(tmp_path):
    frame = sample_frame(seed=5)
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    io.save_frame(a, frame, config_hash="h")
    io.save_frame(b, frame, config_hash="h")
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.csv.meta.json").read_bytes() == \
        (tmp_path / "b.csv.meta.json").read_bytes()


def test_frame_with_awkward_values_round_trips(tmp_path):
    rng = np.random.default_rng(2)
    prices = awkward_floats(rng, 12).reshape(6, 2)
    frame = MarketFrame(
        asset_ids=["T", "A"],
        timestamps=np.arange(6, dtype=np.int64) * 14400000,
        prices=prices,
        norm_min=3156.26,
        norm_max=13960.76,
    )
    path = tmp_path / "frame.csv"
    io.save_frame(path, frame)
    back = io.load_frame(path)
    assert np.array_equal(back.prices, prices)


def test_frame_header_sidecar_mismatch_rejected(tmp_path):
    frame = sample_frame()
    path = tmp_path / "frame.csv"
    io.save_frame(path, frame)
    text = path.read_text().replace("FOLLOWER0", "TAMPERED", 1)
    path.write_text(text)
    with pytest.raises(MalformedRow):
        io.load_frame(path)


def test_features_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    feats = awkward_floats(rng, 5 * 24 * 7).reshape(5, 24, 7)
    feats[0, 0, :3] = 0.0  # structural zeros must survive
    path = tmp_path / "features.csv"
    io.save_features(path, feats, method="asyn", n=4, m=7,
                     asset_ids=["A", "B"], config_hash="ff")
    back, meta = io.load_features(path)
    assert np.array_equal(back, feats)
    assert meta["method"] == "asyn"
    assert meta["n"] == "4"
    assert meta["m"] == "7"
    assert meta["config_hash"] == "ff"


def test_result_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(4)
    preds = awkward_floats(rng, 12).reshape(4, 3)
    acts = awkward_floats(rng, 12).reshape(4, 3)
    meta = {"method": "asyn", "split": "8:2", "seed": "1",
            "config_hash": "deadbeef"}
    path = tmp_path / "result.csv"
    io.save_result(path, meta, preds, acts)
    back_meta, back_preds, back_acts = io.load_result(path)
    assert back_meta == meta
    assert np.array_equal(back_preds, preds)
    assert np.array_equal(back_acts, acts)


def test_checkpoint_round_trip_bit_exact(tmp_path):
    spec = nn.ModelSpec(arch="bilstm", input_dim=4, in_len=8,
                        hidden_dim=5, layers=2, seed=17)
    params = nn.init_params(spec)
    header = {"arch": "bilstm", "seed": 17, "config_hash": "c0ffee"}
    path = tmp_path / "model.ckpt"
    io.save_checkpoint(path, header, params)
    back_header, back = io.load_checkpoint(path)
    assert back_header["arch"] == "bilstm"
    assert back_header["seed"] == 17
    assert back_header["config_hash"] == "c0ffee"
    assert sorted(back) == sorted(params)
    for k in params:
        assert back[k].shape == params[k].shape
        assert np.array_equal(back[k], params[k])


def test_checkpoint_rewrite_is_byte_identical(tmp_path):
    params = nn.init_params(nn.ModelSpec(arch="bigru", input_dim=2,
                                         in_len=6, hidden_dim=3, seed=2))
    a = tmp_path / "a.ckpt"
    b = tmp_path / "b.ckpt"
    io.save_checkpoint(a, {"k": "v"}, params)
    io.save_checkpoint(b, {"k": "v"}, params)
    assert a.read_bytes() == b.read_bytes()


def test_checkpoint_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.ckpt"
    path.write_bytes(b"not a checkpoint\n\x00\x00")
    with pytest.raises(MalformedRow):
        io.load_checkpoint(path)


def test_load_features_empty_body(tmp_path):
    path = tmp_path / "empty.csv"
    io.save_features(path, np.zeros((0, 24, 3)), method="raw", n=1, m=3,
                     asset_ids=["A"])
    back, meta = io.load_features(path)
    assert back.size == 0
    assert meta["method"] == "raw"
