import numpy as np
import pytest

from leadlag import dtw, impact
from leadlag.errors import BadPartition, ConfigError
from leadlag.ingest import Window


def make_window(rng, m=3, length=24, index=0):
    return Window(
        index=index,
        input=rng.random((length, m)),
        target_context=rng.random(length),
        label=rng.random(3),
    )


def test_sync_weight_identity():
    rng = np.random.default_rng(0)
    w = make_window(rng, m=2)
    w.input[:, 1] = w.target_context
    assert impact.sync_weight(w, 1) == 0.0


def test_sync_weight_constant_series():
    # all cells cost 0.2; shortest path is the 24-step diagonal
    w = Window(index=0, input=np.full((24, 1), 0.3),
               target_context=np.full(24, 0.5), label=np.zeros(3))
    assert abs(impact.sync_weight(w, 0) - 24 * 0.2) < 1e-12
    # reduced-length cross-check against the exhaustive oracle
    assert abs(dtw.dtw_brute_oracle([0.5] * 6, [0.3] * 6) - 6 * 0.2) < 1e-12


def test_sync_weight_symmetric_roles():
    rng = np.random.default_rng(1)
    w = make_window(rng, m=1)
    swapped = Window(index=0, input=w.target_context[:, None],
                     target_context=w.input[:, 0], label=w.label)
    assert impact.sync_weight(w, 0) == impact.sync_weight(swapped, 0)


def test_sync_impact_zero_column_for_identical_asset():
    rng = np.random.default_rng(2)
    w = make_window(rng, m=2)
    w.input[:, 0] = w.target_context
    feats = impact.sync_impact(w)
    assert np.all(feats[:, 0] == 0.0)
    assert feats.shape == (24, 2)


def test_sync_impact_single_asset_definition():
    rng = np.random.default_rng(3)
    w = make_window(rng, m=1)
    weight = impact.sync_weight(w, 0)
    assert np.allclose(impact.sync_impact(w), weight * w.input, atol=0, rtol=0)


def test_sync_impact_quadratic_scaling():
    rng = np.random.default_rng(4)
    w = make_window(rng, m=2)
    doubled = Window(index=0, input=2 * w.input,
                     target_context=2 * w.target_context, label=w.label)
    f1 = impact.sync_impact(w)
    f2 = impact.sync_impact(doubled)
    assert np.allclose(f2, 4 * f1, rtol=1e-12, atol=1e-12)


def test_kernel_n1_degenerates_to_sync_weight():
    rng = np.random.default_rng(5)
    w = make_window(rng, m=2)
    k = impact.build_kernel(w, 1, 1)
    assert k.entries.shape == (1, 1)
    assert k.entries[0, 0] == impact.sync_weight(w, 1)


def test_kernel_strict_upper_is_zero():
    rng = np.random.default_rng(6)
    w = make_window(rng, m=2)
    for n in (2, 3, 4, 6, 8, 12, 24):
        k = impact.build_kernel(w, 0, n)
        upper = np.triu(k.entries, k=1)
        assert np.count_nonzero(upper) == 0
        assert np.count_nonzero(k.entries) <= n * (n + 1) // 2


def test_kernel_identical_series_diagonal_zero():
    rng = np.random.default_rng(7)
    w = make_window(rng, m=1)
    w.input[:, 0] = w.target_context
    k = impact.build_kernel(w, 0, 4)
    assert np.all(np.diag(k.entries) == 0.0)
    # sub-diagonal entries equal DTW between the series' own shifted subwindows
    x = w.target_context
    expected = dtw.dtw_brute_oracle(x[6:12], x[0:6])
    assert abs(k.entries[1, 0] - expected) <= 1e-12


def test_kernel_bad_partition():
    rng = np.random.default_rng(8)
    w = make_window(rng)
    with pytest.raises(BadPartition):
        impact.build_kernel(w, 0, 5)


def test_flatten_row_major():
    k = impact.LeadLagKernel(asset_index=0, n=2,
                             entries=np.array([[3.0, 0.0], [5.0, 7.0]]))
    assert impact.flatten_kernel(k).tolist() == [3.0, 0.0, 5.0, 7.0]


def test_flatten_n1():
    k = impact.LeadLagKernel(asset_index=0, n=1, entries=np.array([[2.5]]))
    assert impact.flatten_kernel(k).tolist() == [2.5]


def test_flatten_structural_zero_positions():
    rng = np.random.default_rng(9)
    w = make_window(rng, m=1)
    flat = impact.flatten_kernel(impact.build_kernel(w, 0, 4))
    assert len(flat) == 16
    for pos in (1, 2, 3, 6, 7, 11):
        assert flat[pos] == 0.0


def test_async_degenerates_to_sync_for_m1_n1():
    rng = np.random.default_rng(10)
    w = make_window(rng, m=1)
    a = impact.async_impact(w, 1)
    s = impact.sync_impact(w)
    assert np.abs(a - s).max() <= 1e-12


def test_async_zero_kernels_give_zero_features():
    rng = np.random.default_rng(11)
    w = make_window(rng, m=2)
    w.input[:, 0] = w.target_context
    w.input[:, 1] = w.target_context
    feats = impact.async_impact(w, 1)
    assert np.all(feats == 0.0)


def test_async_matches_explicit_matrix_product():
    # hand-built m=2, n=2 case checked against an independent product
    rng = np.random.default_rng(12)
    w = make_window(rng, m=2)
    k0 = impact.build_kernel(w, 0, 2).entries
    k1 = impact.build_kernel(w, 1, 2).entries
    stacked = np.stack([k0.reshape(-1), k1.reshape(-1)])  # (2, 4)
    expected = np.zeros((24, 4))
    for t in range(24):
        for f in range(4):
            acc = 0.0
            for a in range(2):
                acc += w.input[t, a] * stacked[a, f]
            expected[t, f] = acc
    assert np.allclose(impact.async_impact(w, 2), expected, rtol=1e-12, atol=1e-14)


def test_async_shape_law():
    rng = np.random.default_rng(13)
    for m in (1, 3, 7):
        w = make_window(rng, m=m)
        assert impact.sync_impact(w).shape == (24, m)
        for n in (1, 2, 4, 8):
            assert impact.async_impact(w, n).shape == (24, n * n)


def test_async_quadratic_scaling():
    rng = np.random.default_rng(14)
    w = make_window(rng, m=2)
    scaled = Window(index=0, input=3 * w.input,
                    target_context=3 * w.target_context, label=w.label)
    f1 = impact.async_impact(w, 4)
    f2 = impact.async_impact(scaled, 4)
    assert np.allclose(f2, 9 * f1, rtol=1e-12, atol=1e-12)


def test_lag_direction_flip_changes_kernel():
    rng = np.random.default_rng(15)
    w = make_window(rng, m=1)
    k_fwd = impact.build_kernel(w, 0, 4).entries
    k_rev = impact.build_kernel(w, 0, 4, lag_direction="target_leads").entries
    assert not np.array_equal(k_fwd, k_rev)
    # both keep the causal triangular layout
    assert np.count_nonzero(np.triu(k_rev, k=1)) == 0


def test_featurize_deterministic():
    rng = np.random.default_rng(16)
    windows = [make_window(rng, m=3, index=i) for i in range(4)]
    f1 = impact.featurize(windows, "asyn", n=4)
    f2 = impact.featurize(windows, "asyn", n=4)
    assert np.array_equal(f1, f2)
    assert f1.shape == (4, 24, 16)


def test_featurize_unknown_method():
    rng = np.random.default_rng(17)
    with pytest.raises(ConfigError):
        impact.featurize([make_window(rng)], "sideways")
