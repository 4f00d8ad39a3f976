"""INI config parsing, validation, and hashing."""

import pytest

from leadlag.config import load_config
from leadlag.errors import ConfigError

MINIMAL_SYNTH = """\
[data]
source = synthetic
m = 2
lags = 6,12
length = 123
"""

FILES_CONFIG = """\
[data]
target = BTCUSDT
related = ETHUSDT, LTCUSDT
dir = data/fixture
start = 1527811200000
end = 1530000000000
"""


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_minimal_synthetic_config_gets_defaults(tmp_path):
    cfg = load_config(write(tmp_path, MINIMAL_SYNTH))
    assert cfg.source == "synthetic"
    assert cfg.m == 2
    assert cfg.lags == (6, 12)
    assert cfg.length == 123
    # documented defaults, pinned so a silent change breaks loudly
    assert (cfg.in_len, cfg.out_len, cfg.stride) == (24, 3, 24)
    assert cfg.n == 4
    assert cfg.hidden_dim == 32
    assert cfg.layers == 2
    assert cfg.epochs == 2000
    assert cfg.learning_rate == 0.01
    assert cfg.optimizer == "adam"
    assert cfg.seeds == (0, 1, 2, 3, 4)
    assert cfg.methods == ("raw", "syn", "asyn")
    assert cfg.archs == ("birnn", "bilstm", "bigru")
    assert cfg.splits == ("7:3", "8:2", "9:1")
    assert cfg.sweep_sizes == (1, 2, 3, 4, 6, 8)
    assert cfg.out_dir == "out"


def test_files_config(tmp_path):
    cfg = load_config(write(tmp_path, FILES_CONFIG))
    assert cfg.source == "files"
    assert cfg.target == "BTCUSDT"
    assert cfg.related == ("ETHUSDT", "LTCUSDT")
    assert cfg.start == 1527811200000


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, MINIMAL_SYNTH + "typo_key = 1\n"))


def test_unknown_section_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, MINIMAL_SYNTH + "[mystery]\nx = 1\n"))


def test_missing_config_file_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


@pytest.mark.parametrize("extra", [
    "[features]\nn = 5\n",  # does not divide 24
    "[features]\nmethod = magic\n",
    "[features]\nlag_direction = sideways\n",
    "[train]\noptimizer = rmsprop\n",
    "[train]\nlearning_rate = 0\n",
    "[train]\nepochs = 0\n",
    "[train]\nseeds = a,b\n",
    "[eval]\nsplits = 8:2:1\n",
    "[eval]\nsweep_sizes = 5\n",
    "[eval]\narchs = transformer\n",
    "[eval]\ninclude_naive = maybe\n",
    "[windows]\nin_len = 2\n",
])
def test_bad_values_rejected(tmp_path, extra):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, MINIMAL_SYNTH + extra))


def test_files_source_requires_assets_and_range(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, "[data]\ntarget = BTC\n"))
    with pytest.raises(ConfigError):
        load_config(write(tmp_path,
                          "[data]\ntarget = BTC\nrelated = BTC\n"
                          "start = 0\nend = 10\n"))
    with pytest.raises(ConfigError):
        load_config(write(tmp_path,
                          "[data]\ntarget = BTC\nrelated = ETH\n"
                          "start = 10\nend = 10\n"))


def test_lag_count_must_match_m(tmp_path):
    bad = MINIMAL_SYNTH.replace("lags = 6,12", "lags = 6")
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, bad))


def test_overrides(tmp_path):
    path = write(tmp_path, MINIMAL_SYNTH)
    cfg = load_config(path, seed_override=7, out_override="elsewhere")
    assert cfg.seeds == (7,)
    assert cfg.out_dir == "elsewhere"


def test_config_hash_stable_and_sensitive(tmp_path):
    path = write(tmp_path, MINIMAL_SYNTH)
    a = load_config(path).config_hash
    b = load_config(path).config_hash
    assert a == b
    changed = load_config(write(tmp_path, MINIMAL_SYNTH +
                                "[features]\nn = 6\n", name="v2.ini"))
    assert changed.config_hash != a


def test_config_hash_ignores_output_dir(tmp_path):
    path = write(tmp_path, MINIMAL_SYNTH)
    a = load_config(path)
    b = load_config(path, out_override="moved")
    assert a.config_hash == b.config_hash
    c = load_config(path, seed_override=3)
    assert c.config_hash != a.config_hash
