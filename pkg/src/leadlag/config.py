"""Run configuration: INI file parsing, defaults, validation, hashing.

A minimal config needs only the data location; every hyperparameter has
a baked-in default (window 24 -> 3, stride 24, LVK 4x4, hidden 32, two
layers per direction, 2000 epochs at learning rate 0.01).  Unknown
sections or keys are rejected outright so typos cannot silently fall
back to defaults.

The config hash fingerprints every resolved field except the output
directory, so relocating outputs neither invalidates completed work nor
changes the bytes written.
"""

import configparser
import hashlib
from dataclasses import dataclass, fields

from .errors import ConfigError

ARCH_CHOICES = ("birnn", "bilstm", "bigru", "naive_mlp", "smart_mlp")
METHOD_CHOICES = ("raw", "syn", "asyn")

KNOWN_KEYS = {
    "data": {
        "source", "target", "related", "dir", "start", "end", "max_gap",
        "timestep_ms", "norm_scope",
        "m", "lags", "noise_sigma", "length", "data_seed",
    },
    "windows": {"in_len", "out_len", "stride"},
    "features": {"method", "n", "lag_direction"},
    "train": {"epochs", "learning_rate", "optimizer", "hidden_dim",
              "layers", "seeds"},
    "eval": {"methods", "archs", "splits", "sweep_sizes", "sweep_method",
             "sweep_arch", "include_naive", "external_predictions",
             "external_method"},
    "output": {"dir"},
}


@dataclass
class RunConfig:
    # data
    source: str = "files"  # "files" | "synthetic"
    target: str = ""
    related: tuple = ()
    data_dir: str = "."
    start: int = 0
    end: int = 0
    max_gap: int = 2
    timestep_ms: int = 14400000
    norm_scope: str = "all"
    # synthetic data
    m: int = 7
    lags: tuple | None = None
    noise_sigma: float = 0.01
    length: int = 4200
    data_seed: int = 0
    # windows
    in_len: int = 24
    out_len: int = 3
    stride: int = 24
    # features
    method: str = "asyn"
    n: int = 4
    lag_direction: str = "related_leads"
    # training
    epochs: int = 2000
    learning_rate: float = 0.01
    optimizer: str = "adam"
    hidden_dim: int = 32
    layers: int = 2
    seeds: tuple = (0, 1, 2, 3, 4)
    # experiment matrix
    methods: tuple = ("raw", "syn", "asyn")
    archs: tuple = ("birnn", "bilstm", "bigru")
    splits: tuple = ("7:3", "8:2", "9:1")
    sweep_sizes: tuple = (1, 2, 3, 4, 6, 8)
    sweep_method: str = "asyn"
    sweep_arch: str = "birnn"
    include_naive: bool = True
    external_predictions: str = ""
    external_method: str = "external"
    # output
    out_dir: str = "out"

    def canonical(self) -> str:
        """Sorted key=value rendering of everything that affects results."""
        lines = []
        for f in sorted(fld.name for fld in fields(self)):
            if f == "out_dir":
                continue
            lines.append(f"{f}={getattr(self, f)!r}")
        return "\n".join(lines) + "\n"

    @property
    def config_hash(self) -> str:
        digest = hashlib.sha256(self.canonical().encode("utf-8"))
        return digest.hexdigest()[:16]


def _parse_list(raw: str) -> tuple:
    return tuple(part.strip() for part in raw.split(",") if part.strip())


def _parse_int_list(raw: str, what: str) -> tuple:
    try:
        return tuple(int(v) for v in _parse_list(raw))
    except ValueError:
        raise ConfigError(f"{what} must be comma-separated integers, "
                          f"got {raw!r}") from None


def _get_int(section, key, default, minimum=None):
    raw = section.get(key)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from None
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {value}")
    return value


def _get_float(section, key, default):
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {raw!r}") from None


def load_config(path, seed_override=None, out_override=None) -> RunConfig:
    """Parse, default, and validate an INI config file."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # asset ids and paths keep their case
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    for section in parser.sections():
        if section not in KNOWN_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in KNOWN_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")

    cfg = RunConfig()
    data = parser["data"] if parser.has_section("data") else {}
    cfg.source = data.get("source", cfg.source) if data else cfg.source
    if cfg.source not in ("files", "synthetic"):
        raise ConfigError(f"data source must be files or synthetic, "
                          f"got {cfg.source!r}")
    if data:
        cfg.target = data.get("target", cfg.target)
        cfg.related = _parse_list(data.get("related", ""))
        cfg.data_dir = data.get("dir", cfg.data_dir)
        cfg.start = _get_int(data, "start", cfg.start)
        cfg.end = _get_int(data, "end", cfg.end)
        cfg.max_gap = _get_int(data, "max_gap", cfg.max_gap, minimum=0)
        cfg.timestep_ms = _get_int(data, "timestep_ms", cfg.timestep_ms,
                                   minimum=1)
        cfg.norm_scope = data.get("norm_scope", cfg.norm_scope)
        cfg.m = _get_int(data, "m", cfg.m, minimum=1)
        lags_raw = data.get("lags", "")
        cfg.lags = _parse_int_list(lags_raw, "lags") if lags_raw else None
        cfg.noise_sigma = _get_float(data, "noise_sigma", cfg.noise_sigma)
        cfg.length = _get_int(data, "length", cfg.length, minimum=27)
        cfg.data_seed = _get_int(data, "data_seed", cfg.data_seed)
    if cfg.norm_scope not in ("all", "related"):
        raise ConfigError(f"norm_scope must be all or related, "
                          f"got {cfg.norm_scope!r}")
    if cfg.source == "files":
        if not cfg.target:
            raise ConfigError("data.target is required for file sources")
        if not cfg.related:
            raise ConfigError("data.related must list at least one asset")
        if cfg.target in cfg.related:
            raise ConfigError(f"target {cfg.target!r} repeated in related")
        if cfg.end <= cfg.start:
            raise ConfigError("data.end must be after data.start")
    if cfg.noise_sigma < 0:
        raise ConfigError(f"noise_sigma must be >= 0, got {cfg.noise_sigma}")
    if cfg.source == "synthetic" and cfg.lags is not None:
        if len(cfg.lags) != cfg.m:
            raise ConfigError(f"expected {cfg.m} lags, got {len(cfg.lags)}")

    win = parser["windows"] if parser.has_section("windows") else {}
    if win:
        cfg.in_len = _get_int(win, "in_len", cfg.in_len, minimum=4)
        cfg.out_len = _get_int(win, "out_len", cfg.out_len, minimum=1)
        cfg.stride = _get_int(win, "stride", cfg.stride, minimum=1)

    feat = parser["features"] if parser.has_section("features") else {}
    if feat:
        cfg.method = feat.get("method", cfg.method)
        cfg.n = _get_int(feat, "n", cfg.n, minimum=1)
        cfg.lag_direction = feat.get("lag_direction", cfg.lag_direction)
    if cfg.method not in METHOD_CHOICES:
        raise ConfigError(f"features.method must be one of "
                          f"{METHOD_CHOICES}, got {cfg.method!r}")
    if cfg.lag_direction not in ("related_leads", "target_leads"):
        raise ConfigError(f"lag_direction must be related_leads or "
                          f"target_leads, got {cfg.lag_direction!r}")
    if cfg.in_len % cfg.n != 0:
        raise ConfigError(f"features.n={cfg.n} does not divide "
                          f"in_len={cfg.in_len}")

    train = parser["train"] if parser.has_section("train") else {}
    if train:
        cfg.epochs = _get_int(train, "epochs", cfg.epochs, minimum=1)
        cfg.learning_rate = _get_float(train, "learning_rate",
                                       cfg.learning_rate)
        cfg.optimizer = train.get("optimizer", cfg.optimizer)
        cfg.hidden_dim = _get_int(train, "hidden_dim", cfg.hidden_dim,
                                  minimum=1)
        cfg.layers = _get_int(train, "layers", cfg.layers, minimum=1)
        seeds_raw = train.get("seeds", "")
        if seeds_raw:
            cfg.seeds = _parse_int_list(seeds_raw, "seeds")
    if cfg.learning_rate <= 0:
        raise ConfigError(f"learning_rate must be > 0, "
                          f"got {cfg.learning_rate}")
    if cfg.optimizer not in ("adam", "sgd"):
        raise ConfigError(f"optimizer must be adam or sgd, "
                          f"got {cfg.optimizer!r}")
    if not cfg.seeds:
        raise ConfigError("train.seeds must not be empty")

    ev = parser["eval"] if parser.has_section("eval") else {}
    if ev:
        if ev.get("methods"):
            cfg.methods = _parse_list(ev["methods"])
        if ev.get("archs"):
            cfg.archs = _parse_list(ev["archs"])
        if ev.get("splits"):
            cfg.splits = _parse_list(ev["splits"])
        if ev.get("sweep_sizes"):
            cfg.sweep_sizes = _parse_int_list(ev["sweep_sizes"],
                                              "sweep_sizes")
        cfg.sweep_method = ev.get("sweep_method", cfg.sweep_method)
        cfg.sweep_arch = ev.get("sweep_arch", cfg.sweep_arch)
        naive_raw = ev.get("include_naive", "")
        if naive_raw:
            if naive_raw not in ("true", "false"):
                raise ConfigError(f"include_naive must be true or false, "
                                  f"got {naive_raw!r}")
            cfg.include_naive = naive_raw == "true"
        cfg.external_predictions = ev.get("external_predictions",
                                          cfg.external_predictions)
        cfg.external_method = ev.get("external_method", cfg.external_method)
    for method in cfg.methods:
        if method not in METHOD_CHOICES:
            raise ConfigError(f"eval.methods contains {method!r}")
    if cfg.sweep_method not in METHOD_CHOICES:
        raise ConfigError(f"eval.sweep_method must be one of "
                          f"{METHOD_CHOICES}, got {cfg.sweep_method!r}")
    for arch in cfg.archs + (cfg.sweep_arch,):
        if arch not in ARCH_CHOICES:
            raise ConfigError(f"unknown architecture {arch!r}")
    if not cfg.methods or not cfg.archs or not cfg.splits:
        raise ConfigError("eval.methods, eval.archs, and eval.splits "
                          "must not be empty")
    from .experiments import parse_ratio
    for split in cfg.splits:
        parse_ratio(split)
    for size in cfg.sweep_sizes:
        if size < 1 or cfg.in_len % size != 0:
            raise ConfigError(f"sweep size {size} does not divide "
                              f"in_len={cfg.in_len}")

    out = parser["output"] if parser.has_section("output") else {}
    if out:
        cfg.out_dir = out.get("dir", cfg.out_dir)

    if seed_override is not None:
        cfg.seeds = (int(seed_override),)
    if out_override is not None:
        cfg.out_dir = str(out_override)
    return cfg
