"""Experiment harness: splits, training runs, sweeps, reports, synthetic data.

Splits are chronological over whole windows, never shuffled.  Every
trained result carries the naive-repeat MSE measured on the same test
windows, and the report refuses to crown a best model that fails to
beat that baseline.  Reported MSE values use x10^-3 units.

The synthetic market generator builds followers that lead the target by
construction (follower k at time t equals the target at t + lag_k, plus
noise), giving the distance kernels a planted structure that tests can
recover exactly when the noise is zero.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import impact, nn
from .errors import ConfigError, MalformedRow, TooFewWindows
from .ingest import STEP_MS, MarketFrame, Window, normalize_global, segment_windows
from .io import fmt

SPLIT_RATIOS = ("7:3", "8:2", "9:1")
DEFAULT_SWEEP_SIZES = (1, 2, 3, 4, 6, 8)
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
MSE_UNIT = 1e-3  # report convention: mse of 0.000445 prints as 0.445


def parse_ratio(text: str) -> tuple[int, int]:
    parts = str(text).split(":")
    if len(parts) != 2:
        raise ConfigError(f"split ratio must look like 8:2, got {text!r}")
    try:
        a, b = int(parts[0]), int(parts[1])
    except ValueError:
        raise ConfigError(f"split ratio must be two integers, got {text!r}") from None
    if a <= 0 or b <= 0:
        raise ConfigError(f"split ratio parts must be positive, got {text!r}")
    return a, b


def split_windows(windows, ratio):
    """Chronological (train, test) partition; train count is floored."""
    a, b = parse_ratio(ratio) if isinstance(ratio, str) else ratio
    n = len(windows)
    if n < 2:
        raise TooFewWindows(f"need at least 2 windows to split, have {n}")
    k = math.floor(n * a / (a + b))
    if k < 1 or k >= n:
        raise TooFewWindows(
            f"ratio {a}:{b} leaves an empty side for {n} windows")
    return list(windows[:k]), list(windows[k:])


def naive_repeat(window: Window) -> np.ndarray:
    """Flat forecast: the last observed target value, three times."""
    return np.full(nn.OUTPUT_LEN, window.target_context[-1])


@dataclass(frozen=True)
class ExperimentSpec:
    method: str  # "raw" | "syn" | "asyn"
    arch: str = "birnn"
    split: str = "8:2"
    n: int = 4
    seed: int = 0
    hidden_dim: int = 32
    layers: int = 2
    lag_direction: str = "related_leads"

    def cell_id(self) -> str:
        return (f"{self.method}-{self.arch}-{self.split.replace(':', '_')}"
                f"-n{self.n}-seed{self.seed}")


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    test_mse: float
    naive_mse: float
    predictions: np.ndarray  # (test windows, 3) normalized units
    actuals: np.ndarray  # same shape
    test_start_rows: np.ndarray  # frame row where each test window begins
    loss_history: list
    params: dict
    config_hash: str = "none"
    in_len: int = 24  # maps prediction steps back to frame rows

    @property
    def beats_naive(self) -> bool:
        return self.test_mse < self.naive_mse


def _batch_mse(preds: np.ndarray, labels: np.ndarray) -> float:
    d = np.asarray(preds) - np.asarray(labels)
    return float(np.mean(d * d))


def run_experiment(frame: MarketFrame, spec: ExperimentSpec,
                   train_config: nn.TrainConfig | None = None,
                   config_hash: str = "none",
                   in_len: int = 24, out_len: int = 3,
                   stride: int = 24) -> ExperimentResult:
    """Featurize, train on the chronological head, score on the tail.

    Deterministic: the same frame, spec, and train_config always produce
    bit-identical parameters, predictions, and MSE values.
    """
    windows = segment_windows(frame, in_len, out_len, stride)
    train_w, test_w = split_windows(windows, spec.split)
    features = impact.featurize(windows, spec.method, n=spec.n,
                                lag_direction=spec.lag_direction)
    labels = np.stack([w.label for w in windows])
    k = len(train_w)
    model = nn.ModelSpec(
        arch=spec.arch,
        input_dim=features.shape[2],
        in_len=features.shape[1],
        hidden_dim=spec.hidden_dim,
        layers=spec.layers,
        seed=spec.seed,
    )
    params0 = nn.init_params(model)
    params, history = nn.train(model, params0, features[:k], labels[:k],
                               train_config)
    preds, _ = nn.forward(model, params, features[k:])
    naive = np.stack([naive_repeat(w) for w in test_w])
    return ExperimentResult(
        spec=spec,
        test_mse=_batch_mse(preds, labels[k:]),
        naive_mse=_batch_mse(naive, labels[k:]),
        predictions=preds,
        actuals=labels[k:],
        test_start_rows=np.array([w.start_row for w in test_w]),
        loss_history=history,
        params=params,
        config_hash=config_hash,
        in_len=in_len,
    )


def naive_result(frame: MarketFrame, split: str = "8:2",
                 config_hash: str = "none",
                 in_len: int = 24, out_len: int = 3,
                 stride: int = 24) -> ExperimentResult:
    """The parameter-free baseline packaged like a trained result."""
    windows = segment_windows(frame, in_len, out_len, stride)
    _, test_w = split_windows(windows, split)
    preds = np.stack([naive_repeat(w) for w in test_w])
    labels = np.stack([w.label for w in test_w])
    mse = _batch_mse(preds, labels)
    return ExperimentResult(
        spec=ExperimentSpec(method="naive_repeat", arch="naive_repeat",
                            split=split, n=1, seed=0),
        test_mse=mse,
        naive_mse=mse,
        predictions=preds,
        actuals=labels,
        test_start_rows=np.array([w.start_row for w in test_w]),
        loss_history=[],
        params={},
        config_hash=config_hash,
        in_len=in_len,
    )


# --- synthetic market ---

LAG_CHOICES = (6, 12, 18)
_SYNTH_LOW = 3000.0
_SYNTH_HIGH = 14000.0


@dataclass(frozen=True)
class SyntheticMarketSpec:
    m: int = 7
    lags: tuple | None = None  # None: drawn from LAG_CHOICES with the seed
    noise_sigma: float = 0.01  # in normalized units
    T: int = 4200
    seed: int = 0
    start_ms: int = 1527811200000
    timestep_ms: int = STEP_MS

    def __post_init__(self):
        if self.m < 1:
            raise ConfigError(f"need at least one follower, got m={self.m}")
        if self.noise_sigma < 0:
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.lags is not None:
            if len(self.lags) != self.m:
                raise ConfigError(
                    f"got {len(self.lags)} lags for m={self.m} followers")
            if any(l < 0 for l in self.lags):
                raise ConfigError("lags must be >= 0")
            if self.T < 27 + max(self.lags):
                raise ConfigError(
                    f"T={self.T} too short for max lag {max(self.lags)}")


def resolve_lags(spec: SyntheticMarketSpec) -> tuple:
    """The per-follower lead used for a spec, drawing when unspecified."""
    if spec.lags is not None:
        return tuple(int(l) for l in spec.lags)
    rng = np.random.default_rng(spec.seed)
    return tuple(int(v) for v in rng.choice(LAG_CHOICES, size=spec.m))


def generate_synthetic(spec: SyntheticMarketSpec) -> MarketFrame:
    """Smooth-walk target plus followers that lead it by fixed lags.

    follower_k[t] = target[t + lag_k] + noise, so each follower shows the
    target's future.  Draw order (lags, walk, noise) is fixed, making the
    frame a pure function of the spec.
    """
    lags = resolve_lags(spec)
    if spec.T < 27 + max(lags, default=0):
        raise ConfigError(f"T={spec.T} too short for max lag {max(lags)}")
    rng = np.random.default_rng(spec.seed)
    if spec.lags is None:
        rng.choice(LAG_CHOICES, size=spec.m)  # consume the lag draw
    length = spec.T + max(lags, default=0)
    steps = rng.normal(size=length + 16)
    kernel = np.ones(9) / 9.0
    smooth = np.convolve(steps, kernel, mode="valid")[:length]
    base = np.cumsum(smooth)
    lo, hi = float(base.min()), float(base.max())
    if hi == lo:
        hi = lo + 1.0
    base = _SYNTH_LOW + (base - lo) / (hi - lo) * (_SYNTH_HIGH - _SYNTH_LOW)
    raw = np.empty((spec.T, spec.m + 1))
    raw[:, 0] = base[:spec.T]
    sigma_raw = spec.noise_sigma * (_SYNTH_HIGH - _SYNTH_LOW)
    for k, lag in enumerate(lags):
        noise = rng.normal(0.0, sigma_raw, size=spec.T) if sigma_raw > 0 \
            else 0.0
        raw[:, k + 1] = base[lag:lag + spec.T] + noise
    timestamps = spec.start_ms + spec.timestep_ms * np.arange(spec.T, dtype=np.int64)
    asset_ids = ["TARGET"] + [f"FOLLOWER{k}" for k in range(spec.m)]
    return normalize_global(asset_ids, timestamps, raw, spec.timestep_ms)


def argmin_band(kernel: impact.LeadLagKernel):
    """Offset i-j of the smallest strictly-lower kernel entry, None if n=1.

    On noise-free synthetic data this recovers lag/subwindow_length.
    """
    n = kernel.n
    if n < 2:
        return None
    best = None
    best_val = None
    for i in range(n):
        for j in range(i):
            v = kernel.entries[i, j]
            if best_val is None or v < best_val:
                best_val = v
                best = i - j
    return best


# --- LVK-size sweep ---

def lvk_sweep(frame: MarketFrame, n_values=DEFAULT_SWEEP_SIZES,
              seeds=DEFAULT_SEEDS, method: str = "asyn",
              arch: str = "birnn", split: str = "8:2",
              train_config: nn.TrainConfig | None = None,
              hidden_dim: int = 32, layers: int = 2):
    """Mean/std test MSE per kernel size across seeds; one row per n."""
    rows = []
    for n in n_values:
        mses = []
        naive = None
        for seed in seeds:
            spec = ExperimentSpec(method=method, arch=arch, split=split,
                                  n=int(n), seed=int(seed),
                                  hidden_dim=hidden_dim, layers=layers)
            result = run_experiment(frame, spec, train_config)
            mses.append(result.test_mse)
            naive = result.naive_mse
        mean = float(np.mean(mses))
        std = float(np.std(mses, ddof=1)) if len(mses) > 1 else 0.0
        rows.append({
            "n": int(n),
            "mean_mse": mean,
            "std_mse": std,
            "naive_mse": naive,
            "seed_mses": tuple(mses),
        })
    return rows


def format_sweep_csv(rows) -> str:
    lines = ["n,mean_mse_e3,std_mse_e3,naive_mse_e3,seeds"]
    for row in rows:
        lines.append(",".join([
            str(row["n"]),
            fmt(row["mean_mse"] / MSE_UNIT),
            fmt(row["std_mse"] / MSE_UNIT),
            fmt(row["naive_mse"] / MSE_UNIT),
            str(len(row["seed_mses"])),
        ]))
    return "\n".join(lines) + "\n"


# --- reporting ---

def _result_key(result: ExperimentResult):
    s = result.spec
    return (s.method, s.arch, s.split, s.n, s.seed)


def aggregate_results(results):
    """Group seeds of the same cell; mean and sample std per group."""
    groups: dict[tuple, list[ExperimentResult]] = {}
    for r in sorted(results, key=_result_key):
        groups.setdefault((r.spec.method, r.spec.arch, r.spec.split,
                           r.spec.n), []).append(r)
    rows = []
    for key, members in sorted(groups.items()):
        mses = [m.test_mse for m in members]
        rows.append({
            "method": key[0],
            "arch": key[1],
            "split": key[2],
            "n": key[3],
            "seeds": len(members),
            "mean_mse": float(np.mean(mses)),
            "std_mse": float(np.std(mses, ddof=1)) if len(mses) > 1 else 0.0,
            "naive_mse": float(np.mean([m.naive_mse for m in members])),
        })
    return rows


def mark_best(rows):
    """Index of the lowest-MSE row, or None when nothing beats naive."""
    best = None
    for i, row in enumerate(rows):
        if row["method"] == "naive_repeat":
            continue
        if row["mean_mse"] >= row["naive_mse"]:
            continue
        if best is None or row["mean_mse"] < rows[best]["mean_mse"]:
            best = i
    return best


def format_report_csv(results) -> str:
    """Aggregate table, one row per experiment cell, x10^-3 units."""
    if not results:
        raise ConfigError("nothing to report")
    rows = aggregate_results(results)
    best = mark_best(rows)
    lines = ["method,arch,split,n,seeds,mse_e3,std_e3,naive_e3,beats_naive,best"]
    for i, row in enumerate(rows):
        lines.append(",".join([
            row["method"],
            row["arch"],
            row["split"],
            str(row["n"]),
            str(row["seeds"]),
            fmt(row["mean_mse"] / MSE_UNIT),
            fmt(row["std_mse"] / MSE_UNIT),
            fmt(row["naive_mse"] / MSE_UNIT),
            "yes" if row["mean_mse"] < row["naive_mse"] else "no",
            "*" if i == best else "",
        ]))
    if best is None:
        lines.append("# best=none no model beats naive_repeat")
    return "\n".join(lines) + "\n"


def format_plot_csv(results, frame: MarketFrame) -> str:
    """Per-timestep predicted vs actual price in denormalized units."""
    if not results:
        raise ConfigError("nothing to plot")
    lines = ["timestamp,actual_usd,predicted_usd,method"]
    for result in sorted(results, key=_result_key):
        s = result.spec
        label = f"{s.method}/{s.arch}/seed{s.seed}"
        preds_usd = frame.denormalize(result.predictions)
        actual_usd = frame.denormalize(result.actuals)
        for w in range(result.predictions.shape[0]):
            base_row = int(result.test_start_rows[w])
            for step in range(result.predictions.shape[1]):
                row = base_row + result.in_len + step
                ts = int(frame.timestamps[row])
                lines.append(
                    f"{ts},{fmt(actual_usd[w, step])},"
                    f"{fmt(preds_usd[w, step])},{label}")
    return "\n".join(lines) + "\n"


# --- external prediction import ---

def load_external_predictions(path) -> dict[int, np.ndarray]:
    """Read a (window_index, step, prediction) CSV into per-window rows.

    A non-numeric first line is treated as a header.  Every window must
    arrive with exactly the steps 0..2.
    """
    raw: dict[int, dict[int, float]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise MalformedRow(f"{path}:{lineno}: expected 3 fields")
            try:
                w, s, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise MalformedRow(f"{path}:{lineno}: non-numeric row") from None
            raw.setdefault(w, {})[s] = v
    out = {}
    for w, steps in raw.items():
        if sorted(steps) != list(range(nn.OUTPUT_LEN)):
            raise MalformedRow(
                f"{path}: window {w} has steps {sorted(steps)}, "
                f"need 0..{nn.OUTPUT_LEN - 1}")
        out[w] = np.array([steps[s] for s in range(nn.OUTPUT_LEN)])
    return out


def import_external_result(path, frame: MarketFrame, split: str,
                           method: str = "external",
                           config_hash: str = "none",
                           in_len: int = 24, out_len: int = 3,
                           stride: int = 24) -> ExperimentResult:
    """Score an externally produced prediction file on a test split.

    Window indices in the file are global window indices; the file must
    cover every test window of the requested split.
    """
    windows = segment_windows(frame, in_len, out_len, stride)
    _, test_w = split_windows(windows, split)
    table = load_external_predictions(path)
    missing = [w.index for w in test_w if w.index not in table]
    if missing:
        raise MalformedRow(
            f"{path}: missing predictions for test windows {missing[:5]}")
    preds = np.stack([table[w.index] for w in test_w])
    labels = np.stack([w.label for w in test_w])
    naive = np.stack([naive_repeat(w) for w in test_w])
    return ExperimentResult(
        spec=ExperimentSpec(method=method, arch="external", split=split,
                            n=1, seed=0),
        test_mse=_batch_mse(preds, labels),
        naive_mse=_batch_mse(naive, labels),
        predictions=preds,
        actuals=labels,
        test_start_rows=np.array([w.start_row for w in test_w]),
        loss_history=[],
        params={},
        config_hash=config_hash,
        in_len=in_len,
    )
