"""Command-line pipeline driver: ingest, featurize, run, sweep, report.

Every command is idempotent: outputs are pure functions of the config,
so reruns rewrite byte-identical files, and completed experiment cells
are skipped when their result file already carries the current config
hash.  Logs are single-line key=value records; errors print one
event=error line to stderr and map to exit code 2 (validation) or 3
(numerical failure).
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import impact, ingest, io, nn
from .config import RunConfig, load_config
from .errors import NUMERICAL_ERRORS, VALIDATION_ERRORS, ConfigError


def log(**kv):
    print(" ".join(f"{k}={v}" for k, v in kv.items()))


def _train_config(cfg: RunConfig) -> nn.TrainConfig:
    return nn.TrainConfig(epochs=cfg.epochs, learning_rate=cfg.learning_rate,
                          optimizer=cfg.optimizer)


def build_frame(cfg: RunConfig) -> ingest.MarketFrame:
    if cfg.source == "synthetic":
        spec = ex.SyntheticMarketSpec(
            m=cfg.m, lags=cfg.lags, noise_sigma=cfg.noise_sigma,
            T=cfg.length, seed=cfg.data_seed, timestep_ms=cfg.timestep_ms)
        return ex.generate_synthetic(spec)
    series = []
    for asset in (cfg.target, *cfg.related):
        path = Path(cfg.data_dir) / f"{asset}.csv"
        if not path.exists():
            raise ConfigError(f"missing data file: {path}")
        series.append((asset, ingest.parse_klines(path, cfg.timestep_ms)))
    grid, raw = ingest.align_frames(series, cfg.start, cfg.end,
                                    cfg.max_gap, cfg.timestep_ms)
    return ingest.normalize_global([a for a, _ in series], grid, raw,
                                   cfg.timestep_ms, cfg.norm_scope)


def frame_path(cfg: RunConfig) -> Path:
    return Path(cfg.out_dir) / "frame.csv"


def _header_hash(path: Path, magic: str):
    """config_hash recorded in a text output, or None."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            meta = io._read_header(fh, magic)
        return meta.get("config_hash")
    except (OSError, VALIDATION_ERRORS):
        return None


def ensure_frame(cfg: RunConfig) -> ingest.MarketFrame:
    """Reuse the saved frame when it matches the config, else rebuild."""
    path = frame_path(cfg)
    if path.exists() and _header_hash(path, io.FRAME_MAGIC) == cfg.config_hash:
        return io.load_frame(path)
    frame = build_frame(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    io.save_frame(path, frame, cfg.config_hash)
    return frame


def _write_csv(path: Path, text: str, config_hash: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        fh.write(text)


# --- commands ---

def cmd_ingest(cfg: RunConfig, dry_run: bool) -> int:
    if dry_run:
        if cfg.source == "synthetic":
            log(event="plan", action="ingest", source="synthetic",
                m=cfg.m, length=cfg.length)
        else:
            log(event="plan", action="ingest", source="files",
                assets=1 + len(cfg.related), dir=cfg.data_dir)
        return 0
    frame = build_frame(cfg)
    windows = ingest.segment_windows(frame, cfg.in_len, cfg.out_len,
                                     cfg.stride)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = frame_path(cfg)
    io.save_frame(path, frame, cfg.config_hash)
    log(event="ingest", rows=frame.n_steps, assets=len(frame.asset_ids),
        windows=len(windows), file=path, config_hash=cfg.config_hash)
    return 0


def cmd_featurize(cfg: RunConfig, dry_run: bool) -> int:
    m = len(cfg.related) if cfg.source == "files" else cfg.m
    width = impact.feature_width(cfg.method, m=m, n=cfg.n)
    if dry_run:
        log(event="plan", action="featurize", method=cfg.method, n=cfg.n,
            width=width)
        return 0
    frame = ensure_frame(cfg)
    windows = ingest.segment_windows(frame, cfg.in_len, cfg.out_len,
                                     cfg.stride)
    features = impact.featurize(windows, cfg.method, n=cfg.n,
                                lag_direction=cfg.lag_direction)
    path = Path(cfg.out_dir) / f"features-{cfg.method}-n{cfg.n}.csv"
    io.save_features(path, features, method=cfg.method, n=cfg.n, m=m,
                     asset_ids=frame.asset_ids,
                     config_hash=cfg.config_hash)
    log(event="featurize", method=cfg.method, n=cfg.n, width=width,
        windows=len(windows), file=path, config_hash=cfg.config_hash)
    return 0


def _cells(cfg: RunConfig):
    for method in cfg.methods:
        for arch in cfg.archs:
            for split in cfg.splits:
                for seed in cfg.seeds:
                    yield ex.ExperimentSpec(
                        method=method, arch=arch, split=split, n=cfg.n,
                        seed=seed, hidden_dim=cfg.hidden_dim,
                        layers=cfg.layers, lag_direction=cfg.lag_direction)


def _result_meta(result: ex.ExperimentResult) -> dict:
    s = result.spec
    return {
        "method": s.method,
        "arch": s.arch,
        "split": s.split,
        "n": s.n,
        "seed": s.seed,
        "test_mse": io.fmt(result.test_mse),
        "naive_mse": io.fmt(result.naive_mse),
        "in_len": result.in_len,
        "test_start_rows": ",".join(str(int(r))
                                    for r in result.test_start_rows),
        "config_hash": result.config_hash,
    }


def _result_from_file(path: Path) -> ex.ExperimentResult:
    meta, preds, acts = io.load_result(path)
    spec = ex.ExperimentSpec(
        method=meta["method"], arch=meta["arch"], split=meta["split"],
        n=int(meta["n"]), seed=int(meta["seed"]))
    rows = meta["test_start_rows"]
    return ex.ExperimentResult(
        spec=spec,
        test_mse=float(meta["test_mse"]),
        naive_mse=float(meta["naive_mse"]),
        predictions=preds,
        actuals=acts,
        test_start_rows=np.array([int(r) for r in rows.split(",")]),
        loss_history=[],
        params={},
        config_hash=meta.get("config_hash", "none"),
        in_len=int(meta["in_len"]),
    )


def _gather_extra_results(cfg, frame, results):
    """Naive baselines and external predictions appended to a report."""
    if cfg.include_naive:
        for split in cfg.splits:
            results.append(ex.naive_result(
                frame, split, cfg.config_hash,
                cfg.in_len, cfg.out_len, cfg.stride))
    if cfg.external_predictions:
        results.append(ex.import_external_result(
            cfg.external_predictions, frame, cfg.splits[0],
            method=cfg.external_method, config_hash=cfg.config_hash,
            in_len=cfg.in_len, out_len=cfg.out_len, stride=cfg.stride))


def _write_report(cfg, frame, results):
    report_file = Path(cfg.out_dir) / "report.csv"
    plot_file = Path(cfg.out_dir) / "plot.csv"
    _write_csv(report_file, ex.format_report_csv(results), cfg.config_hash)
    _write_csv(plot_file, ex.format_plot_csv(results, frame),
               cfg.config_hash)
    rows = ex.aggregate_results(results)
    best = ex.mark_best(rows)
    best_label = ("none" if best is None
                  else f"{rows[best]['method']}/{rows[best]['arch']}")
    log(event="report", cells=len(results), file=report_file,
        plot=plot_file, best=best_label, config_hash=cfg.config_hash)


def cmd_run(cfg: RunConfig, dry_run: bool) -> int:
    specs = list(_cells(cfg))
    if dry_run:
        for spec in specs:
            log(event="plan", cell=spec.cell_id())
        log(event="plan", cells=len(specs))
        return 0
    frame = ensure_frame(cfg)
    results_dir = Path(cfg.out_dir) / "results"
    ckpt_dir = Path(cfg.out_dir) / "checkpoints"
    os.makedirs(results_dir, exist_ok=True)
    os.makedirs(ckpt_dir, exist_ok=True)
    train_config = _train_config(cfg)
    results = []
    for spec in specs:
        rpath = results_dir / f"{spec.cell_id()}.csv"
        cpath = ckpt_dir / f"{spec.cell_id()}.ckpt"
        if (rpath.exists() and cpath.exists()
                and _header_hash(rpath, io.RESULT_MAGIC) == cfg.config_hash):
            result = _result_from_file(rpath)
            log(event="skip", cell=spec.cell_id(),
                config_hash=cfg.config_hash)
        else:
            result = ex.run_experiment(frame, spec, train_config,
                                       cfg.config_hash, cfg.in_len,
                                       cfg.out_len, cfg.stride)
            io.save_result(rpath, _result_meta(result),
                           result.predictions, result.actuals)
            io.save_checkpoint(cpath,
                               {"cell": spec.cell_id(),
                                "config_hash": cfg.config_hash},
                               result.params)
            log(event="cell", cell=spec.cell_id(),
                mse_e3=io.fmt(result.test_mse / ex.MSE_UNIT),
                naive_e3=io.fmt(result.naive_mse / ex.MSE_UNIT),
                beats_naive="yes" if result.beats_naive else "no",
                file=rpath)
        results.append(result)
    _gather_extra_results(cfg, frame, results)
    _write_report(cfg, frame, results)
    return 0


def cmd_sweep(cfg: RunConfig, dry_run: bool) -> int:
    split = cfg.splits[0]
    if dry_run:
        log(event="plan", action="sweep", sizes=len(cfg.sweep_sizes),
            seeds=len(cfg.seeds), method=cfg.sweep_method,
            arch=cfg.sweep_arch, split=split)
        return 0
    frame = ensure_frame(cfg)
    rows = ex.lvk_sweep(frame, cfg.sweep_sizes, cfg.seeds,
                        method=cfg.sweep_method, arch=cfg.sweep_arch,
                        split=split, train_config=_train_config(cfg),
                        hidden_dim=cfg.hidden_dim, layers=cfg.layers)
    path = Path(cfg.out_dir) / "sweep.csv"
    _write_csv(path, ex.format_sweep_csv(rows), cfg.config_hash)
    log(event="sweep", rows=len(rows), file=path,
        config_hash=cfg.config_hash)
    return 0


def cmd_report(cfg: RunConfig, dry_run: bool) -> int:
    results_dir = Path(cfg.out_dir) / "results"
    files = sorted(results_dir.glob("*.csv")) if results_dir.exists() else []
    if dry_run:
        for path in files:
            log(event="plan", result=path)
        log(event="plan", results=len(files))
        return 0
    if not files and not cfg.include_naive and not cfg.external_predictions:
        raise ConfigError(f"no results under {results_dir}")
    frame = ensure_frame(cfg)
    results = [_result_from_file(path) for path in files]
    _gather_extra_results(cfg, frame, results)
    _write_report(cfg, frame, results)
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "featurize": cmd_featurize,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leadlag",
        description="Lead-lag market mining pipeline")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True,
                        help="INI config file path")
    parser.add_argument("--seed", type=int, default=None,
                        help="override train.seeds with one seed")
    parser.add_argument("--dry-run", action="store_true",
                        help="print the plan without writing anything")
    parser.add_argument("--out", default=None,
                        help="override output.dir")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.seed, args.out)
        return COMMANDS[args.command](cfg, args.dry_run)
    except NUMERICAL_ERRORS as exc:
        print(f'event=error kind={type(exc).__name__} detail="{exc}"',
              file=sys.stderr)
        return 3
    except VALIDATION_ERRORS as exc:
        print(f'event=error kind={type(exc).__name__} detail="{exc}"',
              file=sys.stderr)
        return 2
    except OSError as exc:
        print(f'event=error kind=OSError detail="{exc}"', file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
