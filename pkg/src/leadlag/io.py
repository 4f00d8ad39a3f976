"""On-disk formats: frame, feature, result, and checkpoint files.

Every format round-trips bit-exactly: floats are written with ``repr``
(shortest decimal that parses back to the identical float64), checkpoints
store raw little-endian float64 payloads.  Each file embeds the config hash
that produced it in its header.
"""

import json
import struct

import numpy as np

from .errors import MalformedRow
from .ingest import MarketFrame

FRAME_MAGIC = "# leadlag-frame v1"
FEATURE_MAGIC = "# leadlag-features v1"
RESULT_MAGIC = "# leadlag-result v1"
CHECKPOINT_MAGIC = b"LEADLAG-CKPT1"


def fmt(x) -> str:
    """Exact round-trip decimal for a float64."""
    return repr(float(x))


def _write_header(fh, magic: str, meta: dict):
    fh.write(magic + "\n")
    for key, value in meta.items():
        fh.write(f"# {key}={value}\n")


def _read_header(fh, magic: str) -> dict:
    first = fh.readline().rstrip("\n")
    if first != magic:
        raise MalformedRow(f"expected header {magic!r}, got {first!r}")
    meta = {}
    while True:
        pos = fh.tell()
        line = fh.readline()
        if not line.startswith("# "):
            fh.seek(pos)
            return meta
        key, _, value = line[2:].rstrip("\n").partition("=")
        meta[key] = value


# --- frame files ---

def save_frame(path, frame: MarketFrame, config_hash: str = "none"):
    """Write the frame as CSV plus a JSON metadata sidecar."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_header(fh, FRAME_MAGIC, {"config_hash": config_hash})
        fh.write("timestamp," + ",".join(frame.asset_ids) + "\n")
        for row in range(frame.n_steps):
            cells = [str(int(frame.timestamps[row]))]
            cells += [fmt(v) for v in frame.prices[row]]
            fh.write(",".join(cells) + "\n")
    meta = {
        "asset_ids": frame.asset_ids,
        "norm_min": frame.norm_min,
        "norm_max": frame.norm_max,
        "timestep_ms": frame.timestep_ms,
        "norm_scope": frame.norm_scope,
        "config_hash": config_hash,
    }
    with open(sidecar_path(path), "w", encoding="utf-8", newline="") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def sidecar_path(frame_path) -> str:
    return str(frame_path) + ".meta.json"


def load_frame(path) -> MarketFrame:
    with open(sidecar_path(path), "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    timestamps = []
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        _read_header(fh, FRAME_MAGIC)
        header = fh.readline().rstrip("\n").split(",")
        if header[0] != "timestamp" or header[1:] != meta["asset_ids"]:
            raise MalformedRow(f"{path}: column header does not match sidecar asset_ids")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            timestamps.append(int(parts[0]))
            rows.append([float(p) for p in parts[1:]])
    return MarketFrame(
        asset_ids=list(meta["asset_ids"]),
        timestamps=np.asarray(timestamps, dtype=np.int64),
        prices=np.asarray(rows, dtype=np.float64),
        norm_min=float(meta["norm_min"]),
        norm_max=float(meta["norm_max"]),
        timestep_ms=int(meta["timestep_ms"]),
        norm_scope=meta.get("norm_scope", "all"),
    )


# --- feature files ---

def save_features(path, features: np.ndarray, method: str, n: int, m: int,
                  asset_ids, config_hash: str = "none"):
    """Write per-window feature matrices, one row per (window, timestep)."""
    features = np.asarray(features, dtype=np.float64)
    n_windows, steps, width = features.shape
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_header(fh, FEATURE_MAGIC, {
            "method": method,
            "n": n,
            "m": m,
            "assets": ",".join(asset_ids),
            "config_hash": config_hash,
        })
        cols = ",".join(f"f{i:03d}" for i in range(width))
        fh.write(f"window,step,{cols}\n")
        for w in range(n_windows):
            for t in range(steps):
                cells = [str(w), str(t)] + [fmt(v) for v in features[w, t]]
                fh.write(",".join(cells) + "\n")


def load_features(path):
    """Returns (features array (W, steps, F), meta dict)."""
    with open(path, "r", encoding="utf-8") as fh:
        meta = _read_header(fh, FEATURE_MAGIC)
        fh.readline()  # column header
        rows = []
        index = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            index.append((int(parts[0]), int(parts[1])))
            rows.append([float(p) for p in parts[2:]])
    if not rows:
        return np.zeros((0, 0, 0)), meta
    n_windows = index[-1][0] + 1
    steps = index[-1][1] + 1
    arr = np.asarray(rows, dtype=np.float64).reshape(n_windows, steps, -1)
    return arr, meta


# --- experiment result files ---

def save_result(path, meta: dict, predictions: np.ndarray, actuals: np.ndarray):
    """One result file per experiment cell: header meta + per-step rows."""
    predictions = np.asarray(predictions, dtype=np.float64)
    actuals = np.asarray(actuals, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_header(fh, RESULT_MAGIC, meta)
        fh.write("window,step,prediction,actual\n")
        for w in range(predictions.shape[0]):
            for s in range(predictions.shape[1]):
                fh.write(f"{w},{s},{fmt(predictions[w, s])},{fmt(actuals[w, s])}\n")


def load_result(path):
    """Returns (meta dict, predictions (W,3), actuals (W,3))."""
    with open(path, "r", encoding="utf-8") as fh:
        meta = _read_header(fh, RESULT_MAGIC)
        fh.readline()
        preds = []
        acts = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            w, s = int(parts[0]), int(parts[1])
            if w == len(preds):
                preds.append([])
                acts.append([])
            preds[w].append(float(parts[2]))
            acts[w].append(float(parts[3]))
    return meta, np.asarray(preds, dtype=np.float64), np.asarray(acts, dtype=np.float64)


# --- model checkpoints ---

def save_checkpoint(path, header: dict, params: dict):
    """Self-describing header + float64 little-endian payload.

    The payload concatenates parameters in sorted-name order; shapes are
    recorded in the header so loading restores the exact arrays.
    """
    names = sorted(params)
    header = dict(header)
    header["params"] = {name: list(params[name].shape) for name in names}
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC + b"\n")
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for name in names:
            arr = np.ascontiguousarray(params[name], dtype=np.float64)
            fh.write(arr.astype("<f8", copy=False).tobytes())


def load_checkpoint(path):
    """Returns (header dict, params dict); exact inverse of save_checkpoint."""
    with open(path, "rb") as fh:
        magic = fh.readline().rstrip(b"\n")
        if magic != CHECKPOINT_MAGIC:
            raise MalformedRow(f"{path}: not a checkpoint file")
        (blob_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(blob_len).decode("utf-8"))
        params = {}
        for name in sorted(header["params"]):
            shape = tuple(header["params"][name])
            count = int(np.prod(shape)) if shape else 1
            data = fh.read(count * 8)
            params[name] = np.frombuffer(data, dtype="<f8").astype(np.float64).reshape(shape)
    return header, params
