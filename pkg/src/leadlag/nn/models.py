"""Forecast models built directly on numpy arrays.

Five architectures share one interface: ``birnn``, ``bilstm`` and
``bigru`` run two stacked recurrent layers in each time direction,
concatenate the top-layer states of both directions per timestep, apply
a shared linear head, and read the head outputs at the last three
timesteps as the forecast.  ``naive_mlp`` flattens the window through
one ReLU hidden layer into a single value broadcast to all three steps;
``smart_mlp`` is identical except its output layer emits three distinct
values.

Parameters live in a flat dict of float64 arrays keyed like
``"fwd0.Wx"`` / ``"bwd1.Un"`` / ``"head.W"``.  Everything here is
deterministic given the init seed.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteActivation, ShapeMismatch, LengthMismatch, ConfigError
from . import cells

RECURRENT_ARCHS = ("birnn", "bilstm", "bigru")
MLP_ARCHS = ("naive_mlp", "smart_mlp")
ARCHITECTURES = RECURRENT_ARCHS + MLP_ARCHS

OUTPUT_LEN = 3

_CELL_OF = {"birnn": "rnn", "bilstm": "lstm", "bigru": "gru"}
# creation order within one directional layer; init draws follow it
_CELL_PARAM_ORDER = {
    "rnn": ("Wx", "Wh", "b"),
    "lstm": ("Wx", "Wh", "b"),
    "gru": ("Wzr", "Uzr", "bzr", "Wn", "Un", "bn"),
}


@dataclass
class ModelSpec:
    arch: str
    input_dim: int
    in_len: int = 24
    hidden_dim: int = 32
    layers: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.arch not in ARCHITECTURES:
            raise ConfigError(f"unknown architecture {self.arch!r}")
        if self.input_dim < 1 or self.in_len < OUTPUT_LEN:
            raise ShapeMismatch(
                f"need input_dim >= 1 and in_len >= {OUTPUT_LEN}, "
                f"got {self.input_dim} and {self.in_len}"
            )
        if self.hidden_dim < 1 or self.layers < 1:
            raise ConfigError("hidden_dim and layers must be positive")


def _fan_in(shape) -> int:
    return shape[0] if len(shape) > 1 else shape[0]


def init_params(spec: ModelSpec) -> dict:
    """Fresh parameter dict, weights uniform in +-sqrt(1/fan_in), biases 0.

    Draw order is fixed (directions, then layers, then the per-cell
    order, then the head) so a seed pins every value.
    """
    rng = np.random.default_rng(spec.seed)
    params: dict[str, np.ndarray] = {}

    def draw(name, shape, is_bias):
        if is_bias:
            params[name] = np.zeros(shape)
        else:
            s = np.sqrt(1.0 / _fan_in(shape))
            params[name] = rng.uniform(-s, s, size=shape)

    if spec.arch in RECURRENT_ARCHS:
        kind = _CELL_OF[spec.arch]
        for direction in ("fwd", "bwd"):
            dim = spec.input_dim
            for layer in range(spec.layers):
                shapes = cells.cell_param_shapes(kind, dim, spec.hidden_dim)
                for pname in _CELL_PARAM_ORDER[kind]:
                    draw(f"{direction}{layer}.{pname}", shapes[pname],
                         pname.startswith("b"))
                dim = spec.hidden_dim
        draw("head.W", (2 * spec.hidden_dim, 1), False)
        draw("head.b", (1,), True)
    else:
        flat = spec.in_len * spec.input_dim
        out = 1 if spec.arch == "naive_mlp" else OUTPUT_LEN
        draw("fc1.W", (flat, spec.hidden_dim), False)
        draw("fc1.b", (spec.hidden_dim,), True)
        draw("out.W", (spec.hidden_dim, out), False)
        draw("out.b", (out,), True)
    return params


def _check_batch(spec: ModelSpec, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3 or X.shape[1] != spec.in_len or X.shape[2] != spec.input_dim:
        raise ShapeMismatch(
            f"expected (batch, {spec.in_len}, {spec.input_dim}) features, "
            f"got {X.shape}"
        )
    return X


def forward(spec: ModelSpec, params: dict, X: np.ndarray):
    """Batched forward pass.

    Returns (preds, cache): preds is (B, 3), cache feeds backward().
    """
    X = _check_batch(spec, X)
    # non-finite values are detected and raised explicitly, so numpy's
    # overflow warnings on the way there are pure noise
    with np.errstate(all="ignore"):
        if spec.arch in RECURRENT_ARCHS:
            preds, cache = _recurrent_forward(spec, params, X)
        else:
            preds, cache = _mlp_forward(spec, params, X)
    if not np.isfinite(preds).all():
        raise NonFiniteActivation(f"{spec.arch} produced non-finite outputs")
    return preds, cache


def _recurrent_forward(spec, params, X):
    kind = _CELL_OF[spec.arch]
    fwd_fn = cells.LAYER_FORWARD[kind]
    caches = {"fwd": [], "bwd": []}
    tops = {}
    for direction in ("fwd", "bwd"):
        seq = X if direction == "fwd" else X[:, ::-1]
        for layer in range(spec.layers):
            seq, cache = fwd_fn(params, f"{direction}{layer}.", seq)
            caches[direction].append(cache)
        tops[direction] = seq
    joint = np.concatenate([tops["fwd"], tops["bwd"][:, ::-1]], axis=2)
    scores = joint @ params["head.W"] + params["head.b"]  # (B, T, 1)
    preds = scores[:, -OUTPUT_LEN:, 0]
    if kind == "rnn":
        sig = b"".join((c[1] > 0).tobytes()
                       for c in caches["fwd"] + caches["bwd"])
    else:
        sig = None
    return preds, ("recurrent", X, caches, joint, sig)


def _mlp_forward(spec, params, X):
    B = X.shape[0]
    flat = X.reshape(B, -1)
    z1 = flat @ params["fc1.W"] + params["fc1.b"]
    h1 = np.maximum(z1, 0.0)
    out = h1 @ params["out.W"] + params["out.b"]  # (B, 1) or (B, 3)
    if spec.arch == "naive_mlp":
        preds = np.repeat(out, OUTPUT_LEN, axis=1)
    else:
        preds = out
    return preds, ("mlp", flat, z1, h1, (z1 > 0).tobytes())


def predict(spec: ModelSpec, params: dict, features: np.ndarray) -> np.ndarray:
    """Three-step forecast for a single (in_len, input_dim) window."""
    preds, _ = forward(spec, params, features)
    return preds[0]


def loss_mse(pred, label) -> float:
    pred = np.asarray(pred, dtype=float)
    label = np.asarray(label, dtype=float)
    if pred.shape != label.shape:
        raise LengthMismatch(f"prediction {pred.shape} vs label {label.shape}")
    if pred.size == 0:
        raise LengthMismatch("empty prediction")
    d = pred - label
    return float(np.mean(d * d))


def loss_and_grads(spec: ModelSpec, params: dict, X: np.ndarray, y: np.ndarray):
    """Mean squared error over the batch and exact gradients for it.

    Loss is the mean of squared errors over all batch entries and all
    three forecast steps.  Gradients come from reverse-mode
    differentiation of that exact scalar, so they match central finite
    differences to first order everywhere the model is smooth.
    """
    X = _check_batch(spec, X)
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[None]
    if y.shape != (X.shape[0], OUTPUT_LEN):
        raise ShapeMismatch(
            f"labels must be ({X.shape[0]}, {OUTPUT_LEN}), got {y.shape}"
        )
    preds, cache = forward(spec, params, X)
    # overflow here surfaces as Diverged / NonFiniteGradient upstream
    with np.errstate(all="ignore"):
        diff = preds - y
        loss = float(np.mean(diff * diff))
        dpreds = (2.0 / diff.size) * diff
        grads = {k: np.zeros_like(v) for k, v in params.items()}
        if cache[0] == "recurrent":
            _recurrent_backward(spec, params, cache, dpreds, grads)
        else:
            _mlp_backward(spec, params, cache, dpreds, grads)
    return loss, grads


def _recurrent_backward(spec, params, cache, dpreds, grads):
    _, X, caches, joint, _ = cache
    B, T, _ = joint.shape
    H = spec.hidden_dim
    dscores = np.zeros((B, T, 1))
    dscores[:, -OUTPUT_LEN:, 0] = dpreds
    grads["head.W"] += joint.reshape(-1, 2 * H).T @ dscores.reshape(-1, 1)
    grads["head.b"] += dscores.sum(axis=(0, 1))
    djoint = dscores @ params["head.W"].T  # (B, T, 2H)
    kind = _CELL_OF[spec.arch]
    bwd_fn = cells.LAYER_BACKWARD[kind]
    for direction in ("fwd", "bwd"):
        if direction == "fwd":
            dseq = djoint[:, :, :H]
        else:
            dseq = djoint[:, ::-1, H:]
        for layer in range(spec.layers - 1, -1, -1):
            dseq = bwd_fn(params, f"{direction}{layer}.",
                          caches[direction][layer], dseq, grads)


def _mlp_backward(spec, params, cache, dpreds, grads):
    _, flat, z1, h1, _ = cache
    if spec.arch == "naive_mlp":
        dout = dpreds.sum(axis=1, keepdims=True)
    else:
        dout = dpreds
    grads["out.W"] += h1.T @ dout
    grads["out.b"] += dout.sum(axis=0)
    dh1 = dout @ params["out.W"].T
    dz1 = dh1 * (z1 > 0)
    grads["fc1.W"] += flat.T @ dz1
    grads["fc1.b"] += dz1.sum(axis=0)


def relu_signature(cache):
    """Sign pattern of every ReLU pre-activation in a forward cache.

    None for architectures without ReLU.  Finite-difference checks
    compare the signatures at theta+eps and theta-eps: a mismatch means
    the perturbation crossed a kink, where the analytic subgradient and
    the two-sided slope legitimately disagree.
    """
    return cache[4]
