"""Recurrent cell stepping: plain ReLU cell, LSTM, and GRU.

Each layer function runs one direction over a (B, T, F) sequence and
returns the per-timestep hidden states plus the cache its backward pass
needs.  Backward passes are exact reverse-mode and accumulate parameter
gradients in one batched contraction per weight matrix.

Conventions: hidden updates are ``h = act(x @ Wx + h_prev @ Wh + b)`` with
zero initial state.  LSTM gates are packed (input, forget, candidate,
output) along the last axis; GRU packs (update, reset) and keeps its
candidate weights separate.  The GRU update gate gates the new candidate:
``h = (1 - z) * h_prev + z * n``, so a closed gate (z -> 0) carries the
previous state through unchanged.  ReLU uses subgradient 0 at the kink.
"""

import numpy as np


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _shifted_states(hs: np.ndarray) -> np.ndarray:
    """h_prev for every timestep: zeros at t=0, then hs[t-1]."""
    prev = np.zeros_like(hs)
    prev[:, 1:] = hs[:, :-1]
    return prev


# --- plain ReLU cell ---

def rnn_forward(p, prefix, X):
    B, T, _ = X.shape
    Wx, Wh, b = p[prefix + "Wx"], p[prefix + "Wh"], p[prefix + "b"]
    H = Wh.shape[0]
    pre = X @ Wx + b
    zs = np.empty((B, T, H))
    hs = np.empty((B, T, H))
    h = np.zeros((B, H))
    for t in range(T):
        z = pre[:, t] + h @ Wh
        h = np.maximum(z, 0.0)
        zs[:, t] = z
        hs[:, t] = h
    return hs, (X, zs, hs)


def rnn_backward(p, prefix, cache, dhs, grads):
    X, zs, hs = cache
    Wx, Wh = p[prefix + "Wx"], p[prefix + "Wh"]
    B, T, H = hs.shape
    dz_all = np.empty((B, T, H))
    dh_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        dh = dhs[:, t] + dh_next
        dz = dh * (zs[:, t] > 0)
        dz_all[:, t] = dz
        dh_next = dz @ Wh.T
    h_prev = _shifted_states(hs)
    F = X.shape[2]
    grads[prefix + "Wx"] += X.reshape(-1, F).T @ dz_all.reshape(-1, H)
    grads[prefix + "Wh"] += h_prev.reshape(-1, H).T @ dz_all.reshape(-1, H)
    grads[prefix + "b"] += dz_all.sum(axis=(0, 1))
    return dz_all @ Wx.T


# --- LSTM ---

def lstm_forward(p, prefix, X):
    B, T, _ = X.shape
    Wx, Wh, b = p[prefix + "Wx"], p[prefix + "Wh"], p[prefix + "b"]
    H = Wh.shape[0]
    pre = X @ Wx + b
    gates = np.empty((B, T, 4 * H))  # sigmoid/tanh-activated i, f, g, o
    cs = np.empty((B, T, H))
    tcs = np.empty((B, T, H))
    hs = np.empty((B, T, H))
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    for t in range(T):
        a = pre[:, t] + h @ Wh
        i = sigmoid(a[:, :H])
        f = sigmoid(a[:, H:2 * H])
        g = np.tanh(a[:, 2 * H:3 * H])
        o = sigmoid(a[:, 3 * H:])
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        gates[:, t, :H] = i
        gates[:, t, H:2 * H] = f
        gates[:, t, 2 * H:3 * H] = g
        gates[:, t, 3 * H:] = o
        cs[:, t] = c
        tcs[:, t] = tc
        hs[:, t] = h
    return hs, (X, gates, cs, tcs, hs)


def lstm_backward(p, prefix, cache, dhs, grads):
    X, gates, cs, tcs, hs = cache
    Wx, Wh = p[prefix + "Wx"], p[prefix + "Wh"]
    B, T, H = hs.shape
    c_prev = _shifted_states(cs)
    da_all = np.empty((B, T, 4 * H))
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        i = gates[:, t, :H]
        f = gates[:, t, H:2 * H]
        g = gates[:, t, 2 * H:3 * H]
        o = gates[:, t, 3 * H:]
        tc = tcs[:, t]
        dh = dhs[:, t] + dh_next
        do = dh * tc
        dc = dc_next + dh * o * (1.0 - tc * tc)
        di = dc * g
        df = dc * c_prev[:, t]
        dg = dc * i
        dc_next = dc * f
        da = da_all[:, t]
        da[:, :H] = di * i * (1.0 - i)
        da[:, H:2 * H] = df * f * (1.0 - f)
        da[:, 2 * H:3 * H] = dg * (1.0 - g * g)
        da[:, 3 * H:] = do * o * (1.0 - o)
        dh_next = da @ Wh.T
    h_prev = _shifted_states(hs)
    F = X.shape[2]
    flat = da_all.reshape(-1, 4 * H)
    grads[prefix + "Wx"] += X.reshape(-1, F).T @ flat
    grads[prefix + "Wh"] += h_prev.reshape(-1, H).T @ flat
    grads[prefix + "b"] += flat.sum(axis=0)
    return da_all @ Wx.T


# --- GRU ---

def gru_forward(p, prefix, X):
    B, T, _ = X.shape
    Wzr, Uzr, bzr = p[prefix + "Wzr"], p[prefix + "Uzr"], p[prefix + "bzr"]
    Wn, Un, bn = p[prefix + "Wn"], p[prefix + "Un"], p[prefix + "bn"]
    H = Un.shape[0]
    pre_zr = X @ Wzr + bzr
    pre_n = X @ Wn + bn
    zrs = np.empty((B, T, 2 * H))
    ns = np.empty((B, T, H))
    rhs = np.empty((B, T, H))
    hs = np.empty((B, T, H))
    h = np.zeros((B, H))
    for t in range(T):
        a = pre_zr[:, t] + h @ Uzr
        z = sigmoid(a[:, :H])
        r = sigmoid(a[:, H:])
        rh = r * h
        n = np.tanh(pre_n[:, t] + rh @ Un)
        h = (1.0 - z) * h + z * n
        zrs[:, t, :H] = z
        zrs[:, t, H:] = r
        ns[:, t] = n
        rhs[:, t] = rh
        hs[:, t] = h
    return hs, (X, zrs, ns, rhs, hs)


def gru_backward(p, prefix, cache, dhs, grads):
    X, zrs, ns, rhs, hs = cache
    Wzr, Uzr = p[prefix + "Wzr"], p[prefix + "Uzr"]
    Wn, Un = p[prefix + "Wn"], p[prefix + "Un"]
    B, T, H = hs.shape
    h_prev = _shifted_states(hs)
    da_zr_all = np.empty((B, T, 2 * H))
    da_n_all = np.empty((B, T, H))
    dh_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        z = zrs[:, t, :H]
        r = zrs[:, t, H:]
        n = ns[:, t]
        hp = h_prev[:, t]
        dh = dhs[:, t] + dh_next
        dz = dh * (n - hp)
        dn = dh * z
        dh_prev = dh * (1.0 - z)
        da_n = dn * (1.0 - n * n)
        drh = da_n @ Un.T
        dr = drh * hp
        dh_prev = dh_prev + drh * r
        da_zr = da_zr_all[:, t]
        da_zr[:, :H] = dz * z * (1.0 - z)
        da_zr[:, H:] = dr * r * (1.0 - r)
        da_n_all[:, t] = da_n
        dh_next = dh_prev + da_zr @ Uzr.T
    F = X.shape[2]
    flat_zr = da_zr_all.reshape(-1, 2 * H)
    flat_n = da_n_all.reshape(-1, H)
    grads[prefix + "Wzr"] += X.reshape(-1, F).T @ flat_zr
    grads[prefix + "Uzr"] += h_prev.reshape(-1, H).T @ flat_zr
    grads[prefix + "bzr"] += flat_zr.sum(axis=0)
    grads[prefix + "Wn"] += X.reshape(-1, F).T @ flat_n
    grads[prefix + "Un"] += rhs.reshape(-1, H).T @ flat_n
    grads[prefix + "bn"] += flat_n.sum(axis=0)
    return da_zr_all @ Wzr.T + da_n_all @ Wn.T


LAYER_FORWARD = {"rnn": rnn_forward, "lstm": lstm_forward, "gru": gru_forward}
LAYER_BACKWARD = {"rnn": rnn_backward, "lstm": lstm_backward, "gru": gru_backward}


def cell_param_shapes(kind: str, input_dim: int, hidden_dim: int) -> dict:
    """Parameter name -> shape for one directional layer."""
    H = hidden_dim
    if kind == "rnn":
        return {"Wx": (input_dim, H), "Wh": (H, H), "b": (H,)}
    if kind == "lstm":
        return {"Wx": (input_dim, 4 * H), "Wh": (H, 4 * H), "b": (4 * H,)}
    if kind == "gru":
        return {
            "Wzr": (input_dim, 2 * H),
            "Uzr": (H, 2 * H),
            "bzr": (2 * H,),
            "Wn": (input_dim, H),
            "Un": (H, H),
            "bn": (H,),
        }
    raise ValueError(f"unknown cell kind {kind!r}")
