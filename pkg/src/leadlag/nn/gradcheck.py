"""Central-difference validation of the analytic gradients.

For each checked coordinate the loss is evaluated at theta +- eps and
the slope compared against backward()'s entry.  A coordinate is skipped
when the two evaluations disagree on the sign pattern of the ReLU
pre-activations: the perturbation crossed a kink there, and the
analytic subgradient and the two-sided slope legitimately differ.
"""

import numpy as np

from . import models


def _loss_at(spec, params, X, y):
    preds, cache = models.forward(spec, params, X)
    d = preds - np.asarray(y, dtype=float)
    return float(np.mean(d * d)), models.relu_signature(cache)


def gradient_check(spec, params, X, y, epsilon=1e-5, max_coords=400, seed=0):
    """Max relative error between analytic and numeric gradients.

    Checks every coordinate when the model has at most max_coords of
    them, otherwise a seeded random subsample of max_coords.  Returns
    (max_rel_err, n_checked, n_skipped).
    """
    X = np.asarray(X, dtype=float)
    _, grads = models.loss_and_grads(spec, params, X, y)
    coords = [(name, idx)
              for name in sorted(params)
              for idx in range(params[name].size)]
    if len(coords) > max_coords:
        rng = np.random.default_rng(seed)
        picks = rng.choice(len(coords), size=max_coords, replace=False)
        coords = [coords[i] for i in picks]
    work = {k: v.astype(float, copy=True) for k, v in params.items()}
    worst = 0.0
    skipped = 0
    for name, idx in coords:
        flat = work[name].reshape(-1)
        keep = flat[idx]
        flat[idx] = keep + epsilon
        lp, sig_p = _loss_at(spec, work, X, y)
        flat[idx] = keep - epsilon
        lm, sig_m = _loss_at(spec, work, X, y)
        flat[idx] = keep
        if sig_p != sig_m:
            skipped += 1
            continue
        numeric = (lp - lm) / (2.0 * epsilon)
        analytic = grads[name].reshape(-1)[idx]
        denom = max(abs(analytic), abs(numeric), 1e-6)
        rel = abs(analytic - numeric) / denom
        if rel > worst:
            worst = rel
    return worst, len(coords) - skipped, skipped
