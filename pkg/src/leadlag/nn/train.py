"""Full-batch training loop with Adam or plain gradient descent."""

from dataclasses import dataclass

import numpy as np

from ..errors import Diverged, NonFiniteGradient, ConfigError
from . import models


@dataclass
class TrainConfig:
    epochs: int = 2000
    learning_rate: float = 0.01
    optimizer: str = "adam"  # or "sgd"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(
                f"learning_rate must be > 0, got {self.learning_rate}")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")


def train(spec, params, X, y, config: TrainConfig | None = None):
    """Optimize params on the whole (X, y) set; no shuffling, no batches.

    Returns (trained params, per-epoch loss history).  The input dict is
    not modified.  history[k] is the loss at the start of epoch k, so
    history[0] is the untrained loss.  Raises Diverged the moment the
    loss stops being finite and NonFiniteGradient if the loss is fine
    but a gradient is not.
    """
    if config is None:
        config = TrainConfig()
    params = {k: v.astype(float, copy=True) for k, v in params.items()}
    names = sorted(params)
    if config.optimizer == "adam":
        m = {k: np.zeros_like(params[k]) for k in names}
        v = {k: np.zeros_like(params[k]) for k in names}
    history = []
    for epoch in range(config.epochs):
        loss, grads = models.loss_and_grads(spec, params, X, y)
        if not np.isfinite(loss):
            raise Diverged(f"non-finite loss at epoch {epoch}")
        for k in names:
            if not np.isfinite(grads[k]).all():
                raise NonFiniteGradient(f"non-finite gradient in {k} "
                                        f"at epoch {epoch}")
        history.append(loss)
        lr = config.learning_rate
        if config.optimizer == "sgd":
            for k in names:
                params[k] -= lr * grads[k]
        else:
            t = epoch + 1
            b1, b2 = config.beta1, config.beta2
            for k in names:
                m[k] = b1 * m[k] + (1.0 - b1) * grads[k]
                v[k] = b2 * v[k] + (1.0 - b2) * grads[k] ** 2
                mhat = m[k] / (1.0 - b1 ** t)
                vhat = v[k] / (1.0 - b2 ** t)
                params[k] -= lr * mhat / (np.sqrt(vhat) + config.eps)
    return params, history
