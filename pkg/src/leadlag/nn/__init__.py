from .models import (
    ARCHITECTURES,
    MLP_ARCHS,
    OUTPUT_LEN,
    RECURRENT_ARCHS,
    ModelSpec,
    forward,
    init_params,
    loss_and_grads,
    loss_mse,
    predict,
)
from .train import TrainConfig, train
from .gradcheck import gradient_check

__all__ = [
    "ARCHITECTURES",
    "MLP_ARCHS",
    "OUTPUT_LEN",
    "RECURRENT_ARCHS",
    "ModelSpec",
    "TrainConfig",
    "forward",
    "gradient_check",
    "init_params",
    "loss_and_grads",
    "loss_mse",
    "predict",
    "train",
]
