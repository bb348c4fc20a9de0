"""Residual classifier, training harness, metrics, gradient verification."""

from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import GradCheckReport, grad_check
from .network import (
    AUX_EMBED_DIM,
    AUX_INPUT_DIM,
    REFERENCE_CHANNELS,
    BasicBlock,
    NetworkConfig,
    VibWalkNet,
    build_network,
    standardize_batch,
)
from .training import (
    CrossValResult,
    Metrics,
    TrainConfig,
    confusion_matrix,
    evaluate,
    metrics_from_predictions,
    predict,
    train,
    train_fold,
)

__all__ = [
    "AUX_EMBED_DIM",
    "AUX_INPUT_DIM",
    "REFERENCE_CHANNELS",
    "BasicBlock",
    "CrossValResult",
    "GradCheckReport",
    "Metrics",
    "NetworkConfig",
    "TrainConfig",
    "VibWalkNet",
    "build_network",
    "confusion_matrix",
    "evaluate",
    "grad_check",
    "load_checkpoint",
    "metrics_from_predictions",
    "predict",
    "save_checkpoint",
    "standardize_batch",
    "train",
    "train_fold",
]
