"""Minimal neural-network core: the layers the segment classifier needs,
manual forward/backward passes, an Adam optimizer, and classification metrics.

Tensors are plain numpy arrays, float32 by default; every layer follows
the dtype of its input so gradient checks can run in float64.
"""

from .adam import AdamState, adam_step
from .layers import (
    conv1d,
    conv1d_backward,
    cross_entropy,
    dense,
    dense_backward,
    dropout,
    dropout_mask,
    maxpool_time,
    maxpool_time_backward,
    relu,
    relu_backward,
    softmax,
)
from .metrics import MetricsReport, compute_metrics
from .network import ConvTextNet, philox_rng

__all__ = [
    "AdamState",
    "adam_step",
    "conv1d",
    "conv1d_backward",
    "cross_entropy",
    "dense",
    "dense_backward",
    "dropout",
    "dropout_mask",
    "maxpool_time",
    "maxpool_time_backward",
    "relu",
    "relu_backward",
    "softmax",
    "MetricsReport",
    "compute_metrics",
    "ConvTextNet",
    "philox_rng",
]
