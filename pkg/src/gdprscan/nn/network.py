"""The assembled segment-classification network.

Pipeline: conv1d -> ReLU -> dropout -> max-pool over time -> dense ->
ReLU -> dropout -> dense -> softmax. The embedding rows fed in as input
are constants: backward produces gradients only for conv and dense
parameters, never for the input.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError, StateError
from .layers import CROSS_ENTROPY_EPS, dropout_mask, softmax

# Serialization and iteration order of the trainable tensors.
PARAM_ORDER = ("conv_w", "conv_b", "fc1_w", "fc1_b", "fc2_w", "fc2_b")


def philox_rng(seed: int) -> np.random.Generator:
    """Counter-based RNG used for weight init and dropout masks."""
    return np.random.Generator(np.random.Philox(seed))


def _glorot_uniform(rng, shape, fan_in, fan_out, dtype):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class ConvTextNet:
    """Conv/dense parameters plus batched forward and backward passes."""

    def __init__(self, params: dict[str, np.ndarray], dropout_conv: float = 0.1,
                 dropout_fc: float = 0.5):
        missing = [name for name in PARAM_ORDER if name not in params]
        if missing:
            raise ShapeError(f"missing parameters: {missing}")
        self.params = params
        self.dropout_conv = dropout_conv
        self.dropout_fc = dropout_fc
        self._cache = None

    @classmethod
    def init(cls, embed_dim: int, n_filters: int, kernel_size: int, fc_units: int,
             n_classes: int, rng: np.random.Generator, dropout_conv: float = 0.1,
             dropout_fc: float = 0.5, dtype=np.float32) -> "ConvTextNet":
        params = {
            "conv_w": _glorot_uniform(rng, (n_filters, kernel_size, embed_dim),
                                      kernel_size * embed_dim, n_filters, dtype),
            "conv_b": np.zeros(n_filters, dtype=dtype),
            "fc1_w": _glorot_uniform(rng, (fc_units, n_filters), n_filters, fc_units, dtype),
            "fc1_b": np.zeros(fc_units, dtype=dtype),
            "fc2_w": _glorot_uniform(rng, (n_classes, fc_units), fc_units, n_classes, dtype),
            "fc2_b": np.zeros(n_classes, dtype=dtype),
        }
        return cls(params, dropout_conv=dropout_conv, dropout_fc=dropout_fc)

    @property
    def n_classes(self) -> int:
        return self.params["fc2_w"].shape[0]

    @property
    def embed_dim(self) -> int:
        return self.params["conv_w"].shape[2]

    @property
    def kernel_size(self) -> int:
        return self.params["conv_w"].shape[1]

    def forward_batch(self, x: np.ndarray, train_mode: bool = False,
                      rng: np.random.Generator | None = None) -> np.ndarray:
        """x: (B, L, D) -> class probabilities (B, C). Caches activations."""
        x = np.asarray(x)
        if x.ndim != 3 or x.shape[2] != self.embed_dim:
            raise ShapeError(f"expected (B, L, {self.embed_dim}) input, got {x.shape}")
        if train_mode and rng is None:
            raise ValueError("train-mode forward needs an rng for dropout masks")
        conv_w, conv_b = self.params["conv_w"], self.params["conv_b"]
        fc1_w, fc1_b = self.params["fc1_w"], self.params["fc1_b"]
        fc2_w, fc2_b = self.params["fc2_w"], self.params["fc2_b"]
        kernel_size = self.kernel_size

        before = (kernel_size - 1) // 2
        after = kernel_size - 1 - before
        padded = np.pad(x, ((0, 0), (before, after), (0, 0)))
        windows = np.lib.stride_tricks.sliding_window_view(
            padded, kernel_size, axis=1
        ).transpose(0, 1, 3, 2)  # (B, L, k, D)

        conv_out = np.einsum("blkd,fkd->blf", windows, conv_w) + conv_b
        conv_act = np.maximum(conv_out, 0)
        if train_mode and self.dropout_conv > 0:
            conv_mask = dropout_mask(conv_act.shape, self.dropout_conv, rng).astype(x.dtype)
            conv_drop = conv_act * conv_mask
        else:
            conv_mask = None
            conv_drop = conv_act

        pool_idx = conv_drop.argmax(axis=1)  # (B, F)
        pooled = np.take_along_axis(conv_drop, pool_idx[:, None, :], axis=1)[:, 0, :]

        z1 = pooled @ fc1_w.T + fc1_b
        a1 = np.maximum(z1, 0)
        if train_mode and self.dropout_fc > 0:
            fc_mask = dropout_mask(a1.shape, self.dropout_fc, rng).astype(x.dtype)
            a1_drop = a1 * fc_mask
        else:
            fc_mask = None
            a1_drop = a1

        logits = a1_drop @ fc2_w.T + fc2_b
        probs = softmax(logits)
        self._cache = {
            "windows": windows, "conv_out": conv_out, "conv_mask": conv_mask,
            "pool_idx": pool_idx, "conv_shape": conv_out.shape, "pooled": pooled,
            "z1": z1, "fc_mask": fc_mask, "a1_drop": a1_drop, "probs": probs,
        }
        return probs

    def forward(self, x: np.ndarray, train_mode: bool = False,
                rng: np.random.Generator | None = None) -> np.ndarray:
        """Single example (L, D) -> (C,)."""
        return self.forward_batch(np.asarray(x)[None, :, :], train_mode, rng)[0]

    def loss_batch(self, golds) -> float:
        """Mean cross-entropy of the cached forward pass against gold classes."""
        cache = self._require_cache(golds)
        probs = cache["probs"]
        picked = probs[np.arange(probs.shape[0]), np.asarray(golds)]
        return float(-np.log(picked.astype(np.float64) + CROSS_ENTROPY_EPS).mean())

    def backward_batch(self, golds) -> dict[str, np.ndarray]:
        """Parameter gradients of the mean cross-entropy over the cached batch."""
        cache = self._require_cache(golds)
        golds = np.asarray(golds)
        probs = cache["probs"]
        batch = probs.shape[0]
        fc1_w, fc2_w = self.params["fc1_w"], self.params["fc2_w"]

        dlogits = probs.copy()
        dlogits[np.arange(batch), golds] -= 1.0
        dlogits /= batch

        grads = {}
        grads["fc2_w"] = dlogits.T @ cache["a1_drop"]
        grads["fc2_b"] = dlogits.sum(axis=0)
        da1_drop = dlogits @ fc2_w
        if cache["fc_mask"] is not None:
            da1_drop = da1_drop * cache["fc_mask"]
        dz1 = da1_drop * (cache["z1"] > 0)
        grads["fc1_w"] = dz1.T @ cache["pooled"]
        grads["fc1_b"] = dz1.sum(axis=0)

        dpooled = dz1 @ fc1_w
        dconv_drop = np.zeros(cache["conv_shape"], dtype=dpooled.dtype)
        np.put_along_axis(dconv_drop, cache["pool_idx"][:, None, :], dpooled[:, None, :], axis=1)
        if cache["conv_mask"] is not None:
            dconv_drop = dconv_drop * cache["conv_mask"]
        dconv_out = dconv_drop * (cache["conv_out"] > 0)
        grads["conv_w"] = np.einsum("blf,blkd->fkd", dconv_out, cache["windows"])
        grads["conv_b"] = dconv_out.sum(axis=(0, 1))
        return {name: grads[name].astype(self.params[name].dtype) for name in PARAM_ORDER}

    def backward(self, gold: int) -> dict[str, np.ndarray]:
        """Single-example form of backward_batch."""
        return self.backward_batch([gold])

    def _require_cache(self, golds):
        if self._cache is None:
            raise StateError("backward called before forward")
        probs = self._cache["probs"]
        if len(np.asarray(golds)) != probs.shape[0]:
            raise ShapeError("gold labels do not match the cached batch size")
        return self._cache

    def copy(self) -> "ConvTextNet":
        return ConvTextNet(
            {name: self.params[name].copy() for name in PARAM_ORDER},
            dropout_conv=self.dropout_conv, dropout_fc=self.dropout_fc,
        )
