"""Per-example layer operations with explicit backward passes."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError

# Floor added inside log() so a zero probability cannot produce inf.
CROSS_ENTROPY_EPS = 1e-12


def _pad_split(kernel_size: int) -> tuple[int, int]:
    # Same-length padding: floor((k-1)/2) zero rows before, ceil((k-1)/2) after.
    before = (kernel_size - 1) // 2
    return before, kernel_size - 1 - before


def conv1d(x: np.ndarray, filters: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """1-D convolution over time with same-length zero padding, stride one.

    x: (L, D); filters: (F, k, D); bias: (F,). Returns (L, F) where
    out[t, f] = bias[f] + sum_{j,d} x_padded[t+j, d] * filters[f, j, d].
    """
    x, filters, bias = np.asarray(x), np.asarray(filters), np.asarray(bias)
    if x.ndim != 2 or filters.ndim != 3 or bias.ndim != 1:
        raise ShapeError("conv1d expects x (L,D), filters (F,k,D), bias (F,)")
    n_filters, kernel_size, depth = filters.shape
    if x.shape[1] != depth or bias.shape[0] != n_filters:
        raise ShapeError(
            f"conv1d shape mismatch: x {x.shape}, filters {filters.shape}, bias {bias.shape}"
        )
    windows = _conv_windows(x, kernel_size)
    return np.einsum("lkd,fkd->lf", windows, filters) + bias


def conv1d_backward(x, filters, grad_out):
    """Gradients of conv1d. Returns (grad_filters, grad_bias, grad_x)."""
    x, filters, grad_out = np.asarray(x), np.asarray(filters), np.asarray(grad_out)
    n_filters, kernel_size, depth = filters.shape
    if grad_out.shape != (x.shape[0], n_filters):
        raise ShapeError(f"grad_out shape {grad_out.shape} does not match (L,F)")
    windows = _conv_windows(x, kernel_size)
    grad_filters = np.einsum("lf,lkd->fkd", grad_out, windows)
    grad_bias = grad_out.sum(axis=0)
    # Scatter each kernel offset's contribution back onto the padded input.
    grad_padded = np.zeros((x.shape[0] + kernel_size - 1, depth), dtype=x.dtype)
    per_offset = np.einsum("lf,fkd->lkd", grad_out, filters)
    for j in range(kernel_size):
        grad_padded[j:j + x.shape[0]] += per_offset[:, j, :]
    before, after = _pad_split(kernel_size)
    grad_x = grad_padded[before:grad_padded.shape[0] - after]
    return grad_filters, grad_bias, grad_x


def _conv_windows(x: np.ndarray, kernel_size: int) -> np.ndarray:
    before, after = _pad_split(kernel_size)
    padded = np.pad(x, ((before, after), (0, 0)))
    return np.lib.stride_tricks.sliding_window_view(padded, kernel_size, axis=0).transpose(0, 2, 1)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(x: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    return grad_out * (x > 0)


def maxpool_time(x: np.ndarray) -> np.ndarray:
    """Columnwise max over the time axis: (L, F) -> (F,)."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeError("maxpool_time expects a non-empty (L, F) input")
    return x.max(axis=0)


def maxpool_time_backward(x: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    """Routes each feature's gradient to the first time step attaining the max."""
    x = np.asarray(x)
    if grad_out.shape != (x.shape[1],):
        raise ShapeError("grad_out must have one entry per feature column")
    grad_x = np.zeros_like(x)
    grad_x[x.argmax(axis=0), np.arange(x.shape[1])] = grad_out
    return grad_x


def dense(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Affine map: weights (m, n) @ x (n,) + bias (m,)."""
    x, weights, bias = np.asarray(x), np.asarray(weights), np.asarray(bias)
    if weights.ndim != 2 or x.shape != (weights.shape[1],) or bias.shape != (weights.shape[0],):
        raise ShapeError(
            f"dense shape mismatch: x {x.shape}, weights {weights.shape}, bias {bias.shape}"
        )
    return weights @ x + bias


def dense_backward(x, weights, grad_out):
    """Gradients of dense. Returns (grad_weights, grad_bias, grad_x)."""
    x, weights, grad_out = np.asarray(x), np.asarray(weights), np.asarray(grad_out)
    if grad_out.shape != (weights.shape[0],):
        raise ShapeError("grad_out length must match the output dimension")
    return np.outer(grad_out, x), grad_out.copy(), weights.T @ grad_out


def softmax(z: np.ndarray) -> np.ndarray:
    """Numerically stable softmax (max subtracted before exponentiation)."""
    z = np.asarray(z)
    shifted = z - z.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout multiplier: zeros with probability rate, else 1/(1-rate)."""
    if not 0 <= rate < 1:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0:
        return np.ones(shape)
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def dropout(x: np.ndarray, rate: float, rng: np.random.Generator | None,
            train_mode: bool) -> np.ndarray:
    """Inverted dropout; the identity in eval mode (and for rate 0)."""
    x = np.asarray(x)
    if not 0 <= rate < 1:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not train_mode or rate == 0:
        return x
    if rng is None:
        raise ValueError("train-mode dropout needs an rng")
    return (x * dropout_mask(x.shape, rate, rng)).astype(x.dtype, copy=False)


def cross_entropy(probs: np.ndarray, gold: int):
    """Negative log likelihood of the gold class.

    Returns (loss, grad_logits) where grad_logits = probs - onehot(gold),
    the gradient with respect to the pre-softmax logits.
    """
    probs = np.asarray(probs)
    if probs.ndim != 1:
        raise ShapeError("cross_entropy expects a 1-D probability vector")
    if not 0 <= gold < probs.shape[0]:
        raise IndexError(f"gold class {gold} out of range for {probs.shape[0]} classes")
    loss = -float(np.log(probs[gold] + CROSS_ENTROPY_EPS))
    grad = probs.copy()
    grad[gold] -= 1.0
    return loss, grad
