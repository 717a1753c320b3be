"""Adam optimizer with bias correction."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


class AdamState:
    """First/second moment accumulators, one pair per parameter name."""

    def __init__(self):
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0


def adam_step(params: dict, grads: dict, state: AdamState, lr: float):
    """One Adam update, in place. Returns (params, state).

    Moments start at zero the first time a parameter is seen.
    """
    state.t += 1
    t = state.t
    for name, param in params.items():
        grad = grads[name]
        if grad.shape != param.shape:
            raise ShapeError(f"gradient shape {grad.shape} != param shape {param.shape} for {name!r}")
        if name not in state.m:
            state.m[name] = np.zeros_like(param, dtype=np.float64)
            state.v[name] = np.zeros_like(param, dtype=np.float64)
        m = state.m[name]
        v = state.v[name]
        m *= BETA1
        m += (1 - BETA1) * grad
        v *= BETA2
        v += (1 - BETA2) * np.square(grad, dtype=np.float64)
        m_hat = m / (1 - BETA1 ** t)
        v_hat = v / (1 - BETA2 ** t)
        param -= (lr * m_hat / (np.sqrt(v_hat) + EPS)).astype(param.dtype)
    return params, state
