"""Central finite-difference machinery shared by the gradient tests.

The difference quotient is always evaluated in float64: differencing a
float32 function with a small step would drown in rounding noise. The
analytic gradient under test may come from a float32 or float64 run of
the same formulas; the tolerance is chosen per dtype by the caller.
"""

import numpy as np

FD_EPS = 1e-6


def fd_gradient(f, x, eps=FD_EPS):
    """Central-difference gradient of scalar f with respect to array x."""
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = float(f(x))
        flat[i] = orig - eps
        lo = float(f(x))
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * eps)
    return grad


def rel_error(a, b):
    """Max-norm relative error between two gradient arrays."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0), 1e-8)
    return float(np.abs(a - b).max(initial=0.0) / denom)


def away_from_relu_kink(x, margin=0.05):
    """Push entries of x out of the [-margin, margin] band around zero.

    Finite differences straddle the ReLU kink when an input sits within
    eps of zero, so random draws are nudged clear of it.
    """
    x = np.array(x, dtype=np.float64)
    small = np.abs(x) < margin
    x[small] = np.where(x[small] >= 0, margin, -margin) + x[small]
    return x


def separate_column_maxima(x, gap=0.05):
    """Ensure each column's max beats the runner-up by at least gap.

    Max-pool gradients are undefined at ties; bumping the argmax cell
    keeps the finite-difference probe on one side of the tie.
    """
    x = np.array(x, dtype=np.float64)
    if x.shape[0] < 2:
        return x
    order = np.sort(x, axis=0)
    close = (order[-1] - order[-2]) < gap
    x[x.argmax(axis=0), np.arange(x.shape[1])] += np.where(close, gap, 0.0)
    return x
