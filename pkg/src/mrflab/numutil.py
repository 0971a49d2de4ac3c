"""Small numerical helpers shared across the package."""

import numpy as np


def logsumexp(a, axis=None):
    """log(sum(exp(a))) with max-shifting so large negative inputs don't underflow."""
    a = np.asarray(a, dtype=np.float64)
    a_max = np.max(a, axis=axis, keepdims=True)
    a_max = np.where(np.isfinite(a_max), a_max, 0.0)
    out = np.log(np.sum(np.exp(a - a_max), axis=axis)) + np.squeeze(a_max, axis=axis)
    if axis is None:
        return float(out)
    return out


def logmeanexp(a, axis=None):
    a = np.asarray(a, dtype=np.float64)
    n = a.size if axis is None else a.shape[axis]
    return logsumexp(a, axis=axis) - np.log(n)


def logit(theta):
    theta = np.asarray(theta, dtype=np.float64)
    return np.log(theta) - np.log1p(-theta)


def inv_logit(w):
    w = np.asarray(w, dtype=np.float64)
    # evaluate on the negative half-line only, for symmetry and stability
    out = np.empty_like(w, dtype=np.float64)
    pos = w >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-w[pos]))
    ew = np.exp(w[~pos])
    out[~pos] = ew / (1.0 + ew)
    return out
