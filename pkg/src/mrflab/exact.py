"""Exact partition function and log-likelihood for small grids.

Two routes: brute-force enumeration (the slow, obviously-correct oracle,
d <= 20) and a sliding-window forward recursion that adds one node at a time
along the longer grid dimension while keeping an unnormalized distribution
over the 2^l most recently added nodes, l = min(rows, cols).  Each step folds
in exactly the potentials with both endpoints inside the window and sums out
the node that leaves it, with per-step rescaling against underflow.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .model import GridSpec, agreement_matrix, validate_theta
from .numutil import logsumexp

BRUTE_FORCE_MAX_NODES = 20
RECURSION_MAX_WINDOW = 25

_CHUNK = 1 << 16


class ExactMethod(Enum):
    BRUTE_FORCE = "brute_force"
    RECURSIVE = "recursive"


@dataclass(frozen=True)
class ExactResult:
    log_z: float
    method: ExactMethod


def log_partition(theta, grid: GridSpec,
                  method: ExactMethod = ExactMethod.RECURSIVE) -> ExactResult:
    """Tagged exact log Z by the requested route."""
    if method is ExactMethod.BRUTE_FORCE:
        return ExactResult(log_z=brute_force_log_z(theta, grid), method=method)
    return ExactResult(log_z=recursive_log_z(theta, grid), method=method)


def enumerate_configs(d: int, start: int = 0, stop: int = None) -> np.ndarray:
    """All (or a contiguous slice of) length-d binary configurations."""
    stop = 1 << d if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(d, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.int8)


def _chunked_log_probs(theta, grid: GridSpec):
    """Yield (configs, unnormalized log prob) over all 2^d configurations."""
    log_t = np.log(theta)
    log_1mt = np.log1p(-theta)
    total = 1 << grid.d
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        x = enumerate_configs(grid.d, start, stop)
        s = agreement_matrix(x, grid)
        yield x, s @ log_t + (1.0 - s) @ log_1mt


def brute_force_log_z(theta, grid: GridSpec) -> float:
    """log Z by summing the unnormalized measure over all configurations."""
    theta = validate_theta(theta, grid)
    if grid.d > BRUTE_FORCE_MAX_NODES:
        raise ValueError(f"enumeration refused for d = {grid.d} > {BRUTE_FORCE_MAX_NODES}")
    parts = [logsumexp(lp) for _, lp in _chunked_log_probs(theta, grid)]
    return logsumexp(np.asarray(parts))


@lru_cache(maxsize=64)
def _traversal_plan(rows: int, cols: int):
    """Node-addition plan: for each step, the window-internal edge parameters.

    Returns (window length l, tuple of (intra_edge, inter_edge) parameter
    indices, None where the new node lacks that neighbor).  Traversal runs
    along the longer dimension so the window spans the shorter one.  The edge
    index is rebuilt from the canonical ordering, which is a function of
    (rows, cols) only.
    """
    from .model import build_grid

    index = build_grid(rows, cols).edge_index

    def key(a, b):
        return (a, b) if a < b else (b, a)

    if rows <= cols:
        l, m = rows, cols

        def node(a, b):
            return a * cols + b  # a=row, b=col
    else:
        l, m = cols, rows

        def node(a, b):
            return b * cols + a  # a=col, b=row

    steps = []
    for b in range(m):
        for a in range(l):
            t = node(a, b)
            intra = index[key(node(a - 1, b), t)] if a > 0 else None
            inter = index[key(node(a, b - 1), t)] if b > 0 else None
            steps.append((intra, inter))
    return l, tuple(steps)


@lru_cache(maxsize=32)
def _lsb(size: int) -> np.ndarray:
    return (np.arange(size, dtype=np.int64) & 1).astype(np.float64)


def recursive_log_z(theta, grid: GridSpec) -> float:
    """Exact log Z by the sliding-window forward recursion.

    Window state is a vector over 2^l joint values of the l most recent nodes
    (oldest node in the most significant bit); cost per node is O(2^(l+1)).
    """
    theta = validate_theta(theta, grid)
    l, steps = _traversal_plan(grid.rows, grid.cols)
    if l > RECURSION_MAX_WINDOW:
        raise ValueError(f"window 2^{l} too large (min grid dimension > {RECURSION_MAX_WINDOW})")

    state = np.array([1.0])
    log_z = 0.0
    full = 1 << l
    for intra, inter in steps:
        size = state.shape[0]
        if inter is None:
            # first slab: window still growing, nothing to marginalize
            new = np.empty(2 * size)
            if intra is None:
                new[0::2] = state
                new[1::2] = state
            else:
                t = theta[intra]
                lsb = _lsb(size)
                new[0::2] = state * (t + lsb * (1.0 - 2.0 * t))   # phi(x_prev, 0)
                new[1::2] = state * (1.0 - t + lsb * (2.0 * t - 1.0))  # phi(x_prev, 1)
        else:
            half = full >> 1
            s0 = state[:half]  # leaving node = 0
            s1 = state[half:]
            ti = theta[inter]
            g0 = s0 * ti + s1 * (1.0 - ti)
            g1 = s0 * (1.0 - ti) + s1 * ti
            if intra is not None:
                tv = theta[intra]
                lsb = _lsb(half)
                g0 *= tv + lsb * (1.0 - 2.0 * tv)
                g1 *= 1.0 - tv + lsb * (2.0 * tv - 1.0)
            new = np.empty(full)
            new[0::2] = g0
            new[1::2] = g1
        tot = new.sum()
        log_z += np.log(tot)
        state = new / tot
    return float(log_z)


def exact_log_likelihood(stats, theta, grid: GridSpec) -> float:
    """Exact dataset log-likelihood from agreement counts.

    The unnormalized log-probability is linear in the per-edge agreement
    indicators, so only the counts and n enter.
    """
    theta = validate_theta(theta, grid)
    if stats.n == 0:
        return 0.0
    agree = np.asarray(stats.agree, dtype=np.float64)
    fit = float(agree @ np.log(theta) + (stats.n - agree) @ np.log1p(-theta))
    return fit - stats.n * recursive_log_z(theta, grid)


def exact_model_moments(theta, grid: GridSpec):
    """Mean and covariance of the per-edge agreement indicators, by enumeration."""
    theta = validate_theta(theta, grid)
    if grid.d > BRUTE_FORCE_MAX_NODES:
        raise ValueError(f"enumeration refused for d = {grid.d} > {BRUTE_FORCE_MAX_NODES}")
    log_z = brute_force_log_z(theta, grid)
    mean = np.zeros(grid.p)
    second = np.zeros((grid.p, grid.p))
    for x, lp in _chunked_log_probs(theta, grid):
        w = np.exp(lp - log_z)
        s = agreement_matrix(x, grid)
        mean += w @ s
        second += (s.T * w) @ s
    cov = second - np.outer(mean, mean)
    return mean, 0.5 * (cov + cov.T)
