"""Independent brute-force oracles used by the tests.

Everything here is deliberately written with itertools/math only, walking the
edge list directly, so it shares no code path with the package internals it
is checking.
"""

import itertools
import math


def edge_list(grid):
    return [(int(u), int(v)) for u, v in grid.edges]


def config_weight(x, theta, edges):
    w = 1.0
    for j, (u, v) in enumerate(edges):
        w *= theta[j] if x[u] == x[v] else 1.0 - theta[j]
    return w


def enumerate_weights(theta, grid):
    """(configurations, unnormalized weights) over all 2^d states."""
    edges = edge_list(grid)
    configs = list(itertools.product((0, 1), repeat=grid.d))
    weights = [config_weight(x, list(theta), edges) for x in configs]
    return configs, weights


def partition_function(theta, grid) -> float:
    _, weights = enumerate_weights(theta, grid)
    return sum(weights)


def distribution(theta, grid):
    configs, weights = enumerate_weights(theta, grid)
    z = sum(weights)
    return configs, [w / z for w in weights]


def agreement_means(theta, grid):
    """E[s_j] for each edge under the normalized distribution."""
    edges = edge_list(grid)
    configs, probs = distribution(theta, grid)
    means = [0.0] * len(edges)
    for x, pr in zip(configs, probs):
        for j, (u, v) in enumerate(edges):
            if x[u] == x[v]:
                means[j] += pr
    return means


def agreement_cov(theta, grid):
    """Covariance matrix of the per-edge agreement indicators."""
    edges = edge_list(grid)
    p = len(edges)
    configs, probs = distribution(theta, grid)
    mean = agreement_means(theta, grid)
    cov = [[0.0] * p for _ in range(p)]
    for x, pr in zip(configs, probs):
        s = [1.0 if x[u] == x[v] else 0.0 for (u, v) in edges]
        for a in range(p):
            for b in range(p):
                cov[a][b] += pr * (s[a] - mean[a]) * (s[b] - mean[b])
    return cov


def log_likelihood_pointwise(data, theta, grid) -> float:
    """Sum over data points of log P(x; theta), each normalized explicitly."""
    edges = edge_list(grid)
    z = partition_function(theta, grid)
    total = 0.0
    for x in data:
        total += math.log(config_weight(list(x), list(theta), edges) / z)
    return total


def pseudolikelihood_direct(data, theta, grid) -> float:
    """Per-site conditionals computed straight from the potential definition."""
    total = 0.0
    for x in data:
        for v in range(grid.d):
            f1 = 1.0
            f0 = 1.0
            for j, (a, b) in enumerate(edge_list(grid)):
                if a == v or b == v:
                    other = b if a == v else a
                    t = theta[j]
                    if x[other] == 1:
                        f1 *= t
                        f0 *= 1.0 - t
                    else:
                        f1 *= 1.0 - t
                        f0 *= t
            p1 = f1 / (f0 + f1)
            total += math.log(p1 if x[v] == 1 else 1.0 - p1)
    return total


def draw_exact(theta, grid, size, rng):
    """Independent draws from the normalized distribution via inverse CDF."""
    import numpy as np

    configs, probs = distribution(theta, grid)
    idx = rng.choice(len(configs), size=size, p=np.asarray(probs))
    return np.asarray(configs, dtype=np.int8)[idx]


def bootstrap_se(estimator, pools, rng, reps=200):
    """SE of a pool-resampling bootstrap; pools is a list of 1-D term arrays
    handed to estimator as positional args after resampling."""
    import numpy as np

    vals = []
    for _ in range(reps):
        resampled = [pool[rng.integers(0, len(pool), size=len(pool))]
                     for pool in pools]
        vals.append(estimator(*resampled))
    return float(np.std(vals, ddof=1))
