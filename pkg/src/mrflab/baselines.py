"""Likelihood-approximation baselines: pseudolikelihood and a quadratic surrogate.

The pseudolikelihood is the sum of per-site conditional log-probabilities
over all data points, so each evaluation costs O(n * d * degree).  The
quadratic surrogate expands the log-likelihood in natural coordinates
w = logit(theta) around a mode estimate: with A(w) the log-partition,
grad A = E[s] and hess A = Cov[s], so

    log L(w) ~= log L(w_hat) + n [ (s_bar - mu_hat)' dw - dw' cov_hat dw / 2 ].

Its evaluation cost does not depend on n.
"""

from dataclasses import dataclass

import numba
import numpy as np

from .exact import BRUTE_FORCE_MAX_NODES, exact_log_likelihood, exact_model_moments
from .model import GridSpec, agreement_matrix, sweep_pool, validate_theta
from .numutil import logit


@numba.njit(cache=True)
def _pl_kernel(spins_t, w, nbr_flat, eidx_flat, nbr_start):
    """Sum of per-site conditional log-probabilities over all points.

    spins_t is (d, n) with values +-1.  For site v the conditional satisfies
    log P(x_v | ne) = -softplus(-s_v * delta_v) with
    delta_v = sum_over_incident_edges w_e * s_neighbor.
    """
    d, n = spins_t.shape
    total = 0.0
    for v in range(d):
        lo, hi = nbr_start[v], nbr_start[v + 1]
        for i in range(n):
            delta = 0.0
            for k in range(lo, hi):
                delta += w[eidx_flat[k]] * spins_t[nbr_flat[k], i]
            a = -spins_t[v, i] * delta
            if a > 0.0:
                total -= a + np.log1p(np.exp(-a))
            else:
                total -= np.log1p(np.exp(a))
    return total


class PseudoLikelihoodEvaluator:
    """Per-site conditional scan over every data point; cost O(n * d * degree).

    The dataset-side structures (wide-format +-1 spins, flattened adjacency)
    are precomputed once so each theta evaluation runs the compute-bound
    kernel directly."""

    def __init__(self, data, grid: GridSpec):
        data = np.asarray(data)
        if data.ndim != 2 or data.shape[1] != grid.d:
            raise ValueError(f"dataset must have shape (n, {grid.d}), got {data.shape}")
        self.grid = grid
        self.n = data.shape[0]
        self._spins_t = np.ascontiguousarray((2.0 * data - 1.0).T)
        nbr_flat = []
        eidx_flat = []
        nbr_start = [0]
        for v in range(grid.d):
            nbrs, eidx = grid.adjacency[v]
            nbr_flat.extend(nbrs.tolist())
            eidx_flat.extend(eidx.tolist())
            nbr_start.append(len(nbr_flat))
        self._nbr_flat = np.asarray(nbr_flat, dtype=np.int64)
        self._eidx_flat = np.asarray(eidx_flat, dtype=np.int64)
        self._nbr_start = np.asarray(nbr_start, dtype=np.int64)

    def __call__(self, theta) -> float:
        w = np.log(theta / (1.0 - theta))
        return _pl_kernel(self._spins_t, w, self._nbr_flat, self._eidx_flat,
                          self._nbr_start)


def log_pseudolikelihood(data, theta, grid: GridSpec) -> float:
    """Sum over data points and sites of log P(x_v | neighbors; theta)."""
    theta = validate_theta(theta, grid)
    return PseudoLikelihoodEvaluator(data, grid)(theta)


@dataclass(frozen=True)
class LaplaceModel:
    """Quadratic expansion of the log-likelihood around w_hat = logit(theta_hat).

    mu_hat / cov_hat are the model mean and covariance of the per-edge
    agreement indicators at theta_hat.  log_l_at_mode anchors absolute
    values; it is 0 with has_exact_mode_value=False when the exact
    log-likelihood was not computed.
    """

    w_hat: np.ndarray
    mu_hat: np.ndarray
    cov_hat: np.ndarray
    log_l_at_mode: float
    has_exact_mode_value: bool


def fit_laplace(theta_hat, grid: GridSpec, sample_budget: int = 10_000,
                rng=None, moments: str = "auto", burn_in_sweeps: int = 1000,
                stats=None) -> LaplaceModel:
    """Estimate the expansion moments at theta_hat.

    moments="auto" enumerates exactly when the grid is small enough and
    otherwise falls back to sample_budget independent Gibbs chains burned in
    for burn_in_sweeps.  When stats is given, the exact log-likelihood at
    theta_hat anchors log_l_at_mode.
    """
    theta_hat = validate_theta(theta_hat, grid)
    if moments not in ("auto", "exact", "sample"):
        raise ValueError("moments must be 'auto', 'exact' or 'sample'")
    if moments == "auto":
        moments = "exact" if grid.d <= BRUTE_FORCE_MAX_NODES else "sample"
    if moments == "exact":
        mu, cov = exact_model_moments(theta_hat, grid)
    else:
        rng = rng or np.random.default_rng(0)
        pool = rng.integers(0, 2, size=(sample_budget, grid.d)).astype(np.int8)
        sweep_pool(pool, theta_hat, grid, rng, sweeps=burn_in_sweeps)
        s = agreement_matrix(pool, grid)
        mu = s.mean(axis=0)
        centered = s - mu
        cov = centered.T @ centered / sample_budget
    if stats is not None:
        log_mode = exact_log_likelihood(stats, theta_hat, grid)
        has_exact = True
    else:
        log_mode = 0.0
        has_exact = False
    return LaplaceModel(w_hat=logit(theta_hat), mu_hat=mu,
                        cov_hat=0.5 * (cov + cov.T),
                        log_l_at_mode=log_mode, has_exact_mode_value=has_exact)


def log_laplace_likelihood(theta, lm: LaplaceModel, stats) -> float:
    """Evaluate the quadratic surrogate at theta."""
    theta = np.asarray(theta, dtype=np.float64)
    dw = (np.log(theta) - np.log1p(-theta)) - lm.w_hat
    s_bar = np.asarray(stats.agree, dtype=np.float64) / stats.n
    linear = (s_bar - lm.mu_hat) @ dw
    quad = dw @ lm.cov_hat @ dw
    return lm.log_l_at_mode + stats.n * (linear - 0.5 * quad)
