"""Particle estimators of log[Z(theta) / Z(theta_star)].

Four variants: bridge-style importance sampling with the geometric weight
function, the auxiliary-variable construction anchored at a fixed parameter
estimate, the single-pool exchange form, and a persistent pool that is
re-advanced a few sweeps per proposal instead of regenerated.  All arithmetic
runs in log space through log-mean-exp.

A ParticlePool is owned by exactly one chain; pools are never shared between
concurrently running chains.
"""

from dataclasses import dataclass

import numpy as np

from .model import GridSpec, agreement_matrix, coupled_pairs, sweep_pool, validate_theta
from .numutil import logmeanexp


@dataclass
class ParticlePool:
    """Particles plus the parameter they were last advanced under.

    coalesce_sweeps is a diagnostic from one auxiliary coupled chain pair
    run at pool construction (None when unavailable or not coalesced).
    """

    particles: np.ndarray  # (s, d) int8
    current_theta: np.ndarray
    coalesce_sweeps: int | None = None

    @property
    def size(self) -> int:
        return self.particles.shape[0]


def make_pool(theta, grid: GridSpec, s: int, advance_sweeps: int, rng) -> ParticlePool:
    """s particles from uniform random starts advanced advance_sweeps sweeps.

    In the attractive regime (theta >= 0.5 componentwise) one coupled chain
    pair runs alongside and records its coalescence time, certifying that the
    advancement budget mixes.
    """
    theta = validate_theta(theta, grid)
    if s < 1:
        raise ValueError("pool size must be positive")
    particles = rng.integers(0, 2, size=(s, grid.d)).astype(np.int8)
    sweep_pool(particles, theta, grid, rng, sweeps=advance_sweeps)
    coalesce_sweeps = None
    if advance_sweeps > 0 and np.all(theta >= 0.5):
        _, done, used = coupled_pairs(theta, grid, 1, rng, max_sweeps=advance_sweeps)
        if done[0]:
            coalesce_sweeps = int(used[0])
    return ParticlePool(particles=particles, current_theta=theta.copy(),
                        coalesce_sweeps=coalesce_sweeps)


def _log_tilde_terms(pool: ParticlePool, grid: GridSpec, *thetas):
    """Unnormalized log-probabilities of every particle at each theta."""
    if pool.size == 0:
        raise ValueError("empty particle pool")
    s = agreement_matrix(pool.particles, grid)
    out = []
    for theta in thetas:
        theta = np.asarray(theta, dtype=np.float64)
        w = np.log(theta) - np.log1p(-theta)
        out.append(s @ w + np.log1p(-theta).sum())
    return out


def estimate_log_ratio_is_geometric(theta, theta_star, pool_theta: ParticlePool,
                                    pool_theta_star: ParticlePool,
                                    grid: GridSpec) -> float:
    """Bridge importance sampling with the geometric weight
    alpha(x) = (P~(x;theta) P~(x;theta_star))^(-1/2)."""
    lp2_t, lp2_s = _log_tilde_terms(pool_theta_star, grid, theta, theta_star)
    lp1_t, lp1_s = _log_tilde_terms(pool_theta, grid, theta, theta_star)
    numerator = logmeanexp(0.5 * (lp2_t - lp2_s))
    denominator = logmeanexp(0.5 * (lp1_s - lp1_t))
    return float(numerator - denominator)


def estimate_log_ratio_auxvar(theta, theta_star, theta_ref, pool_theta: ParticlePool,
                              pool_theta_star: ParticlePool, grid: GridSpec) -> float:
    """Auxiliary-variable estimator anchored at a fixed reference theta_ref.

    The pool drawn at theta_star carries weights P~(.;ref)/P~(.;theta_star)
    and the pool drawn at theta carries P~(.;ref)/P~(.;theta); their
    log-mean difference is consistent for log[Z(theta)/Z(theta_star)].  With
    theta_ref = theta it reduces to the exchange estimator.
    """
    lp2_r, lp2_s = _log_tilde_terms(pool_theta_star, grid, theta_ref, theta_star)
    lp1_r, lp1_t = _log_tilde_terms(pool_theta, grid, theta_ref, theta)
    return float(logmeanexp(lp2_r - lp2_s) - logmeanexp(lp1_r - lp1_t))


def estimate_log_ratio_exchange(theta, theta_star, pool_theta_star: ParticlePool,
                                grid: GridSpec) -> float:
    """Single-pool estimator: mean of P~(.;theta)/P~(.;theta_star) over
    particles drawn at theta_star."""
    lp_t, lp_s = _log_tilde_terms(pool_theta_star, grid, theta, theta_star)
    return float(logmeanexp(lp_t - lp_s))


def persistent_step(pool: ParticlePool, theta_star, k: int, grid: GridSpec, rng):
    """Advance the pool k sweeps under theta_star and estimate the log ratio
    between the pool's previous parameter and theta_star.

    The pool is mutated in place (particles advanced, tag updated) and also
    returned; reuse across consecutive proposals is the point of the method.
    """
    if pool.size == 0:
        raise ValueError("empty particle pool")
    if k < 1:
        raise ValueError("k must be positive")
    theta_star = validate_theta(theta_star, grid)
    theta_prev = pool.current_theta
    sweep_pool(pool.particles, theta_star, grid, rng, sweeps=k)
    lp_prev, lp_star = _log_tilde_terms(pool, grid, theta_prev, theta_star)
    log_ratio = float(logmeanexp(lp_prev - lp_star))
    pool.current_theta = theta_star.copy()
    return log_ratio, pool
