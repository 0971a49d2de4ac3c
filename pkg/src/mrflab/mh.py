"""Random-walk Metropolis-Hastings over theta with pluggable ratio strategies.

The engine owns the proposal stream: per step it draws p standard normals and
one uniform from its own generator, so with a fixed seed the proposal noise
is bit-identical no matter which strategy is plugged in.  Strategies supply
the log MH-ratio term; likelihood-based ones cache their value at the current
state, sampling-based ones combine the data term (linear in the agreement
counts) with a particle estimate of the log partition ratio.

A chain is strictly sequential; replicates and strategy variants parallelize
as independent workers, each owning its strategy state and random stream.
"""

import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from .baselines import LaplaceModel, PseudoLikelihoodEvaluator, log_laplace_likelihood
from .exact import exact_log_likelihood
from .mle_likelihood import MleLikelihoodModel, log_joint_likelihood
from .model import GridSpec, SufficientStats
from .ratio_estimators import make_pool, persistent_step, \
    estimate_log_ratio_auxvar, estimate_log_ratio_exchange, \
    estimate_log_ratio_is_geometric

logger = logging.getLogger(__name__)


@dataclass
class MhConfig:
    steps: int = 1_000_000
    sigma_q2: float = 0.001
    prior_low: float = 0.0
    prior_high: float = 1.0
    burn_in_fraction: float = 0.2
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1 or self.sigma_q2 <= 0 or self.thin < 1:
            raise ValueError("steps, sigma_q2 and thin must be positive")
        if not 0.0 <= self.prior_low < self.prior_high <= 1.0:
            raise ValueError("need 0 <= prior_low < prior_high <= 1")
        if not 0.0 <= self.burn_in_fraction < 1.0:
            raise ValueError("burn_in_fraction must lie in [0, 1)")


@dataclass
class PosteriorSamples:
    chain: np.ndarray       # (T, p) retained states
    accepted: int
    runtime_ms: float
    strategy_name: str
    steps: int
    nonfinite_ratios: int = 0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.steps


class RatioStrategy:
    """Contract: log_ratio(theta, theta_star) returns the log MH-ratio
    contribution for the move.  reset() is called once with the chain's
    initial state; on_accept() after every accepted move."""

    name = "base"

    def reset(self, theta0):
        pass

    def log_ratio(self, theta, theta_star) -> float:
        raise NotImplementedError

    def on_accept(self):
        pass


class LikelihoodStrategy(RatioStrategy):
    """Deterministic strategies defined by a log-likelihood surrogate; the
    value at the chain's current state is cached between steps."""

    def log_likelihood(self, theta) -> float:
        raise NotImplementedError

    def reset(self, theta0):
        self._current = self.log_likelihood(theta0)
        self._proposed = None

    def log_ratio(self, theta, theta_star) -> float:
        self._proposed = self.log_likelihood(theta_star)
        return self._proposed - self._current

    def on_accept(self):
        self._current = self._proposed


class ExactLikelihoodStrategy(LikelihoodStrategy):
    name = "exact"

    def __init__(self, stats: SufficientStats, grid: GridSpec):
        self.stats = stats
        self.grid = grid

    def log_likelihood(self, theta) -> float:
        return exact_log_likelihood(self.stats, theta, self.grid)


class MleInducedStrategy(LikelihoodStrategy):
    def __init__(self, model: MleLikelihoodModel):
        self.model = model
        self.name = f"mle-L(rho={model.copula.rho:g})"

    def log_likelihood(self, theta) -> float:
        return log_joint_likelihood(theta, self.model)


class PseudoLikelihoodStrategy(LikelihoodStrategy):
    name = "pseudo-L"

    def __init__(self, data, grid: GridSpec):
        self._eval = PseudoLikelihoodEvaluator(data, grid)

    def log_likelihood(self, theta) -> float:
        return self._eval(theta)


class LaplaceStrategy(LikelihoodStrategy):
    name = "laplace-L"

    def __init__(self, lm: LaplaceModel, stats: SufficientStats):
        self.lm = lm
        self.stats = stats

    def log_likelihood(self, theta) -> float:
        return log_laplace_likelihood(theta, self.lm, self.stats)


class _SamplingRatioStrategy(RatioStrategy):
    """Shared machinery: data term from agreement counts plus n * log r_hat."""

    def __init__(self, stats: SufficientStats, grid: GridSpec, particles: int,
                 advance_sweeps: int, rng):
        self.stats = stats
        self.grid = grid
        self.particles = particles
        self.advance_sweeps = advance_sweeps
        self.rng = rng
        self._agree = np.asarray(stats.agree, dtype=np.float64)

    def _data_term(self, theta, theta_star) -> float:
        dl = np.log(theta_star) - np.log(theta)
        dl1 = np.log1p(-theta_star) - np.log1p(-theta)
        return float(self._agree @ dl + (self.stats.n - self._agree) @ dl1)

    def _log_r_hat(self, theta, theta_star) -> float:
        raise NotImplementedError

    def log_ratio(self, theta, theta_star) -> float:
        return self._data_term(theta, theta_star) \
            + self.stats.n * self._log_r_hat(theta, theta_star)


class IsGeometricStrategy(_SamplingRatioStrategy):
    """Pools at both parameters are regenerated on every proposal."""

    name = "is-geometric"

    def _log_r_hat(self, theta, theta_star) -> float:
        pool_t = make_pool(theta, self.grid, self.particles, self.advance_sweeps, self.rng)
        pool_s = make_pool(theta_star, self.grid, self.particles, self.advance_sweeps, self.rng)
        return estimate_log_ratio_is_geometric(theta, theta_star, pool_t, pool_s, self.grid)


class AuxVarStrategy(_SamplingRatioStrategy):
    """Auxiliary-variable estimator; theta_ref is typically the CD MLE,
    computed once per experiment."""

    name = "auxvar"

    def __init__(self, stats, grid, theta_ref, particles, advance_sweeps, rng):
        super().__init__(stats, grid, particles, advance_sweeps, rng)
        self.theta_ref = np.asarray(theta_ref, dtype=np.float64)

    def _log_r_hat(self, theta, theta_star) -> float:
        pool_t = make_pool(theta, self.grid, self.particles, self.advance_sweeps, self.rng)
        pool_s = make_pool(theta_star, self.grid, self.particles, self.advance_sweeps, self.rng)
        return estimate_log_ratio_auxvar(theta, theta_star, self.theta_ref,
                                         pool_t, pool_s, self.grid)


class ExchangeStrategy(_SamplingRatioStrategy):
    name = "exch"

    def _log_r_hat(self, theta, theta_star) -> float:
        pool_s = make_pool(theta_star, self.grid, self.particles, self.advance_sweeps, self.rng)
        return estimate_log_ratio_exchange(theta, theta_star, pool_s, self.grid)


class PersistentChainStrategy(_SamplingRatioStrategy):
    """Keeps one pool alive across the whole chain, advancing it k sweeps per
    proposal.  The pool keeps its advanced state and tag even when the move
    is rejected; the next estimate is computed from the pool as-is."""

    name = "persist-mc"

    def __init__(self, stats, grid, particles, k: int, advance_sweeps: int, rng):
        super().__init__(stats, grid, particles, advance_sweeps, rng)
        self.k = k
        self.pool = None

    def reset(self, theta0):
        self.pool = make_pool(np.asarray(theta0, dtype=np.float64), self.grid,
                              self.particles, self.advance_sweeps, self.rng)

    def _log_r_hat(self, theta, theta_star) -> float:
        log_r, self.pool = persistent_step(self.pool, theta_star, self.k,
                                           self.grid, self.rng)
        return log_r


def log_mh_ratio(theta, theta_star, strategy: RatioStrategy,
                 prior_low: float = 0.0, prior_high: float = 1.0) -> float:
    """Log acceptance ratio under a uniform prior and symmetric proposal.

    Proposals leaving the prior support return -inf without consulting the
    strategy; NaN or +inf strategy output is also mapped to -inf (certain
    rejection)."""
    theta_star = np.asarray(theta_star, dtype=np.float64)
    if theta_star.min() <= prior_low or theta_star.max() >= prior_high:
        return -math.inf
    value = strategy.log_ratio(np.asarray(theta, dtype=np.float64), theta_star)
    if math.isnan(value) or value == math.inf:
        return -math.inf
    return value


def run_chain(cfg: MhConfig, strategy: RatioStrategy, theta0) -> PosteriorSamples:
    """Standard MH with proposal theta* = theta + N(0, sigma_q2 I).

    Retains floor(steps * (1 - burn_in_fraction) / thin) states from the end
    of the chain.  Wall-clock covers the proposal loop only; strategy
    construction happens before this call.
    """
    theta = np.asarray(theta0, dtype=np.float64).copy()
    p = theta.shape[0]
    if theta.min() <= cfg.prior_low or theta.max() >= cfg.prior_high:
        raise ValueError("theta0 must lie inside the prior support")
    rng = np.random.default_rng(cfg.seed)
    sigma = math.sqrt(cfg.sigma_q2)
    retained = int(math.floor(cfg.steps * (1.0 - cfg.burn_in_fraction) / cfg.thin))
    keep_from = cfg.steps - retained * cfg.thin
    chain = np.empty((retained, p))
    low, high = cfg.prior_low, cfg.prior_high

    strategy.reset(theta)
    accepted = 0
    nonfinite = 0
    k = 0
    t0 = time.perf_counter()
    for step in range(cfg.steps):
        z = rng.standard_normal(p)
        u = rng.random()
        theta_star = theta + sigma * z
        if theta_star.min() <= low or theta_star.max() >= high:
            log_a = -math.inf
        else:
            log_a = strategy.log_ratio(theta, theta_star)
            if math.isnan(log_a) or log_a == math.inf:
                nonfinite += 1
                log_a = -math.inf
        if log_a >= 0.0 or u < math.exp(log_a):
            theta = theta_star
            strategy.on_accept()
            accepted += 1
        if step >= keep_from and (step - keep_from) % cfg.thin == 0:
            chain[k] = theta
            k += 1
    runtime_ms = (time.perf_counter() - t0) * 1e3

    if accepted == 0:
        logger.warning("chain for strategy %s accepted nothing over %d steps",
                       strategy.name, cfg.steps)
    if nonfinite:
        logger.warning("strategy %s produced %d non-finite ratios (treated as "
                       "certain rejections)", strategy.name, nonfinite)
    return PosteriorSamples(chain=chain, accepted=accepted, runtime_ms=runtime_ms,
                            strategy_name=strategy.name, steps=cfg.steps,
                            nonfinite_ratios=nonfinite)


def posterior_summary(ps: PosteriorSamples):
    """Per-coordinate mean and unbiased standard deviation of retained states."""
    if ps.chain.shape[0] == 0:
        raise ValueError("empty retained chain")
    mean = ps.chain.mean(axis=0)
    sd = ps.chain.std(axis=0, ddof=1) if ps.chain.shape[0] > 1 \
        else np.zeros_like(mean)
    return mean, sd


def dump_chain_csv(ps: PosteriorSamples, path) -> None:
    """Retained samples as CSV rows: step_index, then one column per coordinate."""
    p = ps.chain.shape[1]
    with open(path, "w", newline="\n") as fh:
        fh.write("step_index," + ",".join(f"theta_{j}" for j in range(p)) + "\n")
        for i, row in enumerate(ps.chain):
            fh.write(str(i) + "," + ",".join(f"{v:.12g}" for v in row) + "\n")
