"""Likelihood reconstruction from per-edge coin-toss marginals and a copula.

Each edge parameter theta gets a univariate marginal likelihood of binomial
form in which an external-effect parameter eta0 soaks up the influence of the
rest of the network: an edge agreement behaves like a coin with heads
probability

    lambda = eta * theta / (eta * theta + (1 - eta) * (1 - theta)).

eta0 is recovered from the joint MLE theta_hat and the empirical agreement
rate lambda_hat, which places the marginal's mode exactly at theta_hat.  The
joint likelihood over all p edges is the product of the marginals, optionally
tied together by an exchangeable Gaussian copula with off-diagonal rho; the
copula's determinant and inverse are evaluated in closed form so a joint
evaluation costs O(p).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.special import erfc, gammaln

from .model import GridSpec, sufficient_stats

F_CLAMP = 1e-12
LAMBDA_CLAMP_FACTOR = 0.5  # half-count continuity correction: 1/(2n)


class CdfResolutionError(ValueError):
    """Raised when too much likelihood mass hides in the outermost grid cells."""


def _check_open_unit(value, name):
    arr = np.asarray(value, dtype=np.float64)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError(f"{name} must lie strictly inside (0, 1)")
    return arr


def tilted_prob(theta, eta):
    """Effective heads probability when a direct effect theta and an external
    effect eta combine multiplicatively; increasing in theta, equals theta at
    eta = 0.5 and eta at theta = 0.5."""
    theta = _check_open_unit(theta, "theta")
    eta = _check_open_unit(eta, "eta")
    num = eta * theta
    return num / (num + (1.0 - eta) * (1.0 - theta))


def agree_rate_mle(agree_count, n):
    """Empirical agreement rate, clamped to [1/(2n), 1 - 1/(2n)].

    The raw rate 0 or 1 would push the external-effect recovery to a
    boundary, so degenerate counts get the half-count continuity correction.
    """
    agree_count = np.asarray(agree_count)
    if n < 1:
        raise ValueError("n must be positive")
    if np.any(agree_count < 0) or np.any(agree_count > n):
        raise ValueError("agreement counts must lie in [0, n]")
    eps = LAMBDA_CLAMP_FACTOR / n
    return np.clip(agree_count / n, eps, 1.0 - eps)


def solve_external_effect(lam, theta):
    """Invert tilted_prob in its eta argument: the external effect that maps
    theta to the observed rate lam."""
    lam = _check_open_unit(lam, "lam")
    theta = _check_open_unit(theta, "theta")
    denom = lam + theta - 2.0 * lam * theta
    if np.any(denom <= 0.0):
        raise ValueError("degenerate (lam, theta) pair")  # unreachable on (0,1)^2
    return lam * (1.0 - theta) / denom


@dataclass(frozen=True)
class MarginalCoinModel:
    """Per-edge marginal likelihood parameters: n tosses, alpha0 agreements,
    external effect eta0.  log_binom caches log C(n, alpha0)."""

    eta0: float
    alpha0: int
    n: int
    log_binom: float = field(default=None)

    def __post_init__(self):
        if not 0.0 < self.eta0 < 1.0:
            raise ValueError("eta0 must lie strictly inside (0, 1)")
        if self.n < 0 or not 0 <= self.alpha0 <= max(self.n, 0):
            raise ValueError("need 0 <= alpha0 <= n")
        if self.log_binom is None:
            lb = float(gammaln(self.n + 1) - gammaln(self.alpha0 + 1)
                       - gammaln(self.n - self.alpha0 + 1))
            object.__setattr__(self, "log_binom", lb)


def _log_marginal_kernel(theta, eta0, alpha0, n, log_binom):
    """Vectorized marginal log-likelihood; theta may be scalar or array."""
    lt = np.log(theta)
    l1t = np.log1p(-theta)
    mix = np.log(eta0 * theta + (1.0 - eta0) * (1.0 - theta))
    const = log_binom + alpha0 * np.log(eta0) + (n - alpha0) * np.log1p(-eta0)
    return const + alpha0 * lt + (n - alpha0) * l1t - n * mix


def log_marginal_likelihood(theta, m: MarginalCoinModel):
    """Marginal log-likelihood of theta under the coin model m.

    Identical to the binomial log-pmf of alpha0 successes in n trials
    evaluated at tilted_prob(theta, eta0); its maximizer over (0,1) is the
    theta at which that tilted probability equals alpha0/n.
    """
    theta = _check_open_unit(theta, "theta")
    out = _log_marginal_kernel(theta, m.eta0, m.alpha0, m.n, m.log_binom)
    return float(out) if np.isscalar(theta) or np.asarray(theta).ndim == 0 else out


def _log_marginal_with_limits(grid_pts, m: MarginalCoinModel):
    """Kernel values on a closed [0, 1] grid, with exact endpoint limits."""
    out = np.empty_like(grid_pts)
    interior = (grid_pts > 0.0) & (grid_pts < 1.0)
    out[interior] = _log_marginal_kernel(grid_pts[interior], m.eta0, m.alpha0,
                                         m.n, m.log_binom)
    out[grid_pts == 0.0] = m.log_binom if m.alpha0 == 0 else -np.inf
    out[grid_pts == 1.0] = m.log_binom if m.alpha0 == m.n else -np.inf
    return out


@dataclass(frozen=True)
class CdfTable:
    """Monotone lookup theta-grid -> F(theta) for one standardized marginal."""

    grid: np.ndarray   # (N+1,) uniform points on [0, 1]
    values: np.ndarray  # (N+1,) nondecreasing, F(0)=0, F(1)=1

    def __call__(self, theta):
        return np.interp(theta, self.grid, self.values)


def standardize_cdf(m: MarginalCoinModel, grid_size: int = 4096) -> CdfTable:
    """Normalize exp(marginal log-likelihood) over (0,1) into a CDF table.

    Composite Simpson on grid_size uniform intervals, computed on the
    max-shifted density so sharply concentrated likelihoods don't underflow.
    Raises CdfResolutionError when more than 1e-3 of the mass sits in the two
    outermost cells, i.e. the grid cannot resolve the support.
    """
    if grid_size < 256:
        raise ValueError("grid_size must be at least 256")
    if grid_size % 2:
        raise ValueError("grid_size must be even for Simpson weights")
    pts = np.linspace(0.0, 1.0, grid_size + 1)
    h = 1.0 / grid_size
    log_dens = _log_marginal_with_limits(pts, m)
    dens = np.exp(log_dens - np.max(log_dens))

    raw = cumulative_simpson(dens, dx=h, initial=0.0)
    total = raw[-1]
    edge_mass = 0.5 * h * (dens[0] + dens[1] + dens[-2] + dens[-1])
    if edge_mass > 1e-3 * total:
        raise CdfResolutionError(
            f"{edge_mass / total:.2e} of the mass lies in the outermost cells; "
            f"increase grid_size beyond {grid_size}")
    cdf = np.maximum.accumulate(np.clip(raw / total, 0.0, 1.0))
    cdf[-1] = 1.0
    return CdfTable(grid=pts, values=cdf)


# ---------------------------------------------------------------------------
# Standard normal quantile
# ---------------------------------------------------------------------------

_ACK_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACK_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_ACK_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACK_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)
_P_LOW = 0.02425
_SQRT2 = np.sqrt(2.0)
_SQRT_2PI = np.sqrt(2.0 * np.pi)


def _acklam_tail(q):
    """Rational tail approximation for the quantile of small q (returns > 0)."""
    t = np.sqrt(-2.0 * np.log(q))
    c0, c1, c2, c3, c4, c5 = _ACK_C
    d0, d1, d2, d3 = _ACK_D
    num = ((((c0 * t + c1) * t + c2) * t + c3) * t + c4) * t + c5
    den = (((d0 * t + d1) * t + d2) * t + d3) * t + 1.0
    return num / den


def normal_quantile(u):
    """Standard normal quantile, |error| <= 1e-9 across the clamped domain.

    Rational approximation with one Newton refinement; the refinement
    residual is formed in tail-probability space for extreme u, so no
    precision is lost to cancellation near 0 or 1.  Inputs are clamped to
    [1e-12, 1 - 1e-12] before inversion.
    """
    scalar = np.isscalar(u) or np.asarray(u).ndim == 0
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    u = np.clip(u, F_CLAMP, 1.0 - F_CLAMP)
    x = np.empty_like(u)

    # q = min(u, 1-u) is exact in IEEE for u in [0.5, 1]
    upper = u > 0.5
    q = np.where(upper, 1.0 - u, u)
    tail = q < _P_LOW

    if np.any(tail):
        z = _acklam_tail(q[tail])           # negative quantile of the small tail prob
        low_q = 0.5 * erfc(-z / _SQRT2)     # lower-tail prob of z (tiny, no cancellation)
        pdf = np.exp(-0.5 * z * z) / _SQRT_2PI
        z = z - (low_q - q[tail]) / pdf
        x[tail] = z

    central = ~tail
    if np.any(central):
        qc = q[central]
        s = qc - 0.5
        r = s * s
        a0, a1, a2, a3, a4, a5 = _ACK_A
        b0, b1, b2, b3, b4 = _ACK_B
        num = (((((a0 * r + a1) * r + a2) * r + a3) * r + a4) * r + a5) * s
        den = ((((b0 * r + b1) * r + b2) * r + b3) * r + b4) * r + 1.0
        z = num / den
        cdf = 0.5 * erfc(-z / _SQRT2)
        pdf = np.exp(-0.5 * z * z) / _SQRT_2PI
        z = z - (cdf - qc) / pdf
        x[central] = z

    x = np.where(upper, -x, x)
    return float(x[0]) if scalar else x


# ---------------------------------------------------------------------------
# Exchangeable Gaussian copula
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CopulaSpec:
    """Exchangeable correlation: all off-diagonal entries equal rho.

    Positive definite iff -1/(p-1) < rho < 1; rho = 0 is the independent
    copula."""

    rho: float
    p: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be positive")
        if self.rho >= 1.0:
            raise ValueError("rho must be < 1")
        if self.p > 1 and self.rho <= -1.0 / (self.p - 1):
            raise ValueError(f"rho must exceed -1/(p-1) = {-1.0 / (self.p - 1):.6g}")


def log_gaussian_copula_density(u, spec: CopulaSpec) -> float:
    """log copula density at transformed coordinates u.

    Uses the closed forms det R = (1-rho)^(p-1) (1+(p-1) rho) and
    R^{-1} = I/(1-rho) - rho J / ((1-rho)(1+(p-1) rho)), so the evaluation is
    O(p) with no factorization."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (spec.p,):
        raise ValueError(f"u must have shape ({spec.p},), got {u.shape}")
    rho, p = spec.rho, spec.p
    if rho == 0.0 or p == 1:
        return 0.0
    log_det = (p - 1) * np.log1p(-rho) + np.log1p((p - 1) * rho)
    sum_sq = float(u @ u)
    sum_u = float(u.sum())
    quad = sum_sq * (rho / (1.0 - rho)) \
        - rho * sum_u * sum_u / ((1.0 - rho) * (1.0 + (p - 1) * rho))
    return -0.5 * (log_det + quad)


# ---------------------------------------------------------------------------
# Joint model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MleLikelihoodModel:
    """Immutable bundle of per-edge marginals, CDF tables, and the copula.

    Safe for concurrent reads; all evaluation paths are pure.
    """

    marginals: tuple
    copula: CopulaSpec
    cdf_grid: np.ndarray     # shared (N+1,) theta grid
    cdf_values: np.ndarray   # (p, N+1)
    theta_hat: np.ndarray
    lambda_hat: np.ndarray
    # stacked parameters for the O(p) fast path
    eta0s: np.ndarray = field(repr=False, default=None)
    alpha0s: np.ndarray = field(repr=False, default=None)
    n: int = field(repr=False, default=0)
    const: np.ndarray = field(repr=False, default=None)

    @property
    def p(self):
        return len(self.marginals)

    def marginal_cdf(self, theta):
        """F_j(theta_j) for all edges at once, by linear interpolation."""
        theta = np.asarray(theta, dtype=np.float64)
        n_cells = self.cdf_grid.shape[0] - 1
        pos = np.clip(theta, 0.0, 1.0) * n_cells
        i = np.minimum(pos.astype(np.int64), n_cells - 1)
        frac = pos - i
        rows = np.arange(self.p)
        left = self.cdf_values[rows, i]
        right = self.cdf_values[rows, i + 1]
        return left * (1.0 - frac) + right * frac


def log_joint_likelihood(theta, model: MleLikelihoodModel) -> float:
    """Sum of marginal log-likelihoods plus the copula coupling term.

    With rho = 0 the copula term is identically zero and only the marginal
    sum is computed."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (model.p,):
        raise ValueError(f"theta must have shape ({model.p},), got {theta.shape}")
    if theta.min() <= 0.0 or theta.max() >= 1.0:
        raise ValueError("theta components must lie strictly inside (0, 1)")
    lt = np.log(theta)
    l1t = np.log1p(-theta)
    mix = np.log(model.eta0s * theta + (1.0 - model.eta0s) * (1.0 - theta))
    marg = model.const + model.alpha0s * lt + (model.n - model.alpha0s) * l1t \
        - model.n * mix
    total = float(np.sum(marg))
    if model.copula.rho == 0.0 or model.p == 1:
        return total
    f = np.clip(model.marginal_cdf(theta), F_CLAMP, 1.0 - F_CLAMP)
    u = normal_quantile(f)
    return total + log_gaussian_copula_density(u, model.copula)


def build_likelihood_model(data, theta_hat, grid: GridSpec, rho: float = 0.0,
                           grid_size: int = 4096) -> MleLikelihoodModel:
    """Assemble the per-edge marginals and copula from data and the joint MLE.

    Cost is linear in the number of edges: one agreement count, one
    external-effect solve and one CDF table per edge."""
    stats = sufficient_stats(data, grid)
    theta_hat = np.asarray(theta_hat, dtype=np.float64)
    if theta_hat.shape != (grid.p,):
        raise ValueError(f"theta_hat must have shape ({grid.p},)")
    lam_hat = agree_rate_mle(stats.agree, stats.n)
    eta0 = solve_external_effect(lam_hat, theta_hat)

    marginals = []
    tables = []
    cdf_grid = None
    for j in range(grid.p):
        m = MarginalCoinModel(eta0=float(eta0[j]), alpha0=int(stats.agree[j]),
                              n=stats.n)
        table = standardize_cdf(m, grid_size)
        marginals.append(m)
        tables.append(table.values)
        cdf_grid = table.grid
    alpha0s = np.asarray(stats.agree, dtype=np.float64)
    log_binoms = np.asarray([m.log_binom for m in marginals])
    const = log_binoms + alpha0s * np.log(eta0) \
        + (stats.n - alpha0s) * np.log1p(-eta0)
    return MleLikelihoodModel(
        marginals=tuple(marginals),
        copula=CopulaSpec(rho=rho, p=grid.p),
        cdf_grid=cdf_grid,
        cdf_values=np.vstack(tables),
        theta_hat=theta_hat.copy(),
        lambda_hat=lam_hat,
        eta0s=eta0,
        alpha0s=alpha0s,
        n=stats.n,
        const=const,
    )


def dump_model_csv(model: MleLikelihoodModel, path) -> None:
    """Debug dump: one row per edge with the reconstruction parameters."""
    with open(path, "w", newline="\n") as fh:
        fh.write("edge_index,alpha0,n,lambda_hat,theta_hat,eta0\n")
        for j, m in enumerate(model.marginals):
            fh.write(f"{j},{m.alpha0},{m.n},{model.lambda_hat[j]:.12g},"
                     f"{model.theta_hat[j]:.12g},{m.eta0:.12g}\n")
