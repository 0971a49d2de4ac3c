"""Likelihood approximations for binary pairwise grid MRFs.

Builds a per-edge coin-toss reconstruction of the likelihood (marginals tied
together by an exchangeable Gaussian copula) next to exact, pseudolikelihood,
quadratic-surrogate and particle-based baselines, all pluggable into one
Metropolis-Hastings engine with a reproducible benchmark CLI (``mrflab``).
"""

from .baselines import (LaplaceModel, PseudoLikelihoodEvaluator, fit_laplace,
                        log_laplace_likelihood, log_pseudolikelihood)
from .exact import (ExactResult, ExactMethod, brute_force_log_z,
                    exact_log_likelihood, exact_model_moments, log_partition,
                    recursive_log_z)
from .mh import (AuxVarStrategy, ExactLikelihoodStrategy, ExchangeStrategy,
                 IsGeometricStrategy, LaplaceStrategy, LikelihoodStrategy,
                 MhConfig, MleInducedStrategy, PersistentChainStrategy,
                 PosteriorSamples, PseudoLikelihoodStrategy, RatioStrategy,
                 dump_chain_csv, log_mh_ratio, posterior_summary, run_chain)
from .mle import CdConfig, MleResult, cd_gradient, fit_mle
from .mle_likelihood import (CdfResolutionError, CdfTable, CopulaSpec,
                             MarginalCoinModel, MleLikelihoodModel,
                             agree_rate_mle, build_likelihood_model,
                             dump_model_csv, log_gaussian_copula_density,
                             log_joint_likelihood, log_marginal_likelihood,
                             normal_quantile, solve_external_effect,
                             standardize_cdf, tilted_prob)
from .model import (GridSpec, SufficientStats, agreement_matrix, build_grid,
                    coalesced_sample, conditional_prob_one, coupled_pairs,
                    gibbs_sweep, load_dataset, sample_dataset, save_dataset,
                    sufficient_stats, sweep_pool, unnormalized_log_prob)
from .ratio_estimators import (ParticlePool, estimate_log_ratio_auxvar,
                               estimate_log_ratio_exchange,
                               estimate_log_ratio_is_geometric, make_pool,
                               persistent_step)

__version__ = "0.1.0"
