"""Ruin probabilities for an insurer whose capital rides a geometric
Brownian asset.

Capital follows dX = a X dt + sigma X dw + premium dt minus Poisson claim
arrivals. With beta = 2a/sigma^2 - 1 the ruin probability decays like
u^(-beta) when beta > 0 and equals 1 otherwise. The package provides the
closed-form constants, a Monte Carlo engine over the embedded post-claim
chain, a discretized-path oracle for cross-validation, perpetuity fixed-point
tools for the tail constant, and critical-regime ladder machinery.
"""

from .analytics import (BoundsReport, TailFit, Z95, bounds_report,
                        effective_exponent, fit_tail, j_factor, moment_M, mu,
                        solve_exponent, upper_constant, varrho)
from .bridge import BridgeGrid, eta_integral, sample_bridge, sample_eta, \
    sample_eta_batch
from .chain import (CSV_HEADER, EmbeddedStep, RuinEstimate, SimConfig,
                    curve_to_csv, estimate_ruin, ruin_curve, sample_step,
                    simulate_chain, wilson_interval)
from .ergodic import (ArSpec, F_LIBRARY, LadderSequence, ar_path,
                      cesaro_average, cesaro_se, check_contraction,
                      critical_certain_ruin_demo, first_ladder_epoch_tail,
                      ladder_block_sampler, ladder_epochs, sample_x_infinity)
from .errors import (BracketError, ConfigError, InsufficientDataError,
                     MomentDivergenceError, ParameterError, RuinLabError)
from .fixed_point import (GoldieReport, PerpetuityConfig, TailConstantEstimate,
                          check_goldie_hypotheses, estimate_C1, sample_MQ,
                          sample_R, sample_R_batch, sample_R_Rstar_batch,
                          sample_Rstar)
from .model import (ClaimDistribution, ModelParams, PremiumSchedule,
                    claim_moment, derive_params, premium_rate)
from .oracle import (ComparisonReport, OracleConfig, compare_with_chain,
                     estimate_ruin_oracle, simulate_path)

__version__ = "0.1.0"

__all__ = [
    "ArSpec", "BoundsReport", "BracketError", "BridgeGrid", "CSV_HEADER",
    "ClaimDistribution", "ComparisonReport", "ConfigError", "EmbeddedStep",
    "F_LIBRARY", "GoldieReport", "InsufficientDataError", "LadderSequence",
    "ModelParams", "MomentDivergenceError", "OracleConfig", "ParameterError",
    "PerpetuityConfig", "PremiumSchedule", "RuinEstimate", "RuinLabError",
    "SimConfig", "TailConstantEstimate", "TailFit", "Z95", "ar_path",
    "bounds_report", "cesaro_average", "cesaro_se", "check_contraction",
    "check_goldie_hypotheses", "claim_moment", "compare_with_chain",
    "critical_certain_ruin_demo", "curve_to_csv", "derive_params",
    "effective_exponent", "estimate_C1", "estimate_ruin",
    "estimate_ruin_oracle", "eta_integral", "first_ladder_epoch_tail",
    "fit_tail", "j_factor", "ladder_block_sampler", "ladder_epochs",
    "moment_M", "mu", "premium_rate", "ruin_curve", "sample_MQ", "sample_R",
    "sample_R_Rstar_batch", "sample_R_batch", "sample_Rstar", "sample_bridge",
    "sample_eta", "sample_eta_batch", "sample_step", "sample_x_infinity",
    "simulate_chain", "simulate_path", "solve_exponent", "upper_constant",
    "varrho", "wilson_interval",
]
