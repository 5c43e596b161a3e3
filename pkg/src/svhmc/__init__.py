"""Bayesian stochastic volatility estimation.

Samples the SV model parameters from their exact conditional posteriors
and the latent log-volatility path with either global Hamiltonian Monte
Carlo or single-site Metropolis sweeps, with the diagnostics needed to
compare the two (ACF, integrated autocorrelation time, jackknife errors).

Hot loops run in a compiled extension when available; set SVHMC_PURE=1 to
force the pure-Python backend (see svhmc._kernels).
"""

import logging

from svhmc.chain import ChainResult, SweepRecord, run_chain
from svhmc.data import (PriceSeries, SyntheticTruth, generate_artificial,
                        load_prices, load_returns, load_traces,
                        prices_to_returns, save_returns, save_trace)
from svhmc.diagnostics import (ChainSummary, ChainTrace, acf,
                               integrated_autocorr_time, jackknife_error,
                               summarize)
from svhmc.errors import (DegeneratePosteriorError, DegenerateTraceError,
                          InsufficientLagsError, NumericalRangeError,
                          PriceParseError, ProposalUndefinedError, SvhmcError)
from svhmc.latent_sampler import (HmcConfig, HmcOutcome, MetropolisConfig,
                                  hmc_update, leapfrog, metropolis_update,
                                  tune_step_size)
from svhmc.model import (LatentPath, ModelState, ReturnSeries, SvParams,
                         hamiltonian, mu_coefficients, phi_coefficients,
                         potential_energy, potential_gradient,
                         sigma_eta2_scale)
from svhmc.param_sampler import (PhiUpdateOutcome, phi_acceptance_probability,
                                 sample_inverse_gamma, sample_mu, sample_phi,
                                 sample_sigma_eta2)
from svhmc.rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "ChainResult", "ChainSummary", "ChainTrace", "HmcConfig", "HmcOutcome",
    "LatentPath", "MetropolisConfig", "ModelState", "PhiUpdateOutcome",
    "PriceSeries", "ReturnSeries", "RngStream", "SvParams", "SweepRecord",
    "SyntheticTruth",
    "acf", "generate_artificial", "hamiltonian", "hmc_update",
    "integrated_autocorr_time", "jackknife_error", "leapfrog", "load_prices",
    "load_returns", "load_traces", "metropolis_update", "mu_coefficients",
    "phi_acceptance_probability", "phi_coefficients", "potential_energy",
    "potential_gradient", "prices_to_returns", "run_chain", "sample_inverse_gamma",
    "sample_mu", "sample_phi", "sample_sigma_eta2", "save_returns", "save_trace",
    "sigma_eta2_scale", "summarize", "tune_step_size",
    "SvhmcError", "NumericalRangeError", "DegeneratePosteriorError",
    "ProposalUndefinedError", "DegenerateTraceError", "InsufficientLagsError",
    "PriceParseError",
]

logging.getLogger(__name__).addHandler(logging.NullHandler())
