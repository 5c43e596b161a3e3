"""Latent-path updates: global HMC and single-site Metropolis.

The HMC update draws i.i.d. standard-normal momenta, integrates the
leapfrog trajectory against the latent-path potential, and accepts with
min{1, exp(-dH)}.  The Metropolis baseline sweeps the sites sequentially
with a symmetric uniform random-walk proposal.  Both consume a fixed
number of RNG draws per update (n momenta + 1 uniform, or 2n uniforms per
sweep), so a chain is reproducible from its seed alone.

Step-size tuning is multiplicative toward a target acceptance rate and is
meant to run during burn-in only; the tuned value must be frozen before
recording starts or the chain is not exactly stationary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from svhmc import _kernels
from svhmc.errors import NumericalRangeError
from svhmc.model import LatentPath, ModelState, ReturnSeries, SvParams
from svhmc.rng import RngStream


@dataclass
class HmcConfig:
    """Leapfrog step size/count and the burn-in tuning target."""

    step_size: float = 0.1
    n_leapfrog_steps: int = 10
    target_acceptance: float = 0.5
    tune_during_burn_in: bool = True

    def __post_init__(self):
        if self.step_size <= 0.0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if self.n_leapfrog_steps < 1:
            raise ValueError(
                f"n_leapfrog_steps must be >= 1, got {self.n_leapfrog_steps}")
        if not 0.0 < self.target_acceptance < 1.0:
            raise ValueError(
                f"target_acceptance must lie in (0, 1), got {self.target_acceptance}")

    @property
    def trajectory_length(self):
        return self.step_size * self.n_leapfrog_steps


@dataclass(frozen=True)
class HmcOutcome:
    """One HMC update: accept flag, energy change, and the proposed path.

    delta_h is +inf and proposal_path is None when the trajectory diverged
    (a non-finite energy or gradient); the chain state is then unchanged.
    """

    accepted: bool
    delta_h: float
    proposal_path: Optional[LatentPath]


@dataclass
class MetropolisConfig:
    """Uniform half-width of the site proposal and sweeps per update."""

    proposal_width: float = 1.0
    sweeps_per_update: int = 1
    target_acceptance: float = 0.5
    tune_during_burn_in: bool = True

    def __post_init__(self):
        if self.proposal_width <= 0.0:
            raise ValueError(
                f"proposal_width must be positive, got {self.proposal_width}")
        if self.sweeps_per_update < 1:
            raise ValueError(
                f"sweeps_per_update must be >= 1, got {self.sweeps_per_update}")
        if not 0.0 < self.target_acceptance < 1.0:
            raise ValueError(
                f"target_acceptance must lie in (0, 1), got {self.target_acceptance}")


def leapfrog(path: LatentPath, momenta, params: SvParams, data: ReturnSeries,
             step_size: float, n_steps: int):
    """Integrate n_steps of the second-order leapfrog map, returning (path, momenta).

    Deterministic: half-step momentum, full-step position, half-step
    momentum, against the analytic potential gradient.  Raises
    NumericalRangeError when a gradient evaluation leaves the
    representable range (the caller treats the trajectory as divergent).
    """
    if len(path) != len(data):
        raise ValueError(f"path length {len(path)} != data length {len(data)}")
    p = np.asarray(momenta, dtype=np.float64)
    if p.shape != (len(path),):
        raise ValueError(f"momenta length {p.size} != path length {len(path)}")
    if step_size <= 0.0:
        raise ValueError(f"step_size must be positive, got {step_size}")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    h_new, p_new, ok, fail_idx = _kernels.leapfrog_trajectory(
        data.squared, path.values, p, params.mu, params.phi, params.sigma_eta2,
        step_size, n_steps)
    if not ok:
        raise NumericalRangeError(f"leapfrog trajectory diverged at site {fail_idx}")
    return LatentPath(h_new), p_new


def hmc_update(rng: RngStream, state: ModelState, config: HmcConfig) -> HmcOutcome:
    """One global HMC update of state.path; installs the proposal on acceptance."""
    params = state.params
    y2 = state.data.squared
    h0 = state.path.values
    p0 = rng.standard_normal(state.n)
    energy0 = _kernels.potential_energy(y2, h0, params.mu, params.phi,
                                        params.sigma_eta2)
    h1, p1, ok, _ = _kernels.leapfrog_trajectory(
        y2, h0, p0, params.mu, params.phi, params.sigma_eta2,
        config.step_size, config.n_leapfrog_steps)
    u = rng.uniform()
    if not ok:
        return HmcOutcome(accepted=False, delta_h=math.inf, proposal_path=None)
    kinetic1 = 0.5 * float(np.dot(p1, p1))
    if not math.isfinite(kinetic1):
        return HmcOutcome(accepted=False, delta_h=math.inf, proposal_path=None)
    try:
        energy1 = _kernels.potential_energy(y2, h1, params.mu, params.phi,
                                            params.sigma_eta2)
    except NumericalRangeError:
        return HmcOutcome(accepted=False, delta_h=math.inf, proposal_path=None)
    delta_h = (kinetic1 + energy1) - (0.5 * float(np.dot(p0, p0)) + energy0)
    accepted = delta_h <= 0.0 or u < math.exp(-delta_h)
    proposal = LatentPath(h1)
    if accepted:
        state.path = proposal
    return HmcOutcome(accepted=accepted, delta_h=delta_h, proposal_path=proposal)


def metropolis_update(rng: RngStream, state: ModelState,
                      config: MetropolisConfig) -> float:
    """sweeps_per_update sequential single-site sweeps; returns the accepted fraction.

    Each site proposes h_t + Uniform(-w, +w) and accepts with
    min{1, exp(-dU)} using only the terms of the potential that contain
    h_t.  Mutates state.path in place.
    """
    params = state.params
    y2 = state.data.squared
    h = state.path.values
    n = state.n
    accepted = 0
    for _ in range(config.sweeps_per_update):
        u_prop = rng.random(n)
        u_acc = rng.random(n)
        accepted += _kernels.metropolis_sweep(
            y2, h, params.mu, params.phi, params.sigma_eta2,
            config.proposal_width, u_prop, u_acc)
    return accepted / (n * config.sweeps_per_update)


def scaled_toward_target(value: float, observed_rate: float,
                         target_rate: float) -> float:
    """Multiplicative tuning: value * exp(observed_rate - target_rate)."""
    return value * math.exp(observed_rate - target_rate)


def tune_step_size(recent_acceptances, config: HmcConfig) -> float:
    """New step size from a burn-in window of accept/reject outcomes.

    Returns step_size * exp(mean(recent) - target); the caller installs it
    (and should rescale n_leapfrog_steps to keep the trajectory length).
    Requires a window of at least 50 outcomes so the rate estimate is
    meaningful; must not be applied after burn-in.
    """
    outcomes = list(recent_acceptances)
    if len(outcomes) < 50:
        raise ValueError(f"need a window of >= 50 outcomes, got {len(outcomes)}")
    rate = sum(1.0 for a in outcomes if a) / len(outcomes)
    return scaled_toward_target(config.step_size, rate, config.target_acceptance)
