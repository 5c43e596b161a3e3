"""Single-chain driver: Gibbs sweeps over parameters plus one latent update.

Sweep order is fixed for reproducibility: sigma_eta2, mu, phi, then the
latent path (HMC or single-site Metropolis).  During burn-in the latent
proposal scale is retuned every 50 updates toward the target acceptance
rate (the HMC leapfrog step count is rescaled to keep the trajectory
length); tunables freeze when recording starts.  Recorded traces are
columnar float arrays, one entry per recorded sweep.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from svhmc.diagnostics import ChainTrace
from svhmc.errors import ProposalUndefinedError
from svhmc.latent_sampler import (HmcConfig, MetropolisConfig, hmc_update,
                                  metropolis_update, scaled_toward_target,
                                  tune_step_size)
from svhmc.model import LatentPath, ModelState, ReturnSeries, SvParams
from svhmc.param_sampler import sample_mu, sample_phi, sample_sigma_eta2
from svhmc.rng import RngStream

logger = logging.getLogger(__name__)

DEFAULT_INITIAL_PARAMS = SvParams(mu=0.0, phi=0.5, sigma_eta2=1.0)
TUNING_WINDOW = 50
LOG_EVERY = 10000


def _tuning_windows(n_burn_in: int) -> list[int]:
    """Window lengths for burn-in tuning of the latent proposal scale.

    Short windows early track the chain while it still drifts toward the
    posterior bulk; the last 40% of burn-in is split into four long
    windows so the frozen scale reflects near-equilibrium acceptance with
    little estimator noise (a fixed-length window would leave the frozen
    value a random-walk draw).
    """
    if n_burn_in < TUNING_WINDOW:
        return []
    tail_window = int(0.4 * n_burn_in) // 4
    if tail_window < TUNING_WINDOW:
        return [TUNING_WINDOW] * (n_burn_in // TUNING_WINDOW)
    head = n_burn_in - 4 * tail_window
    return [TUNING_WINDOW] * (head // TUNING_WINDOW) + [tail_window] * 4


def initial_latent_path(data: ReturnSeries) -> LatentPath:
    """Moment-matched start: ln(y_t^2 + 1e-8) clamped to [-10, 10]."""
    return LatentPath(np.clip(np.log(data.squared + 1e-8), -10.0, 10.0))


def default_tracked_site(n: int) -> int:
    """Site 100 when the series is long enough, else the second-to-last site."""
    return 100 if n > 100 else n - 1


@dataclass(frozen=True)
class SweepRecord:
    """One recorded draw: parameters, tracked latent sites, HMC bookkeeping."""

    mu: float
    phi: float
    sigma_eta2: float
    latent: dict[str, float]
    delta_h: float  # nan for Metropolis chains


@dataclass
class ChainResult:
    """Recorded traces and bookkeeping from one run_chain call."""

    sampler: str
    traces: dict[str, np.ndarray]
    delta_h: np.ndarray = field(repr=False)
    tracked_sites: tuple[int, ...]
    n_burn_in: int
    n_record: int
    thin: int
    latent_acceptance: float
    burn_in_acceptance: float
    phi_acceptance: float
    divergences: int
    phi_undefined: int
    final_params: SvParams
    final_path: LatentPath
    final_step_size: Optional[float] = None
    final_n_leapfrog_steps: Optional[int] = None
    final_proposal_width: Optional[float] = None

    def trace(self, name: str) -> ChainTrace:
        return ChainTrace(name, self.traces[name])

    def trace_names(self) -> list[str]:
        return list(self.traces)

    def sweep_record(self, i: int) -> SweepRecord:
        latent = {name: float(self.traces[name][i])
                  for name in self.traces if name.startswith("h_")}
        return SweepRecord(mu=float(self.traces["mu"][i]),
                           phi=float(self.traces["phi"][i]),
                           sigma_eta2=float(self.traces["sigma_eta2"][i]),
                           latent=latent,
                           delta_h=float(self.delta_h[i]) if self.delta_h.size
                           else math.nan)


def _resolve_tracked_sites(tracked_sites, n):
    if tracked_sites is None:
        return (default_tracked_site(n),)
    sites = tuple(int(s) for s in tracked_sites)
    for s in sites:
        if not 1 <= s <= n:
            raise ValueError(f"tracked site {s} outside [1, {n}]")
    return sites


def run_chain(rng: RngStream, data: ReturnSeries, *, sampler: str = "hmc",
              n_burn_in: int = 10000, n_record: int = 200000, thin: int = 1,
              initial_params: SvParams = DEFAULT_INITIAL_PARAMS,
              hmc_config: Optional[HmcConfig] = None,
              metropolis_config: Optional[MetropolisConfig] = None,
              tracked_sites=None,
              initial_path: Optional[LatentPath] = None) -> ChainResult:
    """Run one chain: n_burn_in tuning sweeps, then n_record recorded draws.

    With thin > 1, thin sweeps are run per recorded draw.  The caller's
    config objects are copied, not mutated; the tuned values appear in the
    returned ChainResult.  Each chain must own its RngStream exclusively.
    """
    if sampler not in ("hmc", "metropolis"):
        raise ValueError(f"sampler must be 'hmc' or 'metropolis', got {sampler!r}")
    if n_burn_in < 0:
        raise ValueError(f"n_burn_in must be >= 0, got {n_burn_in}")
    if n_record < 1:
        raise ValueError(f"n_record must be >= 1, got {n_record}")
    if thin < 1:
        raise ValueError(f"thin must be >= 1, got {thin}")
    n = len(data)
    sites = _resolve_tracked_sites(tracked_sites, n)
    use_hmc = sampler == "hmc"
    hmc_cfg = replace(hmc_config) if hmc_config is not None else HmcConfig()
    met_cfg = (replace(metropolis_config) if metropolis_config is not None
               else MetropolisConfig())
    trajectory_length = hmc_cfg.trajectory_length

    path = initial_path.copy() if initial_path is not None else initial_latent_path(data)
    state = ModelState(params=initial_params, path=path, data=data)

    total_sweeps = n_burn_in + n_record * thin
    sweep_count = 0
    divergences = 0
    phi_undefined = 0
    phi_accepts = 0
    accept_sum = [0.0, 0.0]   # [burn-in, recording] latent acceptance
    update_count = [0, 0]
    window: list = []
    window_plan = _tuning_windows(n_burn_in)
    window_index = 0

    def one_sweep(tuning: bool):
        nonlocal sweep_count, divergences, phi_undefined, phi_accepts, window_index
        phase = 0 if tuning else 1
        state.params = replace(state.params,
                               sigma_eta2=sample_sigma_eta2(rng, state))
        state.params = replace(state.params, mu=sample_mu(rng, state))
        try:
            outcome = sample_phi(rng, state)
            if outcome.accepted:
                state.params = replace(state.params, phi=outcome.phi)
                phi_accepts += 1 if not tuning else 0
        except ProposalUndefinedError:
            phi_undefined += 1
        if use_hmc:
            latent = hmc_update(rng, state, hmc_cfg)
            if math.isinf(latent.delta_h):
                divergences += 1
            accept_sum[phase] += 1.0 if latent.accepted else 0.0
            accepted_signal = latent.accepted
            delta = latent.delta_h
        else:
            rate = metropolis_update(rng, state, met_cfg)
            accept_sum[phase] += rate
            accepted_signal = rate
            delta = math.nan
        update_count[phase] += 1
        if tuning and window_index < len(window_plan):
            window.append(accepted_signal)
            if len(window) >= window_plan[window_index]:
                if use_hmc and hmc_cfg.tune_during_burn_in:
                    hmc_cfg.step_size = tune_step_size(window, hmc_cfg)
                    hmc_cfg.n_leapfrog_steps = max(
                        1, round(trajectory_length / hmc_cfg.step_size))
                elif not use_hmc and met_cfg.tune_during_burn_in:
                    met_cfg.proposal_width = scaled_toward_target(
                        met_cfg.proposal_width,
                        sum(window) / len(window),
                        met_cfg.target_acceptance)
                window.clear()
                window_index += 1
        sweep_count += 1
        if sweep_count % LOG_EVERY == 0:
            rate = accept_sum[phase] / max(1, update_count[phase])
            logger.info("sweep %d/%d (%s, latent acceptance %.3f)",
                        sweep_count, total_sweeps,
                        "burn-in" if tuning else "recording", rate)
        return delta

    for _ in range(n_burn_in):
        one_sweep(tuning=True)
    window.clear()  # tunables are frozen from here on

    traces = {name: np.empty(n_record) for name in ("mu", "phi", "sigma_eta2")}
    for s in sites:
        traces[f"h_{s}"] = np.empty(n_record)
    delta_h = np.empty(n_record) if use_hmc else np.empty(0)

    for j in range(n_record):
        for _ in range(thin):
            delta = one_sweep(tuning=False)
        traces["mu"][j] = state.params.mu
        traces["phi"][j] = state.params.phi
        traces["sigma_eta2"][j] = state.params.sigma_eta2
        for s in sites:
            traces[f"h_{s}"][j] = state.path.values[s - 1]
        if use_hmc:
            delta_h[j] = delta

    recording_sweeps = n_record * thin
    return ChainResult(
        sampler=sampler,
        traces=traces,
        delta_h=delta_h,
        tracked_sites=sites,
        n_burn_in=n_burn_in,
        n_record=n_record,
        thin=thin,
        latent_acceptance=accept_sum[1] / recording_sweeps,
        burn_in_acceptance=(accept_sum[0] / n_burn_in if n_burn_in else math.nan),
        phi_acceptance=phi_accepts / recording_sweeps,
        divergences=divergences,
        phi_undefined=phi_undefined,
        final_params=state.params,
        final_path=state.path,
        final_step_size=hmc_cfg.step_size if use_hmc else None,
        final_n_leapfrog_steps=hmc_cfg.n_leapfrog_steps if use_hmc else None,
        final_proposal_width=met_cfg.proposal_width if not use_hmc else None,
    )
