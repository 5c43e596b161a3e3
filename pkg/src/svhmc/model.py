"""State types and densities for the standard stochastic volatility model.

The model: y_t = exp(h_t/2) eps_t with eps_t ~ N(0,1), and the latent
log-variance h_t follows a stationary AR(1),

    h_1 ~ N(mu, sigma_eta2 / (1 - phi^2)),
    h_t = mu + phi (h_{t-1} - mu) + eta_t,   eta_t ~ N(0, sigma_eta2).

This module holds the immutable parameter/data containers, the latent-path
potential energy (negative log target up to h-independent constants), its
analytic gradient, the Hamiltonian, and the sufficient statistics feeding
the conditional-posterior parameter samplers.

All functions here are pure; shared ReturnSeries arrays are frozen so
concurrent chains can read them safely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from svhmc import _kernels


@dataclass(frozen=True)
class SvParams:
    """Parameter triple (mu, phi, sigma_eta2) of the SV model."""

    mu: float
    phi: float
    sigma_eta2: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.phi)
                and math.isfinite(self.sigma_eta2)):
            raise ValueError("SvParams fields must be finite")
        if not -1.0 < self.phi < 1.0:
            raise ValueError(f"phi must lie in (-1, 1), got {self.phi}")
        if self.sigma_eta2 <= 0.0:
            raise ValueError(f"sigma_eta2 must be positive, got {self.sigma_eta2}")


class ReturnSeries:
    """Observed mean-adjusted returns; the array is frozen after construction."""

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.float64).copy()
        if arr.ndim != 1:
            raise ValueError("returns must be one-dimensional")
        if arr.size < 2:
            raise ValueError("need at least 2 returns")
        if not np.isfinite(arr).all():
            i = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise ValueError(f"non-finite return at index {i}")
        arr.setflags(write=False)
        squared = arr * arr
        squared.setflags(write=False)
        self.values = arr
        self.squared = squared

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"ReturnSeries(n={len(self)})"


class LatentPath:
    """Log-volatility vector h; owned and mutated by a single chain."""

    def __init__(self, values):
        arr = np.ascontiguousarray(values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("latent path must be one-dimensional")
        if arr.size < 2:
            raise ValueError("latent path needs at least 2 sites")
        if not np.isfinite(arr).all():
            i = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise ValueError(f"non-finite latent value at site {i}")
        self.values = arr

    def __len__(self):
        return self.values.size

    def copy(self):
        return LatentPath(self.values.copy())

    def __repr__(self):
        return f"LatentPath(n={len(self)})"


@dataclass
class ModelState:
    """Current (params, path) against fixed data; one chain owns one state."""

    params: SvParams
    path: LatentPath
    data: ReturnSeries

    def __post_init__(self):
        if len(self.path) != len(self.data):
            raise ValueError(
                f"path length {len(self.path)} != data length {len(self.data)}")

    @property
    def n(self):
        return len(self.data)


def potential_energy(state: ModelState) -> float:
    """Negative log target of the latent path, constants dropped.

    U(h) = sum_t [h_t/2 + (y_t^2/2) e^{-h_t}]
         + (1-phi^2)(h_1-mu)^2 / (2 sigma_eta2)
         + sum_{t>=2} [h_t - mu - phi(h_{t-1}-mu)]^2 / (2 sigma_eta2)

    Raises NumericalRangeError when e^{-h_t} leaves the representable
    range, identifying the offending site.
    """
    p = state.params
    return _kernels.potential_energy(
        state.data.squared, state.path.values, p.mu, p.phi, p.sigma_eta2)


def potential_gradient(state: ModelState) -> np.ndarray:
    """Analytic dU/dh_t for every site, same range guard as the energy."""
    p = state.params
    return _kernels.potential_gradient(
        state.data.squared, state.path.values, p.mu, p.phi, p.sigma_eta2)


def hamiltonian(momenta, state: ModelState) -> float:
    """Kinetic term sum p_i^2 / 2 plus potential_energy(state)."""
    p = np.asarray(momenta, dtype=np.float64)
    if p.shape != (state.n,):
        raise ValueError(
            f"momenta length {p.size} != path length {state.n}")
    return 0.5 * float(np.dot(p, p)) + potential_energy(state)


def sigma_eta2_scale(state: ModelState) -> float:
    """Scale of the inverse-gamma conditional for sigma_eta2 (shape n/2).

    Half the squared innovation sum: (1/2)[(1-phi^2)(h_1-mu)^2
    + sum_{t>=2} (h_t - mu - phi(h_{t-1}-mu))^2].  Nonnegative; zero only
    when the path sits exactly at its AR(1) mean.
    """
    phi = state.params.phi
    d = state.path.values - state.params.mu
    e = d[1:] - phi * d[:-1]
    return 0.5 * ((1.0 - phi * phi) * d[0] * d[0] + float(np.dot(e, e)))


def mu_coefficients(state: ModelState) -> tuple[float, float]:
    """Coefficients (b, c) of the Gaussian conditional for mu.

    mu | h, phi, sigma_eta2 ~ Normal(mean c/b, variance sigma_eta2/b) with
    b = (1-phi^2) + (n-1)(1-phi)^2 and
    c = (1-phi^2) h_1 + (1-phi) sum_{t>=2} (h_t - phi h_{t-1});
    b > 0 whenever |phi| < 1.
    """
    h = state.path.values
    phi = state.params.phi
    n = h.size
    b = (1.0 - phi * phi) + (n - 1) * (1.0 - phi) ** 2
    c = (1.0 - phi * phi) * h[0] + (1.0 - phi) * float(np.sum(h[1:] - phi * h[:-1]))
    return b, c


def phi_coefficients(state: ModelState) -> tuple[float, float]:
    """Coefficients (d, e) of the Gaussian proposal for phi.

    The proposal is Normal(mean e/d, variance sigma_eta2/d) with
    d = -(h_1-mu)^2 + sum_{t=2..n} (h_{t-1}-mu)^2 and
    e = sum_{t=2..n} (h_t-mu)(h_{t-1}-mu).  d can reach zero (it is a sum
    of squares over the interior sites 2..n-1), in which case the proposal
    is undefined and the caller rejects the update.
    """
    dev = state.path.values - state.params.mu
    d = -dev[0] * dev[0] + float(np.dot(dev[:-1], dev[:-1]))
    e = float(np.dot(dev[1:], dev[:-1]))
    return d, e
