"""Conditional-posterior samplers for the SV parameters.

Given the latent path, each parameter has a tractable conditional:
sigma_eta2 is inverse gamma, mu is Gaussian, and phi gets a Gaussian
proposal corrected by a Metropolis-Hastings test for the sqrt(1-phi^2)
prior factor, with proposals outside (-1, 1) rejected outright.

Samplers return draws (or a PhiUpdateOutcome); installing them into the
chain state is the caller's job.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from svhmc.errors import DegeneratePosteriorError, ProposalUndefinedError
from svhmc.model import ModelState, mu_coefficients, phi_coefficients, sigma_eta2_scale
from svhmc.rng import RngStream

__all__ = [
    "RngStream",
    "PhiUpdateOutcome",
    "sample_inverse_gamma",
    "sample_sigma_eta2",
    "sample_mu",
    "sample_phi",
    "phi_acceptance_probability",
]


@dataclass(frozen=True)
class PhiUpdateOutcome:
    """Result of one phi Metropolis-Hastings step.

    phi is the post-update value (equal to the pre-update value when
    accepted is False).  mh_probability is the acceptance probability of
    the recorded pair; proposals outside (-1, 1) record probability 0.
    """

    phi: float
    proposed: float
    accepted: bool
    mh_probability: float


def sample_inverse_gamma(rng: RngStream, shape: float, scale: float) -> float:
    """Draw from the inverse gamma with density ~ x^(-shape-1) exp(-scale/x)."""
    if shape <= 0.0 or scale <= 0.0:
        raise ValueError(f"shape and scale must be positive, got ({shape}, {scale})")
    g = rng.gamma(shape)
    while g == 0.0:  # gamma underflow is possible for tiny shapes
        g = rng.gamma(shape)
    return scale / g


def sample_sigma_eta2(rng: RngStream, state: ModelState) -> float:
    """Draw sigma_eta2 from its inverse-gamma conditional.

    Shape is n/2 and scale is half the squared innovation sum of the
    current path.  Raises DegeneratePosteriorError when the path sits
    exactly at its mean level (scale zero).
    """
    scale = sigma_eta2_scale(state)
    if scale <= 0.0:
        raise DegeneratePosteriorError(
            "latent path coincides with its mean level; "
            "the sigma_eta2 conditional is degenerate")
    return sample_inverse_gamma(rng, 0.5 * state.n, scale)


def sample_mu(rng: RngStream, state: ModelState) -> float:
    """Draw mu from its Gaussian conditional Normal(c/b, sigma_eta2/b)."""
    b, c = mu_coefficients(state)
    if b <= 0.0:
        raise ValueError(f"mu conditional precision must be positive, got b={b}")
    return rng.normal(c / b, math.sqrt(state.params.sigma_eta2 / b))


def phi_acceptance_probability(current: float, proposed: float) -> float:
    """min{ sqrt((1 - proposed^2) / (1 - current^2)), 1 } for in-range pairs."""
    if not -1.0 < proposed < 1.0:
        return 0.0
    ratio = (1.0 - proposed * proposed) / (1.0 - current * current)
    return min(math.sqrt(ratio), 1.0)


def sample_phi(rng: RngStream, state: ModelState) -> PhiUpdateOutcome:
    """One Metropolis-Hastings update of phi.

    Proposes from Normal(e/d, sigma_eta2/d) with (d, e) the conditional
    coefficients of the current path, rejects proposals outside (-1, 1)
    outright, and otherwise accepts with phi_acceptance_probability.
    Raises ProposalUndefinedError when d <= 0 (proposal variance
    undefined); the sweep scheduler treats that as an automatic rejection.
    """
    phi = state.params.phi
    d, e = phi_coefficients(state)
    if d <= 0.0:
        raise ProposalUndefinedError(
            f"phi proposal variance is undefined (curvature coefficient {d:.6g} <= 0)")
    proposed = rng.normal(e / d, math.sqrt(state.params.sigma_eta2 / d))
    if not -1.0 < proposed < 1.0:
        return PhiUpdateOutcome(phi=phi, proposed=proposed,
                                accepted=False, mh_probability=0.0)
    probability = phi_acceptance_probability(phi, proposed)
    accepted = rng.uniform() < probability
    return PhiUpdateOutcome(phi=proposed if accepted else phi,
                            proposed=proposed,
                            accepted=accepted,
                            mh_probability=probability)
