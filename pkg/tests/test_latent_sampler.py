import math

import numpy as np
import pytest

from svhmc import _kernels
from svhmc._kernels import pure
from svhmc.errors import NumericalRangeError
from svhmc.latent_sampler import (HmcConfig, HmcOutcome, MetropolisConfig,
                                  hmc_update, leapfrog, metropolis_update,
                                  scaled_toward_target, tune_step_size)
from svhmc.model import (LatentPath, ModelState, ReturnSeries, SvParams,
                         hamiltonian)
from svhmc.rng import RngStream


def make_state(seed=11, n=16, mu=-1.0, phi=0.8, s2=0.2):
    gen = np.random.default_rng(seed)
    h = mu + math.sqrt(s2 / (1.0 - phi * phi)) * gen.standard_normal(n)
    y = np.exp(0.5 * h) * gen.standard_normal(n)
    return ModelState(params=SvParams(mu=mu, phi=phi, sigma_eta2=s2),
                      path=LatentPath(h), data=ReturnSeries(y))


class TestConfigs:
    def test_hmc_config_validation(self):
        with pytest.raises(ValueError, match="step_size"):
            HmcConfig(step_size=0.0)
        with pytest.raises(ValueError, match="n_leapfrog_steps"):
            HmcConfig(n_leapfrog_steps=0)
        with pytest.raises(ValueError, match="target_acceptance"):
            HmcConfig(target_acceptance=1.0)

    def test_trajectory_length(self):
        assert HmcConfig(step_size=0.1, n_leapfrog_steps=25).trajectory_length \
            == pytest.approx(2.5)

    def test_metropolis_config_validation(self):
        with pytest.raises(ValueError, match="proposal_width"):
            MetropolisConfig(proposal_width=-1.0)
        with pytest.raises(ValueError, match="sweeps_per_update"):
            MetropolisConfig(sweeps_per_update=0)


class TestLeapfrog:
    def test_validation(self):
        state = make_state()
        with pytest.raises(ValueError, match="momenta"):
            leapfrog(state.path, np.zeros(3), state.params, state.data, 0.1, 5)
        with pytest.raises(ValueError, match="step_size"):
            leapfrog(state.path, np.zeros(16), state.params, state.data, 0.0, 5)
        with pytest.raises(ValueError, match="n_steps"):
            leapfrog(state.path, np.zeros(16), state.params, state.data, 0.1, 0)

    def test_zero_force_drift(self, monkeypatch):
        # with the gradient zeroed out the integrator is pure drift:
        # h' = h + n_steps * step_size * p, p' = p
        previous = _kernels.BACKEND
        _kernels.use_backend("pure")
        try:
            monkeypatch.setattr(
                pure, "_trajectory_gradient",
                lambda y2, h, mu, phi, s2: (np.zeros(h.size), -1))
            state = make_state()
            momenta = np.linspace(-1.0, 1.0, 16)
            path, out = leapfrog(state.path, momenta, state.params,
                                 state.data, 0.05, 12)
            assert np.allclose(path.values,
                               state.path.values + 12 * 0.05 * momenta,
                               rtol=0.0, atol=1e-12)
            assert np.array_equal(out, momenta)
        finally:
            _kernels.use_backend(previous)

    def test_momentum_flip_inverts_trajectory(self, backend):
        state = make_state()
        gen = np.random.default_rng(21)
        momenta = gen.standard_normal(16)
        mid_path, mid_momenta = leapfrog(state.path, momenta, state.params,
                                         state.data, 0.1, 30)
        back_path, back_momenta = leapfrog(mid_path, -np.asarray(mid_momenta),
                                           state.params, state.data, 0.1, 30)
        assert np.max(np.abs(back_path.values - state.path.values)) < 1e-11
        assert np.max(np.abs(-np.asarray(back_momenta) - momenta)) < 1e-11

    def test_divergence_raises_with_site(self, backend):
        state = make_state()
        momenta = np.full(16, -5.0)
        with pytest.raises(NumericalRangeError, match="diverged at site"):
            leapfrog(state.path, momenta, state.params, state.data, 1e4, 3)


class TestHmcUpdate:
    def test_decision_replicates_manually(self):
        for seed in range(12):
            state = make_state(seed=seed)
            config = HmcConfig(step_size=0.15, n_leapfrog_steps=8)
            before = state.path
            outcome = hmc_update(RngStream(seed), state, config)

            twin = RngStream(seed)
            momenta = twin.standard_normal(state.n)
            start = ModelState(params=state.params, path=before,
                               data=state.data)
            proposal, end_momenta = leapfrog(before, momenta, state.params,
                                             state.data, 0.15, 8)
            delta = hamiltonian(end_momenta,
                                ModelState(params=state.params, path=proposal,
                                           data=state.data)) \
                - hamiltonian(momenta, start)
            uniform = twin.uniform()
            assert outcome.delta_h == pytest.approx(delta, rel=1e-12)
            assert np.array_equal(outcome.proposal_path.values, proposal.values)
            expected_accept = delta <= 0.0 or uniform < math.exp(-delta)
            assert outcome.accepted == expected_accept
            assert state.path is (outcome.proposal_path if expected_accept
                                  else before)

    def test_rng_consumption_is_fixed_even_on_divergence(self):
        smooth = make_state(seed=30)
        divergent = make_state(seed=30)
        original = divergent.path.values.copy()
        r_smooth, r_div = RngStream(31), RngStream(31)
        ok = hmc_update(r_smooth, smooth, HmcConfig(step_size=0.1))
        bad = hmc_update(r_div, divergent, HmcConfig(step_size=1e5))
        assert math.isfinite(ok.delta_h)
        assert bad == HmcOutcome(accepted=False, delta_h=math.inf,
                                 proposal_path=None)
        assert np.array_equal(divergent.path.values, original)
        # both consumed n momenta + 1 uniform, so the streams stay in step
        assert r_smooth.random() == r_div.random()

    def test_acceptance_rate_reasonable_at_small_step(self):
        state = make_state(seed=33)
        rng = RngStream(34)
        config = HmcConfig(step_size=0.05, n_leapfrog_steps=10)
        accepted = sum(hmc_update(rng, state, config).accepted
                       for _ in range(400))
        assert accepted / 400 > 0.9


class TestMetropolisUpdate:
    def test_matches_kernel_replay(self):
        state = make_state(seed=40)
        start = state.path.values.copy()
        rng = RngStream(41)
        rate = metropolis_update(rng, state, MetropolisConfig(proposal_width=0.8))

        twin = RngStream(41)
        u_prop = twin.random(state.n)
        u_acc = twin.random(state.n)
        replay = start.copy()
        accepted = _kernels.metropolis_sweep(
            state.data.squared, replay, state.params.mu, state.params.phi,
            state.params.sigma_eta2, 0.8, u_prop, u_acc)
        assert np.array_equal(state.path.values, replay)
        assert rate == accepted / state.n

    def test_multiple_sweeps_counted_and_consumed(self):
        state = make_state(seed=42)
        rng = RngStream(43)
        config = MetropolisConfig(proposal_width=0.8, sweeps_per_update=3)
        rate = metropolis_update(rng, state, config)
        assert 0.0 <= rate <= 1.0
        # 3 sweeps consume 2n uniforms each
        twin = RngStream(43)
        twin.random(6 * state.n)
        assert rng.random() == twin.random()

    def test_mutates_path_in_place(self):
        state = make_state(seed=44)
        path_object = state.path
        metropolis_update(RngStream(45), state,
                          MetropolisConfig(proposal_width=1.0))
        assert state.path is path_object


class TestTuning:
    def test_scaled_toward_target(self):
        assert scaled_toward_target(0.2, 0.7, 0.5) \
            == pytest.approx(0.2 * math.exp(0.2))
        assert scaled_toward_target(0.2, 0.3, 0.5) \
            == pytest.approx(0.2 * math.exp(-0.2))
        assert scaled_toward_target(1.0, 0.5, 0.5) == 1.0

    def test_tune_step_size_window_rule(self):
        config = HmcConfig(step_size=0.1, target_acceptance=0.5)
        window = [True] * 35 + [False] * 15
        assert tune_step_size(window, config) \
            == pytest.approx(0.1 * math.exp(0.7 - 0.5))
        balanced = [True] * 25 + [False] * 25
        assert tune_step_size(balanced, config) == pytest.approx(0.1)

    def test_tune_step_size_needs_full_window(self):
        with pytest.raises(ValueError, match="window"):
            tune_step_size([True] * 49, HmcConfig())
