import itertools
import math

import numpy as np
import pytest

from causal_gym.oracle import (
    StepContext,
    bayes_accuracy,
    brute_force_prob,
    sequence_loglik,
    step_loglik,
    trial_posterior,
)
from causal_gym.tabular import (
    ModelKind,
    Setting,
    TabularParams,
    TabularState,
    draw_exogenous,
    sample_model,
    step_dynamics,
)

P = TabularParams()


def generate_trial(rng, params, setting, length, model=None):
    """Roll the real environment dynamics into oracle-format observations."""
    model = model if model is not None else sample_model(rng, params)
    state = TabularState()
    obs = []
    for _ in range(length):
        exo = draw_exogenous(rng, params, setting)
        state = step_dynamics(state, model, exo)
        z = exo.z if setting in (Setting.OFFPOLICY, Setting.ONPOLICY) else None
        obs.append((tuple(int(v) for v in state.s), z))
    return obs, model


class TestStepLoglik:
    def test_impossible_observation(self):
        ctx = StepContext(s_t=(0, 0, 0), s_prev=(0, 1, 0), s1_prev2=0, z_t=None)
        assert step_loglik(ctx, ModelKind.CHAIN, Setting.CONFOUNDED, P) == -np.inf

    def test_all_zero_step(self):
        ctx = StepContext(s_t=(0, 0, 0), s_prev=(0, 0, 0), s1_prev2=0, z_t=None)
        ll = step_loglik(ctx, ModelKind.CHAIN, Setting.CONFOUNDED, P)
        expected = math.log((1 - P.p1) * (1 - P.p2) * (1 - P.p3))
        assert ll == pytest.approx(expected, abs=1e-14)

    def test_forced_node_is_certain(self):
        ctx = StepContext(s_t=(0, 1, 0), s_prev=(0, 0, 0), s1_prev2=0, z_t=(1, 0))
        ll = step_loglik(ctx, ModelKind.CHAIN, Setting.OFFPOLICY, P)
        expected = math.log(1 - P.p1) + 0.0 + math.log(1 - P.p3)
        assert ll == pytest.approx(expected, abs=1e-14)

    def test_observed_setting_requires_z(self):
        ctx = StepContext(s_t=(0, 0, 0), s_prev=(0, 0, 0), s1_prev2=0, z_t=None)
        with pytest.raises(ValueError):
            step_loglik(ctx, ModelKind.CHAIN, Setting.OFFPOLICY, P)


class TestTrialPosterior:
    def test_empty_sequence_is_prior(self):
        assert trial_posterior([], Setting.CONFOUNDED, P).p_chain == pytest.approx(0.5)
        p7 = TabularParams(p_chain=0.7)
        assert trial_posterior([], Setting.CONFOUNDED, p7).p_chain == pytest.approx(0.7)

    def test_uninformative_sequence_stays_at_prior(self):
        # models differ only through node 3's parent; quiet sequences carry
        # no evidence
        obs = [((0, 0, 0), None)] * 5
        assert trial_posterior(obs, Setting.CONFOUNDED, P).p_chain == pytest.approx(0.5)

    def test_scaling_invariance(self):
        # log-space implementation: adding a constant to both logliks is a
        # common positive factor and leaves the posterior unchanged
        obs = [((1, 0, 0), None), ((0, 1, 0), None), ((0, 0, 1), None)]
        post = trial_posterior(obs, Setting.CONFOUNDED, P)
        la = sequence_loglik(obs, ModelKind.CHAIN, Setting.CONFOUNDED, P)
        lb = sequence_loglik(obs, ModelKind.DELAYED_FORK, Setting.CONFOUNDED, P)
        for shift in (50.0, -50.0, 700.0):
            wa, wb = la + shift, lb + shift
            m = max(wa, wb)
            manual = math.exp(wa - m) / (math.exp(wa - m) + math.exp(wb - m))
            assert post.p_chain == pytest.approx(manual, abs=1e-15)

    def test_derived_offpolicy_sequence_matches_brute_force(self):
        # z2 fires at t=1 while s1 was quiet; s3 at t=2 is then decisive
        obs = [
            ((0, 1, 0), (1, 0)),
            ((0, 0, 1), (0, 0)),
            ((0, 0, 0), (0, 0)),
        ]
        pa = brute_force_prob(obs, ModelKind.CHAIN, Setting.OFFPOLICY, P)
        pb = brute_force_prob(obs, ModelKind.DELAYED_FORK, Setting.OFFPOLICY, P)
        expected = 0.5 * pa / (0.5 * pa + 0.5 * pb)
        post = trial_posterior(obs, Setting.OFFPOLICY, P)
        assert post.p_chain == pytest.approx(expected, abs=1e-12)
        assert post.p_chain > 0.95  # the chain forces s3 after a forced s2

    def test_impossible_under_both_models_raises(self):
        obs = [((0, 1, 0), None), ((0, 0, 0), None)]  # s2 active, then s3 quiet is
        # fine; force impossibility with s1 active then s2 quiet
        obs = [((1, 0, 0), None), ((0, 0, 0), None)]
        with pytest.raises(ValueError):
            trial_posterior(obs, Setting.CONFOUNDED, P)


class TestBruteForce:
    def test_deterministic_regime(self):
        params = TabularParams(p1=1.0, p2=0.0, p3=0.0)
        obs = [((1, 0, 0), None), ((1, 1, 0), None), ((1, 1, 1), None)]
        assert brute_force_prob(obs, ModelKind.CHAIN, Setting.CONFOUNDED, params) == 1.0
        # the fork instead activates s3 from s1 two steps back: same sequence
        assert brute_force_prob(
            obs, ModelKind.DELAYED_FORK, Setting.CONFOUNDED, params
        ) == 1.0

    def test_length_guard(self):
        obs = [((0, 0, 0), None)] * 7
        with pytest.raises(ValueError):
            brute_force_prob(obs, ModelKind.CHAIN, Setting.CONFOUNDED, P)

    @pytest.mark.parametrize("setting", [Setting.CONFOUNDED, Setting.OBSERVATIONAL])
    @pytest.mark.parametrize("model", list(ModelKind))
    def test_total_probability_sums_to_one(self, setting, model):
        total = 0.0
        for seq in itertools.product(itertools.product((0, 1), repeat=3), repeat=3):
            obs = [(s, None) for s in seq]
            total += brute_force_prob(obs, model, setting, P)
        assert total == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("setting", list(Setting))
    def test_matches_closed_form_on_random_sequences(self, setting):
        rng = np.random.default_rng(123)
        for _ in range(100):
            length = int(rng.integers(1, 6))
            obs, _ = generate_trial(rng, P, setting, length)
            for model in ModelKind:
                bf = brute_force_prob(obs, model, setting, P)
                ll = sequence_loglik(obs, model, setting, P)
                assert bf == pytest.approx(math.exp(ll), abs=1e-12)


class TestBayesAccuracy:
    def test_degenerate_prior(self):
        params = TabularParams(p_chain=1.0)
        acc, _ = bayes_accuracy(params, Setting.CONFOUNDED, 500, np.random.default_rng(0))
        assert acc == 1.0

    def test_no_activity_is_chance(self):
        params = TabularParams(p1=0.0, p2=0.0, p3=0.0, p2_int=0.0, p3_int=0.0)
        acc, se = bayes_accuracy(params, Setting.CONFOUNDED, 2000, np.random.default_rng(1))
        # all-zero trials carry no evidence; ties answer chain, which is
        # right half the time
        assert abs(acc - 0.5) < 4 * se

    def test_information_ordering(self):
        # identical trial seeds per setting (common random numbers)
        n = 4000
        accs = {}
        for setting in (Setting.CONFOUNDED, Setting.OBSERVATIONAL, Setting.OFFPOLICY):
            accs[setting], _ = bayes_accuracy(P, setting, n, np.random.default_rng(99))
        assert accs[Setting.OFFPOLICY] >= accs[Setting.OBSERVATIONAL]
        assert accs[Setting.OBSERVATIONAL] >= accs[Setting.CONFOUNDED]

    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError):
            bayes_accuracy(P, Setting.CONFOUNDED, 0, np.random.default_rng(0))
