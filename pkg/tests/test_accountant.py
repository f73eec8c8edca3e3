import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from l2p.accountant import (
    PrivacyBudget,
    TunerError,
    advanced_composition,
    cdp_to_approx,
    config_budget,
    group_privacy,
    l2p_privacy,
    modified_advanced_composition,
    tune_oco,
    tune_ope,
)
from l2p.measures import ETA_MAX, effective_eta_rmw


class TestL2pPrivacy:
    def test_golden_value(self):
        # 0.2 + 0.01 + 3*1000*1e-4*0.1*log(1e6)/20 + sqrt(6*1000*1e-4*0.1*log^2(1e6)/10)
        b = l2p_privacy(0.01, 0.1, 1000, 10, 0.0, 1e-6)
        assert b.epsilon == pytest.approx(1.3009, abs=1e-3)
        assert b.delta == 2 * 1000 * 1e-6

    def test_delta0_term(self):
        log1 = math.log(1e6)
        expected = 0.002 + 2 * 1000 * (200 + log1 / 0.1) * math.e * 10 * 1e-12
        b = l2p_privacy(0.01, 0.1, 1000, 10, 1e-12, 1e-6)
        assert b.delta == pytest.approx(expected, rel=1e-12)

    def test_eta_zero_degenerates(self):
        b = l2p_privacy(0.0, 0.1, 1000, 10, 0.0, 1e-6)
        assert b.epsilon == 0.0
        assert b.delta == 2 * 1000 * 1e-6

    def test_p_zero_notes_not_raises(self):
        b = l2p_privacy(0.01, 0.0, 1000, 10, 0.0, 1e-6)
        assert math.isinf(b.epsilon)
        assert not b.preconditions_met

    def test_preconditions(self):
        good = l2p_privacy(0.001, 0.9, 10_000, 1, 0.0, 1e-3)
        assert good.preconditions_met
        bad = l2p_privacy(0.01, 0.1, 1000, 10, 0.0, 1e-6)
        assert not bad.preconditions_met

    @given(
        st.floats(1e-5, 0.1),
        st.floats(1e-5, 0.1),
        st.floats(0.05, 0.99),
        st.integers(10, 10_000),
        st.integers(1, 20),
    )
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_eta(self, eta_lo, gap, p, T, B):
        d1 = 1e-6
        lo = l2p_privacy(eta_lo, p, T, B, 0.0, d1).epsilon
        hi = l2p_privacy(min(eta_lo + gap, ETA_MAX), p, T, B, 0.0, d1).epsilon
        assert hi >= lo - 1e-12

    @given(st.integers(10, 5000), st.integers(1, 8))
    @settings(max_examples=40, deadline=None)
    def test_monotone_in_T_and_B(self, T, B):
        base = l2p_privacy(0.01, 0.3, T, B, 0.0, 1e-6)
        more_T = l2p_privacy(0.01, 0.3, 2 * T, B, 0.0, 1e-6)
        assert more_T.epsilon >= base.epsilon
        assert more_T.delta >= base.delta
        bigger_B = l2p_privacy(0.01, 0.3, T, 2 * B, 0.0, 1e-6)
        assert bigger_B.epsilon <= base.epsilon + 1e-12

    def test_pure_function(self):
        a = l2p_privacy(0.013, 0.21, 777, 3, 1e-13, 1e-7)
        b = l2p_privacy(0.013, 0.21, 777, 3, 1e-13, 1e-7)
        assert a == b


class TestAdvancedComposition:
    def test_single_mechanism_floor(self):
        b = advanced_composition([0.5], [0.0], 1e-6)
        assert b.floor == pytest.approx(0.5)
        assert b.epsilon > 0.5  # formula value exceeds the floor here

    def test_hundred_copies(self):
        b = advanced_composition([0.1] * 100, [0.0] * 100, 1e-6)
        # sum = 10, sqrt slack = sqrt(2 * 1 * log(1e6)) ~ 5.257
        assert b.epsilon == pytest.approx(10 + 5.257, abs=5e-3)
        assert b.floor == pytest.approx(10.0)
        assert b.delta == pytest.approx(1e-6)

    def test_empty(self):
        b = advanced_composition([], [], 1e-6)
        assert b.epsilon == 0.0 and b.delta == 1e-6 and b.floor == 0.0

    def test_delta_product(self):
        b = advanced_composition([0.1, 0.1], [0.01, 0.02], 1e-3)
        expected = 1 - (1 - 1e-3) * 0.99 * 0.98
        assert b.delta == pytest.approx(expected, rel=1e-12)

    @given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=20))
    @settings(max_examples=40, deadline=None)
    def test_floor_never_exceeds_sum(self, epsilons):
        b = advanced_composition(epsilons, [0.0] * len(epsilons), 1e-6)
        assert b.floor <= sum(epsilons) + 1e-12
        assert b.floor <= b.epsilon + 1e-12


class TestModifiedComposition:
    def test_zero_lambdas_identical(self):
        args = ([0.1] * 5, [1e-8] * 5, 1e-6)
        assert modified_advanced_composition(*args, [0.0] * 5) == advanced_composition(*args)

    def test_lambda_slack_added(self):
        base = advanced_composition([0.1] * 100, [0.0] * 100, 1e-6)
        mod = modified_advanced_composition([0.1] * 100, [0.0] * 100, 1e-6, [1e-6] * 100)
        assert mod.delta == pytest.approx(base.delta + 2e-4)

    def test_single_large_lambda(self):
        mod = modified_advanced_composition([0.1], [0.0], 1e-6, [0.3])
        assert mod.delta == pytest.approx(1e-6 + 0.6)


class TestGroupPrivacy:
    def test_identity(self):
        b = group_privacy(0.37, 1e-5, 1)
        assert b.epsilon == 0.37 and b.delta == 1e-5

    def test_triple(self):
        b = group_privacy(0.1, 1e-6, 3)
        assert b.epsilon == pytest.approx(0.3)
        assert b.delta == pytest.approx(3 * math.exp(0.2) * 1e-6, rel=1e-12)

    def test_zeros(self):
        b = group_privacy(0.0, 0.0, 5)
        assert b.epsilon == 0.0 and b.delta == 0.0

    def test_k_zero_rejected(self):
        with pytest.raises(ValueError):
            group_privacy(0.1, 1e-6, 0)


class TestCdpConversion:
    def test_golden(self):
        b = cdp_to_approx(0.01, 1e-6)
        assert b.epsilon == pytest.approx(1.1151, abs=1e-3)

    def test_vanishes(self):
        assert cdp_to_approx(1e-12, 1e-6).epsilon < 1e-4

    def test_domain(self):
        with pytest.raises(ValueError):
            cdp_to_approx(1.5, 0.1)
        with pytest.raises(ValueError):
            cdp_to_approx(0.5, 0.3)


class TestTuneOpe:
    def test_canonical(self):
        cfg = tune_ope(10**6, 10, 1.0, 1e-6)
        assert cfg.B == 1
        eps0 = (10**6) ** -0.25 * math.log(10) ** 0.75
        eta = min(eps0, 1.0) ** (2 / 3) / ((10**6) ** (1 / 3) * math.log(10**6 / 1e-6))
        assert cfg.eta == pytest.approx(eta, rel=1e-12)
        assert cfg.p == pytest.approx(10 * eta, rel=1e-12)
        budget = config_budget(cfg)
        assert budget.epsilon <= 1.0 and budget.delta <= 1e-6

    def test_large_epsilon_clamps_B(self):
        assert tune_ope(10**4, 5, 100.0, 1e-6).B == 1

    def test_infeasible(self):
        with pytest.raises(TunerError):
            tune_ope(10, 2, 1e-6, 1e-6)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            tune_ope(100, 1, 1.0, 1e-6)
        with pytest.raises(ValueError):
            tune_ope(100, 5, 1.0, 1.5)

    @given(
        st.integers(2, 6).map(lambda k: 10**k),
        st.integers(2, 200),
        st.floats(0.05, 4.0),
        st.floats(1e-8, 1e-2),
    )
    @settings(max_examples=30, deadline=None)
    def test_self_consistency(self, T, d, eps, delta):
        try:
            cfg = tune_ope(T, d, eps, delta)
        except TunerError:
            assume(False)
        budget = config_budget(cfg)
        assert budget.epsilon <= eps
        assert budget.delta <= delta
        assert 0 < cfg.eta <= ETA_MAX
        assert 0 < cfg.p < 1
        assert T * cfg.p / cfg.B >= 1


class TestTuneOco:
    def test_smoke_and_recheck(self):
        cfg = tune_oco(10**4, 3, 1.0, 1e-6, 1.0, 1.0)
        assert cfg.radius == 0.5
        assert cfg.eta_accounted == pytest.approx(
            effective_eta_rmw(cfg.beta, cfg.lam, 1.0, cfg.delta0), rel=1e-12
        )
        assert cfg.eta_accounted > cfg.eta  # sqrt-log term dominates
        budget = config_budget(cfg)
        assert budget.epsilon <= 1.0 and budget.delta <= 1e-6

    def test_scale_invariance(self):
        a = tune_oco(10**4, 4, 0.5, 1e-6, 1.0, 1.0)
        b = tune_oco(10**4, 4, 0.5, 1e-6, 2.0, 2.0)
        assert a.eta == b.eta and a.B == b.B and a.p == b.p
        assert a.lam == pytest.approx(b.lam)
        assert b.radius == 2 * a.radius

    def test_delta_invalid(self):
        with pytest.raises(ValueError):
            tune_oco(1000, 3, 1.0, 1.0, 1.0, 1.0)

    def test_lambda_formula(self):
        T, d = 10**4, 3
        cfg = tune_oco(T, d, 1.0, 1e-6, 1.0, 1.0)
        expected_lam = max(math.sqrt(T), math.sqrt(d * math.log(T)) / cfg.eta)
        assert cfg.lam == pytest.approx(expected_lam, rel=1e-12)
        assert cfg.beta == pytest.approx(cfg.eta**2 * cfg.lam / 20.0, rel=1e-12)


class TestPrivacyBudget:
    def test_invariants(self):
        with pytest.raises(ValueError):
            PrivacyBudget(-1.0, 0.5)
        with pytest.raises(ValueError):
            PrivacyBudget(1.0, 1.5)

    def test_to_dict(self):
        d = PrivacyBudget(1.0, 0.1, False, ("x",), floor=0.5).to_dict()
        assert d["epsilon"] == 1.0 and d["floor"] == 0.5 and d["notes"] == ["x"]
