import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asmc.schedule import (
    BudgetExceededError,
    PlanConstants,
    PlanError,
    apply_overrides,
    build_schedule,
    calibrate_constants,
    critical_level,
    plan_parameters,
)


class TestSchedule:
    def test_three_levels(self):
        s = build_schedule(1 / 3, 3)
        assert s.levels == pytest.approx([1, 0.5, 1 / 3])
        assert s.inverse_temperatures == pytest.approx([1, 2, 3])
        assert s.levels[-1] == 1 / 3

    def test_closed_form(self):
        eta, M = 0.07, 9
        s = build_schedule(eta, M)
        k = np.arange(1, M + 1)
        expected = (M - 1) * eta / ((M - 1) * eta + (k - 1) * (1 - eta))
        assert s.levels == pytest.approx(expected, rel=1e-14)

    def test_eta_equal_eta1(self):
        assert np.all(build_schedule(0.5, 4, eta1=0.5).levels == 0.5)

    def test_errors(self):
        with pytest.raises(ValueError):
            build_schedule(1.5, 3)
        with pytest.raises(ValueError):
            build_schedule(0.5, 0)

    def test_single_level_is_degenerate(self):
        with pytest.warns(UserWarning):
            s = build_schedule(0.2, 1)
        assert s.degenerate and s.levels.tolist() == [0.2]

    @given(st.floats(0.01, 0.99), st.integers(2, 60), st.floats(1.0, 3.0))
    @settings(max_examples=100, deadline=None)
    def test_equal_inverse_spacing(self, eta, M, eta1):
        s = build_schedule(eta, M, eta1)
        d = np.diff(1.0 / s.levels)
        assert np.allclose(d, d[0], rtol=1e-12, atol=1e-12)
        assert s.levels[0] == eta1 and s.levels[-1] == eta
        assert np.all(np.diff(s.levels) <= 0)


class TestCriticalLevel:
    def test_examples(self):
        s = build_schedule(1 / 3, 3)
        assert critical_level(s, 0.4) == 3
        assert critical_level(s, 0.5) == 2
        assert critical_level(s, 0.9) == 2
        assert critical_level(s, 0.3) == 4

    @given(st.floats(0.01, 1.0), st.floats(0.01, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_monotone(self, a, b):
        s = build_schedule(0.05, 20)
        lo, hi = sorted((a, b))
        assert critical_level(s, lo) >= critical_level(s, hi)


class TestPlan:
    def test_M_and_N(self):
        p = plan_parameters(0.1, 0.1, 0.1, 1.0, 1.0, 1.0, budget_cap=None)
        assert p.M == 10
        assert p.N == 46052 == math.ceil(100 * 100 * math.log(100))

    def test_T_formula(self):
        c = PlanConstants(c_n=1e-3, c_t=1e-9)
        p = plan_parameters(0.2, 0.1, 0.1, 0.5, 1.0, 1.2, c, budget_cap=None)
        M, N = p.M, p.N
        T = 1e-9 * ((M * N / 0.1) ** (1.2 * 1.5) * (math.log(N) + math.log(M / 0.1)) + math.log(10) + 5)
        assert p.T == pytest.approx(T, rel=1e-12)

    def test_requirements_hold(self):
        p = plan_parameters(0.05, 0.05, 0.1, 1.0, 1.0, 1.1, PlanConstants(0.01, 1e-14), budget_cap=None)
        assert all(p.satisfies_requirements().values())

    def test_critical_temperature(self):
        c = PlanConstants(c_n=0.01, c_t=1e-14, c_tem=2.0)
        p = plan_parameters(0.05, 0.05, 0.1, 1.0, 1.0, 1.0, c, C_K=1 / math.sqrt(2), budget_cap=None)
        assert p.eta_cr == pytest.approx((1 / math.sqrt(2)) / math.log(2.0 * p.M * p.N / 0.1))
        assert p.k_cr == critical_level(p.schedule(), p.eta_cr)

    def test_budget_cap(self):
        with pytest.raises(BudgetExceededError):
            plan_parameters(0.05, 0.1, 0.1, 1.0, 1.0, 1.0)

    def test_invalid_probabilities(self):
        with pytest.raises(ValueError):
            plan_parameters(0.1, 1.5, 0.1, 1.0, 1.0, 1.0)

    @given(st.floats(0.01, 0.5), st.floats(0.01, 0.5), st.floats(0.02, 0.5))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_delta(self, d1, d2, eta):
        lo, hi = sorted((d1, d2))
        a = plan_parameters(eta, lo, 0.1, 1.0, 1.0, 1.0, budget_cap=None)
        b = plan_parameters(eta, hi, 0.1, 1.0, 1.0, 1.0, budget_cap=None)
        assert a.N >= b.N and a.T >= b.T

    def test_overrides(self):
        p = plan_parameters(1 / 3, 0.1, 0.1, 1.0, 1.0, 1.0, budget_cap=None)
        q = apply_overrides(p, M=3)
        assert q.schedule().levels == pytest.approx([1, 0.5, 1 / 3])
        with pytest.raises(PlanError):
            apply_overrides(p, N=10)
        r = apply_overrides(p, N=10, T=0.5, unsafe=True)
        assert (r.N, r.T) == (10, 0.5) and r.overridden == ("N", "T")

    def test_budget_slope_near_seven_for_small_alpha(self):
        etas = [1 / 4, 1 / 8, 1 / 16, 1 / 32]
        budgets = [plan_parameters(e, 0.1, 0.1, 1e-6, 1.0, 1.0, budget_cap=None).budget for e in etas]
        slope = np.polyfit(np.log([4, 8, 16, 32]), np.log(budgets), 1)[0]
        assert slope <= 7.0 + 0.5


class TestCalibrate:
    def test_finds_threshold(self):
        # passes iff c_n >= 0.01 and c_t >= 1e-6
        constants, history = calibrate_constants(
            lambda c: c.c_n >= 0.01 and c.c_t >= 1e-6, PlanConstants(1.0, 1.0), factor=1.5
        )
        assert 0.01 <= constants.c_n < 0.015
        assert 1e-6 <= constants.c_t < 1.5e-6
        assert all(ok == (c.c_n >= 0.01 and c.c_t >= 1e-6) for c, ok in history)

    def test_grows_when_start_fails(self):
        constants, _ = calibrate_constants(lambda c: c.c_n >= 3.0, PlanConstants(1.0, 1.0), factor=2.0)
        assert 3.0 <= constants.c_n < 6.0
