import csv

import numpy as np
import pytest

from asmc.diagnostics import (
    CoverageReport,
    RunFailedError,
    TestFunction,
    baseline_chains,
    baseline_direct_langevin,
    basin_indicator,
    complexity_sweep,
    coverage_trial,
    delta_scaling,
    indicator_K,
    mc_error,
    separation_benchmark,
    tanh_first,
)
from asmc.oracle import gibbs_reference
from asmc.oracle.grid import sample_from_grid
from asmc.potential import landscape_summary, make_potential
from asmc.schedule import PlanConstants, build_schedule
from asmc.smc import SamplerOptions


class Plan:
    def __init__(self, N, T):
        self.N, self.T = N, T


@pytest.fixture(scope="module")
def quartic():
    return make_potential("quartic")


@pytest.fixture(scope="module")
def landscape(quartic):
    return landscape_summary(quartic)


class TestMcError:
    def test_constant_function(self):
        X = np.random.default_rng(0).normal(size=(30, 1))
        assert mc_error(X, lambda x: np.ones(len(x)), 1.0) == 0.0

    def test_degenerate_ensemble(self, quartic):
        X = np.repeat(quartic.minima[:1], 100, axis=0)
        assert mc_error(X, basin_indicator(quartic, 1), 0.5) == 0.5

    def test_grid_draws_clt(self, quartic, landscape):
        ref = gibbs_reference(quartic, 0.05, landscape)
        X = sample_from_grid(ref, 10_000, np.random.default_rng(1))
        assert mc_error(X, basin_indicator(quartic, 1), 0.5) < 3 / np.sqrt(10_000)


class TestTestFunctions:
    def test_oscillation_on_probes(self, quartic, landscape):
        probes = np.linspace(-3, 3, 1001)[:, None]
        for h in (basin_indicator(quartic, 2), tanh_first(), indicator_K(landscape)):
            assert h.osc >= 0 and h.check_oscillation(probes)

    def test_negative_oscillation_rejected(self):
        with pytest.raises(ValueError):
            TestFunction("bad", lambda x: x, -1.0)

    def test_reference_attached(self, quartic):
        h = basin_indicator(quartic).with_reference(0.5)
        assert h.reference == 0.5 and h.name == "basin_1"


class TestCoverage:
    def test_huge_delta_always_succeeds(self, quartic):
        h = tanh_first().with_reference(0.0)
        osc1 = TestFunction("half_tanh", lambda x: 0.5 * h(x), 1.0, 0.0)
        report = coverage_trial(quartic, build_schedule(0.2, 3), Plan(50, 0.05), osc1, 2.0, 0.1, range(20))
        assert report.success_fraction == 1.0 and report.passed

    def test_reproducible_and_order_free(self, quartic):
        h = basin_indicator(quartic).with_reference(0.5)
        sched = build_schedule(0.2, 5)
        a = coverage_trial(quartic, sched, Plan(100, 0.1), h, 0.1, 0.1, range(20))
        b = coverage_trial(quartic, sched, Plan(100, 0.1), h, 0.1, 0.1, list(reversed(range(20))))
        assert a.errors == b.errors and a.to_dict() == b.to_dict()

    def test_minimum_runs_and_reference(self, quartic):
        with pytest.raises(ValueError):
            coverage_trial(quartic, build_schedule(0.2, 3), Plan(10, 0.05), basin_indicator(quartic).with_reference(0.5), 0.1, 0.1, range(5))
        with pytest.raises(ValueError):
            coverage_trial(quartic, build_schedule(0.2, 3), Plan(10, 0.05), basin_indicator(quartic), 0.1, 0.1, range(20))

    def test_failure_names_the_seed(self, quartic):
        h = basin_indicator(quartic).with_reference(0.5)
        opts = SamplerOptions(guard_radius=1e-3)
        with pytest.raises(RunFailedError) as err:
            coverage_trial(quartic, build_schedule(0.2, 3), Plan(10, 0.05), h, 0.1, 0.1, range(3, 23), opts)
        assert err.value.seed == 3

    def test_report_arithmetic(self, tmp_path):
        r = CoverageReport([2, 1, 3], [0.01, 0.2, 0.03], delta=0.05, theta=0.1)
        assert r.success_fraction == pytest.approx(2 / 3)
        assert r.slack == pytest.approx(1.6448536269514722 * np.sqrt(0.09 / 3))
        assert r.passed  # 2/3 >= 0.9 - 0.285
        assert not CoverageReport([1, 2, 3], [0.01, 0.2, 0.3], 0.05, 0.1).passed
        path = tmp_path / "cov.csv"
        r.write_csv(path)
        rows = list(csv.DictReader(path.open()))
        assert [row["seed"] for row in rows] == ["1", "2", "3"]
        assert rows[0]["success"] == "0"

    @pytest.mark.slow
    def test_fewer_particles_lower_coverage(self, quartic):
        h = basin_indicator(quartic).with_reference(0.5)
        sched = build_schedule(0.1, 10)
        fractions = []
        for N in (2000, 500):
            reps = [
                coverage_trial(quartic, sched, Plan(N, 0.2), h, 0.03, 0.1, range(r * 20, r * 20 + 20)).success_fraction
                for r in range(3)
            ]
            fractions.append(reps)
        assert all(lo < hi for hi, lo in zip(*fractions))


class TestScaling:
    def test_sweep_slopes(self, landscape):
        out = complexity_sweep(landscape, [1 / 4, 1 / 8, 1 / 16, 1 / 32], 0.1, 0.1, alpha=1 / 3)
        assert 1 <= out["budget_slope"] <= 8
        assert abs(out["mixing_slope"] - landscape.energy_barrier) < 0.2 * landscape.energy_barrier
        assert len(out["rows"]) == 4 and not out["notes"]

    def test_infeasible_eta_skipped(self, landscape):
        c = PlanConstants(1e-2, 1e-12)
        out = complexity_sweep(landscape, [1 / 4, 1 / 32], 0.1, 0.1, c, budget_cap=1e5, spectral=False)
        assert len(out["rows"]) == 1 and out["notes"]

    def test_doubling_delta_never_increases_budget(self, landscape):
        c = PlanConstants(1e-3, 1e-12)
        small = complexity_sweep(landscape, [1 / 4, 1 / 8, 1 / 16], 0.05, 0.1, c, spectral=False)
        large = complexity_sweep(landscape, [1 / 4, 1 / 8, 1 / 16], 0.1, 0.1, c, spectral=False)
        assert all(b["budget"] <= a["budget"] for a, b in zip(small["rows"], large["rows"]))

    def test_decreasing_etas_required(self, landscape):
        with pytest.raises(ValueError):
            complexity_sweep(landscape, [0.1, 0.2], 0.1, 0.1)

    def test_delta_scaling(self, landscape):
        out = delta_scaling(landscape, 0.1, [0.2, 0.1, 0.05, 0.025], 0.1)
        assert out["N_slope"] == pytest.approx(2.0, abs=0.05)
        assert out["budget_slope"] > out["N_slope"]


class TestBaseline:
    def test_zero_budget(self, quartic):
        h = basin_indicator(quartic)
        assert baseline_direct_langevin(quartic, 0.05, 0, 0, h, 0.5) == 0.5
        assert baseline_direct_langevin(quartic, 0.05, 0, 0, h, 0.3, start=quartic.minima[1]) == pytest.approx(0.3)

    def test_hot_chain_mixes(self, quartic):
        h = basin_indicator(quartic)
        assert baseline_direct_langevin(quartic, 0.5, 400_000, 1, h, 0.5) < 0.05

    def test_cold_chain_is_trapped(self, quartic):
        h = basin_indicator(quartic)
        errors = baseline_chains(quartic, 0.05, 100_000, range(4), h, 0.5)
        assert min(errors) > 0.3

    def test_seeds_are_independent_streams(self, quartic):
        h = tanh_first()
        a = baseline_chains(quartic, 0.3, 5_000, [1, 2], h, 0.0)
        b = baseline_chains(quartic, 0.3, 5_000, [2], h, 0.0)
        assert a[1] == b[0] and a[0] != a[1]

    def test_separation_summary(self):
        out = separation_benchmark([0.01, 0.02, 0.03], [0.5, 0.5, 0.4])
        assert out["ratio"] == pytest.approx(0.04)
