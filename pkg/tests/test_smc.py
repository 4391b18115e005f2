import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asmc.dynamics import LangevinParams, simulate_ensemble
from asmc.potential import landscape_summary, make_potential
from asmc.schedule import BudgetExceededError, build_schedule
from asmc.smc import (
    InitialPointError,
    ParticleEnsemble,
    SamplerOptions,
    TraceWriter,
    WeightCollapseError,
    effective_sample_size,
    initial_points,
    log_weight,
    normalized_weights,
    read_samples_csv,
    resample,
    resample_multinomial,
    run_asmc,
    total_steps,
    write_samples_csv,
)


class Plan:
    def __init__(self, N, T):
        self.N, self.T = N, T


@pytest.fixture(scope="module")
def quartic():
    return make_potential("quartic")


def ensemble(log_w, positions=None):
    log_w = np.asarray(log_w, float)
    if positions is None:
        positions = np.arange(len(log_w), dtype=float)[:, None]
    return ParticleEnsemble(1, positions, log_w, np.arange(len(log_w)))


class TestWeights:
    def test_zero_at_global_minimum(self, quartic):
        assert log_weight(quartic, 0.5, 1 / 3, quartic.minima[0]) == 0.0

    def test_formula(self, quartic):
        assert log_weight(quartic, 0.5, 1 / 3, [0.0]) == pytest.approx(-1.0)

    def test_rejects_heating(self, quartic):
        with pytest.raises(ValueError):
            log_weight(quartic, 0.3, 0.5, [0.0])

    def test_normalized_weights_survive_huge_offsets(self):
        w = normalized_weights([-1e4, -1e4 - np.log(3)])
        assert w == pytest.approx([0.75, 0.25])

    def test_total_collapse(self):
        with pytest.raises(WeightCollapseError):
            normalized_weights([-np.inf, -np.inf])
        with pytest.raises(WeightCollapseError):
            effective_sample_size([-np.inf])


class TestESS:
    def test_equal_weights(self):
        assert effective_sample_size(np.full(7, -3.0)) == pytest.approx(7)

    def test_single_weight(self):
        assert effective_sample_size([0.0, -np.inf, -np.inf]) == pytest.approx(1)

    def test_two_particles(self):
        assert effective_sample_size(np.log([0.8, 0.2])) == pytest.approx(1 / 0.68, rel=1e-12)
        assert round(effective_sample_size(np.log([0.8, 0.2])), 4) == 1.4706

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=40))
    @settings(max_examples=100, deadline=None)
    def test_bounds(self, lw):
        ess = effective_sample_size(lw)
        assert 1 - 1e-9 <= ess <= len(lw) + 1e-9


class TestResample:
    def test_degenerate_mass(self):
        new, counts = resample_multinomial(ensemble([0.0, -np.inf, -np.inf]), np.random.default_rng(0))
        assert np.all(new.positions == 0.0)
        assert counts.tolist() == [3, 0, 0]
        assert np.all(new.log_weights == 0) and new.level == 2

    def test_equal_weights_uniform(self):
        rng = np.random.default_rng(1)
        counts = sum(resample_multinomial(ensemble(np.zeros(4)), rng)[1] for _ in range(25_000))
        assert counts.sum() == 100_000
        assert np.all(np.abs(counts - 25_000) < 3 * np.sqrt(100_000 * 0.25 * 0.75))

    def test_large_draw_matches_multinomial(self):
        # 10^5 selections from a three-particle ensemble with probabilities (0.5, 0.3, 0.2)
        p = np.array([0.5, 0.3, 0.2])
        ens = ensemble(np.log(p) - 7.0)
        rng = np.random.default_rng(2)
        got = sum(resample(ens, rng)[1] for _ in range(33_334))
        n = got.sum()
        assert np.all(np.abs(got - n * p) < 3 * np.sqrt(n * p * (1 - p)))

    @pytest.mark.parametrize("scheme", ["multinomial", "systematic"])
    def test_counts_sum_to_n(self, scheme):
        new, counts = resample(ensemble(np.random.default_rng(3).normal(size=50)), np.random.default_rng(4), scheme)
        assert counts.sum() == 50 and len(new.positions) == 50

    def test_stream_ids_follow_slots(self):
        new, _ = resample(ensemble([0.0, -1.0, -2.0]), np.random.default_rng(5))
        assert new.stream_ids.tolist() == [0, 1, 2]

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            resample(ensemble([0.0]), np.random.default_rng(0), "residual")

    def test_conditional_expectation(self):
        lw = np.array([-0.3, 0.2, -1.5, 0.9, -0.1])
        h = np.array([1.0, -2.0, 0.5, 3.0, 0.0])
        p = normalized_weights(lw)
        exact = float(p @ h)
        ens = ensemble(lw, h[:, None])  # positions hold h itself
        rng = np.random.default_rng(6)
        means = np.array([resample(ens, rng)[0].positions[:, 0].mean() for _ in range(100_000)])
        var = float(p @ (h - exact) ** 2) / 5
        assert abs(means.mean() - exact) < 3 * np.sqrt(var / len(means))


class TestInitialPoints:
    def test_uniform_cube(self):
        X = initial_points("uniform", 1000, 2, 9)
        assert X.shape == (1000, 2) and np.all(np.abs(X) <= 1)
        assert np.array_equal(X, initial_points("uniform", 1000, 2, 9))

    def test_origin(self):
        assert np.all(initial_points("origin", 5, 3, 0) == 0)

    def test_unknown(self):
        with pytest.raises(InitialPointError):
            initial_points("gaussian", 5, 1, 0)


class TestRun:
    def test_single_level_is_direct_langevin(self, quartic):
        with pytest.warns(UserWarning):
            sched = build_schedule(0.3, 1)
        X0 = initial_points("uniform", 200, 1, 3)
        out, trace = run_asmc(quartic, sched, Plan(200, 0.5), X0, 3)
        direct = simulate_ensemble(X0, quartic, LangevinParams(0.3, 0.5, 0.01), 3, 1)
        assert np.array_equal(out, direct)
        assert len(trace.records) == 1

    def test_deterministic(self, quartic):
        sched = build_schedule(0.1, 10)
        a, ta = run_asmc(quartic, sched, Plan(300, 0.3), "uniform", 11)
        b, tb = run_asmc(quartic, sched, Plan(300, 0.3), "uniform", 11)
        assert a.tobytes() == b.tobytes()
        assert [r.ess for r in ta.records] == [r.ess for r in tb.records]
        c, _ = run_asmc(quartic, sched, Plan(300, 0.3), "uniform", 12)
        assert not np.array_equal(a, c)

    def test_worker_count_does_not_change_output(self, quartic):
        sched = build_schedule(0.1, 5)
        a, _ = run_asmc(quartic, sched, Plan(600, 0.2), "uniform", 1, SamplerOptions(workers=1))
        b, _ = run_asmc(quartic, sched, Plan(600, 0.2), "uniform", 1, SamplerOptions(workers=3))
        assert np.array_equal(a, b)

    def test_trace_records(self, quartic):
        sched = build_schedule(0.1, 10)
        L = landscape_summary(quartic)
        seen = []
        _, trace = run_asmc(quartic, sched, Plan(200, 0.2), "uniform", 0, landscape=L, on_level=seen.append)
        assert seen == trace.records
        assert [r.level for r in trace.records] == list(range(1, 11))
        for r in trace.records[:-1]:
            assert sum(c * n for c, n in enumerate(r.count_histogram)) == 200
            assert 1 <= r.ess <= 200
            assert sum(r.basin_fractions) == pytest.approx(1)
            assert 0 <= r.frac_in_K <= 1

    def test_budget_cap(self, quartic):
        with pytest.raises(BudgetExceededError):
            run_asmc(quartic, build_schedule(0.1, 10), Plan(1000, 10.0), "uniform", 0, SamplerOptions(budget_cap=1e5))

    def test_initial_energy_bound(self, quartic):
        with pytest.raises(InitialPointError):
            run_asmc(quartic, build_schedule(0.1, 3), Plan(2, 0.1), np.array([[5.0], [0.0]]), 0)
        with pytest.raises(InitialPointError):
            run_asmc(quartic, build_schedule(0.1, 3), Plan(3, 0.1), np.zeros((2, 1)), 0)

    def test_short_level_time_is_one_step(self, quartic):
        sched = build_schedule(0.1, 3)
        assert total_steps(sched, Plan(10, 0.001), 0.01) == 30
        out, _ = run_asmc(quartic, sched, Plan(10, 0.001), "uniform", 0)
        assert out.shape == (10, 1)

    def test_symmetric_quartic_balances_wells(self, quartic):
        out, trace = run_asmc(quartic, build_schedule(0.1, 10), Plan(4000, 1.0), "uniform", 5)
        assert abs(np.mean(quartic.basin_index(out) == 1) - 0.5) < 0.05

    def test_weight_spread_shrinks_with_finer_schedule(self, quartic):
        def max_norm_weight(M):
            _, trace = run_asmc(quartic, build_schedule(0.1, M), Plan(1000, 0.3), "uniform", 2)
            return max(1000 / r.ess for r in trace.records[:-1])

        assert max_norm_weight(40) < max_norm_weight(10) < max_norm_weight(3)


class TestCsv:
    def test_roundtrip(self, tmp_path):
        X = np.random.default_rng(0).normal(size=(20, 2))
        path = tmp_path / "s.csv"
        write_samples_csv(path, X, "abc123")
        assert path.read_text().splitlines()[0] == "# config_hash=abc123"
        assert np.array_equal(read_samples_csv(path), X)

    def test_trace_writer(self, tmp_path, quartic):
        path = tmp_path / "trace.csv"
        writer = TraceWriter(path, quartic.n_minima, "h")
        run_asmc(quartic, build_schedule(0.1, 4), Plan(50, 0.1), "uniform", 0, on_level=writer)
        lines = path.read_text().splitlines()
        rows = list(csv.DictReader(lines[1:]))
        assert len(rows) == 4 and rows[0]["level"] == "1"
        assert "frac_basin_2" in rows[0]
