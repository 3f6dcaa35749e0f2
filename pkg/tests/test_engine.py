"""Tests for trajectories, variance and convergence-time measurement."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consensusprobe.core.engine import (
    GivenInit,
    RandomRestarts,
    SpectralInit,
    convergence_time,
    default_horizon,
    norm_convergence_time,
    norm_sandwich_holds,
    p_norm_distance,
    parse_init,
    random_initial_state,
    run,
    sample_variance,
    spectral_initial_state,
    worst_case_convergence_time,
)
from consensusprobe.core.exceptions import (
    ArgumentError,
    DegenerateInputError,
    UnsupportedRuleError,
)
from consensusprobe.core.graph import make_sequence
from consensusprobe.core.plugin import lift
from consensusprobe.rules import IdentityRule, LoadBalancingRule, MaxDegreeRule, MetropolisRule

EIGENVECTOR_3 = np.array([1.0, 0.0, -1.0])


class TestVariance:
    def test_consensus(self):
        assert sample_variance(np.full(4, 2.5), 2.5) == 0.0

    def test_pair(self):
        assert sample_variance(np.array([0.0, 1.0]), 0.5) == 0.5

    def test_reference_mean(self):
        assert sample_variance(np.array([0.0, 0.0, 3.0]), 1.0) == 6.0

    def test_defaults_to_own_mean(self):
        assert sample_variance(np.array([0.0, 0.0, 3.0])) == 6.0

    def test_empty(self):
        with pytest.raises(ArgumentError):
            sample_variance(np.array([]))


class TestNorms:
    def test_infinity_norm(self):
        assert p_norm_distance(np.array([0.0, 0.0, 3.0]), 1.0, math.inf) == 2.0

    def test_two_norm(self):
        assert p_norm_distance(np.array([0.0, 0.0, 3.0]), 1.0, 2) == pytest.approx(math.sqrt(6))

    @pytest.mark.parametrize("p", [1, 2, 3.5, math.inf])
    def test_consensus_distance_zero(self, p):
        assert p_norm_distance(np.full(5, -4.0), -4.0, p) == 0.0

    def test_order_below_one(self):
        with pytest.raises(ArgumentError):
            p_norm_distance(np.zeros(3), 0.0, 0.5)


class TestRun:
    def test_identity_keeps_state(self, rng):
        x0 = rng.standard_normal(4)
        trajectory = run(lift(IdentityRule()), make_sequence("constant-ring", 4), x0, 5)
        assert trajectory.states.shape == (6, 4)
        assert all(np.array_equal(state, x0) for state in trajectory.states)

    def test_one_metropolis_step(self, metropolis):
        trajectory = run(metropolis, make_sequence("constant-line", 3), np.array([0.0, 0.0, 3.0]), 1)
        assert trajectory.states[1].tolist() == [0.0, 1.0, 2.0]
        assert trajectory.variance.tolist() == [6.0, 2.0]

    @pytest.mark.parametrize("rule", [MaxDegreeRule(), MetropolisRule(), LoadBalancingRule()], ids=lambda r: r.name)
    def test_consensus_stays(self, rule):
        trajectory = run(rule, make_sequence("round-robin-single-edge", 5), np.full(5, 7.0), 100)
        assert np.all(trajectory.states == 7.0)

    def test_step_recurrence(self, metropolis, rng):
        seq = make_sequence("seeded-random-spanning", 6, seed=11)
        trajectory = run(metropolis, seq, rng.standard_normal(6), 20)
        for t in range(20):
            expected = metropolis.step(seq.schedule(t), trajectory.states[t])
            assert np.array_equal(trajectory.states[t + 1], expected)

    def test_dimension_mismatch(self, metropolis):
        with pytest.raises(ArgumentError):
            run(metropolis, make_sequence("constant-line", 3), np.zeros(4), 3)

    def test_negative_horizon(self, metropolis):
        with pytest.raises(ArgumentError):
            run(metropolis, make_sequence("constant-line", 3), np.zeros(3), -1)

    def test_restart_determinism(self, load_balancing):
        seq = make_sequence("seeded-random-spanning", 8, seed=5)
        x0 = random_initial_state(8, seed=5, index=2)
        first = run(load_balancing, seq, x0, 50, seed=5)
        second = run(load_balancing, seq, x0.copy(), 50, seed=5)
        assert np.array_equal(first.states, second.states)

    def test_thinned_storage(self, metropolis):
        trajectory = run(
            metropolis,
            make_sequence("constant-line", 3),
            np.array([0.0, 0.0, 3.0]),
            10,
            max_stored_values=5,
        )
        assert not trajectory.is_full
        assert sorted(trajectory.checkpoints) == [0, 3, 6, 9, 10]
        assert len(trajectory.variance) == 11
        full = run(metropolis, make_sequence("constant-line", 3), np.array([0.0, 0.0, 3.0]), 10)
        assert np.array_equal(trajectory.final_state, full.final_state)

    @pytest.mark.parametrize("rule", [MaxDegreeRule(), MetropolisRule(), LoadBalancingRule()], ids=lambda r: r.name)
    def test_mean_conserved(self, rule, rng):
        x0 = 100.0 * rng.standard_normal(10)
        trajectory = run(rule, make_sequence("seeded-random-spanning", 10, seed=3), x0, 200)
        m = float(np.mean(x0))
        drift = np.abs(trajectory.states.mean(axis=1) - m)
        assert np.all(drift <= 1e-9 * (1.0 + abs(m)))

    @pytest.mark.parametrize("rule", [MaxDegreeRule(), MetropolisRule()], ids=lambda r: r.name)
    def test_variance_series_non_increasing(self, rule, rng):
        trajectory = run(rule, make_sequence("round-robin-single-edge", 6), rng.standard_normal(6), 300)
        assert np.all(np.diff(trajectory.variance) <= 1e-15 * trajectory.variance[0])


class TestConvergenceTime:
    def test_second_eigenvector_line3(self, metropolis):
        report = convergence_time(metropolis, make_sequence("constant-line", 3), EIGENVECTOR_3, 0.01)
        assert report.T == 6
        assert report.certified
        assert report.V0 == 2.0
        assert report.V_at_T <= 0.01 * report.V0

    def test_exact_average_after_one_step(self, metropolis):
        report = convergence_time(metropolis, make_sequence("constant-line", 2), np.array([0.0, 1.0]), 0.3)
        assert report.T == 1

    def test_consensus_start_rejected(self, metropolis):
        with pytest.raises(DegenerateInputError):
            convergence_time(metropolis, make_sequence("constant-line", 3), np.full(3, 2.0), 0.01)

    @pytest.mark.parametrize("epsilon", [0.0, 1.0, -0.5])
    def test_epsilon_range(self, metropolis, epsilon):
        with pytest.raises(ArgumentError):
            convergence_time(metropolis, make_sequence("constant-line", 3), EIGENVECTOR_3, epsilon)

    def test_not_reached(self, metropolis):
        report = convergence_time(
            metropolis, make_sequence("constant-edgeless", 3), EIGENVECTOR_3, 0.5, t_max=40
        )
        assert report.T is None
        assert not report.reached
        assert report.to_dict()["T"] == "not-reached"
        assert report.rounds == 40

    def test_threshold_semantics_without_early_stop(self, metropolis):
        seq = make_sequence("constant-line", 5)
        x0 = random_initial_state(5, seed=1)
        report = convergence_time(metropolis, seq, x0, 0.01, t_max=400, stop_when_certified=False)
        trajectory = run(metropolis, seq, x0, 400)
        threshold = 0.01 * trajectory.variance[0]
        assert np.all(trajectory.variance[report.T :] <= threshold)
        assert trajectory.variance[report.T - 1] > threshold
        assert report.rounds == 400
        assert report.certified

    def test_early_stop_matches_full_horizon(self, max_degree):
        seq = make_sequence("round-robin-single-edge", 6)
        x0 = random_initial_state(6, seed=9)
        early = convergence_time(max_degree, seq, x0, 0.01)
        full = convergence_time(max_degree, seq, x0, 0.01, t_max=early.horizon, stop_when_certified=False)
        assert early.T == full.T
        assert early.rounds == early.T

    def test_nonmonotone_rule_uses_spectral_certificate(self, registry):
        rule = registry.get("custom:cubic-mean")
        report = convergence_time(rule, make_sequence("constant-line", 4), random_initial_state(4, 0), 0.1)
        assert report.T is not None
        assert report.rounds == report.horizon
        assert not report.certified

    @pytest.mark.parametrize(
        "rule, kind, B",
        [
            (MaxDegreeRule(), "round-robin-single-edge", 7),
            (MetropolisRule(), "intermittent-line", 3),
            (LoadBalancingRule(), "constant-ring", 1),
            (LoadBalancingRule(), "round-robin-single-edge", 7),
            (MetropolisRule(), "seeded-random-spanning", 1),
        ],
        ids=lambda v: getattr(v, "name", str(v)),
    )
    def test_reaches_tight_threshold_on_connected_fixtures(self, rule, kind, B):
        n = 8
        params = {"period": 3} if kind == "intermittent-line" else {}
        seq = make_sequence(kind, n, params, seed=4)
        report = convergence_time(rule, seq, random_initial_state(n, seed=4), 1e-9, t_max=200 * n * n * B)
        assert report.reached


class TestWorstCase:
    def test_spectral_line3(self, metropolis):
        report = worst_case_convergence_time(metropolis, make_sequence("constant-line", 3), 0.01, SpectralInit())
        assert report.T == 6
        assert report.lambda2 == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert report.strategy == "spectral"

    def test_single_restart_equals_direct(self, metropolis):
        seq = make_sequence("constant-line", 6)
        worst = worst_case_convergence_time(metropolis, seq, 0.01, RandomRestarts(1, seed=42))
        direct = convergence_time(metropolis, seq, random_initial_state(6, 42, 0), 0.01)
        assert worst.T == direct.T
        assert np.array_equal(worst.x0, direct.x0)

    def test_spectral_dominates_random(self, metropolis):
        seq = make_sequence("constant-line", 16)
        spectral = worst_case_convergence_time(metropolis, seq, 0.01, SpectralInit())
        for seed in range(100):
            single = convergence_time(metropolis, seq, random_initial_state(16, seed), 0.01)
            assert spectral.T >= single.T

    def test_parallel_restarts_match_sequential(self, load_balancing):
        seq = make_sequence("constant-line", 8)
        strategy = RandomRestarts(6, seed=7)
        sequential = worst_case_convergence_time(load_balancing, seq, 0.01, strategy, jobs=1)
        parallel = worst_case_convergence_time(load_balancing, seq, 0.01, strategy, jobs=3)
        assert sequential.T == parallel.T
        assert np.array_equal(sequential.x0, parallel.x0)

    def test_spectral_unsupported_for_load_balancing(self, load_balancing):
        with pytest.raises(UnsupportedRuleError):
            worst_case_convergence_time(load_balancing, make_sequence("constant-line", 5), 0.01, SpectralInit())

    def test_cubic_mean_linearizes_to_metropolis(self, registry, metropolis):
        seq = make_sequence("constant-line", 5)
        lam_cubic, v_cubic = spectral_initial_state(registry.get("custom:cubic-mean"), seq)
        lam_metropolis, v_metropolis = spectral_initial_state(metropolis, seq)
        assert lam_cubic == pytest.approx(lam_metropolis, abs=1e-8)
        assert np.allclose(v_cubic, v_metropolis, atol=1e-6)

    def test_nonlinear_spectral_start_is_small(self, registry, metropolis):
        seq = make_sequence("constant-line", 5)
        cubic = worst_case_convergence_time(registry.get("custom:cubic-mean"), seq, 0.01, SpectralInit())
        linear = worst_case_convergence_time(metropolis, seq, 0.01, SpectralInit())
        assert np.linalg.norm(cubic.x0) == pytest.approx(SpectralInit().nonlinear_scale)
        assert np.linalg.norm(linear.x0) == pytest.approx(1.0)
        assert cubic.T == linear.T

    def test_given_vector(self, metropolis):
        report = worst_case_convergence_time(
            metropolis, make_sequence("constant-line", 3), 0.01, GivenInit((1.0, 0.0, -1.0))
        )
        assert report.T == 6
        assert report.strategy == "vector"


class TestInitParsing:
    def test_spectral(self):
        assert isinstance(parse_init("spectral"), SpectralInit)

    def test_random(self):
        assert parse_init("random:20", seed=3) == RandomRestarts(20, 3)

    def test_vector(self):
        assert parse_init("vector:0,0,3").values == (0.0, 0.0, 3.0)

    def test_file(self, tmp_path):
        path = tmp_path / "x0.txt"
        path.write_text("1.5\n-2\n0.25\n")
        strategy = parse_init(f"file:{path}")
        assert strategy.values == (1.5, -2.0, 0.25)

    @pytest.mark.parametrize("text", ["eigen", "random:k", "random:0", "vector:", "file:/no/such/file", "vector:1,x"])
    def test_invalid(self, text):
        with pytest.raises(ArgumentError):
            parse_init(text)

    def test_random_state_reproducible(self):
        assert np.array_equal(random_initial_state(5, 1, 2), random_initial_state(5, 1, 2))
        assert not np.array_equal(random_initial_state(5, 1, 2), random_initial_state(5, 1, 3))


class TestHorizonAndNorms:
    def test_default_horizon(self):
        assert default_horizon(3, 1, 0.5) == 1000
        assert default_horizon(32, 2, 0.01) == math.ceil(50 * 1024 * 2 * math.log(100))

    def test_norm_convergence_time(self, metropolis):
        trajectory = run(metropolis, make_sequence("constant-line", 3), EIGENVECTOR_3, 30)
        # ||x(t)||_2 = (2/3)^t ||x(0)||_2
        assert norm_convergence_time(trajectory, 0.01, 2) == 12

    def test_norm_convergence_not_reached(self, metropolis):
        trajectory = run(metropolis, make_sequence("constant-line", 3), EIGENVECTOR_3, 3)
        assert norm_convergence_time(trajectory, 0.01, math.inf) is None

    @given(
        st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=10),
        st.sampled_from(["constant-line", "constant-star", "round-robin-single-edge"]),
        st.sampled_from([MaxDegreeRule(), MetropolisRule(), LoadBalancingRule()]),
    )
    @settings(max_examples=60, deadline=None)
    def test_norm_sandwich(self, values, kind, rule):
        seq = make_sequence(kind, len(values))
        trajectory = run(rule, seq, np.array(values), 25)
        assert norm_sandwich_holds(trajectory)
