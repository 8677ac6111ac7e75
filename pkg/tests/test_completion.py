import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisyrows.completion import (
    STATUS_OK,
    STATUS_PRECONDITION,
    CompletionParams,
    DiscoveryState,
    compute_eta,
    discover,
    identify_noisy_rows,
    query_budget,
    recover,
    run,
)
from noisyrows.instances import GeneratorConfig, generate
from noisyrows.linalg import is_invertible, numerical_rank
from noisyrows.oracle import QueryOracle
from noisyrows.verify import max_relative_error

PARAMS = CompletionParams(epsilon=0.1)


class TestComputeEta:
    def test_tall(self):
        assert compute_eta(100, 50, 0.1) == 10

    def test_square(self):
        assert compute_eta(8, 8, 0.1) == 5

    def test_floor_at_one(self):
        assert compute_eta(10, 10, 0.99) == 1

    def test_epsilon_range(self):
        with pytest.raises(ValueError):
            compute_eta(4, 4, 0.0)
        with pytest.raises(ValueError):
            compute_eta(4, 4, 1.0)


class TestDiscover:
    def test_rank_one_all_ones(self):
        o = QueryOracle(np.ones((4, 4)), rng_seed=0)
        state = discover(o, PARAMS)
        assert state.rank_estimate == 1
        assert len(state.pivot_rows) == 1 and len(state.pivot_cols) == 1

    def test_zero_matrix(self):
        o = QueryOracle(np.zeros((4, 4)), rng_seed=0)
        state = discover(o, PARAMS)
        assert state.rank_estimate == 0
        assert state.pivot_rows == [] and state.pivot_cols == []

    def test_seed7_rank_found(self):
        inst = generate(GeneratorConfig(n1=6, n2=5, rank_r=1, num_noisy=1, seed=7))
        found = sum(
            discover(QueryOracle(inst, rng_seed=s), PARAMS).rank_estimate == 2
            for s in range(100)
        )
        assert found >= 90

    def test_certificate_invertible_at_every_prefix(self):
        inst = generate(GeneratorConfig(n1=8, n2=8, rank_r=3, num_noisy=1, seed=2))
        o = QueryOracle(inst, rng_seed=3)
        state = discover(o, PARAMS)
        n_obs = inst.n_observed
        for k in range(1, state.rank_estimate + 1):
            sub = n_obs[np.ix_(state.pivot_rows[:k], state.pivot_cols[:k])]
            assert is_invertible(sub, PARAMS.tol)

    def test_rank_estimate_capped(self):
        inst = generate(GeneratorConfig(n1=8, n2=6, rank_r=2, num_noisy=1, seed=5))
        state = discover(QueryOracle(inst, rng_seed=1), PARAMS)
        assert state.rank_estimate <= 6

    def test_stale_counter_at_budget(self):
        o = QueryOracle(np.ones((4, 4)), rng_seed=0)
        state = discover(o, PARAMS)
        assert state.stale_passes == state.pass_budget


def hand_state(rows, cols):
    return DiscoveryState(
        pivot_rows=list(rows),
        pivot_cols=list(cols),
        rank_estimate=len(rows),
        stale_passes=0,
        pass_budget=1,
    )


class TestIdentifyNoisyRows:
    def test_rank_drop_row(self):
        # deleting row 2 drops the rank 2 -> 1; deleting row 0 keeps it
        values = np.array([[1.0, 2.0], [2.0, 4.0], [5.0, 7.0]])
        o = QueryOracle(values)
        o.query_column(0)
        o.query_column(1)
        flagged = identify_noisy_rows(o, hand_state([0, 2], [0, 1]), PARAMS)
        assert flagged == [2]

    def test_clean_instance_flags_nothing(self):
        inst = generate(
            GeneratorConfig(n1=7, n2=7, rank_r=2, num_noisy=0, seed=9, enforce_psi=True)
        )
        o = QueryOracle(inst, rng_seed=4)
        state = discover(o, PARAMS)
        assert state.rank_estimate == 2
        assert identify_noisy_rows(o, state, PARAMS) == []

    def test_identity_flags_every_pivot(self):
        o = QueryOracle(np.eye(2))
        o.query_column(0)
        o.query_column(1)
        flagged = identify_noisy_rows(o, hand_state([0, 1], [0, 1]), PARAMS)
        assert flagged == [0, 1]

    def test_requires_observed_columns(self):
        o = QueryOracle(np.ones((3, 3)))
        o.query_entry(0, 0)
        with pytest.raises(RuntimeError):
            identify_noisy_rows(o, hand_state([0], [0]), PARAMS)

    def test_empty_state(self):
        o = QueryOracle(np.zeros((3, 3)))
        assert identify_noisy_rows(o, hand_state([], []), PARAMS) == []


class TestRecover:
    def test_rank_one_proportionality(self):
        values = np.array([[1.0, 3.0], [2.0, 6.0]])
        o = QueryOracle(values)
        o.query_column(0)
        o.query_row(0)
        result = recover(o, hand_state([0], [0]), [], PARAMS)
        np.testing.assert_allclose(result.recovered[:, 1], [3.0, 6.0])

    def test_pivot_columns_copied(self):
        inst = generate(GeneratorConfig(n1=6, n2=6, rank_r=2, num_noisy=1, seed=21))
        o = QueryOracle(inst, rng_seed=8)
        state = discover(o, PARAMS)
        noisy = identify_noisy_rows(o, state, PARAMS)
        result = recover(o, state, noisy, PARAMS)
        clean = [i for i in range(6) if i not in set(noisy)]
        for j in state.pivot_cols:
            np.testing.assert_array_equal(
                result.recovered[clean, j], inst.n_observed[clean, j]
            )

    def test_seed7_exact_recovery(self):
        inst = generate(GeneratorConfig(n1=6, n2=5, rank_r=1, num_noisy=1, seed=7))
        o = QueryOracle(inst, rng_seed=1)
        result = run(o, PARAMS)
        assert result.status == STATUS_OK
        assert result.noisy_rows_hat == inst.noisy_rows
        err = max_relative_error(result.recovered, inst.m, list(inst.clean_rows))
        assert err <= 1e-8

    def test_noisy_rows_marked_unknown(self):
        inst = generate(GeneratorConfig(n1=6, n2=5, rank_r=1, num_noisy=1, seed=7))
        o = QueryOracle(inst, rng_seed=1)
        result = run(o, PARAMS)
        for i in result.noisy_rows_hat:
            assert np.isnan(result.recovered[i]).all()
        clean = [i for i in range(6) if i not in result.noisy_rows_hat]
        assert np.isfinite(result.recovered[clean]).all()


class TestRun:
    def test_clean_gaussian_family(self):
        good = 0
        for s in range(100):
            inst = generate(GeneratorConfig(n1=8, n2=8, rank_r=2, num_noisy=0, seed=s))
            o = QueryOracle(inst, rng_seed=s + 1000)
            result = run(o, PARAMS)
            err = max_relative_error(result.recovered, inst.m, list(range(8)))
            good += (
                result.status == STATUS_OK
                and result.noisy_rows_hat == ()
                and err <= 1e-8
            )
        assert good >= 90

    def test_seed7_family(self):
        inst = generate(GeneratorConfig(n1=6, n2=5, rank_r=1, num_noisy=1, seed=7))
        good = 0
        for s in range(100):
            o = QueryOracle(inst, rng_seed=s)
            result = run(o, PARAMS)
            good += result.status == STATUS_OK and result.noisy_rows_hat == inst.noisy_rows
        assert good >= 90

    def test_basis_vector_in_column_space(self):
        # only row 0 is nonzero, so its deletion mimics a noise row
        m = np.zeros((5, 4))
        m[0, :] = [1.0, 2.0, 3.0, 4.0]
        o = QueryOracle(m, rng_seed=0)
        result = run(o, PARAMS)
        assert result.status == STATUS_PRECONDITION

    def test_zero_matrix_recovers_zeros(self):
        o = QueryOracle(np.zeros((4, 5)), rng_seed=0)
        result = run(o, PARAMS)
        assert result.status == STATUS_OK
        assert result.noisy_rows_hat == ()
        np.testing.assert_array_equal(result.recovered, np.zeros((4, 5)))

    def test_query_count_matches_oracle(self):
        inst = generate(GeneratorConfig(n1=8, n2=8, rank_r=2, num_noisy=1, seed=13))
        o = QueryOracle(inst, rng_seed=2)
        result = run(o, PARAMS)
        assert result.query_count == o.unique_query_count
        assert result.query_count <= 64

    def test_unknown_only_on_flagged_rows(self):
        for s in range(20):
            inst = generate(GeneratorConfig(n1=7, n2=6, rank_r=2, num_noisy=1, seed=s))
            o = QueryOracle(inst, rng_seed=s)
            result = run(o, PARAMS)
            if result.status != STATUS_OK:
                continue
            flagged = set(result.noisy_rows_hat)
            for i in range(7):
                row_nan = np.isnan(result.recovered[i]).any()
                assert row_nan == (i in flagged)

    def test_clean_recovered_rank(self):
        inst = generate(GeneratorConfig(n1=8, n2=7, rank_r=2, num_noisy=2, seed=3))
        o = QueryOracle(inst, rng_seed=11)
        result = run(o, PARAMS)
        assert result.status == STATUS_OK
        clean = [i for i in range(8) if i not in set(result.noisy_rows_hat)]
        assert (
            numerical_rank(result.recovered[clean, :], PARAMS.tol)
            == len(result.pivot_rows) - len(result.noisy_rows_hat)
        )


class TestQueryBudget:
    def test_discovery_terms_example(self):
        report = query_budget(100, 10, 2, 2, 50, 1, 0.1)
        level = math.log(10.0)
        expected_phases = 2 * 100 * (2 + 2 + level) + (2 * 100 / 50) * (2 + 2 + 2 + level)
        assert expected_phases == pytest.approx(1293.727, abs=0.01)
        full = (2 + 2) * (100 + 10)
        probes = 2 * (10 - 2 - 2)
        assert report.proof_bound == pytest.approx(expected_phases + full + probes)

    def test_no_noise_substitution(self):
        n1 = 12
        report = query_budget(n1, 12, 3, 0, n1, 5, 0.1)
        level = math.log(10.0)
        phases = 2 * n1 * (2 + level) + 2 * (3 + 2 + level)
        assert report.proof_bound == pytest.approx(phases + 3 * (n1 + 12) + 3 * (12 - 3))

    def test_natural_log_calibration(self):
        eps = 1 / math.e
        report = query_budget(10, 10, 2, 1, 5, 5, eps)
        # with ln(1/eps) = 1 exactly, both formulas collapse to rationals
        assert report.proof_bound == 2 * 10 * (1 + 2 + 1) + (2 * 10 / 5) * (
            2 + 1 + 2 + 1
        ) + (2 + 1) * 20 + 2 * (10 - 2 - 1)
        assert report.stated_bound == (10 + 10 - 1) * 1 + (4 * 10 / 5) * (
            2 + 2 + 1
        ) * 10 / 5 + 2 * 10 * (1 + 2 + 1)

    def test_stated_first_term_vanishes_without_noise(self):
        with_noise = query_budget(10, 10, 2, 1, 5, 5, 0.1)
        without = query_budget(10, 10, 2, 0, 5, 5, 0.1)
        assert without.stated_bound < with_noise.stated_bound

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n1=0, n2=5, rank=1, omega_size=0, psi_u=1, psi_v=1, epsilon=0.1),
            dict(n1=5, n2=5, rank=0, omega_size=0, psi_u=1, psi_v=1, epsilon=0.1),
            dict(n1=5, n2=5, rank=1, omega_size=-1, psi_u=1, psi_v=1, epsilon=0.1),
            dict(n1=5, n2=5, rank=1, omega_size=0, psi_u=0, psi_v=1, epsilon=0.1),
            dict(n1=5, n2=5, rank=1, omega_size=0, psi_u=1, psi_v=1, epsilon=1.5),
        ],
    )
    def test_parameter_validation(self, kwargs):
        with pytest.raises(ValueError):
            query_budget(**kwargs)

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(4, 40),
        st.integers(8, 40),
        st.integers(1, 4),
        st.integers(0, 3),
        st.integers(1, 20),
        st.floats(min_value=0.01, max_value=0.9),
    )
    def test_monotonicity(self, n1, n2, rank, omega, psi_u, epsilon):
        base = query_budget(n1, n2, rank, omega, psi_u, 3, epsilon).proof_bound
        assert query_budget(n1, n2, rank, omega, psi_u + 1, 3, epsilon).proof_bound <= base
        assert query_budget(n1, n2, rank + 1, omega, psi_u, 3, epsilon).proof_bound >= base
        assert query_budget(n1, n2, rank, omega + 1, psi_u, 3, epsilon).proof_bound >= base
        tighter = max(epsilon / 2, 1e-6)
        assert query_budget(n1, n2, rank, omega, psi_u, 3, tighter).proof_bound >= base


class TestCompletionParams:
    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.7])
    def test_epsilon_range(self, bad):
        with pytest.raises(ValueError):
            CompletionParams(epsilon=bad)
