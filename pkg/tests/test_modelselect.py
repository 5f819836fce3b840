import math

import numpy as np
import pytest

import cphmm.modelselect as modelselect
from cphmm.errors import (
    ComputeError,
    EmptyInputError,
    IncompleteGridError,
    NonFiniteError,
    ParamError,
)
from cphmm.hmm import Hmm, TrainConfig, sample_sequences
from cphmm.modelselect import (
    PositionRecord,
    SweepResult,
    TrainingPair,
    aic,
    aic_position,
    build_pairs,
    derive_seed,
    experiment_a,
    experiment_b,
    mean_position,
    run_sweeps,
    sweep_states,
)
from cphmm.quantize import SymbolSequence

LIGHT_CFG = TrainConfig(max_iter=30, restarts=1, seed=0)


def make_symbol_grid(gestures, sensors, executions, cluster_counts, length=24, seed=0):
    rng = np.random.default_rng(seed)
    grid = {}
    for i in gestures:
        for j in sensors:
            for k in executions:
                for c in cluster_counts:
                    symbols = rng.integers(1, c + 1, size=length)
                    grid[(i, j, k, c)] = SymbolSequence(symbols, (i, j, k), c)
    return grid


def make_record(position, variant="all_points", **overrides):
    fields = dict(
        gesture=1, sensor=1, n_clusters=4, variant=variant,
        predicted_states=3, best_states=2, aic_min=10.0, aic_max=20.0,
        aic_predicted=10.0 + 10.0 * position, position=position,
    )
    fields.update(overrides)
    return PositionRecord(**fields)


class TestAic:
    def test_frozen_examples(self):
        assert aic(-100.0, 5) == 250.0
        assert aic(0.0, 1) == 2.0

    def test_minus_inf_becomes_plus_inf(self):
        assert aic(-math.inf, 4) == math.inf

    def test_nan_and_plus_inf_rejected(self):
        with pytest.raises(NonFiniteError):
            aic(math.nan, 2)
        with pytest.raises(NonFiniteError):
            aic(math.inf, 2)

    def test_bad_state_count(self):
        with pytest.raises(ParamError):
            aic(-1.0, 0)

    def test_monotone_in_loglik(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(1, 20))
            a = float(rng.normal(scale=100))
            b = a - abs(rng.normal(scale=10)) - 1e-6
            assert aic(b, n) > aic(a, n)


class TestBuildPairs:
    def test_paper_scale_cardinality(self):
        grid = make_symbol_grid(range(1, 21), range(1, 11), [1], range(4, 12), length=4)
        medians = {(i, j): 6 for i in range(1, 21) for j in range(1, 11)}
        pairs = build_pairs(grid, medians)
        assert len(pairs) == 1600

    def test_small_cardinality(self):
        grid = make_symbol_grid(range(1, 5), range(1, 6), [1, 2], [4, 5], length=4)
        medians = {(i, j): 4 for i in range(1, 5) for j in range(1, 6)}
        pairs = build_pairs(grid, medians)
        assert len(pairs) == 40

    def test_median_independent_of_cluster_count(self):
        grid = make_symbol_grid([1], [1], [1, 2, 3], [4, 11], length=8)
        pairs = build_pairs(grid, {(1, 1): 7})
        by_c = {p.n_clusters: p for p in pairs}
        assert by_c[4].cp_median == by_c[11].cp_median == 7

    def test_sequences_ordered_by_execution(self):
        grid = make_symbol_grid([1], [1], [1, 2, 3], [3], length=8)
        (pair,) = build_pairs(grid, {(1, 1): 5})
        assert [s.origin[2] for s in pair.sequences] == [1, 2, 3]

    def test_incomplete_grid(self):
        grid = make_symbol_grid([1, 2], [1], [1, 2], [4, 5], length=8)
        del grid[(2, 1, 1, 5)]
        with pytest.raises(IncompleteGridError):
            build_pairs(grid, {(1, 1): 4, (2, 1): 4})

    def test_empty_inputs(self):
        with pytest.raises(EmptyInputError):
            build_pairs({}, {})


class TestPosition:
    def make_sweep(self, aic_by_n):
        aic_min = min(aic_by_n.values())
        aic_max = max(aic_by_n.values())
        argmin = min(n for n, v in aic_by_n.items() if v == aic_min)
        return SweepResult(1, 1, 4, aic_by_n, aic_min, aic_max, argmin)

    def test_argmin_scores_zero(self):
        sweep = self.make_sweep({2: 50.0, 3: 10.0, 4: 90.0})
        assert aic_position(sweep, 3) == 0.0

    def test_max_scores_one(self):
        sweep = self.make_sweep({2: 50.0, 3: 10.0, 4: 90.0})
        assert aic_position(sweep, 4) == 1.0

    def test_midway_scores_half(self):
        sweep = self.make_sweep({2: 10.0, 3: 15.0, 4: 20.0})
        assert aic_position(sweep, 3) == 0.5

    def test_degenerate_range_scores_zero(self):
        sweep = self.make_sweep({2: 7.0, 3: 7.0})
        assert aic_position(sweep, 2) == 0.0
        assert aic_position(sweep, 3) == 0.0

    def test_clamps_out_of_range_predictors(self):
        sweep = self.make_sweep({2: 10.0, 3: 15.0, 4: 20.0})
        assert aic_position(sweep, 1) == aic_position(sweep, 2)
        assert aic_position(sweep, 99) == aic_position(sweep, 4)

    def test_infinite_entry_scores_one(self):
        sweep = self.make_sweep({2: 10.0, 3: math.inf})
        assert aic_position(sweep, 3) == 1.0
        assert aic_position(sweep, 2) == 0.0


class TestMeanPosition:
    def test_examples(self):
        assert mean_position([make_record(0.0), make_record(0.0)]) == 0.0
        assert mean_position([make_record(0.0), make_record(1.0)]) == 0.5

    def test_permutation_invariant(self):
        rng = np.random.default_rng(9)
        records = [make_record(float(p)) for p in rng.uniform(size=20)]
        base = mean_position(records)
        shuffled = [records[i] for i in rng.permutation(20)]
        assert mean_position(shuffled) == pytest.approx(base, rel=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(EmptyInputError):
            mean_position([])


class TestSweep:
    def make_pair(self, c=3, executions=4, length=24, seed=0):
        rng = np.random.default_rng(seed)
        seqs = tuple(
            SymbolSequence(rng.integers(1, c + 1, size=length), (1, 1, k + 1), c)
            for k in range(executions)
        )
        return TrainingPair(1, 1, c, seqs, cp_median=4)

    def test_degenerate_single_state_sweep(self):
        pair = self.make_pair()
        result = sweep_states(pair, (3, 3), LIGHT_CFG, base_seed=0)
        assert set(result.aic_by_n) == {3}
        assert result.aic_min == result.aic_max == result.aic_by_n[3]
        assert result.argmin_n == 3

    def test_argmin_attains_minimum(self):
        pair = self.make_pair(seed=4)
        result = sweep_states(pair, (1, 5), LIGHT_CFG, base_seed=0)
        assert result.aic_by_n[result.argmin_n] == result.aic_min
        assert result.aic_min <= min(result.aic_by_n.values())
        assert result.aic_max >= max(result.aic_by_n.values())

    def test_deterministic(self):
        pair = self.make_pair(seed=6)
        a = sweep_states(pair, (1, 4), LIGHT_CFG, base_seed=3)
        b = sweep_states(pair, (1, 4), LIGHT_CFG, base_seed=3)
        assert a.aic_by_n == b.aic_by_n

    def test_planted_three_state_beats_eight(self):
        planted = Hmm(
            transitions=np.array([
                [0.90, 0.05, 0.05],
                [0.05, 0.90, 0.05],
                [0.05, 0.05, 0.90],
            ]),
            initial=np.array([0.4, 0.3, 0.3]),
            emissions=np.array([
                [0.85, 0.05, 0.05, 0.05],
                [0.05, 0.85, 0.05, 0.05],
                [0.05, 0.05, 0.85, 0.05],
            ]),
        )
        sampled = sample_sequences(planted, 12, 48, seed=8)
        seqs = tuple(
            SymbolSequence(row, (1, 1, k + 1), 4) for k, row in enumerate(sampled)
        )
        pair = TrainingPair(1, 1, 4, seqs, cp_median=3)
        cfg = TrainConfig(max_iter=60, restarts=2, seed=0)
        result = sweep_states(pair, (1, 8), cfg, base_seed=1)
        assert result.aic_by_n[3] < result.aic_by_n[8]

    def test_failed_training_records_infinity(self, monkeypatch):
        real = modelselect.baum_welch

        def flaky(sequences, n_states, n_symbols, config=None):
            if n_states == 3:
                raise ComputeError("synthetic failure")
            return real(sequences, n_states, n_symbols, config)

        monkeypatch.setattr(modelselect, "baum_welch", flaky)
        pair = self.make_pair(seed=10)
        result = sweep_states(pair, (2, 4), LIGHT_CFG, base_seed=0)
        assert result.aic_by_n[3] == math.inf
        assert math.isfinite(result.aic_by_n[2])
        assert math.isfinite(result.aic_by_n[4])
        assert result.argmin_n != 3

    def test_derive_seed_stable(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
        assert derive_seed(1, 2, 3) != derive_seed(1, 2, 4)


@pytest.fixture(scope="module")
def small_pairs():
    grid = make_symbol_grid([1, 2], [1, 2], [1, 2, 3], [2, 3], length=20, seed=14)
    medians = {(i, j): 3 + i for i in (1, 2) for j in (1, 2)}
    return build_pairs(grid, medians)


@pytest.fixture(scope="module")
def tables():
    from cphmm.critpoints import build_predictor_table

    counts = {(i, j): [3 + i] for i in (1, 2) for j in (1, 2)}
    return {
        v: build_predictor_table(counts, v)
        for v in ("all_points", "no_boundaries", "trends")
    }


class TestExperiments:
    def test_experiment_a_shape(self, small_pairs, tables):
        ranges = [("all_sensors", (1, 2)), ("first_only", (1, 1))]
        result = experiment_a(
            small_pairs, tables, ranges, state_range=(2, 4),
            train_config=LIGHT_CFG, base_seed=5,
        )
        assert len(result.records) == len(small_pairs) * 3
        assert [row.sensor_range for row in result.aggregates] == [
            "all_sensors", "first_only",
        ]
        for row in result.aggregates:
            assert row.n_clusters is None
            assert set(row.positions) == {"all_points", "no_boundaries", "trends"}
            for value in row.positions.values():
                assert 0.0 <= value <= 1.0

    def test_oracle_predictor_scores_zero(self, small_pairs):
        from cphmm.critpoints import PredictorTable

        single_c = [p for p in small_pairs if p.n_clusters == 2]
        sweeps = run_sweeps(single_c, (2, 4), LIGHT_CFG, base_seed=5)
        oracle_values = {
            (s.gesture, s.sensor): s.argmin_n for s in sweeps.values()
        }
        oracle = {"all_points": PredictorTable(oracle_values, "all_points")}
        result = experiment_a(
            single_c, oracle, [("all", (1, 2))], state_range=(2, 4),
            train_config=LIGHT_CFG, base_seed=5,
        )
        assert all(r.position == 0.0 for r in result.records)
        assert result.aggregates[0].positions["all_points"] == 0.0

    def test_experiment_b_grouping(self, small_pairs, tables):
        ranges = [("all_sensors", (1, 2))]
        result = experiment_b(
            small_pairs, tables, ranges, state_range=(2, 4),
            train_config=LIGHT_CFG, base_seed=5,
        )
        assert [(row.sensor_range, row.n_clusters) for row in result.aggregates] == [
            ("all_sensors", 2), ("all_sensors", 3),
        ]

    def test_b_group_mean_equals_a(self, small_pairs, tables):
        ranges = [("all_sensors", (1, 2))]
        kwargs = dict(state_range=(2, 4), train_config=LIGHT_CFG, base_seed=5)
        res_a = experiment_a(small_pairs, tables, ranges, **kwargs)
        res_b = experiment_b(small_pairs, tables, ranges, **kwargs)
        for variant in tables:
            b_values = [row.positions[variant] for row in res_b.aggregates]
            assert np.mean(b_values) == pytest.approx(
                res_a.aggregates[0].positions[variant], rel=1e-12
            )

    def test_jobs_do_not_change_results(self, small_pairs):
        single_c = [p for p in small_pairs if p.n_clusters == 2]
        serial = run_sweeps(single_c, (2, 3), LIGHT_CFG, base_seed=7, jobs=1)
        parallel = run_sweeps(single_c, (2, 3), LIGHT_CFG, base_seed=7, jobs=2)
        assert serial.keys() == parallel.keys()
        for key in serial:
            assert serial[key].aic_by_n == parallel[key].aic_by_n
