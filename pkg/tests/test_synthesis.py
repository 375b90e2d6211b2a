import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pamet.confusion import check_domination
from pamet.core import MetricError, PaResult
from pamet.synthesis import (
    CSV_COLUMNS,
    DegradationConfig,
    GridPoint,
    LabeledSample,
    LookupPredictor,
    NoiseIncompatibleError,
    NoisyOraclePredictor,
    SweepGrid,
    flip_labels,
    inflate_imbalance,
    inject_label_noise,
    noise_flip_indices,
    point_seed,
    run_sweep,
    zero_crossing,
)


def balanced(n=1000):
    return LabeledSample(np.arange(n) % 2)


class TestLabeledSample:
    def test_defaults(self):
        s = balanced(10)
        assert s.class_counts() == (5, 5)
        assert list(s.features) == list(range(10))

    @pytest.mark.parametrize("labels", [[0], [0, 2, 1], [[0, 1], [1, 0]]])
    def test_rejects(self, labels):
        with pytest.raises(MetricError):
            LabeledSample(np.array(labels))

    def test_feature_length(self):
        with pytest.raises(MetricError):
            LabeledSample(np.array([0, 1, 1]), np.arange(2))


class TestInflation:
    def test_exact_minority_count(self):
        out = inflate_imbalance(balanced(), DegradationConfig(0.1, seed=3))
        assert out.n == 1000
        assert out.class_counts() == (900, 100)

    def test_half(self):
        out = inflate_imbalance(balanced(), DegradationConfig(0.5, seed=3, n_out=400))
        assert out.class_counts() == (200, 200)

    def test_floor(self):
        # 0.15 * 1000 is 149.99999999999997 in floating point
        out = inflate_imbalance(balanced(), DegradationConfig(0.15, seed=1))
        assert out.class_counts()[1] == 150
        out = inflate_imbalance(balanced(), DegradationConfig(0.123, seed=1, n_out=100))
        assert out.class_counts()[1] == 12

    def test_rows_follow_handles(self):
        src = balanced(50)
        out = inflate_imbalance(src, DegradationConfig(0.2, seed=5))
        np.testing.assert_array_equal(out.labels, src.labels[out.features])

    def test_deterministic(self):
        cfg = DegradationConfig(0.3, seed=11)
        a = inflate_imbalance(balanced(), cfg)
        b = inflate_imbalance(balanced(), cfg)
        assert a.labels.tobytes() == b.labels.tobytes()
        assert a.features.tobytes() == b.features.tobytes()

    def test_missing_class(self):
        with pytest.raises(MetricError):
            inflate_imbalance(LabeledSample(np.zeros(10, dtype=int)), DegradationConfig(0.2))

    def test_no_minority_rows(self):
        with pytest.raises(MetricError):
            inflate_imbalance(balanced(10), DegradationConfig(0.05))

    @pytest.mark.parametrize("kw", [dict(target_minority_fraction=0), dict(target_minority_fraction=0.6),
                                    dict(noise_level=0.5), dict(noise_level=-0.1), dict(n_out=1)])
    def test_config_validation(self, kw):
        with pytest.raises(MetricError):
            DegradationConfig(**kw)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.02, 0.5), st.integers(100, 3000), st.integers(0, 2**64 - 1))
    def test_minority_count_property(self, target, n_out, seed):
        out = inflate_imbalance(balanced(200), DegradationConfig(target, seed=seed, n_out=n_out))
        expected = int(np.floor(target * n_out + 1e-9))
        assert out.class_counts() == (n_out - expected, expected)


class TestNoise:
    def test_zero_is_identity(self):
        s = balanced(100)
        assert inject_label_noise(s, DegradationConfig(noise_level=0.0, seed=4)) is s

    def test_flip_counts(self):
        s = balanced(200)
        out = inject_label_noise(s, DegradationConfig(noise_level=0.2, seed=9))
        flipped = s.labels != out.labels
        assert flipped.sum() == 40
        assert (flipped & (s.labels == 0)).sum() == 20
        assert (flipped & (s.labels == 1)).sum() == 20
        assert out.class_counts() == s.class_counts()

    def test_involution(self):
        s = balanced(300)
        idx = noise_flip_indices(s.labels, 0.3, np.random.default_rng(1))
        back = flip_labels(flip_labels(s, idx), idx)
        np.testing.assert_array_equal(back.labels, s.labels)

    def test_incompatible(self):
        # 20 minority rows, 0.3 * 200 / 2 = 30 flips per class
        s = LabeledSample(np.r_[np.ones(20, int), np.zeros(180, int)])
        with pytest.raises(NoiseIncompatibleError, match="noise level incompatible with imbalance"):
            inject_label_noise(s, DegradationConfig(noise_level=0.3))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(10, 400), st.integers(10, 400), st.floats(0, 0.49), st.integers(0, 2**32))
    def test_marginal_preserved(self, n0, n1, noise, seed):
        s = LabeledSample(np.r_[np.zeros(n0, int), np.ones(n1, int)])
        m = int(np.floor(noise * (n0 + n1) / 2 + 1e-9))
        cfg = DegradationConfig(noise_level=noise, seed=seed)
        if m > min(n0, n1):
            with pytest.raises(NoiseIncompatibleError):
                inject_label_noise(s, cfg)
            return
        out = inject_label_noise(s, cfg)
        assert out.class_counts() == (n0, n1)
        assert int((out.labels != s.labels).sum()) == 2 * m


class TestPredictors:
    def test_oracle_exact_errors(self):
        s = balanced(200)
        preds = NoisyOraclePredictor(0.15)(s, np.random.default_rng(0))
        assert int((preds != s.labels).sum()) == 30

    def test_oracle_validation(self):
        with pytest.raises(MetricError):
            NoisyOraclePredictor(1.0)

    def test_lookup(self):
        table = np.array([1, 0, 0, 1, 1])
        s = LabeledSample(np.array([0, 1, 1]), features=np.array([4, 0, 2]))
        np.testing.assert_array_equal(LookupPredictor(table)(s, None), [1, 1, 0])
        with pytest.raises(MetricError):
            LookupPredictor(table)(LabeledSample(np.array([0, 1]), np.array([0, 7])), None)
        with pytest.raises(MetricError):
            LookupPredictor([0, 3])


def test_point_seed_stable():
    assert point_seed(0, 0.1, 0.2) == point_seed(0, 0.1, 0.2)
    assert point_seed(0, 0.1, 0.2) != point_seed(0, 0.2, 0.1)
    assert point_seed(1, 0.1, 0.2) != point_seed(0, 0.1, 0.2)
    assert 0 <= point_seed(-1, 0.3, 0.1) < 2**64


class TestSweep:
    def test_oracle_no_noise_perfect(self):
        grid = run_sweep(balanced(), (0.1, 0.3, 0.5), (0.0,), predictor=0.0)
        assert all(p.pa.pa == 1.0 for p in grid.points)
        assert zero_crossing(grid)[0.0].threshold is None

    def test_grid_shape_and_order(self):
        grid = run_sweep(balanced(), (0.2, 0.4), (0.1, 0.3), predictor=0.1, n_out=500)
        assert [(p.noise, p.imbalance) for p in grid.points] == [(0.1, 0.2), (0.1, 0.4), (0.3, 0.2), (0.3, 0.4)]
        assert grid.point(0.3, 0.4).imbalance == 0.4

    def test_infeasible_points_kept(self):
        grid = run_sweep(balanced(), (0.05, 0.5), (0.2,), predictor=0.2)
        bad, good = grid.row(0.2)
        assert bad.status == "infeasible" and bad.pa is None
        assert good.ok
        line = bad.csv_row()
        assert line[:2] == ["0.05", "0.2"] and all(v == "" for v in line[2:-1])

    def test_balance_pa_equals_kappa(self):
        grid = run_sweep(balanced(), (0.5,), (0.1, 0.2, 0.3), predictor=0.2, n_out=2000)
        for p in grid.points:
            assert abs(p.pa.pa - p.metrics.kappa) < 1e-12

    def test_domination_and_negative_pa(self):
        grid = run_sweep(balanced(), (0.1, 0.2, 0.3, 0.4, 0.5), (0.1, 0.2), predictor=0.25, n_out=2000)
        for p in grid.points:
            if not p.ok:
                continue
            assert check_domination(p.cells).consistent
            if p.error >= p.cells.minority_mass:
                assert p.pa.pa <= 0

    def test_deterministic_csv(self):
        kwargs = dict(imbalance_axis=(0.1, 0.3), noise_axis=(0.1,), predictor=0.1, base_seed=42)
        assert run_sweep(balanced(), **kwargs).to_csv() == run_sweep(balanced(), **kwargs).to_csv()
        other = run_sweep(balanced(), **{**kwargs, "base_seed": 43}).to_csv()
        assert other != run_sweep(balanced(), **kwargs).to_csv()

    def test_threads_match_sequential(self):
        kwargs = dict(imbalance_axis=(0.1, 0.2, 0.3, 0.5), noise_axis=(0.1, 0.2), predictor=0.2, n_out=800)
        assert run_sweep(balanced(), max_workers=4, **kwargs).to_csv() == run_sweep(balanced(), **kwargs).to_csv()

    def test_csv_header(self):
        text = run_sweep(balanced(), (0.5,), (0.1,), predictor=0.1).to_csv()
        lines = text.splitlines()
        assert lines[0].split(",") == list(CSV_COLUMNS)
        assert len(lines) == 2

    def test_dict_round_trip(self):
        grid = run_sweep(balanced(), (0.05, 0.3), (0.2,), predictor=0.2)
        again = SweepGrid.from_dict(json.loads(json.dumps(grid.to_dict())))
        assert again.to_csv() == grid.to_csv()
        assert again.points == grid.points

    def test_lookup_predictor_sweep(self):
        sample = balanced(100)
        table = sample.labels.copy()
        table[:10] ^= 1
        grid = run_sweep(sample, (0.5,), (0.0,), predictor=LookupPredictor(table))
        assert grid.predictor == "lookup(n=100)"
        assert grid.points[0].pa.pa < 1

    @pytest.mark.parametrize("kw", [dict(imbalance_axis=(0.0,)), dict(imbalance_axis=(0.6,)),
                                    dict(noise_axis=(0.5,)), dict(imbalance_axis=())])
    def test_axis_validation(self, kw):
        with pytest.raises(MetricError):
            run_sweep(balanced(), **kw)

    def test_bad_predictor_shape(self):
        with pytest.raises(MetricError):
            run_sweep(balanced(), (0.5,), (0.0,), predictor=lambda s, rng: np.zeros(3))


def synthetic_grid(pairs):
    points = tuple(
        GridPoint(i, 0.2, 0, error=0.0, pa=PaResult(0.0, 1.0, pa)) for i, pa in pairs
    )
    return SweepGrid(tuple(i for i, _ in pairs), (0.2,), points)


class TestZeroCrossing:
    def test_interpolates(self):
        zc = zero_crossing(synthetic_grid([(0.2, -0.2), (0.3, 0.2)]))[0.2]
        assert zc.threshold == pytest.approx(0.25)
        assert zc.monotone

    def test_none_when_positive(self):
        assert zero_crossing(synthetic_grid([(0.2, 0.1), (0.3, 0.2)]))[0.2].threshold is None

    def test_exact_zero(self):
        assert zero_crossing(synthetic_grid([(0.1, -0.1), (0.2, 0.0), (0.3, 0.1)]))[0.2].crossings == (0.2,)

    def test_non_monotone(self):
        zc = zero_crossing(synthetic_grid([(0.1, -0.1), (0.2, 0.1), (0.3, -0.1), (0.4, 0.3)]))[0.2]
        assert not zc.monotone
        assert len(zc.crossings) == 3
