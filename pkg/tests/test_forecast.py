import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from campusopt.forecast import (FeatureSpec, LinearModel, SingularDesignError, SupervisedSet,
                                attendance_design, baseline_profile, build_direct_set, direct_forecast,
                                evaluate_direct, fit_ols, fit_quantile, forecast_rows, fourier_features,
                                mae, pinball_loss, rmse, rolling_splits, wmae)

finite = st.floats(-1e3, 1e3, allow_nan=False)


def gaussian_elimination(A, b):
    """Plain partial-pivot elimination, written independently of numpy.linalg."""
    A = [list(map(float, row)) + [float(v)] for row, v in zip(A, b)]
    n = len(A)
    for c in range(n):
        p = max(range(c, n), key=lambda r: abs(A[r][c]))
        A[c], A[p] = A[p], A[c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            for k in range(c, n + 1):
                A[r][k] -= f * A[c][k]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        x[r] = (A[r][n] - sum(A[r][k] * x[k] for k in range(r + 1, n))) / A[r][r]
    return np.array(x)


def minimiser_interval(y, tau):
    """Grid-search oracle: the set of constants minimising pinball loss.

    The loss is piecewise linear with kinks at the data, so its minimum is
    attained on the sample; the minimiser set is the hull of minimising
    sample points.
    """
    cands = np.unique(y)
    losses = np.array([pinball_loss(y, np.full_like(y, c), tau) for c in cands])
    best = cands[np.isclose(losses, losses.min(), rtol=1e-12, atol=1e-9)]
    return best.min(), best.max()


def intercept_only(y):
    y = np.asarray(y, float)
    return SupervisedSet(np.ones((len(y), 1)), y, ["intercept"])


class TestFourier:
    def test_examples(self):
        assert fourier_features(0, 7, 1) == pytest.approx([0, 1])
        assert fourier_features(6, 24, 1) == pytest.approx([1, 0], abs=1e-15)
        assert fourier_features(12, 24, 2) == pytest.approx([0, -1, 0, 1], abs=1e-15)

    def test_bad_period(self):
        with pytest.raises(ValueError):
            fourier_features(1, 0, 1)

    @given(st.floats(-1e4, 1e4), st.sampled_from([24.0, 120.0, 7.5]), st.integers(1, 4))
    def test_periodic(self, t, p, K):
        a, b = fourier_features(t, p, K), fourier_features(t + p, p, K)
        assert np.max(np.abs(np.asarray(a) - np.asarray(b))) <= 1e-12


class TestDirectSet:
    def test_constant_series(self):
        d = build_direct_set(np.full(24 * 12, 5.0))
        lags = d.X[:, [i for i, n in enumerate(d.feature_names) if n.startswith("lag_")]]
        assert np.all(lags == 5.0)

    def test_row_count(self):
        assert len(build_direct_set(np.arange(24 * 11.0), FeatureSpec(), 1).y) == 24
        assert len(build_direct_set(np.arange(24 * 15.0), FeatureSpec(), 3).y) == 24 * 3

    def test_no_lags(self):
        d = build_direct_set(np.arange(48.0), FeatureSpec(lag_days=0))
        assert d.X.shape == (48, 1 + 2 * 2 * 2)
        assert not any(n.startswith("lag_") for n in d.feature_names)

    def test_insufficient_history(self):
        with pytest.raises(ValueError, match="264 hourly values"):
            build_direct_set(np.arange(24 * 10.0), FeatureSpec(), 1)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 4), st.integers(0, 5), st.integers(0, 3))
    def test_no_leakage(self, horizon, lag_days, extra):
        n = 24 * (horizon + lag_days + extra + 1)
        series = np.arange(n, dtype=float)  # value encodes its own index
        d = build_direct_set(series, FeatureSpec(lag_days=lag_days), horizon)
        lag_idx = [i for i, nm in enumerate(d.feature_names) if nm.startswith("lag_")]
        origin = d.target_index - horizon * 24
        for i in lag_idx:
            assert np.all(d.X[:, i] <= origin)
            assert np.all((d.target_index - d.X[:, i]) % 24 == 0)

    def test_forecast_row_lags(self):
        series = np.arange(24 * 12.0)
        X, names, rows = forecast_rows(series, FeatureSpec(lag_days=2), 3)
        assert rows[0] == 24 * 14
        assert X[5, names.index("lag_3d")] == 24 * 11 + 5
        assert X[5, names.index("lag_4d")] == 24 * 10 + 5


class TestOls:
    def test_exact_line(self):
        x = np.arange(10.0)
        m = fit_ols(SupervisedSet(np.c_[np.ones(10), x], 2 * x, ["intercept", "x"]))
        assert m.coefficients == pytest.approx([0, 2], abs=1e-9)

    def test_constant(self):
        x = np.random.default_rng(0).normal(size=(8, 2))
        m = fit_ols(SupervisedSet(np.c_[np.ones(8), x], np.full(8, 3.5), ["i", "a", "b"]))
        assert m.coefficients == pytest.approx([3.5, 0, 0], abs=1e-9)

    def test_normal_equation_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            X, y = rng.normal(size=(5, 3)), rng.normal(size=5)
            m = fit_ols(SupervisedSet(X, y, list("abc")))
            assert m.coefficients == pytest.approx(gaussian_elimination(X.T @ X, X.T @ y), abs=1e-9)
            assert np.max(np.abs(X.T @ (y - X @ m.coefficients))) < 1e-8

    def test_rank_deficient(self):
        X = np.c_[np.ones(6), np.arange(6.0), 2 * np.arange(6.0)]
        data = SupervisedSet(X, np.arange(6.0), list("abc"))
        with pytest.raises(SingularDesignError):
            fit_ols(data, ridge_fallback=False)
        with pytest.warns(RuntimeWarning):
            m = fit_ols(data)
        assert m.predict(X) == pytest.approx(np.arange(6.0), abs=1e-6)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 1000), st.floats(0.1, 100), st.floats(-50, 50))
    def test_affine_rescaling_invariance(self, seed, a, b):
        rng = np.random.default_rng(seed)
        X = np.c_[np.ones(12), rng.normal(size=(12, 2))]
        y = rng.normal(size=12)
        Z = X.copy()
        Z[:, 1] = a * X[:, 1] + b
        p1 = fit_ols(SupervisedSet(X, y, list("abc"))).predict(X)
        p2 = fit_ols(SupervisedSet(Z, y, list("abc"))).predict(Z)
        assert np.max(np.abs(p1 - p2)) < 1e-8

    def test_model_json_roundtrip(self):
        m = LinearModel(np.array([1.0, -2.0]), ["a", "b"], "quantile", 0.75)
        assert LinearModel.from_dict(m.to_dict()).to_dict() == m.to_dict()


class TestLosses:
    def test_pinball_examples(self):
        assert pinball_loss([1, 2], [1, 2], 0.3) == 0
        assert pinball_loss([1], [0], 0.75) == 0.75
        assert pinball_loss([0], [1], 0.75) == 0.25
        with pytest.raises(ValueError):
            pinball_loss([1, 2], [1], 0.5)

    def test_wmae_examples(self):
        assert wmae([1], [0.5], 0.75) == 0.375
        assert wmae([3, 4], [3, 4], 0.75) == 0
        with pytest.raises(ValueError):
            wmae([], [], 0.5)

    @given(st.lists(st.tuples(finite, finite), min_size=1, max_size=30))
    def test_half_tau_identity(self, pairs):
        y, yh = map(np.array, zip(*pairs))
        assert wmae(y, yh, 0.5) == mae(y, yh) / 2

    @given(st.lists(st.tuples(finite, finite), min_size=1, max_size=30))
    def test_rmse_dominates_mae(self, pairs):
        y, yh = map(np.array, zip(*pairs))
        assert rmse(y, yh) >= mae(y, yh) * (1 - 1e-12) - 1e-150  # squares of tiny residuals underflow

    def test_mae_rmse_examples(self):
        assert (mae([0, 0], [1, -1]), rmse([0, 0], [1, -1])) == (1, 1)
        assert mae([0, 0], [0, 2]) == 1 and rmse([0, 0], [0, 2]) == pytest.approx(np.sqrt(2))
        assert (mae([1, 2], [1, 2]), rmse([1, 2], [1, 2])) == (0, 0)


class TestQuantile:
    def test_median_of_four(self):
        y = np.array([1.0, 2, 3, 4])
        lo, hi = minimiser_interval(y, 0.5)
        b = fit_quantile(intercept_only(y), 0.5).coefficients[0]
        assert lo - 1e-6 <= b <= hi + 1e-6

    @pytest.mark.parametrize("tau", [0.1, 0.25, 0.5, 0.75, 0.9])
    def test_uniform_sample(self, tau):
        y = np.random.default_rng(int(tau * 100)).uniform(0, 10, 1000)
        lo, hi = minimiser_interval(y, tau)
        b = fit_quantile(intercept_only(y), tau).coefficients[0]
        assert lo - 1e-6 <= b <= hi + 1e-6

    def test_constant_target(self):
        for tau in (0.2, 0.75):
            assert fit_quantile(intercept_only(np.full(9, 4.2)), tau).coefficients[0] == pytest.approx(4.2)

    def test_tau_validation(self):
        for tau in (0.0, 1.0, -0.1):
            with pytest.raises(ValueError):
                fit_quantile(intercept_only([1.0, 2.0]), tau)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.05, 0.9))
    def test_monotone_in_tau(self, seed, tau):
        y = np.random.default_rng(seed).exponential(size=60)
        a = fit_quantile(intercept_only(y), tau).coefficients[0]
        b = fit_quantile(intercept_only(y), tau + 0.05).coefficients[0]
        assert b >= a - 1e-9

    def test_regression_beats_ols_on_pinball(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(0, 1, 300)
        y = 1 + 2 * x + (0.5 + x) * rng.normal(size=300)
        data = SupervisedSet(np.c_[np.ones(300), x], y, ["intercept", "x"])
        q = fit_quantile(data, 0.75)
        ols = fit_ols(data)
        assert pinball_loss(y, q.predict(data.X), 0.75) <= pinball_loss(y, ols.predict(data.X), 0.75)


class TestBaselineAndSplits:
    def test_baseline(self):
        a = np.zeros(24)
        b = np.zeros(24)
        a[9], b[9] = 10, 20
        assert baseline_profile(np.r_[a, b])[9] == 15
        assert np.array_equal(baseline_profile(a), a)
        assert np.all(baseline_profile(np.full(72, 3.0)) == 3.0)
        with pytest.raises(ValueError):
            baseline_profile([])

    def test_split_example(self):
        (tr1, te1), (tr2, te2) = rolling_splits(10, 2, 2)
        assert tr1.tolist() == list(range(6)) and te1.tolist() == [6, 7]
        assert tr2.tolist() == list(range(8)) and te2.tolist() == [8, 9]

    def test_single_fold(self):
        ((tr, te),) = rolling_splits(10, 1, 3)
        assert tr.tolist() == list(range(7)) and te.tolist() == [7, 8, 9]

    def test_degenerate(self):
        with pytest.raises(ValueError):
            rolling_splits(10, 1, 0)
        with pytest.raises(ValueError):
            rolling_splits(10, 6, 2)

    def test_four_fold_expanding_weeks(self):
        # 40 weekly instances, 12-week test block, training grows 16 -> 28
        folds = rolling_splits(40, 4, 12, step=4)
        assert [len(tr) for tr, _ in folds] == [16, 20, 24, 28]

    @given(st.integers(2, 200), st.integers(1, 5), st.integers(1, 10), st.integers(1, 10))
    def test_no_leakage(self, n, folds, test_len, step):
        try:
            splits = rolling_splits(n, folds, test_len, step)
        except ValueError:
            return
        prev = -1
        for tr, te in splits:
            assert tr.max() < te.min() and te.max() < n
            assert te.min() > prev
            prev = te.min()


class TestPipelines:
    def test_direct_forecast_recovers_periodic_signal(self):
        day = 50 + 40 * np.sin(np.arange(24) / 24 * 2 * np.pi)
        series = np.tile(day, 20)
        preds, models = direct_forecast(series, FeatureSpec(lag_days=3), [1, 2, 3])
        assert preds.shape == (3, 24) and len(models) == 3
        assert np.max(np.abs(preds - day)) < 1e-6

    def test_evaluate_direct_structure(self):
        rng = np.random.default_rng(0)
        series = np.tile(np.arange(24.0), 40) + rng.normal(0, 1, 960)
        res = evaluate_direct(series, FeatureSpec(lag_days=5), 2, 3, 4)
        assert len(res) == 3
        assert [r["train_days"] for r in res] == sorted(r["train_days"] for r in res)
        assert all(r["mae"] >= 0 and r["baseline_mae"] >= 0 for r in res)

    def test_attendance_design_levels(self):
        rows = [{"start": "09:00", "end": "11:00", "enrolment": 50, "week": 1, "class_type": t}
                for t in ("lecture", "tutorial", "lab")]
        X, names, levels = attendance_design(rows)
        assert names[:4] == ["intercept", "enrolment", "duration", "week"]
        assert levels["class_type"] == ["lab", "lecture", "tutorial"]
        assert X[0, names.index("duration")] == 2
        X2, names2, _ = attendance_design(rows[:1], levels)
        assert names2 == names and X2.shape == (1, X.shape[1])


def test_heteroscedastic_coverage():
    rng = np.random.default_rng(11)

    def sample(n):
        x = rng.uniform(0, 1, n)
        return x, 1 + 2 * x + (0.2 + 2 * x) * rng.normal(size=n)

    x, y = sample(2000)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        m = fit_quantile(SupervisedSet(np.c_[np.ones_like(x), x], y, ["intercept", "x"]), 0.75)
    xt, yt = sample(5000)
    cover = np.mean(yt <= m.predict(np.c_[np.ones_like(xt), xt]))
    assert abs(cover - 0.75) <= 0.05
