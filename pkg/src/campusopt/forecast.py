"""
Direct multi-step demand forecasting with Fourier seasonality, daily
seasonal lags and linear models fitted under squared or pinball loss.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

RIDGE_PENALTY = 1e-8


class SingularDesignError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class FeatureSpec:
    fourier_pairs: int = 2
    periods: tuple[float, ...] = (24.0, 120.0)
    lag_days: int = 10
    hours_per_day: int = 24

    def __post_init__(self):
        if self.fourier_pairs < 1:
            raise ValueError("fourier_pairs must be >= 1")
        if any(p <= 0 for p in self.periods):
            raise ValueError("periods must be positive")
        if self.lag_days < 0:
            raise ValueError("lag_days must be >= 0")


@dataclass
class SupervisedSet:
    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    horizon: int = 1
    target_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def __post_init__(self):
        if len(self.X) != len(self.y):
            raise ValueError("X and y row counts differ")


@dataclass
class LinearModel:
    coefficients: np.ndarray
    feature_names: list[str]
    loss_kind: str = "squared_error"
    tau: float | None = None

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != len(self.coefficients):
            raise ValueError("feature count does not match the model")
        return X @ self.coefficients

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "coefficients": [float(c) for c in self.coefficients],
            "loss_kind": self.loss_kind,
            "tau": self.tau,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "LinearModel":
        return cls(np.asarray(d["coefficients"], dtype=float), list(d["feature_names"]),
                   d.get("loss_kind", "squared_error"), d.get("tau"))


def fourier_features(t, period: float, K: int) -> np.ndarray:
    """``[sin(2πkt/p), cos(2πkt/p)]`` for k = 1..K, interleaved.

    ``t`` may be a scalar (returns shape ``(2K,)``) or an array (returns
    shape ``(len(t), 2K)``).
    """
    if period <= 0:
        raise ValueError("period must be positive")
    t_arr = np.asarray(t, dtype=float)
    # reduce modulo the period first so t and t+p give bitwise-equal phases
    phase = 2 * np.pi * np.mod(t_arr, period)[..., None] / period
    k = np.arange(1, K + 1)
    out = np.empty(t_arr.shape + (2 * K,))
    out[..., 0::2] = np.sin(k * phase)
    out[..., 1::2] = np.cos(k * phase)
    return out


def one_hot(values, name: str) -> tuple[np.ndarray, list[str]]:
    """Drop-first one-hot encoding of a categorical column."""
    values = [str(v) for v in values]
    levels = sorted(set(values))
    cols = levels[1:]
    M = np.zeros((len(values), len(cols)))
    index = {lv: i for i, lv in enumerate(cols)}
    for r, v in enumerate(values):
        if v in index:
            M[r, index[v]] = 1.0
    return M, [f"{name}={lv}" for lv in cols]


def _seasonal_block(t, spec: FeatureSpec):
    cols, names = [], []
    for p in spec.periods:
        cols.append(fourier_features(t, p, spec.fourier_pairs))
        for k in range(1, spec.fourier_pairs + 1):
            names += [f"sin_{k}_p{p:g}", f"cos_{k}_p{p:g}"]
    return np.hstack(cols), names


def _flag_block(flags, rows):
    cols, names = [], []
    for name, col in (flags or {}).items():
        col = np.asarray(col)
        cols.append(col[rows].astype(float).reshape(-1, 1))
        names.append(name)
    return cols, names


def required_days(spec: FeatureSpec, horizon: int) -> int:
    return horizon + spec.lag_days if spec.lag_days else 1


def build_direct_set(series, spec: FeatureSpec = FeatureSpec(), horizon: int = 1,
                     flags: dict | None = None) -> SupervisedSet:
    """Training set for the direct model predicting ``horizon`` days ahead.

    ``series`` is an hourly series covering whole days. The instance at day
    ``d`` and hour ``h`` uses the same hour's values on days
    ``d - horizon, d - horizon - 1, ...`` (``lag_days`` of them), so no
    feature looks past the forecast origin. ``flags`` maps feature names to
    per-hour columns aligned with ``series`` (binary, or pre-encoded).
    """
    y_all = np.asarray(getattr(series, "values", series), dtype=float)
    hpd = spec.hours_per_day
    if horizon < 1:
        raise ValueError("horizon must be >= 1 day")
    if len(y_all) % hpd:
        raise ValueError(f"series length {len(y_all)} is not a whole number of days")
    n_days = len(y_all) // hpd
    need = required_days(spec, horizon)
    if n_days < need:
        raise ValueError(
            f"insufficient history: {n_days} day(s) given, at least {need} days "
            f"({need * hpd} hourly values) required for horizon {horizon} with "
            f"{spec.lag_days} lag day(s)"
        )
    first_day = horizon + spec.lag_days - 1 if spec.lag_days else 0
    rows = np.arange(first_day * hpd, n_days * hpd)
    return SupervisedSet(*_design(y_all, rows, spec, horizon, flags), horizon=horizon,
                         target_index=rows)


def _design(y_all, rows, spec, horizon, flags):
    hpd = spec.hours_per_day
    seasonal, names = _seasonal_block(rows.astype(float), spec)
    blocks = [np.ones((len(rows), 1)), seasonal]
    names = ["intercept"] + names
    fcols, fnames = _flag_block(flags, rows)
    blocks += fcols
    names += fnames
    if spec.lag_days:
        lag_cols = []
        for j in range(spec.lag_days):
            src = rows - (horizon + j) * hpd
            lag_cols.append(y_all[src] if len(y_all) else np.zeros(len(rows)))
            names.append(f"lag_{horizon + j}d")
        blocks.append(np.column_stack(lag_cols))
    y = y_all[rows] if rows.size and rows.max() < len(y_all) else np.full(len(rows), np.nan)
    return np.hstack(blocks), y, names


def forecast_rows(series, spec: FeatureSpec, horizon: int, flags: dict | None = None):
    """Feature rows for the day ``horizon`` days after the end of ``series``.

    ``flags`` columns must extend over that day as well.
    """
    y_all = np.asarray(getattr(series, "values", series), dtype=float)
    hpd = spec.hours_per_day
    n_days = len(y_all) // hpd
    if n_days < max(spec.lag_days, 1):
        raise ValueError(f"insufficient history: need {spec.lag_days} day(s), have {n_days}")
    target_day = n_days - 1 + horizon
    rows = np.arange(target_day * hpd, (target_day + 1) * hpd)
    X, _, names = _design(y_all, rows, spec, horizon, flags)
    return X, names, rows


def fit_ols(data: SupervisedSet, ridge_fallback: bool = True) -> LinearModel:
    X, y = np.asarray(data.X, float), np.asarray(data.y, float)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        if not ridge_fallback:
            raise SingularDesignError("design matrix is rank deficient")
        warnings.warn("rank-deficient design; falling back to ridge with penalty "
                      f"{RIDGE_PENALTY:g}", RuntimeWarning, stacklevel=2)
        A = X.T @ X + RIDGE_PENALTY * np.eye(X.shape[1])
        beta = np.linalg.solve(A, X.T @ y)
    else:
        beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    return LinearModel(beta, list(data.feature_names), "squared_error", None)


def pinball_loss(y, y_hat, tau: float) -> float:
    """Summed quantile loss: under-prediction costs ``tau`` per unit, over-prediction ``1 - tau``."""
    y, y_hat = np.asarray(y, float), np.asarray(y_hat, float)
    if y.shape != y_hat.shape:
        raise ValueError("y and y_hat lengths differ")
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    r = y - y_hat
    return float(np.sum(np.where(r < 0, (tau - 1) * r, tau * r)))


def wmae(y, y_hat, tau: float) -> float:
    if len(y) == 0:
        raise ValueError("wmae of an empty sample")
    return pinball_loss(y, y_hat, tau) / len(y)


def mae(y, y_hat) -> float:
    y, y_hat = np.asarray(y, float), np.asarray(y_hat, float)
    if y.shape != y_hat.shape or y.size == 0:
        raise ValueError("need equal, non-empty inputs")
    return float(np.mean(np.abs(y - y_hat)))


def rmse(y, y_hat) -> float:
    y, y_hat = np.asarray(y, float), np.asarray(y_hat, float)
    if y.shape != y_hat.shape or y.size == 0:
        raise ValueError("need equal, non-empty inputs")
    return float(np.sqrt(np.mean((y - y_hat) ** 2)))


def _polish(X, y, beta, tau):
    # snap to the vertex through the p best-fitting observations
    r = np.abs(y - X @ beta)
    p = X.shape[1]
    chosen = []
    for i in np.argsort(r, kind="stable"):
        trial = chosen + [int(i)]
        if np.linalg.matrix_rank(X[trial]) == len(trial):
            chosen = trial
            if len(chosen) == p:
                break
    if len(chosen) < p:
        return beta
    vertex = np.linalg.solve(X[chosen], y[chosen])
    if pinball_loss(y, X @ vertex, tau) <= pinball_loss(y, X @ beta, tau):
        return vertex
    return beta


def fit_quantile(data: SupervisedSet, tau: float, eps_final: float = 1e-6,
                 max_iter: int = 500, tol: float = 1e-12) -> LinearModel:
    """Linear quantile regression by majorise-minimise reweighted least squares.

    Each iteration solves ``X'AX b = X'Ay + (tau - 1/2) X'1 / 2`` with
    ``A = diag(1 / (4 (eps + |r|)))``; the smoothing ``eps`` shrinks
    geometrically to ``eps_final``. The result is finally snapped to the
    interpolating vertex through the best-fitting observations when that
    does not increase the loss.
    """
    if not 0 < tau < 1:
        raise ValueError("tau must lie strictly between 0 and 1")
    X, y = np.asarray(data.X, float), np.asarray(data.y, float)
    n, p = X.shape
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    scale = float(np.median(np.abs(y - X @ beta))) or float(np.std(y)) or 1.0
    eps = max(scale * 1e-1, eps_final)
    lin = 0.5 * (tau - 0.5) * X.sum(axis=0)
    if np.linalg.matrix_rank(X) < p:
        warnings.warn("rank-deficient design; using minimum-norm solves", RuntimeWarning, stacklevel=2)

        def solve(A, b):
            return np.linalg.lstsq(A, b, rcond=None)[0]
    else:
        ridge = 1e-12 * np.eye(p)

        def solve(A, b):
            return np.linalg.solve(A + ridge, b)
    while True:
        for _ in range(max_iter):
            w = 1.0 / (4.0 * (eps + np.abs(y - X @ beta)))
            XtW = X.T * w
            new = solve(XtW @ X, XtW @ y + lin)
            step = np.max(np.abs(new - beta))
            beta = new
            if step <= tol * (1 + np.max(np.abs(beta))):
                break
        if eps <= eps_final:
            break
        eps = max(eps * 0.1, eps_final)
    beta = _polish(X, y, beta, tau)
    return LinearModel(beta, list(data.feature_names), "quantile", float(tau))


def baseline_profile(history, hours_per_day: int = 24) -> np.ndarray:
    """Mean of each hour-slot across the historical days."""
    h = np.asarray(getattr(history, "values", history), dtype=float)
    if h.size == 0:
        raise ValueError("empty history")
    if h.ndim == 1:
        if len(h) % hours_per_day:
            raise ValueError("history is not a whole number of days")
        h = h.reshape(-1, hours_per_day)
    return h.mean(axis=0)


def rolling_splits(n_instances: int, n_folds: int, test_len: int, step: int | None = None):
    """Expanding-window train/test index splits ending at ``n_instances``.

    Fold ``f`` tests on ``test_len`` indices starting after its training
    block; successive folds advance by ``step`` (default ``test_len``).
    """
    if test_len <= 0:
        raise ValueError("test_len must be positive")
    if n_folds <= 0:
        raise ValueError("n_folds must be positive")
    step = test_len if step is None else step
    if step <= 0:
        raise ValueError("step must be positive")
    last_start = n_instances - test_len
    first_start = last_start - (n_folds - 1) * step
    if first_start <= 0:
        raise ValueError(
            f"{n_folds} fold(s) of {test_len} test instance(s) with step {step} "
            f"do not fit in {n_instances} instances"
        )
    splits = []
    for f in range(n_folds):
        start = first_start + f * step
        splits.append((np.arange(0, start), np.arange(start, start + test_len)))
    return splits


def clamp_unit(y) -> np.ndarray:
    return np.clip(np.asarray(y, dtype=float), 0.0, 1.0)


def direct_forecast(series, spec: FeatureSpec, horizons, fitter=fit_ols, flags=None):
    """Fit one model per horizon and predict the day that far ahead.

    Returns ``(predictions, models)`` with ``predictions`` shaped
    ``(len(horizons), hours_per_day)``.
    """
    preds, models = [], []
    for h in horizons:
        data = build_direct_set(series, spec, h, flags)
        model = fitter(data)
        X, _, _ = forecast_rows(series, spec, h, flags)
        preds.append(np.maximum(model.predict(X), 0.0))
        models.append(model)
    return np.array(preds), models


def evaluate_direct(series, spec: FeatureSpec, horizon: int, n_folds: int, test_days: int,
                    fitter=fit_ols, step_days: int | None = None):
    """Per-fold MAE of the direct model and of the hour-slot mean baseline.

    Splits are made on whole days of the supervised set so that every fold
    tests on complete daily profiles.
    """
    data = build_direct_set(series, spec, horizon)
    hpd = spec.hours_per_day
    y_all = np.asarray(getattr(series, "values", series), dtype=float)
    n_days = len(data.y) // hpd
    results = []
    for tr_days, te_days in rolling_splits(n_days, n_folds, test_days, step_days):
        tr = (tr_days[:, None] * hpd + np.arange(hpd)).ravel()
        te = (te_days[:, None] * hpd + np.arange(hpd)).ravel()
        sub = SupervisedSet(data.X[tr], data.y[tr], data.feature_names, horizon)
        model = fitter(sub)
        pred = np.maximum(model.predict(data.X[te]), 0.0)
        # baseline sees the raw history up to each test day's forecast origin
        origin_end = int(data.target_index[te[0]]) - (horizon - 1) * hpd
        base = np.tile(baseline_profile(y_all[:origin_end], hpd), len(te_days))
        results.append({"train_days": int(len(tr_days)), "test_days": int(len(te_days)),
                        "mae": mae(data.y[te], pred), "baseline_mae": mae(data.y[te], base)})
    return results


# --- classroom attendance -------------------------------------------------

TIME_OF_DAY_BUCKETS = ((9, 12, "morning"), (12, 15, "afternoon"), (15, 18, "evening"), (18, 24, "night"))


def time_of_day_bucket(start_hour: float) -> str:
    for lo, hi, name in TIME_OF_DAY_BUCKETS:
        if lo <= start_hour < hi:
            return name
    return "early"


def _hour(value) -> float:
    s = str(value).strip()
    if ":" in s:
        hh, mm = s.split(":")[:2]
        return int(hh) + int(mm) / 60
    return float(s)


NUMERIC_ATTRIBUTES = ("enrolment", "duration", "week")
CATEGORICAL_ATTRIBUTES = ("class_type", "faculty", "school", "degree", "course_status",
                          "joint", "day", "time_of_day")


def attendance_design(rows, levels: dict | None = None):
    """Design matrix for attendance prediction from timetable-style rows.

    Course identity is deliberately not a feature. Categorical attributes
    present in the rows are one-hot encoded (first level dropped);
    ``levels`` pins the category sets learned on a training table so test
    rows are encoded consistently. Returns ``(X, names, levels)``.
    """
    rows = list(rows)
    derived = []
    for r in rows:
        d = dict(r)
        start, end = _hour(r["start"]), _hour(r["end"])
        d["duration"] = end - start
        d["time_of_day"] = time_of_day_bucket(start)
        derived.append(d)
    cols = [np.ones(len(rows))]
    names = ["intercept"]
    for a in NUMERIC_ATTRIBUTES:
        if derived and a in derived[0]:
            cols.append(np.array([float(d[a]) for d in derived]))
            names.append(a)
    levels = dict(levels or {})
    for a in CATEGORICAL_ATTRIBUTES:
        if not derived or a not in derived[0]:
            continue
        vals = [str(d[a]) for d in derived]
        if a not in levels:
            levels[a] = sorted(set(vals))
        for lv in levels[a][1:]:
            cols.append(np.array([1.0 if v == lv else 0.0 for v in vals]))
            names.append(f"{a}={lv}")
    return np.column_stack(cols), names, levels
