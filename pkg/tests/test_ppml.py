"""Fixed-effects Poisson estimator: absorption, separation, oracle equality."""

import math

import numpy as np
import pandas as pd
import pytest

from teleparity.exceptions import ConvergenceError, DataError, DomainError
from teleparity.ppml import (
    FitResult,
    ModelSpec,
    absorb,
    cluster_vcov,
    drop_separated,
    fit,
    reset_test,
)

from conftest import dense_poisson_oracle


def small_panel(rng, n_units=10, n_years=4, beta=(0.3, -0.2), mean_scale=1.0):
    rows = []
    for u in range(n_units):
        for t in range(n_years):
            rows.append(dict(unit=u, year=2000 + t, cl=u % 4,
                             x1=rng.normal(), x2=rng.normal()))
    df = pd.DataFrame(rows)
    idx = (math.log(mean_scale) + beta[0] * df.x1 + beta[1] * df.x2
           + 0.1 * (df.unit % 3) + 0.05 * (df.year - 2000))
    df["y"] = rng.poisson(np.exp(idx))
    return df


SPEC = ModelSpec(outcome="y", regressors=("x1", "x2"),
                 absorb=("unit", "year"), cluster="cl")


class TestAbsorb:
    def test_single_dim_exact(self, rng):
        x = rng.normal(size=20)
        w = rng.uniform(0.5, 2.0, size=20)
        groups = np.repeat(np.arange(4), 5)
        out = absorb(x, w, [groups])
        for g in range(4):
            m = groups == g
            assert abs(np.sum(w[m] * out[m])) < 1e-10

    def test_constant_within_group_zeroed(self, rng):
        groups = np.repeat(np.arange(5), 4)
        x = groups.astype(float) * 3.0 + 1.0
        out = absorb(x, np.ones(20), [groups])
        assert np.max(np.abs(out)) < 1e-10

    def test_crossed_dims_match_dense_projector(self, rng):
        n = 24
        d1 = np.repeat(np.arange(6), 4)
        d2 = np.tile(np.arange(4), 6)
        w = rng.uniform(0.5, 2.0, size=n)
        x = rng.normal(size=(n, 2))
        out = absorb(x, w, [d1, d2], tol=1e-14)
        D = np.column_stack([np.eye(6)[d1], np.eye(4)[d2][:, 1:]])
        sw = np.sqrt(w)
        Dw = D * sw[:, None]
        proj = Dw @ np.linalg.pinv(Dw.T @ Dw) @ Dw.T
        expected = (x * sw[:, None] - proj @ (x * sw[:, None])) / sw[:, None]
        assert np.max(np.abs(out - expected)) < 1e-10

    def test_idempotent(self, rng):
        d1 = np.repeat(np.arange(4), 6)
        d2 = np.tile(np.arange(6), 4)
        x = rng.normal(size=24)
        w = rng.uniform(0.5, 2.0, size=24)
        once = absorb(x, w, [d1, d2], tol=1e-14)
        twice = absorb(once, w, [d1, d2], tol=1e-14)
        assert np.max(np.abs(once - twice)) < 1e-9

    def test_positive_weights_required(self):
        with pytest.raises(DomainError):
            absorb(np.ones(4), np.array([1.0, 0.0, 1.0, 1.0]), [np.zeros(4, int)])


class TestDropSeparated:
    def test_no_zero_cells(self, rng):
        df = small_panel(rng, mean_scale=10.0)
        kept, dropped = drop_separated(df, SPEC)
        assert dropped == []
        assert len(kept) == len(df)

    def test_all_zero_unit_dropped(self, rng):
        df = small_panel(rng, mean_scale=10.0)
        df.loc[df["unit"] == 3, "y"] = 0
        kept, dropped = drop_separated(df, SPEC)
        assert set(df.loc[df["unit"] == 3].index) == set(dropped)
        assert not (kept["unit"] == 3).any()

    def test_iterative_fixed_point(self, rng):
        # zeroing a unit can empty a year cell, requiring a second pass
        df = small_panel(rng, n_units=3, n_years=3, mean_scale=5.0)
        df.loc[df["unit"].isin([0, 1]), "y"] = 0
        df.loc[(df["unit"] == 2) & (df["year"] == 2000), "y"] = 0
        kept, dropped = drop_separated(df, SPEC)
        y = kept["y"].to_numpy(float)
        for dim in ("unit", "year"):
            sums = kept.groupby(dim)["y"].sum()
            assert (sums > 0).all()


class TestFit:
    def test_saturated_2x2_closed_form(self):
        # cell means (10, 12, 10, 15); interaction = ln(15*10/(10*12))
        rows = []
        means = {(0, 0): 10, (0, 1): 12, (1, 0): 10, (1, 1): 15}
        for (u, t), m in means.items():
            for _ in range(4):
                rows.append(dict(unit=u, year=t, cl=u, d=float(u * t), y=m))
        df = pd.DataFrame(rows)
        spec = ModelSpec(outcome="y", regressors=("d",), absorb=("unit", "year"),
                         cluster="cl")
        res = fit(df, spec)
        expected = math.log(15 * 10 / (10 * 12))
        assert res.coef("d") == pytest.approx(expected, abs=1e-10)
        assert expected == pytest.approx(0.22314, abs=1e-5)

    def test_zero_residual_recovery(self):
        # outcomes exactly exp(0.5 x) on an integer grid solve the score at 0.5
        df = pd.DataFrame({
            "unit": [0, 0, 1, 1],
            "year": [0, 1, 0, 1],
            "cl": [0, 0, 1, 1],
            "x": [math.log(1.0), math.log(4.0), math.log(9.0), math.log(16.0)],
        })
        df["y"] = np.exp(0.5 * df["x"]).round().astype(int)  # 1, 2, 3, 4
        spec = ModelSpec(outcome="y", regressors=("x",), absorb=("unit",),
                         cluster="cl")
        res = fit(df, spec)
        # one FE dimension; slope of the exact exponential fit
        mu = res.fitted_mean
        assert np.max(np.abs(df["y"] - mu)) < 1e-6

    def test_matches_dense_oracle(self, rng):
        worst_b = worst_v = 0.0
        for _ in range(8):
            df = small_panel(rng, n_units=rng.integers(8, 14),
                             n_years=rng.integers(3, 6), mean_scale=5.0)
            res = fit(df, SPEC)
            sub = df.loc[res.retained_index]
            beta_o, vcov_o, K = dense_poisson_oracle(sub, res.spec)
            worst_b = max(worst_b, np.max(np.abs(res.coefficients - beta_o)))
            worst_v = max(worst_v, np.max(np.abs(res.vcov_cluster - vcov_o)))
            assert res.n_params == K
        assert worst_b < 1e-8
        assert worst_v < 1e-6

    def test_score_zero_invariant(self, rng):
        df = small_panel(rng, mean_scale=8.0)
        res = fit(df, SPEC)
        sub = df.loc[res.retained_index]
        resid = sub["y"].to_numpy(float) - res.fitted_mean
        tol = 1e-8 * sub["y"].sum()
        for col in res.names:
            assert abs(np.dot(sub[col], resid)) < tol
        for dim in SPEC.absorb:
            assert sub.assign(r=resid).groupby(dim)["r"].sum().abs().max() < tol

    def test_row_order_invariance(self, rng):
        df = small_panel(rng, mean_scale=6.0)
        res1 = fit(df, SPEC)
        shuffled = df.sample(frac=1.0, random_state=1)
        res2 = fit(shuffled, SPEC)
        assert np.allclose(res1.coefficients, res2.coefficients, atol=1e-10)
        assert np.allclose(res1.vcov_cluster, res2.vcov_cluster, atol=1e-10)

    def test_collinear_column_dropped(self, rng):
        df = small_panel(rng, mean_scale=6.0)
        df["x3"] = 2.0 * df["x1"]
        spec = ModelSpec(outcome="y", regressors=("x1", "x2", "x3"),
                         absorb=("unit", "year"), cluster="cl")
        res = fit(df, spec)
        assert res.n_dropped_collinear == 1
        assert set(res.names) <= {"x1", "x2", "x3"}
        assert len(res.names) == 2

    def test_fe_constant_column_dropped(self, rng):
        df = small_panel(rng, mean_scale=6.0)
        df["unit_level"] = df["unit"].astype(float)
        spec = ModelSpec(outcome="y", regressors=("x1", "unit_level"),
                         absorb=("unit", "year"), cluster="cl")
        res = fit(df, spec)
        assert "unit_level" in res.dropped_collinear

    def test_vcov_symmetric_psd(self, rng):
        df = small_panel(rng, mean_scale=6.0)
        res = fit(df, SPEC)
        V = cluster_vcov(res)
        assert np.max(np.abs(V - V.T)) < 1e-12
        assert np.min(np.linalg.eigvalsh(V)) > -1e-12

    def test_missing_column_rejected(self, rng):
        df = small_panel(rng)
        spec = ModelSpec(outcome="y", regressors=("nope",), absorb=("unit",),
                         cluster="cl")
        with pytest.raises(DataError):
            fit(df, spec)

    def test_negative_outcome_rejected(self, rng):
        df = small_panel(rng)
        df.loc[0, "y"] = -1
        with pytest.raises(DataError):
            fit(df, SPEC)

    def test_duplicated_rows_keep_coefficients(self, rng):
        df = small_panel(rng, mean_scale=6.0)
        doubled = pd.concat([df, df], ignore_index=True)
        res1, res2 = fit(df, SPEC), fit(doubled, SPEC)
        assert np.allclose(res1.coefficients, res2.coefficients, atol=1e-8)
        # uncorrected cluster vcov is invariant to within-cluster duplication
        assert np.allclose(
            res1.vcov_cluster_uncorrected, res2.vcov_cluster_uncorrected, atol=1e-8
        )

    def test_single_observation_clusters_match_hc(self, rng):
        df = small_panel(rng, mean_scale=6.0)
        df["cl"] = np.arange(len(df))
        res = fit(df, SPEC)
        sub = df.loc[res.retained_index]
        _, vcov_o, _ = dense_poisson_oracle(sub, res.spec)
        assert np.allclose(res.vcov_cluster, vcov_o, atol=1e-8)


class TestResetTest:
    def test_well_specified_large_p(self, rng):
        df = small_panel(rng, n_units=40, n_years=6, mean_scale=20.0)
        out = reset_test(df, SPEC)
        assert out["statistic"] >= 0
        assert 0.0 <= out["p_value"] <= 1.0

    def test_detects_quadratic_omission(self, rng):
        rows = []
        for u in range(60):
            for t in range(6):
                x = rng.normal()
                rows.append(dict(unit=u, year=t, cl=u, x1=x,
                                 y=rng.poisson(np.exp(1.0 + 0.3 * x + 0.4 * x * x))))
        df = pd.DataFrame(rows)
        spec = ModelSpec(outcome="y", regressors=("x1",), absorb=("unit", "year"),
                         cluster="cl")
        out = reset_test(df, spec)
        assert out["p_value"] < 0.05


class TestTranslationInvariance:
    def test_global_scaling_absorbed_by_fixed_effects(self, rng):
        # tripling every outcome shifts the absorbed effects by ln 3 and
        # leaves the slope coefficients unchanged
        df = small_panel(rng, mean_scale=6.0)
        res1 = fit(df, SPEC)
        scaled = df.copy()
        scaled["y"] = scaled["y"] * 3
        res2 = fit(scaled, SPEC)
        assert np.allclose(res1.coefficients, res2.coefficients, atol=1e-7)
