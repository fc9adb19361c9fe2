import numpy as np
import pytest
from scipy import stats

import aptroll


def test_f_distribution_matches_scipy():
    for df1, df2 in [(1, 50), (5, 458), (33, 5000)]:
        for x in (0.5, 1.0, 2.5):
            assert aptroll.f_upper_tail(x, df1, df2) == pytest.approx(stats.f.sf(x, df1, df2), abs=1e-10)
        q = aptroll.f_quantile(0.95, df1, df2)
        assert q == pytest.approx(stats.f.ppf(0.95, df1, df2), rel=1e-8)


def test_two_pass_on_simulated_panel():
    panel = aptroll.simulate(n=10, m=3, T=600, seed=3)
    assert panel.observations == 600
    assert panel.factor_ids == ["F1", "F2", "F3"]
    r = np.asarray(panel.excess_returns)
    f = np.asarray(panel.factors)

    fit = aptroll.first_pass(r, f)
    x = np.column_stack([np.ones(len(f)), f])
    coef, *_ = np.linalg.lstsq(x, r, rcond=None)
    np.testing.assert_allclose(fit.alpha, coef[0], rtol=1e-9, atol=1e-14)
    np.testing.assert_allclose(fit.beta, coef[1:].T, rtol=1e-9)

    est = aptroll.second_pass(fit, r.mean(axis=0))
    s_inv = np.linalg.inv(fit.sigma_hat)
    b = fit.beta
    oracle = np.linalg.solve(b.T @ s_inv @ b, b.T @ s_inv @ r.mean(axis=0))
    np.testing.assert_allclose(est.lambda_, oracle, rtol=1e-9)
    assert np.all(est.robust_se > 0)

    grs = aptroll.grs_statistic(fit)
    assert grs.df1 == 10 and grs.df2 == 600 - 13
    assert 0.0 <= grs.p_value <= 1.0


def test_roll_and_errors():
    panel = aptroll.simulate(n=6, m=2, T=300, seed=9)
    out = aptroll.roll(panel, window=100, step=10, threads=2)
    assert len(out["dates"]) == (300 - 100) // 10 + 1
    assert out["dates"][0] == panel.dates[99]
    assert out["lambda"].shape == (21, 2)

    with pytest.raises(ValueError):
        aptroll.roll(panel, window=400)
    with pytest.raises(aptroll.DataError):
        aptroll.Panel(["2020-01-01"], np.zeros((1, 2)), ["a", "b"], np.zeros((1, 2)), ["f", "g"])


def test_adf_on_white_noise():
    rng = np.random.default_rng(1)
    res = aptroll.adf_test(rng.standard_normal(1000).tolist())
    assert res.reject_at_1pct
    assert res.p_value_band == "<0.01"
    with pytest.raises(aptroll.SingularMatrixError):
        aptroll.adf_test([1.0] * 100)


def test_monte_carlo_summary():
    out = aptroll.mc_experiment(n=5, m=2, T=200, reps=20, seed=4)
    assert out["reps"] == 20
    assert len(out["lambda_bias"]) == 2
