import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcvir.exceptions import DataError
from pcvir.glm import (
    LabelCoding,
    fit_intercept_only,
    fit_logistic,
    per_variable_z,
    predict_prob,
)
from pcvir.pca import Retention, fit_pca, project


def simulate(seed, n, b0=0.5, b1=1.5):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    y = (rng.random(n) < 1 / (1 + np.exp(-(b0 + b1 * x)))).astype(int)
    return x[:, None], y


def grid_search_mle(x, y, center=(0.0, 0.0), half=5.0, points=41, rounds=12):
    """Zooming grid maximization of the Bernoulli log-likelihood."""
    c0, c1 = center
    for _ in range(rounds):
        g0 = np.linspace(c0 - half, c0 + half, points)
        g1 = np.linspace(c1 - half, c1 + half, points)
        b0, b1 = np.meshgrid(g0, g1, indexing="ij")
        eta = b0[..., None] + b1[..., None] * x[:, 0]
        ll = (y * eta - np.logaddexp(0, eta)).sum(axis=-1)
        i, j = np.unravel_index(np.argmax(ll), ll.shape)
        c0, c1 = g0[i], g1[j]
        half /= 4
    return np.array([c0, c1])


def test_intercept_only_balanced():
    f = fit_intercept_only([0, 1] * 50)
    assert f.coefficients[0] == pytest.approx(0.0, abs=1e-12)


def test_intercept_only_sixty_forty():
    f = fit_intercept_only([1] * 60 + [0] * 40)
    assert f.coefficients[0] == pytest.approx(math.log(0.6 / 0.4), abs=1e-10)
    assert f.coefficients[0] == pytest.approx(0.4055, abs=1e-4)


def test_simulated_recovery():
    x, y = simulate(0, 5000)
    f = fit_logistic(x, y)
    assert f.converged
    diff = f.coefficients - np.array([0.5, 1.5])
    assert np.all(np.abs(diff) < 3 * f.standard_errors)


def test_against_grid_search_oracle():
    x, y = simulate(3, 50)
    f = fit_logistic(x, y)
    np.testing.assert_allclose(f.coefficients, grid_search_mle(x, y), atol=1e-4)


def test_fit_invariants():
    x, y = simulate(4, 400)
    f = fit_logistic(np.column_stack([x, x ** 2]), y)
    assert f.coefficients.shape == f.standard_errors.shape == f.z_statistics.shape == (3,)
    np.testing.assert_array_equal(f.z_statistics, f.coefficients / f.standard_errors)
    assert f.converged and abs(f.deviance_trace[-1] - f.deviance_trace[-2]) < 1e-8
    assert all(a >= b for a, b in zip(f.deviance_trace, f.deviance_trace[1:]))
    assert f.deviance >= 0
    assert not f.separation_warning


def test_predict_prob_examples():
    x, y = simulate(5, 300, b0=0.0)
    f = fit_logistic(x, y)
    f0 = type(f)(np.array([0.0, 1.0]), f.standard_errors, f.z_statistics, True, 1, 0.0, False)
    assert predict_prob(f0, np.zeros((1, 1)))[0] == 0.5
    high = predict_prob(f0, np.array([[40.0]]))[0]
    assert high < 1.0 and 1.0 - high <= 1e-15
    with pytest.raises(DataError):
        predict_prob(f, np.zeros((2, 2)))


def test_mean_fitted_probability_equals_prevalence():
    for seed in range(5):
        x, y = simulate(seed, 700, b0=-0.7)
        f = fit_logistic(x, y)
        assert predict_prob(f, x).mean() == pytest.approx(y.mean(), abs=1e-6)


@pytest.mark.filterwarnings("ignore:possible complete:RuntimeWarning")
@settings(max_examples=20, deadline=None)
@given(st.integers(0, 1000), st.floats(0.01, 100))
def test_scaling_equivariance(seed, c):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((200, 2))
    y = (rng.random(200) < 1 / (1 + np.exp(-(x[:, 0] - x[:, 1])))).astype(int)
    a = fit_logistic(x, y)
    xs = x.copy()
    xs[:, 1] *= c
    b = fit_logistic(xs, y)
    assert b.coefficients[2] == pytest.approx(a.coefficients[2] / c, rel=1e-6)
    np.testing.assert_allclose(predict_prob(a, x), predict_prob(b, xs), atol=1e-8)


def test_all_components_equal_direct_fit():
    rng = np.random.default_rng(7)
    lat = rng.standard_normal((500, 2))
    x = lat @ rng.normal(size=(2, 6)) + 0.5 * rng.standard_normal((500, 6))
    y = (rng.random(500) < 1 / (1 + np.exp(-lat[:, 0]))).astype(int)
    m = fit_pca(x, Retention("all"))
    s = project(m, x)
    z = m.standardization.apply(x)
    np.testing.assert_allclose(predict_prob(fit_logistic(s, y), s),
                               predict_prob(fit_logistic(z, y), z), atol=1e-6)


def test_errors():
    x, y = simulate(8, 50)
    with pytest.raises(DataError, match="single class"):
        fit_logistic(x, np.zeros(50))
    with pytest.raises(DataError, match="zero variance"):
        fit_logistic(np.column_stack([x, np.ones(50)]), y)
    with pytest.raises(DataError):
        fit_logistic(x, y[:-1])
    with pytest.raises(DataError):
        LabelCoding("oral", "oral")


def test_separation_warning():
    x = np.linspace(-1, 1, 40)[:, None]
    y = (x[:, 0] > 0).astype(int)
    with pytest.warns(RuntimeWarning, match="separation"):
        f = fit_logistic(x, y)
    assert f.separation_warning


# --- per_variable_z -------------------------------------------------------------

def test_per_variable_z_null_feature():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((2000, 1))
        y = rng.integers(0, 2, 2000)
        hits += abs(per_variable_z(x, y)[0]) < 1.96
    assert hits >= 90


def test_per_variable_z_label_copy():
    rng = np.random.default_rng(1)
    y = rng.integers(0, 2, 500)
    x = (y + 0.8 * rng.standard_normal(500))[:, None]
    assert per_variable_z(x, y)[0] > 10


def test_per_variable_z_negation_is_exact():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((300, 3))
    y = (x[:, 0] + rng.standard_normal(300) > 0).astype(int)
    np.testing.assert_array_equal(per_variable_z(-x, y), -per_variable_z(x, y))


def test_per_variable_z_isolates_failures():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((100, 3))
    x[:, 1] = 4.0
    y = rng.integers(0, 2, 100)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        z = per_variable_z(x, y)
    assert np.isnan(z[1]) and np.isfinite(z[[0, 2]]).all()
    assert any("feature 1" in str(w.message) for w in caught)
