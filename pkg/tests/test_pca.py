import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcvir.exceptions import DataError
from pcvir.linalg import jacobi_eigh, symmetric_inverse
from pcvir.pca import Retention, fit_pca, parallel_analysis_threshold, project
from pcvir.synthdata import acoustic_like_spec, generate


def exact_correlation_table(r, n=200, seed=0):
    """Two columns whose sample correlation is exactly r (Gram-Schmidt construction)."""
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, n))
    a = a - a.mean()
    b = b - b.mean()
    b = b - (a @ b) / (a @ a) * a
    a /= np.linalg.norm(a)
    b /= np.linalg.norm(b)
    return np.column_stack([a, r * a + np.sqrt(1 - r * r) * b])


def random_table(seed, n=300, p=8):
    rng = np.random.default_rng(seed)
    mix = rng.normal(size=(p, p))
    return rng.normal(size=(n, p)) @ mix * rng.uniform(0.1, 10, size=p) + rng.normal(size=p)


# --- Jacobi ---------------------------------------------------------------------

@pytest.mark.parametrize("p", [1, 2, 3, 7, 20, 33])
def test_jacobi_matches_numpy(p):
    rng = np.random.default_rng(p)
    m = rng.normal(size=(p, p))
    a = m @ m.T
    w, v, ok = jacobi_eigh(a)
    assert ok
    np.testing.assert_allclose(w, np.linalg.eigvalsh(a)[::-1], atol=1e-10 * max(1, w[0]))
    np.testing.assert_allclose(v.T @ v, np.eye(p), atol=1e-12)
    np.testing.assert_allclose(a @ v, v * w, atol=1e-10 * max(1, w[0]))


def test_jacobi_diagonal_and_tiny_offdiagonal():
    a = np.diag([3.0, 1.0, 2.0])
    a[0, 1] = a[1, 0] = 1e-20
    w, v, ok = jacobi_eigh(a)
    assert ok
    np.testing.assert_allclose(w, [3.0, 2.0, 1.0])


def test_symmetric_inverse():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(5, 5))
    a = m @ m.T + np.eye(5)
    np.testing.assert_allclose(symmetric_inverse(a) @ a, np.eye(5), atol=1e-10)
    assert symmetric_inverse(np.ones((3, 3))) is None


# --- fit_pca --------------------------------------------------------------------

def test_two_feature_correlation_example():
    x = exact_correlation_table(0.6)
    m = fit_pca(x)
    np.testing.assert_allclose(m.eigenvalues, [1.6, 0.4], atol=1e-12)
    np.testing.assert_allclose(m.loadings[:, 0], [np.sqrt(0.8), np.sqrt(0.8)], atol=1e-12)
    assert m.loadings[0, 0] == pytest.approx(0.894, abs=5e-4)
    assert m.n_retained == 1


def test_independent_features_have_unit_eigenvalues():
    x = np.random.default_rng(1).standard_normal((10000, 10))
    m = fit_pca(x)
    assert np.all(np.abs(m.eigenvalues - 1) < 0.1)


def test_model_invariants():
    x = random_table(0)
    m = fit_pca(x)
    p = x.shape[1]
    assert np.all(np.diff(m.eigenvalues) <= 0)
    assert np.all(m.eigenvalues >= 0)
    np.testing.assert_allclose(m.eigenvectors.T @ m.eigenvectors, np.eye(p), atol=1e-8)
    np.testing.assert_array_equal(m.loadings, m.eigenvectors * np.sqrt(m.eigenvalues))
    assert np.all(np.abs(m.loadings) <= 1 + 1e-8)
    assert m.eigenvalues.sum() == pytest.approx(p, abs=1e-6)
    assert 1 <= m.n_retained <= p


def test_loadings_are_correlations_with_scores():
    x = random_table(2)
    m = fit_pca(x)
    scores = project(m, x, x.shape[1])
    for i in range(x.shape[1]):
        for j in range(x.shape[1]):
            r = np.corrcoef(x[:, j], scores[:, i])[0, 1]
            assert m.loadings[j, i] == pytest.approx(r, abs=1e-8)


def test_sign_convention():
    m = fit_pca(random_table(4))
    idx = np.argmax(np.abs(m.eigenvectors), axis=0)
    assert np.all(m.eigenvectors[idx, np.arange(idx.size)] > 0)


def test_refit_is_bitwise_identical():
    x = random_table(5)
    np.testing.assert_array_equal(fit_pca(x).loadings, fit_pca(x).loadings)


def test_row_permutation_invariance():
    x = random_table(6)
    perm = np.random.default_rng(0).permutation(x.shape[0])
    a, b = fit_pca(x), fit_pca(x[perm])
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, atol=1e-8)
    np.testing.assert_allclose(a.loadings, b.loadings, atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 7), st.floats(1e-3, 1e3))
def test_scale_invariance(seed, col, factor):
    x = random_table(seed)
    y = x.copy()
    y[:, col] *= factor
    a, b = fit_pca(x), fit_pca(y)
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, atol=1e-8)
    np.testing.assert_allclose(a.loadings, b.loadings, atol=1e-8)


def test_errors():
    x = random_table(7)
    x[:, 3] = 2.0
    with pytest.raises(DataError, match="height"):
        fit_pca(x, feature_names=[f"f{j}" for j in range(2)] + ["f2", "height"] + [f"g{j}" for j in range(4)])
    with pytest.raises(DataError, match="2 rows"):
        fit_pca(np.ones((1, 3)))
    y = random_table(8)
    y[0, 0] = np.nan
    with pytest.raises(DataError):
        fit_pca(y)


# --- project --------------------------------------------------------------------

def test_full_projection_reconstructs_standardized_table():
    x = random_table(9)
    m = fit_pca(x)
    scores = project(m, x, x.shape[1])
    z = m.standardization.apply(x)
    np.testing.assert_allclose(scores @ m.eigenvectors.T, z, atol=1e-8)


def test_mean_row_projects_to_zero():
    x = random_table(10)
    m = fit_pca(x)
    s = project(m, x.mean(axis=0, keepdims=True), x.shape[1])
    np.testing.assert_allclose(s, 0.0, atol=1e-12)


def test_score_variances_equal_eigenvalues_and_are_uncorrelated():
    x = random_table(11, n=500, p=10)
    m = fit_pca(x)
    s = project(m, x, 10)
    np.testing.assert_allclose(s.var(axis=0, ddof=1), m.eigenvalues, atol=1e-6)
    c = np.cov(s.T)
    off = c[~np.eye(10, dtype=bool)]
    assert np.abs(off).max() <= 1e-8


def test_project_feature_mismatch():
    m = fit_pca(random_table(12))
    with pytest.raises(DataError):
        project(m, np.ones((3, 5)))
    with pytest.raises(DataError):
        project(m, np.ones((3, 8)), k=9)


# --- retention ------------------------------------------------------------------

def test_parallel_analysis_thresholds_large_n_approach_one():
    t = parallel_analysis_threshold(50_000, 5, iterations=5, seed=1)
    assert np.all(np.abs(t - 1) < 0.05)


def test_parallel_analysis_golden():
    t = parallel_analysis_threshold(100, 20, iterations=100, percentile=0.95, seed=0)
    assert 1.9 <= t[0] <= 2.1
    # frozen after first run
    assert t[0] == pytest.approx(2.0397319, abs=1e-6)
    assert np.all(np.diff(t) <= 0)


def test_realistic_width_retention_and_parallel_agreement():
    table = generate(acoustic_like_spec(500, 6, seed=0)).table
    kaiser, parallel = [], []
    for _, g in table.iter_groups():
        kaiser.append(fit_pca(g.rows).n_retained)
        parallel.append(fit_pca(g.rows, Retention("parallel", iterations=50, seed=1)).n_retained)
    assert all(3 <= k <= 6 for k in kaiser)
    assert np.mean(kaiser) == pytest.approx(5.0, abs=1.0)
    # Kaiser additionally keeps near-1 noise components at this width; parallel analysis
    # stops at the three latent dimensions
    assert parallel == [3] * 6


def test_retention_all():
    x = random_table(13)
    assert fit_pca(x, Retention("all")).n_retained == x.shape[1]
    with pytest.raises(ValueError):
        Retention("elbow")
