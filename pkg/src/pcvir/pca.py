"""Correlation-matrix PCA with Kaiser or parallel-analysis retention."""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError, FitError
from .linalg import jacobi_eigh

KAISER = "kaiser"
PARALLEL = "parallel"
ALL = "all"


@dataclass(frozen=True)
class Retention:
    """How many principal components to keep.

    ``kind`` is one of ``"kaiser"`` (eigenvalue >= 1), ``"parallel"``
    (Horn's parallel analysis) or ``"all"``.
    """

    kind: str = KAISER
    iterations: int = 100
    percentile: float = 0.95
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (KAISER, PARALLEL, ALL):
            raise ValueError(f"unknown retention strategy {self.kind!r}")
        if self.iterations < 1:
            raise ValueError("parallel analysis needs at least one iteration")
        if not 0.0 < self.percentile < 1.0:
            raise ValueError("percentile must lie strictly between 0 and 1")

    def to_dict(self):
        if self.kind == PARALLEL:
            return {"kind": self.kind, "iterations": self.iterations,
                    "percentile": self.percentile, "seed": self.seed}
        return {"kind": self.kind}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True)
class StandardizationParams:
    means: np.ndarray
    sds: np.ndarray

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.means.shape[0]:
            raise DataError(
                f"expected {self.means.shape[0]} feature columns, got shape {x.shape}")
        return (x - self.means) / self.sds


@dataclass(frozen=True)
class PcaModel:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # feature x component
    loadings: np.ndarray  # feature x component, correlations with unit-scaled PCs
    n_retained: int
    standardization: StandardizationParams
    feature_names: tuple = field(default=())

    @property
    def n_features(self):
        return self.eigenvectors.shape[0]


def standardize(x, feature_names=None):
    """Column means and SDs (N-1 denominator) of ``x``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise DataError(f"expected a 2-D table, got shape {x.shape}")
    if x.shape[0] < 2:
        raise DataError(f"need at least 2 rows, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise DataError("table contains missing or non-finite values")
    means = x.mean(axis=0)
    sds = x.std(axis=0, ddof=1)
    bad = np.flatnonzero(~(sds > 0))
    if bad.size:
        names = [feature_names[j] if feature_names else f"column {j}" for j in bad]
        raise DataError(f"zero-variance feature(s): {', '.join(map(str, names))}")
    return StandardizationParams(means, sds)


def _fix_signs(vectors):
    # largest-magnitude entry of each column positive; argmax picks the lowest index on ties
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[idx, np.arange(vectors.shape[1])] < 0, -1.0, 1.0)
    return vectors * signs


def correlation_eigen(z):
    """Eigenvalues/vectors of the correlation matrix of a standardized table."""
    n = z.shape[0]
    corr = (z.T @ z) / (n - 1)
    values, vectors, converged = jacobi_eigh(corr)
    if not converged:
        raise FitError("Jacobi eigen-decomposition did not converge")
    values = np.where(values < 0, 0.0, values)
    return values, _fix_signs(vectors)


def parallel_analysis_threshold(n_rows, n_features, iterations=100, percentile=0.95, seed=0):
    """Per-rank eigenvalue thresholds from random standard-normal tables.

    Returns the ``percentile`` quantile, at each rank, of the correlation
    eigenvalues of ``iterations`` tables of shape (n_rows, n_features).
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if n_rows < 2 or n_features < 1:
        raise ValueError("need n_rows >= 2 and n_features >= 1")
    rng = np.random.default_rng(seed)
    draws = np.empty((iterations, n_features))
    for it in range(iterations):
        x = rng.standard_normal((n_rows, n_features))
        z = (x - x.mean(axis=0)) / x.std(axis=0, ddof=1)
        draws[it], _ = correlation_eigen(z)
    return np.quantile(draws, percentile, axis=0)


def n_to_retain(eigenvalues, retention, n_rows):
    p = eigenvalues.shape[0]
    if retention.kind == ALL:
        return p
    if retention.kind == KAISER:
        return int(np.sum(eigenvalues >= 1.0))
    thresholds = parallel_analysis_threshold(
        n_rows, p, retention.iterations, retention.percentile, retention.seed)
    above = eigenvalues > thresholds
    return p if above.all() else int(np.argmin(above))


def fit_pca(table, retention=Retention(), feature_names=None):
    """Fit a correlation-matrix PCA to ``table`` (rows x features).

    Parameters
    ----------
    table : array_like
        Numeric matrix without missing values.
    retention : Retention
        Component retention strategy.
    feature_names : sequence of str, optional
        Used in error messages and stored on the model.

    Returns
    -------
    PcaModel
    """
    x = np.asarray(table, dtype=float)
    params = standardize(x, feature_names)
    z = params.apply(x)
    values, vectors = correlation_eigen(z)
    k = n_to_retain(values, retention, x.shape[0])
    if k < 1:
        raise FitError("no principal component met the retention criterion")
    loadings = vectors * np.sqrt(values)
    return PcaModel(values, vectors, loadings, k, params,
                    tuple(feature_names) if feature_names is not None else ())


def project(model, table, k=None):
    """PC scores of ``table`` on the first ``k`` components (default: retained)."""
    k = model.n_retained if k is None else int(k)
    if not 1 <= k <= model.n_features:
        raise DataError(f"k must lie in [1, {model.n_features}], got {k}")
    return model.standardization.apply(table) @ model.eigenvectors[:, :k]
