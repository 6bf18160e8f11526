"""Binary logistic regression by iteratively reweighted least squares."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError, FitError
from .linalg import symmetric_inverse

PROB_CLAMP = 1e-15
SEPARATION_LIMIT = 15.0


@dataclass(frozen=True)
class LabelCoding:
    """Raw label values coded 0 (``reference``) and 1 (``comparison``)."""

    reference: str
    comparison: str

    def __post_init__(self):
        if self.reference == self.comparison:
            raise DataError("reference and comparison labels must differ")


@dataclass(frozen=True)
class LogisticFit:
    coefficients: np.ndarray  # intercept first
    standard_errors: np.ndarray
    z_statistics: np.ndarray
    converged: bool
    iterations: int
    deviance: float
    separation_warning: bool
    deviance_trace: tuple = field(default=(), repr=False)

    @property
    def n_predictors(self):
        return self.coefficients.shape[0] - 1


def expit(eta):
    eta = np.asarray(eta, dtype=float)
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _clamped(eta):
    return np.clip(expit(eta), PROB_CLAMP, 1.0 - PROB_CLAMP)


def _deviance(y, p):
    return float(-2.0 * np.sum(y * np.log(p) + (1.0 - y) * np.log1p(-p)))


def _design(predictors):
    x = np.asarray(predictors, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DataError(f"predictors must be 2-D, got shape {x.shape}")
    return np.column_stack([np.ones(x.shape[0]), x])


def _check_labels(labels, n):
    y = np.asarray(labels, dtype=float)
    if y.ndim != 1 or y.shape[0] != n:
        raise DataError(f"expected {n} labels, got shape {y.shape}")
    if not np.all((y == 0) | (y == 1)):
        raise DataError("labels must be coded 0/1")
    if y.min() == y.max():
        raise DataError("labels contain a single class")
    return y


def fit_logistic(predictors, labels, max_iter=100, tol=1e-8):
    """Maximum-likelihood logistic regression with an intercept.

    Newton/IRLS updates with step-halving whenever the deviance would
    increase. Standard errors come from the inverse Fisher information at
    the final estimate.

    Parameters
    ----------
    predictors : array_like, shape (n, k)
        PC scores or standardized features; they are used as given.
    labels : array_like, shape (n,)
        0/1 responses.

    Returns
    -------
    LogisticFit
        ``converged`` is False when the iteration limit is hit or the
        information matrix cannot be inverted.
    """
    x = _design(predictors)
    if x.shape[1] < 2:
        raise DataError("at least one predictor column is required")
    if not np.all(np.isfinite(x)):
        raise DataError("predictors contain non-finite values")
    y = _check_labels(labels, x.shape[0])
    flat = np.flatnonzero(np.ptp(x[:, 1:], axis=0) == 0)
    if flat.size:
        raise DataError(f"predictor column(s) {flat.tolist()} have zero variance")
    return _irls(x, y, max_iter, tol)


def fit_intercept_only(labels):
    y = np.asarray(labels, dtype=float)
    return _irls(np.ones((y.shape[0], 1)), _check_labels(y, y.shape[0]), 100, 1e-8)


def _irls(x, y, max_iter, tol):
    beta = np.zeros(x.shape[1])
    p = _clamped(x @ beta)
    dev = _deviance(y, p)
    trace = [dev]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w = p * (1.0 - p)
        info_inv = symmetric_inverse((x.T * w) @ x)
        if info_inv is None:
            break
        step = info_inv @ (x.T @ (y - p))
        for _ in range(50):
            candidate = beta + step
            p_new = _clamped(x @ candidate)
            dev_new = _deviance(y, p_new)
            if dev_new <= dev:
                break
            step = step / 2.0
        else:
            # no descent possible: already at the optimum to machine precision
            converged = True
            break
        change = dev - dev_new
        beta, p, dev = candidate, p_new, dev_new
        trace.append(dev)
        if abs(change) < tol:
            converged = True
            break

    w = p * (1.0 - p)
    info_inv = symmetric_inverse((x.T * w) @ x)
    if info_inv is None:
        se = np.full(beta.shape, np.nan)
        converged = False
    else:
        se = np.sqrt(np.diag(info_inv))
    z = beta / se
    separation = bool(np.any(np.abs(beta[1:]) > SEPARATION_LIMIT))
    if separation:
        warnings.warn("possible complete or quasi-complete separation "
                      f"(|coefficient| > {SEPARATION_LIMIT})", RuntimeWarning, stacklevel=3)
    return LogisticFit(beta, se, z, converged, it, dev, separation, tuple(trace))


def linear_predictor(fit, predictors):
    x = _design(predictors)
    if x.shape[1] != fit.coefficients.shape[0]:
        raise DataError(
            f"fit has {fit.n_predictors} predictors, got {x.shape[1] - 1} columns")
    return x @ fit.coefficients


def predict_prob(fit, predictors):
    """Inverse-logit of the linear predictor, clamped inside (0, 1)."""
    return _clamped(linear_predictor(fit, predictors))


def per_variable_z(table, labels):
    """Wald z of a one-predictor logistic fit for each standardized column.

    Columns whose fit fails get ``nan`` and a warning; the others are
    unaffected.
    """
    x = np.asarray(table, dtype=float)
    out = np.full(x.shape[1], np.nan)
    for j in range(x.shape[1]):
        col = x[:, j]
        try:
            sd = col.std(ddof=1)
            if not sd > 0:
                raise DataError("zero variance")
            fit = fit_logistic(((col - col.mean()) / sd)[:, None], labels)
        except (DataError, FitError) as exc:
            warnings.warn(f"feature {j}: {exc}", RuntimeWarning, stacklevel=2)
            continue
        out[j] = fit.z_statistics[1]
    return out
