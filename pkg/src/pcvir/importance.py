"""Variable importance reconstruction from PC-score logistic models.

Each retained component contributes its Wald z-statistic times its loading
vector; the sum over components is the importance coefficient of every
original variable. Coefficients are read on the z scale and banded at a
moderate and a strong threshold (1.96 times the conventional correlation
levels 0.5 and 0.7).

When features do not co-vary the way a designed feature set does, large
loadings of opposite sign paired with large z-statistics can cancel and hide
importance; :func:`cancellation_warnings` reports such variables.
"""

import math
from dataclasses import dataclass, field
from decimal import Decimal

import numpy as np

from .distributions import normal_quantile, normal_sf
from .exceptions import DataError, FitError, PcvirError
from .glm import fit_logistic
from .pca import Retention, fit_pca, project

Z_CRITICAL = Decimal("1.96")
MODERATE_CORRELATION = Decimal("0.5")
STRONG_CORRELATION = Decimal("0.7")
MODERATE = float(Z_CRITICAL * MODERATE_CORRELATION)  # 0.98
STRONG = float(Z_CRITICAL * STRONG_CORRELATION)  # 1.372

NONE, MODERATE_BAND, STRONG_BAND = "none", "moderate", "strong"
BAND_RANK = {NONE: 0, MODERATE_BAND: 1, STRONG_BAND: 2}


@dataclass(frozen=True)
class ImportanceThresholds:
    moderate: float = MODERATE
    strong: float = STRONG

    def __post_init__(self):
        if not 0 <= self.moderate < self.strong:
            raise ValueError(
                f"need 0 <= moderate < strong, got {self.moderate}, {self.strong}")

    def band(self, value):
        a = abs(value)
        if a >= self.strong:
            return STRONG_BAND
        if a >= self.moderate:
            return MODERATE_BAND
        return NONE


@dataclass(frozen=True)
class PcvirCoefficients:
    variables: tuple
    z_prime: np.ndarray
    adjusted: bool
    n_components: int
    component_z: np.ndarray  # z used per component (after adjustment, if any)


@dataclass(frozen=True)
class ImportanceClassification:
    bands: tuple
    basis: str  # "single-model" or "group-mean"


@dataclass(frozen=True)
class GroupFit:
    pca: object
    fit: object
    coefficients: PcvirCoefficients
    n_rows: int


@dataclass(frozen=True)
class GroupedPcvirResult:
    variables: tuple
    groups: dict  # group id -> GroupFit, insertion ordered
    mean_coefficients: np.ndarray
    mean_abs_coefficients: np.ndarray
    display_order: tuple  # variable names
    classification: ImportanceClassification
    retention: Retention
    adjust: bool
    thresholds: ImportanceThresholds
    coding: object = None
    diagnostics: list = field(default_factory=list)


def adjust_z(z, n):
    """Bonferroni-adjust a Wald z for ``n`` predictors, keeping its sign.

    The two-tailed probability is multiplied by ``n``; once that reaches 1
    the result is 0.
    """
    z = float(z)
    if not math.isfinite(z):
        raise ValueError(f"z must be finite, got {z}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if n == 1 or z == 0.0:
        return z
    # n * 2 * Phi(-|z|) / 2, kept in the lower tail for precision
    q = n * normal_sf(abs(z))
    if q >= 0.5:
        return 0.0
    if q > 0.0:
        adjusted = -normal_quantile(q)
    else:
        # Phi(-|z|) underflowed; first-order tail asymptotics
        adjusted = math.sqrt(max(z * z - 2.0 * math.log(n), 0.0))
    return math.copysign(min(adjusted, abs(z)), z)


def reconstruct(pca, fit, adjust=False):
    """Importance coefficients: sum over retained components of z_i * loadings_i.

    ``fit`` must have been trained on exactly the first ``pca.n_retained``
    score columns. The intercept does not contribute.
    """
    n = pca.n_retained
    if fit.n_predictors != n:
        raise DataError(
            f"logistic fit has {fit.n_predictors} predictors but PCA retained {n}")
    z = np.asarray(fit.z_statistics[1:], dtype=float)
    if adjust:
        z = np.array([adjust_z(zi, n) for zi in z])
    z_prime = pca.loadings[:, :n] @ z
    names = pca.feature_names or tuple(f"x{j}" for j in range(pca.n_features))
    return PcvirCoefficients(names, z_prime, bool(adjust), n, z)


def classify(coefficients, thresholds=ImportanceThresholds(), basis="single-model"):
    """Band each |coefficient| as none / moderate / strong (inclusive thresholds)."""
    return ImportanceClassification(
        tuple(thresholds.band(float(c)) for c in np.ravel(coefficients)), basis)


def cancellation_warnings(pca, coefficients, group=None, fraction=0.5):
    """Variables whose largest opposing-sign component terms cancel heavily.

    A warning is produced when ``min(largest positive term, |largest
    negative term|)`` exceeds ``fraction`` times the absolute coefficient.
    """
    n = coefficients.n_components
    terms = pca.loadings[:, :n] * coefficients.component_z
    out = []
    for j, name in enumerate(coefficients.variables):
        row = terms[j]
        i_pos, i_neg = int(np.argmax(row)), int(np.argmin(row))
        pos, neg = float(row[i_pos]), float(row[i_neg])
        if pos <= 0 or neg >= 0:
            continue
        cancelled = min(pos, -neg)
        if cancelled > fraction * abs(float(coefficients.z_prime[j])):
            out.append({
                "group": group,
                "variable": name,
                "components": [i_pos + 1, i_neg + 1],
                "terms": [pos, neg],
                "coefficient": float(coefficients.z_prime[j]),
            })
    return out


def fit_group(table, retention=Retention(), adjust=False):
    """PCA, PC-score logistic fit and reconstruction for one group's table."""
    pca = fit_pca(table.rows, retention, table.feature_names)
    fit = fit_logistic(project(pca, table.rows), table.labels)
    return GroupFit(pca, fit, reconstruct(pca, fit, adjust), table.n_rows)


def display_order(variables, mean_abs):
    idx = sorted(range(len(variables)), key=lambda j: (-mean_abs[j], variables[j]))
    return tuple(variables[j] for j in idx)


def fit_grouped(table, retention=Retention(), adjust=False,
                thresholds=ImportanceThresholds()):
    """Fit every group separately and aggregate coefficients across groups.

    Classification uses the cross-group mean coefficient; display order uses
    the mean absolute coefficient (descending, ties by name).
    """
    groups = {}
    diagnostics = []
    for gid, sub in table.iter_groups():
        try:
            gf = fit_group(sub, retention, adjust)
        except PcvirError as exc:
            raise FitError(f"group {gid!r}: {exc}") from exc
        groups[gid] = gf
        diagnostics.extend(cancellation_warnings(gf.pca, gf.coefficients, gid))

    stacked = np.vstack([g.coefficients.z_prime for g in groups.values()])
    mean = stacked.mean(axis=0)
    mean_abs = np.abs(stacked).mean(axis=0)
    variables = table.feature_names
    return GroupedPcvirResult(
        variables=variables,
        groups=groups,
        mean_coefficients=mean,
        mean_abs_coefficients=mean_abs,
        display_order=display_order(variables, list(mean_abs)),
        classification=classify(mean, thresholds, "group-mean"),
        retention=retention,
        adjust=bool(adjust),
        thresholds=thresholds,
        coding=table.coding,
        diagnostics=diagnostics,
    )
