"""Repeated hold-out validation: select variables on training data, refit with
all components, then score goodness of fit (Hosmer-Lemeshow) on the full data
and hit rate on the held-out rows.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .distributions import chi_squared_sf, welch_t_test
from .exceptions import DataError
from .glm import per_variable_z, predict_prob
from .importance import ImportanceThresholds, fit_group, fit_grouped
from .pca import ALL, Retention, project


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    repeats: int = 20
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly between 0 and 1")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")


@dataclass(frozen=True)
class HLTestResult:
    chi_squared: float
    groups: int
    df: int
    p_value: float
    n_bins: int  # nonempty bins actually used
    merged: bool = False

    def to_dict(self):
        return {"chi_squared": self.chi_squared, "groups": self.groups, "df": self.df,
                "p_value": self.p_value, "n_bins": self.n_bins, "merged": self.merged}


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p_value: float
    mean_a: float
    mean_b: float

    def to_dict(self):
        return {"t": self.t, "df": self.df, "p_value": self.p_value,
                "mean_a": self.mean_a, "mean_b": self.mean_b}


@dataclass
class RepeatRecord:
    index: int
    seed: int
    selected: list
    hl: dict  # group id -> HLTestResult
    mean_chi_squared: float
    mean_chi_squared_p: float
    accuracy: dict  # group id -> hit rate
    overall_accuracy: float


@dataclass
class ValidationReport:
    split: SplitSpec
    retention: Retention
    adjust: bool
    thresholds: ImportanceThresholds
    hl_groups: int
    repeats: list
    accuracy_mean: float
    accuracy_sd: float
    mean_chi_squared: float
    mean_chi_squared_p: float
    welch: WelchResult = None
    comparison: "ValidationReport" = None  # second configuration behind ``welch``

    @property
    def accuracies(self):
        return [r.overall_accuracy for r in self.repeats]


def _train_size(fraction, n):
    # tolerance guards against products like 0.29 * 100 = 28.999999999999996
    return int(math.floor(fraction * n + 1e-9))


def split_indices(table, spec, repeat_index):
    """Row indices of the train and test partitions, both sorted."""
    rng = np.random.default_rng(spec.seed + repeat_index)
    train, test = [], []
    for gid in table.group_ids():
        idx = np.flatnonzero(table.group_mask(gid))
        n_train = _train_size(spec.train_fraction, idx.size)
        if n_train < 1 or n_train >= idx.size:
            raise DataError(f"group {gid!r} with {idx.size} rows cannot be split "
                            f"at fraction {spec.train_fraction}")
        for _ in range(10):
            perm = rng.permutation(idx)
            labels = table.labels[perm[:n_train]]
            if labels.min() != labels.max():
                break
        else:
            raise DataError(f"group {gid!r}: training partition has a single class "
                            "after 10 resamples")
        train.append(perm[:n_train])
        test.append(perm[n_train:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split(table, spec, repeat_index):
    """Per-group random train/test partition, deterministic in (seed, repeat_index)."""
    train, test = split_indices(table, spec, repeat_index)
    return table.take(train), table.take(test)


def select_variables(train, retention=Retention(), adjust=False,
                     thresholds=ImportanceThresholds()):
    """Names of variables whose group-mean |coefficient| reaches the moderate threshold."""
    result = fit_grouped(train, retention, adjust, thresholds)
    chosen = [v for v, c in zip(result.variables, result.mean_coefficients)
              if abs(c) >= thresholds.moderate]
    if not chosen:
        raise DataError("no variable reached the moderate threshold; "
                        "lower --moderate or disable --adjust")
    return chosen


def refit_selected(table, selected):
    """Per-group PCA on the selected columns keeping every component, plus a
    logistic fit on all scores."""
    if not selected:
        raise DataError("at least one selected variable is required")
    sub = table.select(list(selected))
    return {gid: fit_group(g, Retention(ALL)) for gid, g in sub.iter_groups()}


def group_probabilities(group_fit, rows):
    pca = group_fit.pca
    return predict_prob(group_fit.fit, project(pca, rows, pca.n_retained))


def hosmer_lemeshow(probabilities, labels, groups=10):
    """Hosmer-Lemeshow calibration test over quantile bins of predicted probability.

    Bin edges are the ``groups + 1`` sample quantiles (linear interpolation);
    bins are right-closed, so a probability equal to an edge goes to the lower
    bin. Empty bins are dropped and bins with zero expected count in either
    class are merged into a neighbour; both reduce the degrees of freedom
    (``merged`` is then set).
    """
    p = np.asarray(probabilities, dtype=float)
    y = np.asarray(labels, dtype=float)
    if p.shape != y.shape or p.ndim != 1:
        raise DataError("probabilities and labels must be 1-D of equal length")
    if groups < 3:
        raise DataError("Hosmer-Lemeshow needs at least 3 groups")
    if np.any((p < 0) | (p > 1)):
        raise DataError("probabilities must lie in [0, 1]")
    edges = np.quantile(p, np.linspace(0.0, 1.0, groups + 1))
    bins = np.searchsorted(edges[1:-1], p, side="left")
    cells = []
    for b in range(groups):
        m = bins == b
        if m.any():
            cells.append([float(y[m].sum()), float(p[m].sum()),
                          float((1 - y[m]).sum()), float((1 - p[m]).sum())])
    i = 0
    while i < len(cells) and len(cells) > 1:
        if cells[i][1] == 0.0 or cells[i][3] == 0.0:
            j = i + 1 if i + 1 < len(cells) else i - 1
            cells[j] = [a + b for a, b in zip(cells[j], cells[i])]
            del cells[i]
            i = 0
            continue
        i += 1
    if len(cells) < 3:
        raise DataError("fewer than 3 nonempty probability bins; "
                        "too few distinct predicted probabilities")
    chi2 = 0.0
    for o1, e1, o0, e0 in cells:
        chi2 += (o1 - e1) ** 2 / e1 + (o0 - e0) ** 2 / e0
    df = len(cells) - 2
    return HLTestResult(chi2, groups, df, chi_squared_sf(chi2, df), len(cells),
                        len(cells) < groups)


def hard_labels(probabilities):
    """0.5 cutoff; a probability of exactly 0.5 goes to class 1."""
    return (np.asarray(probabilities) >= 0.5).astype(int)


def evaluate_accuracy(models, test):
    """Hit rate per group and the unweighted mean over groups."""
    per_group = {}
    for gid in test.group_ids():
        if gid not in models:
            raise DataError(f"no fitted model for group {gid!r}")
        g = test.group(gid)
        if g.n_rows == 0:
            warnings.warn(f"group {gid!r} has no test rows; excluded", RuntimeWarning)
            continue
        pred = hard_labels(group_probabilities(models[gid], g.rows))
        per_group[gid] = float(np.mean(pred == g.labels))
    if not per_group:
        raise DataError("no test rows to evaluate")
    return per_group, float(np.mean(list(per_group.values())))


def run_repeat(table, spec, index, retention, adjust, thresholds, hl_groups):
    train, test = split(table, spec, index)
    selected = select_variables(train, retention, adjust, thresholds)

    full_models = refit_selected(table, selected)
    hl = {}
    for gid, g in table.select(selected).iter_groups():
        hl[gid] = hosmer_lemeshow(group_probabilities(full_models[gid], g.rows),
                                  g.labels, hl_groups)
    mean_chi2 = float(np.mean([h.chi_squared for h in hl.values()]))

    train_models = refit_selected(train, selected)
    per_group, overall = evaluate_accuracy(train_models, test.select(selected))
    return RepeatRecord(index, spec.seed + index, selected, hl, mean_chi2,
                        chi_squared_sf(mean_chi2, hl_groups - 2), per_group, overall)


def run_validation(table, spec=SplitSpec(), retention=Retention(), adjust=False,
                   thresholds=ImportanceThresholds(), hl_groups=10):
    """Repeat split -> select -> refit -> score ``spec.repeats`` times.

    Goodness of fit uses a refit on each group's full data; accuracy uses a
    refit on the training rows scored on the held-out rows.
    """
    records = [run_repeat(table, spec, i, retention, adjust, thresholds, hl_groups)
               for i in range(spec.repeats)]
    acc = np.array([r.overall_accuracy for r in records])
    chi = float(np.mean([r.mean_chi_squared for r in records]))
    return ValidationReport(
        split=spec, retention=retention, adjust=bool(adjust), thresholds=thresholds,
        hl_groups=hl_groups, repeats=records,
        accuracy_mean=float(acc.mean()),
        accuracy_sd=float(acc.std(ddof=1)) if acc.size > 1 else 0.0,
        mean_chi_squared=chi, mean_chi_squared_p=chi_squared_sf(chi, hl_groups - 2))


def compare_configurations(report_a, report_b):
    """Welch t-test on the per-repeat overall accuracies of two reports."""
    a, b = report_a.accuracies, report_b.accuracies
    if len(a) < 2 or len(b) < 2:
        raise DataError("each report needs at least 2 repeats")
    t, df, p = welch_t_test(a, b)
    return WelchResult(t, df, p, float(np.mean(a)), float(np.mean(b)))


def direction_of_effect(table):
    """Per-variable Wald z on the pooled table after within-group standardization.

    A plain-logistic stand-in for per-feature mixed models with a random
    intercept per group.
    """
    z = np.empty_like(table.rows)
    for gid in table.group_ids():
        m = table.group_mask(gid)
        r = table.rows[m]
        z[m] = (r - r.mean(axis=0)) / r.std(axis=0, ddof=1)
    return per_variable_z(z, table.labels)
