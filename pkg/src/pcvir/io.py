"""CSV ingestion and JSON/CSV serialization of fit and validation results."""

import csv
import json
import math
import warnings
from datetime import datetime, timezone

import numpy as np

from .exceptions import DataError, PcvirError
from .glm import LabelCoding, LogisticFit
from .importance import (
    GroupedPcvirResult,
    GroupFit,
    ImportanceClassification,
    ImportanceThresholds,
    PcvirCoefficients,
)
from .pca import PcaModel, Retention, StandardizationParams
from .table import FeatureTable
from .validation import HLTestResult, RepeatRecord, SplitSpec, ValidationReport, WelchResult

SCHEMA_VERSION = 1
MISSING = {"", "na", "nan", "null"}


class IOFailure(PcvirError, OSError):
    """Reading or writing a file failed."""


def _read_raw(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise DataError(f"{path}: empty file, header row required") from None
            rows = [r for r in reader if r]
    except OSError as exc:
        raise IOFailure(f"{path}: {exc.strerror or exc}") from exc
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names in header")
    return header, rows


def _parse_rows(path, header, rows, feature_cols, drop_missing, required_cols=()):
    """Numeric matrix of ``feature_cols``; returns (matrix, kept row positions)."""
    values, kept = [], []
    dropped = 0
    for pos, raw in enumerate(rows):
        line = pos + 2  # header is line 1
        if len(raw) != len(header):
            raise DataError(f"{path}: line {line}: expected {len(header)} fields, got {len(raw)}")
        missing = any(raw[c].strip().lower() in MISSING for c in (*feature_cols, *required_cols))
        if missing:
            if drop_missing:
                dropped += 1
                continue
            raise DataError(f"{path}: line {line}: missing value")
        parsed = []
        for c in feature_cols:
            try:
                v = float(raw[c])
            except ValueError:
                raise DataError(
                    f"{path}: line {line}: column {header[c]!r}: "
                    f"cannot parse {raw[c]!r} as a number") from None
            if not math.isfinite(v):
                raise DataError(f"{path}: line {line}: column {header[c]!r}: non-finite value")
            parsed.append(v)
        values.append(parsed)
        kept.append(pos)
    if dropped:
        warnings.warn(f"dropped {dropped} row{'s' if dropped != 1 else ''} with missing values",
                      UserWarning, stacklevel=3)
    matrix = np.array(values, dtype=float).reshape(len(values), len(feature_cols))
    return matrix, kept


def read_csv(path, label_column, group_column=None, reference_label=None, drop_missing=False):
    """Load a comma-separated feature table.

    Every column other than the label and group columns is a feature. The
    label coded 0 is ``reference_label`` when given, otherwise the
    lexicographically smaller of the two label values.
    """
    header, rows = _read_raw(path)
    for name, col in (("label", label_column), ("group", group_column)):
        if col is not None and col not in header:
            raise DataError(f"{path}: {name} column {col!r} not found")
    li = header.index(label_column)
    gi = header.index(group_column) if group_column is not None else None
    feature_cols = [j for j in range(len(header)) if j not in (li, gi)]
    if not feature_cols:
        raise DataError(f"{path}: no feature columns")
    required = (li,) if gi is None else (li, gi)
    matrix, kept = _parse_rows(path, header, rows, feature_cols, drop_missing, required)

    raw_labels = [rows[k][li].strip() for k in kept]
    distinct = sorted(set(raw_labels))
    if len(distinct) != 2:
        raise DataError(f"{path}: label column {label_column!r} must have exactly two "
                        f"values, found {len(distinct)}: {', '.join(distinct)}")
    if reference_label is not None:
        if reference_label not in distinct:
            raise DataError(f"{path}: reference label {reference_label!r} not among "
                            f"{', '.join(distinct)}")
        reference = reference_label
    else:
        reference = distinct[0]
    comparison = distinct[1] if distinct[0] == reference else distinct[0]
    labels = np.array([0 if v == reference else 1 for v in raw_labels], dtype=int)
    groups = None if gi is None else np.array([rows[k][gi].strip() for k in kept], dtype=object)
    return FeatureTable(tuple(header[j] for j in feature_cols), matrix, labels,
                        LabelCoding(reference, comparison), groups)


def read_prediction_csv(path, feature_names, group_column=None, label_column=None,
                        drop_missing=False):
    """Feature matrix (in model order) and group ids of a file to score.

    Columns must be exactly the model features plus the optional group and
    label columns; anything else is reported.
    """
    header, rows = _read_raw(path)
    ignored = {c for c in (group_column, label_column) if c is not None}
    missing = [f for f in feature_names if f not in header]
    extra = [h for h in header if h not in feature_names and h not in ignored]
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing columns: {', '.join(missing)}")
        if extra:
            parts.append(f"extra columns: {', '.join(extra)}")
        raise DataError(f"{path}: feature mismatch; " + "; ".join(parts))
    if group_column is not None and group_column not in header:
        raise DataError(f"{path}: group column {group_column!r} not found")
    cols = [header.index(f) for f in feature_names]
    req = (header.index(group_column),) if group_column is not None else ()
    matrix, kept = _parse_rows(path, header, rows, cols, drop_missing, req)
    groups = None
    if group_column is not None:
        gi = header.index(group_column)
        groups = [rows[k][gi].strip() for k in kept]
    return matrix, groups


def _fmt(v):
    return repr(float(v))


def write_table_csv(table, path, label_column="label", group_column="group"):
    """Write a table with lossless float formatting (shortest round-trip repr)."""
    coding = table.coding
    names = [coding.reference, coding.comparison]
    header = list(table.feature_names) + [label_column]
    if table.groups is not None:
        header.append(group_column)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for i in range(table.n_rows):
                row = [_fmt(v) for v in table.rows[i]] + [names[table.labels[i]]]
                if table.groups is not None:
                    row.append(table.groups[i])
                w.writerow(row)
    except OSError as exc:
        raise IOFailure(f"{path}: {exc.strerror or exc}") from exc


# --- JSON ------------------------------------------------------------------

def _floats(a):
    return [float(v) for v in np.ravel(a)]


def _thresholds_dict(t):
    return {"moderate": t.moderate, "strong": t.strong}


def _fit_to_dict(f):
    return {
        "coefficients": _floats(f.coefficients),
        "standard_errors": _floats(f.standard_errors),
        "z": _floats(f.z_statistics),
        "converged": f.converged,
        "iterations": f.iterations,
        "deviance": f.deviance,
        "separation_warning": f.separation_warning,
        "deviance_trace": list(f.deviance_trace),
    }


def _fit_from_dict(d):
    return LogisticFit(np.array(d["coefficients"]), np.array(d["standard_errors"]),
                       np.array(d["z"]), d["converged"], d["iterations"], d["deviance"],
                       d["separation_warning"], tuple(d.get("deviance_trace", ())))


def _group_to_dict(gid, g, thresholds):
    c = g.coefficients
    return {
        "id": gid,
        "n_rows": g.n_rows,
        "n_retained": g.pca.n_retained,
        "eigenvalues": _floats(g.pca.eigenvalues),
        "coefficients": [
            {"variable": v, "z_prime": float(z), "band": thresholds.band(float(z))}
            for v, z in zip(c.variables, c.z_prime)
        ],
        "component_z": _floats(c.component_z),
        "logistic": _fit_to_dict(g.fit),
        "model": {
            "means": _floats(g.pca.standardization.means),
            "sds": _floats(g.pca.standardization.sds),
            "eigenvectors": [_floats(r) for r in g.pca.eigenvectors],
            "loadings": [_floats(r) for r in g.pca.loadings],
        },
    }


def _group_from_dict(d, variables, adjusted):
    m = d["model"]
    pca = PcaModel(np.array(d["eigenvalues"]), np.array(m["eigenvectors"]),
                   np.array(m["loadings"]), d["n_retained"],
                   StandardizationParams(np.array(m["means"]), np.array(m["sds"])),
                   tuple(variables))
    coefs = PcvirCoefficients(tuple(c["variable"] for c in d["coefficients"]),
                              np.array([c["z_prime"] for c in d["coefficients"]]),
                              adjusted, d["n_retained"], np.array(d["component_z"]))
    return GroupFit(pca, _fit_from_dict(d["logistic"]), coefs, d["n_rows"])


def fit_result_to_dict(result):
    coding = result.coding
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "fit",
        "config": {
            "retention": result.retention.to_dict(),
            "adjust": result.adjust,
            "thresholds": _thresholds_dict(result.thresholds),
        },
        "variables": list(result.variables),
        "label_coding": None if coding is None else
        {"reference": coding.reference, "comparison": coding.comparison},
        "groups": [_group_to_dict(gid, g, result.thresholds)
                   for gid, g in result.groups.items()],
        "aggregate": {
            "mean": _floats(result.mean_coefficients),
            "mean_abs": _floats(result.mean_abs_coefficients),
            "order": list(result.display_order),
            "bands": list(result.classification.bands),
        },
        "diagnostics": {"cancellation_warnings": list(result.diagnostics)},
    }


def fit_result_from_dict(d):
    cfg = d["config"]
    variables = tuple(d["variables"])
    thresholds = ImportanceThresholds(**cfg["thresholds"])
    agg = d["aggregate"]
    coding = d.get("label_coding")
    return GroupedPcvirResult(
        variables=variables,
        groups={g["id"]: _group_from_dict(g, variables, cfg["adjust"]) for g in d["groups"]},
        mean_coefficients=np.array(agg["mean"]),
        mean_abs_coefficients=np.array(agg["mean_abs"]),
        display_order=tuple(agg["order"]),
        classification=ImportanceClassification(tuple(agg["bands"]), "group-mean"),
        retention=Retention.from_dict(cfg["retention"]),
        adjust=cfg["adjust"],
        thresholds=thresholds,
        coding=None if coding is None else LabelCoding(coding["reference"], coding["comparison"]),
        diagnostics=list(d["diagnostics"]["cancellation_warnings"]),
    )


def _repeat_to_dict(r):
    return {
        "index": r.index,
        "seed": r.seed,
        "selected": list(r.selected),
        "hl": [dict(group=gid, **h.to_dict()) for gid, h in r.hl.items()],
        "mean_chi_squared": r.mean_chi_squared,
        "mean_chi_squared_p": r.mean_chi_squared_p,
        "accuracy": [{"group": gid, "accuracy": a} for gid, a in r.accuracy.items()],
        "overall_accuracy": r.overall_accuracy,
    }


def _repeat_from_dict(d):
    hl = {}
    for h in d["hl"]:
        h = dict(h)
        gid = h.pop("group")
        hl[gid] = HLTestResult(**h)
    return RepeatRecord(d["index"], d["seed"], list(d["selected"]), hl,
                        d["mean_chi_squared"], d["mean_chi_squared_p"],
                        {a["group"]: a["accuracy"] for a in d["accuracy"]},
                        d["overall_accuracy"])


def validation_report_to_dict(report, nested=False):
    d = {} if nested else {"schema_version": SCHEMA_VERSION, "kind": "validation"}
    d.update({
        "config": {
            "retention": report.retention.to_dict(),
            "adjust": report.adjust,
            "thresholds": _thresholds_dict(report.thresholds),
            "split": {"train_fraction": report.split.train_fraction,
                      "repeats": report.split.repeats, "seed": report.split.seed},
            "hl_groups": report.hl_groups,
        },
        "repeats": [_repeat_to_dict(r) for r in report.repeats],
        "summary": {
            "accuracy_mean": report.accuracy_mean,
            "accuracy_sd": report.accuracy_sd,
            "mean_chi_squared": report.mean_chi_squared,
            "mean_chi_squared_p": report.mean_chi_squared_p,
        },
    })
    if report.welch is not None:
        d["welch"] = report.welch.to_dict()
    if report.comparison is not None:
        d["comparison"] = validation_report_to_dict(report.comparison, nested=True)
    return d


def validation_report_from_dict(d):
    cfg = d["config"]
    s = d["summary"]
    return ValidationReport(
        split=SplitSpec(**cfg["split"]),
        retention=Retention.from_dict(cfg["retention"]),
        adjust=cfg["adjust"],
        thresholds=ImportanceThresholds(**cfg["thresholds"]),
        hl_groups=cfg["hl_groups"],
        repeats=[_repeat_from_dict(r) for r in d["repeats"]],
        accuracy_mean=s["accuracy_mean"],
        accuracy_sd=s["accuracy_sd"],
        mean_chi_squared=s["mean_chi_squared"],
        mean_chi_squared_p=s["mean_chi_squared_p"],
        welch=WelchResult(**d["welch"]) if "welch" in d else None,
        comparison=validation_report_from_dict(d["comparison"]) if "comparison" in d else None,
    )


def write_json(doc, path, timestamp=True):
    if timestamp:
        doc = dict(doc, created=datetime.now(timezone.utc).isoformat(timespec="seconds"))
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IOFailure(f"{path}: {exc.strerror or exc}") from exc


def write_results(result, path, timestamp=True):
    """Serialize a :class:`GroupedPcvirResult` or :class:`ValidationReport` to JSON.

    Floats are written with Python's shortest round-trip repr (at most 17
    significant digits), so reading back is lossless.
    """
    if isinstance(result, GroupedPcvirResult):
        doc = fit_result_to_dict(result)
    elif isinstance(result, ValidationReport):
        doc = validation_report_to_dict(result)
    else:
        raise TypeError(f"cannot serialize {type(result).__name__}")
    write_json(doc, path, timestamp)


def read_results(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IOFailure(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DataError(f"{path}: unsupported schema_version {version!r}")
    kind = doc.get("kind")
    if kind == "fit":
        return fit_result_from_dict(doc)
    if kind == "validation":
        return validation_report_from_dict(doc)
    raise DataError(f"{path}: unknown result kind {kind!r}")


def write_coefficients_csv(result, path):
    """variable, mean_z_prime, mean_abs, band, in display order."""
    index = {v: j for j, v in enumerate(result.variables)}
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["variable", "mean_z_prime", "mean_abs", "band"])
            for v in result.display_order:
                j = index[v]
                w.writerow([v, _fmt(result.mean_coefficients[j]),
                            _fmt(result.mean_abs_coefficients[j]),
                            result.classification.bands[j]])
    except OSError as exc:
        raise IOFailure(f"{path}: {exc.strerror or exc}") from exc
