"""Command-line interface: ``pcvir fit | predict | validate | simulate``."""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .exceptions import DataError, PcvirError
from .glm import predict_prob
from .importance import MODERATE, STRONG, ImportanceThresholds, fit_grouped
from .pca import KAISER, PARALLEL, Retention, project
from .plot import coefficient_boxplot_svg
from .synthdata import GeneratorSpec, acoustic_like_spec, generate
from .table import DEFAULT_GROUP
from .validation import SplitSpec, compare_configurations, hard_labels, run_validation


def _stem(path):
    p = Path(path)
    return p.with_suffix("") if p.suffix.lower() in (".json", ".csv") else p


def _retention(args):
    return Retention(args.retention, args.pa_iterations, args.pa_percentile, args.seed)


def _thresholds(args):
    return ImportanceThresholds(args.moderate, args.strong)


def _read_input(args):
    return io.read_csv(args.input, args.label, args.group, args.reference, args.drop_missing)


def cmd_fit(args):
    table = _read_input(args)
    result = fit_grouped(table, _retention(args), args.adjust, _thresholds(args))
    stem = _stem(args.output)
    io.write_results(result, f"{stem}.json", timestamp=not args.no_timestamp)
    io.write_coefficients_csv(result, f"{stem}.coefficients.csv")
    written = [f"{stem}.json", f"{stem}.coefficients.csv"]
    if args.plot:
        Path(f"{stem}.svg").write_text(coefficient_boxplot_svg(result), encoding="utf-8")
        written.append(f"{stem}.svg")
    print(f"fit {len(result.groups)} group(s), {len(result.variables)} variables -> "
          + ", ".join(written))
    return 0


def cmd_predict(args):
    result = io.read_results(args.model)
    if not isinstance(result, io.GroupedPcvirResult):
        raise DataError(f"{args.model}: not a fit result")
    rows, groups = io.read_prediction_csv(args.input, result.variables, args.group,
                                          args.label, args.drop_missing)
    if groups is None:
        if len(result.groups) != 1:
            raise DataError("model has several groups; pass --group to route rows")
        groups = [next(iter(result.groups))] * rows.shape[0]
    unknown = sorted(set(groups) - set(result.groups))
    if unknown:
        raise DataError(f"group(s) not in model: {', '.join(unknown)}")
    probs = np.empty(rows.shape[0])
    groups_arr = np.array(groups, dtype=object)
    for gid, gf in result.groups.items():
        m = groups_arr == gid
        if m.any():
            probs[m] = predict_prob(gf.fit, project(gf.pca, rows[m], gf.pca.n_retained))
    hard = hard_labels(probs)
    coding = result.coding
    names = [coding.reference, coding.comparison] if coding else ["0", "1"]
    out = Path(args.output)
    try:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["row", "group", "probability", "predicted", "predicted_label"])
            for i, (g, p, h) in enumerate(zip(groups, probs, hard)):
                w.writerow([i + 1, g, repr(float(p)), int(h), names[h]])
    except OSError as exc:
        raise io.IOFailure(f"{out}: {exc.strerror or exc}") from exc
    print(f"predicted {rows.shape[0]} row(s) -> {out}")
    return 0


def cmd_validate(args):
    table = _read_input(args)
    spec = SplitSpec(args.train_fraction, args.repeats, args.seed)
    kwargs = dict(retention=_retention(args), thresholds=_thresholds(args),
                  hl_groups=args.hl_groups)
    report = run_validation(table, spec, adjust=args.adjust, **kwargs)
    if args.compare_adjust:
        other = run_validation(table, spec, adjust=not args.adjust, **kwargs)
        report.comparison = other
        report.welch = compare_configurations(report, other)
    io.write_results(report, args.output, timestamp=not args.no_timestamp)
    print(f"accuracy {report.accuracy_mean:.4f} (SD {report.accuracy_sd:.4f}), "
          f"mean HL chi2 {report.mean_chi_squared:.3f} (p = {report.mean_chi_squared_p:.3f}) "
          f"-> {args.output}")
    return 0


def cmd_simulate(args):
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise io.IOFailure(f"{args.config}: {exc.strerror or exc}") from exc
        spec = GeneratorSpec.from_dict(cfg.get("generator", cfg))
    else:
        spec = acoustic_like_spec(args.rows, args.groups, args.seed)
    synth = generate(spec)
    stem = _stem(args.output)
    io.write_table_csv(synth.table, f"{stem}.csv")
    io.write_json(dict(schema_version=io.SCHEMA_VERSION, kind="ground_truth",
                       **synth.ground_truth()),
                  f"{stem}.truth.json", timestamp=not args.no_timestamp)
    print(f"simulated {synth.table.n_rows} rows -> {stem}.csv, {stem}.truth.json")
    return 0


def _add_input(p, label_required=True):
    p.add_argument("--input", required=True, help="input CSV")
    p.add_argument("--label", required=label_required, help="label column")
    p.add_argument("--group", help="group column (default: single group "
                                   f"{DEFAULT_GROUP!r})")
    p.add_argument("--drop-missing", action="store_true",
                   help="drop rows with missing values instead of failing")


def _add_model_options(p):
    p.add_argument("--reference", help="label value coded 0 (default: lexicographically first)")
    p.add_argument("--retention", choices=[KAISER, PARALLEL], default=KAISER)
    p.add_argument("--pa-iterations", type=int, default=100)
    p.add_argument("--pa-percentile", type=float, default=0.95)
    p.add_argument("--adjust", action="store_true",
                   help="Bonferroni-adjust component z-statistics")
    p.add_argument("--moderate", type=float, default=MODERATE)
    p.add_argument("--strong", type=float, default=STRONG)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pcvir", description="Variable importance from PCA + logistic regression.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit per-group models and reconstruct importance")
    _add_input(p)
    _add_model_options(p)
    p.add_argument("--output", required=True, help="output path stem (.json added)")
    p.add_argument("--plot", action="store_true", help="also write an SVG box plot")
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="score new rows with a fitted model")
    p.add_argument("--model", required=True, help="JSON written by 'fit'")
    _add_input(p, label_required=False)
    p.add_argument("--output", required=True, help="predictions CSV")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("validate", help="repeated hold-out validation")
    _add_input(p)
    _add_model_options(p)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--hl-groups", type=int, default=10)
    p.add_argument("--compare-adjust", action="store_true",
                   help="also run with --adjust toggled and compare accuracies (Welch t)")
    p.add_argument("--output", required=True, help="report JSON")
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="write a synthetic table and its ground truth")
    p.add_argument("--config", help="JSON generator spec (optionally under 'generator')")
    p.add_argument("--rows", type=int, default=500, help="rows per group")
    p.add_argument("--groups", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="output path stem (.csv added)")
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PcvirError, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "command": args.command,
                          "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
