import json

import numpy as np
import pytest

from pcvir import io
from pcvir.exceptions import DataError
from pcvir.importance import fit_grouped
from pcvir.synthdata import acoustic_like_spec, generate
from pcvir.validation import SplitSpec, compare_configurations, run_validation


def write(tmp_path, text, name="t.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


@pytest.fixture(scope="module")
def grouped_table():
    return generate(acoustic_like_spec(120, 3, seed=4)).table


@pytest.fixture(scope="module")
def fit_result(grouped_table):
    return fit_grouped(grouped_table)


# --- CSV input ------------------------------------------------------------------

def test_oral_nasal_coding(tmp_path):
    p = write(tmp_path, "f0,f1,label\n1,2,oral\n3,4,nasal\n5,7,oral\n")
    t = io.read_csv(p, "label")
    assert (t.coding.reference, t.coding.comparison) == ("nasal", "oral")
    np.testing.assert_array_equal(t.labels, [1, 0, 1])
    t = io.read_csv(p, "label", reference_label="oral")
    np.testing.assert_array_equal(t.labels, [0, 1, 0])
    assert t.feature_names == ("f0", "f1")
    with pytest.raises(DataError, match="reference"):
        io.read_csv(p, "label", reference_label="open")


def test_groups_in_first_appearance_order(tmp_path):
    lines = ["a,b,y,spk"]
    for i, g in enumerate(["s3", "s1", "s3", "s6", "s2", "s5", "s4", "s1"]):
        lines.append(f"{i},{i * i % 5},{i % 2},{g}")
    t = io.read_csv(write(tmp_path, "\n".join(lines) + "\n"), "y", "spk")
    assert t.group_ids() == ["s3", "s1", "s6", "s2", "s5", "s4"]
    assert t.feature_names == ("a", "b")


def test_no_group_column_gives_single_group(tmp_path):
    t = io.read_csv(write(tmp_path, "a,y\n1,0\n2,1\n"), "y")
    assert t.group_ids() == ["all"]


def test_missing_values(tmp_path):
    p = write(tmp_path, "a,b,y\n1,2,0\n3,NA,1\n4,5,1\n6,7,0\n")
    with pytest.raises(DataError, match="line 3"):
        io.read_csv(p, "y")
    with pytest.warns(UserWarning, match="dropped 1 row"):
        t = io.read_csv(p, "y", drop_missing=True)
    assert t.n_rows == 3


def test_label_errors(tmp_path):
    with pytest.raises(DataError, match="exactly two"):
        io.read_csv(write(tmp_path, "a,y\n1,x\n2,y\n3,z\n"), "y")
    with pytest.raises(DataError, match="exactly two"):
        io.read_csv(write(tmp_path, "a,y\n1,x\n2,x\n"), "y")
    with pytest.raises(DataError, match="not found"):
        io.read_csv(write(tmp_path, "a,y\n1,x\n2,z\n"), "label")


def test_parse_errors_have_line_numbers(tmp_path):
    with pytest.raises(DataError, match=r"line 3: column 'b'.*'abc'"):
        io.read_csv(write(tmp_path, "a,b,y\n1,2,0\n3,abc,1\n"), "y")
    with pytest.raises(DataError, match="line 2: expected 3 fields"):
        io.read_csv(write(tmp_path, "a,b,y\n1,2\n"), "y")
    with pytest.raises(DataError, match="non-finite"):
        io.read_csv(write(tmp_path, "a,y\ninf,0\n1,1\n"), "y")
    with pytest.raises(DataError, match="no feature columns"):
        io.read_csv(write(tmp_path, "y,g\n0,a\n1,a\n"), "y", "g")
    with pytest.raises(DataError, match="empty"):
        io.read_csv(write(tmp_path, ""), "y")


def test_missing_file(tmp_path):
    with pytest.raises(io.IOFailure):
        io.read_csv(tmp_path / "nope.csv", "y")


def test_table_csv_round_trip_is_exact(tmp_path, grouped_table):
    p = tmp_path / "round.csv"
    io.write_table_csv(grouped_table, p)
    back = io.read_csv(p, "label", "group")
    np.testing.assert_array_equal(back.rows, grouped_table.rows)
    np.testing.assert_array_equal(back.labels, grouped_table.labels)
    assert back.group_ids() == grouped_table.group_ids()
    q = tmp_path / "again.csv"
    io.write_table_csv(back, q)
    assert p.read_bytes() == q.read_bytes()


def test_prediction_csv_column_checks(tmp_path):
    p = write(tmp_path, "b,a,spk\n1,2,s1\n")
    rows, groups = io.read_prediction_csv(p, ("a", "b"), "spk")
    np.testing.assert_array_equal(rows, [[2.0, 1.0]])
    assert groups == ["s1"]
    with pytest.raises(DataError, match="missing columns: c"):
        io.read_prediction_csv(p, ("a", "b", "c"), "spk")
    with pytest.raises(DataError, match="extra columns: spk"):
        io.read_prediction_csv(p, ("a", "b"))


# --- JSON -----------------------------------------------------------------------

def test_fit_result_round_trip(tmp_path, fit_result):
    p = tmp_path / "fit.json"
    io.write_results(fit_result, p, timestamp=False)
    back = io.read_results(p)
    assert back.variables == fit_result.variables
    assert list(back.groups) == list(fit_result.groups)
    np.testing.assert_array_equal(back.mean_coefficients, fit_result.mean_coefficients)
    assert back.classification.bands == fit_result.classification.bands
    assert back.display_order == fit_result.display_order
    for gid, g in fit_result.groups.items():
        b = back.groups[gid]
        np.testing.assert_array_equal(b.pca.loadings, g.pca.loadings)
        np.testing.assert_array_equal(b.pca.eigenvectors, g.pca.eigenvectors)
        np.testing.assert_array_equal(b.fit.coefficients, g.fit.coefficients)
        np.testing.assert_array_equal(b.coefficients.z_prime, g.coefficients.z_prime)
        assert b.pca.n_retained == g.pca.n_retained
    # writing what was read gives identical bytes
    q = tmp_path / "fit2.json"
    io.write_results(back, q, timestamp=False)
    assert p.read_bytes() == q.read_bytes()


def test_fit_json_layout(tmp_path, fit_result):
    p = tmp_path / "fit.json"
    io.write_results(fit_result, p)
    doc = json.loads(p.read_text())
    assert doc["schema_version"] == 1 and doc["kind"] == "fit"
    assert "created" in doc
    assert doc["config"]["thresholds"] == {"moderate": 0.98, "strong": 1.372}
    g = doc["groups"][0]
    assert {"id", "n_rows", "n_retained", "eigenvalues", "coefficients",
            "logistic"} <= set(g)
    assert {"variable", "z_prime", "band"} == set(g["coefficients"][0])


def test_threshold_value_survives_exactly(tmp_path):
    doc = {"schema_version": 1, "value": -1.372}
    p = tmp_path / "v.json"
    io.write_json(doc, p, timestamp=False)
    assert json.loads(p.read_text())["value"] == -1.372
    assert "-1.372" in p.read_text()


def test_validation_report_round_trip(tmp_path, grouped_table):
    rep = run_validation(grouped_table, SplitSpec(0.8, 2, 1))
    p = tmp_path / "val.json"
    io.write_results(rep, p, timestamp=False)
    doc = json.loads(p.read_text())
    assert "welch" not in doc and "comparison" not in doc
    back = io.read_results(p)
    assert back.accuracies == rep.accuracies
    assert back.mean_chi_squared == rep.mean_chi_squared
    assert back.split == rep.split and back.retention == rep.retention
    assert back.repeats[0].selected == rep.repeats[0].selected

    other = run_validation(grouped_table, SplitSpec(0.8, 2, 1), adjust=True)
    rep.comparison = other
    rep.welch = compare_configurations(rep, other)
    io.write_results(rep, p, timestamp=False)
    back = io.read_results(p)
    assert back.welch == rep.welch
    assert back.comparison.adjust is True
    assert back.comparison.accuracies == other.accuracies


def test_read_results_errors(tmp_path):
    with pytest.raises(DataError, match="invalid JSON"):
        io.read_results(write(tmp_path, "{", "bad.json"))
    with pytest.raises(DataError, match="schema_version"):
        io.read_results(write(tmp_path, '{"schema_version": 99}', "v.json"))
    with pytest.raises(DataError, match="kind"):
        io.read_results(write(tmp_path, '{"schema_version": 1, "kind": "x"}', "k.json"))
    with pytest.raises(io.IOFailure):
        io.read_results(tmp_path / "missing.json")


def test_coefficients_csv(tmp_path, fit_result):
    p = tmp_path / "c.csv"
    io.write_coefficients_csv(fit_result, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "variable,mean_z_prime,mean_abs,band"
    assert [l.split(",")[0] for l in lines[1:]] == list(fit_result.display_order)
