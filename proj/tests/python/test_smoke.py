import json
import pathlib

import jsonschema
import numpy as np
import pytest

import cift

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="module")
def folding(tmp_path_factory):
    out = tmp_path_factory.mktemp("folding")
    code, _, err = cift.cli(["gen-fixture", "--kind", "folding", "--out", str(out), "--rows-per-block", "300"])
    assert code == 0, err
    return out


def test_fvec_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    a = rng.standard_normal((17, 5)).astype(np.float32)
    cift.write_features(a, str(tmp_path / "a.fvec"))
    b = cift.load_features(str(tmp_path / "a.fvec"))
    assert b.dtype == np.float32
    assert np.array_equal(a, b)


def test_bad_fvec_raises(tmp_path):
    (tmp_path / "bad.fvec").write_bytes(b"NOTFVEC!" + bytes(24))
    with pytest.raises(cift.CiftError, match="MalformedHeader"):
        cift.load_features(str(tmp_path / "bad.fvec"))


def test_snr_and_selection():
    assert round(cift.snr_from_moments(0.79, 5.55), 4) == 0.1423
    snr = [0.1423, 0.2171, 0.1644, 0.0097, 0.0588, 0.1448]
    assert cift.detect_decoherence(snr) == 3
    assert cift.detect_decoherence([1.0, 2.0, 3.0]) is None


def test_pca_and_gaussian():
    rows = np.array([[1.0, 0.0], [-1.0, 0.0], [2.0, 0.0], [-2.0, 0.0]]) + np.array([[0.0, 0.1], [0.0, -0.1], [0.0, 0.0], [0.0, 0.0]])
    pca = cift.first_principal_component(rows)
    assert abs(pca["w1"][0]) > 0.99
    mu, sigma = cift.fit_gaussian([1.0, 2.0, 3.0])
    assert mu == pytest.approx(2.0)
    assert sigma == pytest.approx(1.0)


def test_frechet():
    m = np.zeros(3)
    c = np.eye(3)
    assert cift.frechet_distance_sq(m, c, m, c) == pytest.approx(0.0, abs=1e-12)
    assert cift.frechet_distance_sq(np.array([0.0]), np.array([[1.0]]), np.array([2.0]), np.array([[4.0]])) == pytest.approx(5.0)


def test_sweep_report_matches_schema(folding):
    report = cift.run_sweep(str(folding / "manifest.json"))
    schema = json.loads((ROOT / "schemas" / "sweep_report.schema.json").read_text())
    jsonschema.validate(report, schema)
    assert report["lambda_star"]["ratio"] == "100:100"
    assert report["points"][report["decoherence_index"]]["ratio"] == "100:300"


def test_cli_sweep_json_matches_schema(folding, tmp_path):
    table = tmp_path / "mse.csv"
    table.write_text("condition,kind,ratio,mse\nid,ID,100:0,0.0021\nid,ID,100:100,0.0036\n"
                     "ood,OOD,100:0,0.07\nood,OOD,100:100,0.001\n")
    out = tmp_path / "report.json"
    code, stdout, err = cift.cli(["sweep", "--manifest", str(folding / "manifest.json"), "--out", str(out),
                                  "--mse-table", str(table)])
    assert code == 0, err
    assert "lambda_star 100:100" in stdout
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, json.loads((ROOT / "schemas" / "sweep_report.schema.json").read_text()))
    assert doc["robustness"][0]["rs"] == 0.0


def test_sweep_arrays_collapse():
    rng = np.random.default_rng(3)
    real = rng.normal(0.0, 1.0, (4000, 4)).astype(np.float32)
    synth = rng.normal(0.0, 1.0, (4000, 4)).astype(np.float32)
    real[:, 0] += 2.0
    synth[:, 0] -= 1.0
    grid = ",".join(f"{12 - k}:{k}" for k in range(12))
    report = cift.sweep_arrays(real, synth, grid, "subsample", 1)
    idx = report["decoherence_index"]
    assert idx is not None
    assert abs(report["points"][idx]["lambda"] - 2.0 / 3.0) <= 1.0 / 12.0 + 1e-12


def test_robustness(tmp_path):
    table = tmp_path / "t.csv"
    table.write_text("condition,kind,ratio,mse\nid,ID,100:0,0.0021\nid,ID,100:100,0.0036\n"
                     "ood,OOD,100:0,0.07\nood,OOD,100:100,0.001\n")
    curve = cift.rs_curve(str(table))
    assert curve[0]["rs"] == 0.0
    assert curve[1]["rs"] == pytest.approx(57.5, rel=1e-3)
    assert cift.robustness_score_from_means(0.08, 0.07, 0.002, 0.002) == 0.0


def test_theory():
    assert cift.normalized_mi_closed_form(8.0) == pytest.approx(1.0 / 3.0)
    assert cift.mixture_variance(-1.0, 1.0, 1.0, 1.0) == pytest.approx(2.0)
    alpha, ratio = cift.collapse_critical_fraction(2.0, -1.0)
    assert alpha == pytest.approx(2.0 / 3.0)
    assert ratio == pytest.approx(2.0)
    with pytest.raises(cift.CiftError, match="SignViolation"):
        cift.collapse_critical_fraction(1.0, 1.0)
    cases = cift.run_oracle_suite("prop1")
    assert cases and all(c["pass"] for c in cases)
