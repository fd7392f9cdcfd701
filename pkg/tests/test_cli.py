import json

import numpy as np
import pytest

from holab import catalog
from holab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def grid_spec(tmp_path, name="rp2-cp2", axes=None):
    e = catalog.get(name)
    M = e.immersion
    axes = axes or [np.linspace(-0.3, 0.3, 7)] * M.k
    shape = tuple(len(a) for a in axes)
    P = np.zeros(shape + (M.space.dim,))
    D1 = np.zeros(shape + (M.space.dim, M.k))
    D2 = np.zeros(shape + (M.k, M.k, M.space.dim))
    for idx in np.ndindex(shape):
        jet = M.jets([a[i] for a, i in zip(axes, idx)])
        P[idx], D1[idx], D2[idx] = jet.point, jet.d1, jet.d2
    doc = {"model": {"c": M.space.c, "n": M.space.n}, "k": M.k, "jet_mode": "analytic",
           "grid": [list(a) for a in axes], "points": P.tolist(), "d1": D1.tolist(), "d2": D2.tolist()}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(doc, indent=1))
    return path, doc


def test_catalog_listing(capsys):
    code, doc = run_json(capsys, "catalog")
    assert code == 0
    assert [e["name"] for e in doc["entries"]] == catalog.names()


def test_holonomy_of_complex_line(capsys):
    code, doc = run_json(capsys, "holonomy", "--example", "complex-line-cp3", "--point", "0.3,0.1")
    assert code == 0 and doc["results"]["algebra_dim"] == 1
    A = doc["results"]["algebra"][0]
    assert (A["rows"], A["cols"]) == (4, 4) and len(A["data"]) == 16


def test_classify_negative_control_entry(capsys):
    code, doc = run_json(capsys, "classify", "--example", "totally-real-surface-cp3", "--point", "0,0")
    assert code == 0
    res = doc["results"][0]
    assert res["label"] == "TotallyReal" and res["coisotropic"] is False


def test_verify_single_check(capsys):
    code, doc = run_json(capsys, "verify", "--example", "clifford-torus-cp2", "--check", "lagrangian-intertwiner")
    assert code == 0 and doc["pass"] is True
    assert doc["reports"][0]["check"] == "lagrangian-intertwiner"


def test_verify_precondition_is_an_input_error(capsys):
    code, doc = run_json(capsys, "verify", "--example", "totally-real-surface-cp3", "--check", "coisotropic-lemma")
    assert code == 2 and doc["error_kind"] == "precondition" and doc["residual"] > 1e-2


def test_verify_failure_exit_code(capsys):
    # J(TM) is not a parallel subbundle along a non-geodesic circle
    code, doc = run_json(capsys, "verify", "--example", "rp1-in-rp2-cp2-circle", "--check", "reduction-conditions",
                         "--bundle", "JTM", "--samples", "1")
    assert code == 1 and doc["pass"] is False


def test_input_errors(capsys):
    assert run(capsys, "classify", "--example", "nope")[0] == 2
    assert run(capsys, "classify", "--example", "rp2-cp2", "--point", "1,2,3")[0] == 2
    assert run(capsys, "classify")[0] == 2
    assert run(capsys, "classify", "--example", "rp2-cp2", "--tol", "2")[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["verify", "--example", "rp2-cp2", "--check", "no-such-check"])
    assert info.value.code == 2


def test_threads_variable(capsys, monkeypatch):
    monkeypatch.setenv("HOLAB_THREADS", "lots")
    assert run(capsys, "holonomy", "--example", "geodesic-sphere-cp2")[0] == 2
    monkeypatch.setenv("HOLAB_THREADS", "0")
    assert run(capsys, "holonomy", "--example", "geodesic-sphere-cp2")[0] == 0


def test_formats_and_out_file(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--example", "rp2-cp2", "--check", "coisotropic-lemma", "--format", "csv",
                       "--samples", "1")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "check,max_residual,pass,points_sampled,status,tolerance"
    assert lines[1].startswith("coisotropic-lemma,")
    code, out, _ = run(capsys, "classify", "--example", "rp2-cp2", "--format", "text")
    assert "results[0].label: Lagrangian" in out
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "classify", "--example", "rp2-cp2", "--out", str(target))
    assert out == "" and json.loads(target.read_text())["results"][0]["label"] == "Lagrangian"


def test_reports_are_byte_identical(capsys):
    argv = ["holonomy", "--example", "rp2-cp2", "--radius-schedule", "0.1,0.05"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_twelve_significant_digits(capsys):
    code, doc = run_json(capsys, "classify", "--example", "clifford-torus-cp2")
    for a in doc["results"][0]["angles"]:
        assert len(repr(a).replace(".", "").lstrip("0")) <= 13


def test_transport(capsys):
    code, doc = run_json(capsys, "transport", "--example", "plane-c2", "--point", "0,0", "--loop", "circle:0,1,0.5")
    assert code == 0 and np.allclose(doc["results"]["vector_out"], [1.0, 0.0])
    code, doc = run_json(capsys, "transport", "--example", "rp2-cp2", "--to", "0.5,0.4", "--vector", "0,1")
    assert code == 0 and np.isclose(np.linalg.norm(doc["results"]["vector_out"]), 1.0)
    assert run(capsys, "transport", "--example", "rp2-cp2")[0] == 2
    assert run(capsys, "transport", "--example", "rp2-cp2", "--loop", "square:0,1,0.1")[0] == 2
    assert run(capsys, "transport", "--example", "rp2-cp2", "--to", "1,1", "--vector", "1,0,0")[0] == 2


def test_curvature(capsys):
    code, doc = run_json(capsys, "curvature", "--example", "complex-line-cp3")
    assert code == 0
    R = doc["results"][0]["orthonormal_frame"][0]["R_perp"]
    assert R["rows"] == 4 and max(abs(x) for x in R["data"]) == pytest.approx(2.0)


def test_finite_difference_jets(capsys):
    code, doc = run_json(capsys, "classify", "--example", "rp2-cp2", "--jets", "fd")
    assert code == 0 and doc["results"][0]["label"] == "Lagrangian" and doc["inputs"]["jets"] == "fd"


def test_spec_file_grid(capsys, tmp_path):
    path, _ = grid_spec(tmp_path)
    code, doc = run_json(capsys, "classify", "--spec", str(path), "--point", "0.1,-0.2")
    assert code == 0 and doc["results"][0]["label"] == "Lagrangian"
    code, doc = run_json(capsys, "verify", "--spec", str(path), "--check", "coisotropic-lemma", "--point", "0.1,0.2")
    assert code == 0


def test_spec_file_catalog_reference(capsys, tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"model": {"c": 4, "n": 2}, "k": 2, "catalog": "clifford-torus-cp2"}))
    code, doc = run_json(capsys, "classify", "--spec", str(path))
    assert code == 0 and doc["results"][0]["label"] == "Lagrangian"


def test_spec_file_errors_name_field_and_line(capsys, tmp_path):
    path, doc = grid_spec(tmp_path)
    doc["d1"] = doc["d1"][:3]
    path.write_text(json.dumps(doc, indent=1))
    code, out, err = run(capsys, "classify", "--spec", str(path))
    assert code == 2 and "'d1'" in err and "line" in err
    path.write_text('{"model": {"c": 4, "n": 2},\n "k": 2,\n "grid": [1, 2,\n')
    code, out, err = run(capsys, "classify", "--spec", str(path))
    assert code == 2 and "line" in err
    path.write_text('{"model": {"c": 3, "n": 2}, "k": 1}')
    code, out, err = run(capsys, "classify", "--spec", str(path))
    assert code == 2 and "'model'" in err
