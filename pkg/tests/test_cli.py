import json

import numpy as np
import pytest

from conijsr import io
from conijsr.cli import main
from conijsr.matrix_core import spectral_radius

from conftest import fixture_path, load


def _run(capsys, *args):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bounds_single_diag(capsys):
    code, out, _ = _run(capsys, "bounds", fixture_path("single_diag23"), "--depth", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["lower"] == 3.0 and doc["upper"] == 3.0


def test_bounds_example_one(capsys):
    code, out, _ = _run(capsys, "bounds", fixture_path("ex1"), "--depth", "4")
    doc = json.loads(out)
    assert code == 0
    assert doc["lower"] == pytest.approx(spectral_radius(load("ex1")[1]), rel=1e-12)
    assert doc["lower"] <= doc["upper"]


def test_bounds_budget_exit(capsys):
    code, _, err = _run(capsys, "bounds", fixture_path("ex1"), "--depth", "25")
    assert code == 3 and "budget" in err


def test_input_error_exit(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"matrices": [[[1, 0], [0, 1]], [[1]]]}')
    code, _, err = _run(capsys, "bounds", bad)
    assert code == 2 and "inconsistent dimension" in err
    code, _, _ = _run(capsys, "compute", bad)
    assert code == 2
    code, _, _ = _run(capsys, "bounds", fixture_path("ex1"), "--depth", "zero")
    assert code == 2


def test_compute_verify_cycle(capsys, tmp_path):
    cert, rep = tmp_path / "c.json", tmp_path / "r.json"
    code, out, _ = _run(capsys, "compute", fixture_path("ex1"), "--algorithm", "conitope", "--out", rep, "--cert", cert)
    assert code == 0
    assert out.startswith("JSR in [") and "exact=true smp=[1] steps=" in out
    report = json.loads(rep.read_text())
    assert report["certificate"] == str(cert)
    code, out, _ = _run(capsys, "verify", cert, fixture_path("ex1"))
    assert code == 0 and "valid" in out
    # wrong problem dimension
    code, _, err = _run(capsys, "verify", cert, fixture_path("ex3"))
    assert code == 2 and "n=4" in err


def test_verify_lists_violations(capsys, tmp_path):
    cert = tmp_path / "c.json"
    _run(capsys, "compute", fixture_path("ex1"), "--cert", cert)
    doc = json.loads(cert.read_text())
    doc["blocks"][0]["vertices"][0]["svec"][0] += 1e-3
    cert.write_text(json.dumps(doc))
    code, out, _ = _run(capsys, "verify", cert, fixture_path("ex1"))
    assert code == 1 and "[provenance]" in out


def test_compute_bounds_only_exit(capsys, tmp_path):
    code, out, _ = _run(capsys, "compute", fixture_path("ex1"), "--algorithm", "dynamic", "--max-iters", "1")
    assert code == 1 and "exact=false" in out


def test_deterministic_reports(capsys, tmp_path):
    docs = []
    for k in range(2):
        rep = tmp_path / f"r{k}.json"
        _run(capsys, "compute", fixture_path("ex3"), "--out", rep)
        doc = json.loads(rep.read_text())
        doc.pop("runtime_ms")
        docs.append(doc)
    assert docs[0] == docs[1]


def test_lift_outputs(capsys, tmp_path):
    out = tmp_path / "l.json"
    assert _run(capsys, "lift", fixture_path("single_diag23"), "--out", out)[0] == 0
    ops = io.lifted_from_dict(json.loads(out.read_text()))
    assert np.allclose(ops[0], np.diag([4.0, 6.0, 9.0]))
    ident = tmp_path / "i.json"
    ident.write_text('{"matrices": [[[1, 0], [0, 1]]]}')
    code, text, _ = _run(capsys, "lift", ident)
    assert code == 0 and np.allclose(io.lifted_from_dict(json.loads(text))[0], np.eye(3))


def test_lift_example_one_radii(capsys, tmp_path):
    out = tmp_path / "l.json"
    _run(capsys, "lift", fixture_path("ex1"), "--out", out)
    ops = io.lifted_from_dict(json.loads(out.read_text()))
    assert len(ops) == 2 and ops[0].shape == (10, 10)
    _, text, _ = _run(capsys, "bounds", fixture_path("ex1"), "--depth", "4")
    lower = json.loads(text)["lower"]
    assert max(spectral_radius(a) for a in ops) >= lower**2 * (1 - 1e-10)
