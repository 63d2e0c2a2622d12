import json

import numpy as np
import pytest

from frolov import cli
from frolov.verify import CheckResult


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_matrix_json(capsys):
    code, out, _ = run(capsys, "matrix", "--dim", "2", "--check-radius", "10", "--json")
    data = json.loads(out)
    assert code == 0 and data["check_radius"] == 10
    assert data["det_abs"] == pytest.approx(2 * np.sqrt(2))
    assert data["check_margin"] >= 1 - 1e-9


def test_matrix_text_has_17_digits(capsys):
    _, out, _ = run(capsys, "matrix", "--dim", "2")
    first = out.splitlines()[1].split()
    assert float(first[1]) == pytest.approx(2 + np.sqrt(2), rel=1e-16)
    assert out.splitlines()[2].startswith("d_B = 2.8284271247461")


def test_points_file(capsys, tmp_path):
    path = tmp_path / "p.csv"
    code, _, _ = run(capsys, "points", "--dim", "1", "--n", "10", "--seed", "4",
                     "--u", "1", "--v", "0.5", "--out", str(path))
    lines = path.read_text().splitlines()
    assert code == 0
    assert lines[0] == "# frolov-points v1, d=1, n=10, seed=4"
    assert lines[1] == "x_1"
    assert np.allclose([float(x) for x in lines[2:]], (np.arange(10) + 0.5) / 10, rtol=1e-16)


def test_points_seeded_reproducible(capsys):
    _, a, _ = run(capsys, "points", "--dim", "2", "--n", "50", "--seed", "9")
    _, b, _ = run(capsys, "points", "--dim", "2", "--n", "50", "--seed", "9")
    assert a == b and a.startswith("# frolov-points v1, d=2, n=50, seed=9\nx_1,x_2\n")


def test_points_bad_u(capsys):
    code, _, err = run(capsys, "points", "--dim", "2", "--n", "50", "--u", "1")
    assert code == 2 and "--u" in err


def test_integrate_json(capsys):
    code, out, _ = run(capsys, "integrate", "--fn", "bspline_tensor:r=3", "--dim", "2",
                       "--n", "500", "--seed", "1", "--json")
    data = json.loads(out)
    assert code == 0
    assert set(data) == {"fn", "d", "n", "method", "seed", "value", "node_count", "exact"}
    assert data["fn"] == "bspline_tensor:r=3" and data["exact"] == 1.0
    assert abs(data["value"] - 1) < 1e-2


def test_integrate_boundary_free_and_mc(capsys):
    _, out, _ = run(capsys, "integrate", "--fn", "poly_nobc", "--dim", "1", "--n", "256",
                    "--boundary-free", "--json")
    assert json.loads(out)["method"] == "frolov-boundary-free"
    _, out, _ = run(capsys, "integrate", "--fn", "hat_tensor", "--dim", "2", "--n", "1000",
                    "--method", "mc", "--json")
    data = json.loads(out)
    assert data["method"] == "mc" and data["node_count"] == 1000


@pytest.mark.parametrize("argv", [
    ["integrate", "--fn", "poly_nobc", "--dim", "1", "--n", "8"],
    ["integrate", "--fn", "nope", "--dim", "1", "--n", "8"],
    ["integrate", "--fn", "hat_tensor:q=1", "--dim", "1", "--n", "8"],
])
def test_integrate_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_corpus_list(capsys):
    code, out, _ = run(capsys, "corpus", "list")
    assert code == 0
    assert [l.split()[0] for l in out.splitlines()] == [
        "bspline_tensor", "hat_tensor", "bump_tensor", "box_indicator", "poly_nobc"]


def test_verify_boxes(capsys):
    code, out, _ = run(capsys, "verify", "--lemma", "boxes", "--dim", "2", "--n", "100", "--json")
    assert code == 0 and json.loads(out)["passed"] is True


def test_verify_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(cli, "run_check", lambda *a, **k: CheckResult("boxes", False, {}))
    code, out, _ = run(capsys, "verify", "--lemma", "boxes", "--dim", "2", "--n", "100")
    assert code == 1 and "FAIL" in out


def test_study_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "s.cfg"
    out_csv = tmp_path / "r.csv"
    cfg.write_text(f"fn=hat_tensor\ndim=2\nmethod=frolov\nn-grid=64,128,256,512\n"
                   f"reps=3\nseed=1\nout={tmp_path / 'ignored.csv'}\n")
    code, text, _ = run(capsys, "study", "--config", str(cfg), "--reps", "4",
                        "--out", str(out_csv))
    assert code == 0 and "fitted slope" in text and "predicted exponent: -1.950" in text
    rows = out_csv.read_text().splitlines()
    assert len(rows) == 5 and rows[1].split(",")[5] == "4"
    assert not (tmp_path / "ignored.csv").exists()


def test_study_needs_out(capsys):
    code, _, err = run(capsys, "study", "--fn", "hat_tensor", "--dim", "1")
    assert code == 2 and "--out" in err


def test_study_boundary_free_flag(capsys, tmp_path):
    out_csv = tmp_path / "r.csv"
    code, _, _ = run(capsys, "study", "--fn", "poly_nobc", "--dim", "1", "--n-grid", "16,32",
                     "--reps", "2", "--out", str(out_csv), "--boundary-free")
    assert code == 0
    assert out_csv.read_text().splitlines()[1].split(",")[2] == "frolov-boundary-free"


def test_rate(capsys, tmp_path):
    out_csv = tmp_path / "r.csv"
    run(capsys, "study", "--fn", "hat_tensor", "--dim", "2", "--method", "mc",
        "--n-grid", "64,128,256,512", "--reps", "20", "--out", str(out_csv))
    code, text, _ = run(capsys, "rate", "--in", str(out_csv), "--predict", "mixed:s=0.2,p=4/3")
    assert code == 2
    code, text, _ = run(capsys, "rate", "--in", str(out_csv), "--predict", "mixed:s=0.2,p=1.25")
    assert code == 0 and "REGIME-VIOLATION" in text
    code, text, _ = run(capsys, "rate", "--in", str(out_csv), "--predict", "isotropic:S=1;3,p=2")
    assert code == 0 and "predicted exponent: -1.250" in text


def test_parse_prediction():
    spec = cli.parse_prediction("mixed:s=1.5,p=2", 3)
    assert spec.S == (1.5, 1.5, 1.5) and spec.p == 2.0 and spec.mode == "mixed"
