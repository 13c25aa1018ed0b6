import csv
import json

import numpy as np
import pytest

from euclid_companion.cli import main
from euclid_companion.companion import import_matrix


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def load(tmp_path, name):
    return json.loads((tmp_path / name).read_text())


def rows(tmp_path, name):
    with open(tmp_path / name) as fh:
        return list(csv.DictReader(fh))


def test_poly_k4(tmp_path):
    assert run(tmp_path, "poly", "--k", "4") == 0
    assert load(tmp_path, "poly_k4_monomial.json")["coeffs"] == ["1", "1", "3", "6", "9", "10", "8", "4", "1"]
    rep = load(tmp_path, "poly_k4_monomial_report.json")
    assert rep["degree"] == 8 and rep["E_k(1)"] == "43" and rep["unimodal"]
    man = load(tmp_path, "poly_manifest.json")
    assert man["exit_code"] == 0 and "elapsed_s" in man and "numpy" in man["versions"]
    assert sorted(man["outputs"]) == ["poly_k4_monomial.json", "poly_k4_monomial_report.json"]


def test_poly_shifted_k3(tmp_path):
    assert run(tmp_path, "poly", "--k", "3", "--basis", "shifted") == 0
    assert load(tmp_path, "poly_k3_shifted.json")["coeffs"] == ["13/16", "0", "1/2", "0", "1"]


def test_poly_k1(tmp_path):
    assert run(tmp_path, "poly", "--k", "1") == 0
    assert load(tmp_path, "poly_k1_monomial.json")["coeffs"] == ["1", "1"]


def test_companion_k2(tmp_path):
    assert run(tmp_path, "companion", "--k", "2") == 0
    m = import_matrix((tmp_path / "companion_euclid_k2.mtx").read_bytes(), "matrix-market")
    assert m.to_dense(int).tolist() == [[0, 1], [-1, -1]]


def test_companion_k5_verify(tmp_path):
    assert run(tmp_path, "companion", "--k", "5", "--verify") == 0
    rep = load(tmp_path, "companion_euclid_k5_report.json")
    assert rep["verified"] is True and rep["dimension"] == 16 and rep["height"] == 1
    assert rep["corner_sign"] == 1


def test_companion_mandelbrot(tmp_path):
    assert run(tmp_path, "companion", "--k", "4", "--family", "mandelbrot", "--verify") == 0
    rep = load(tmp_path, "companion_mandelbrot_k4_report.json")
    assert rep["dimension"] == 7 and rep["verified"] is True


@pytest.mark.parametrize("fmt,ext", [("csv-triplets", "csv"), ("dense-json", "json")])
def test_companion_formats(tmp_path, fmt, ext):
    assert run(tmp_path, "companion", "--k", "3", "--format", fmt) == 0
    m = import_matrix((tmp_path / f"companion_euclid_k3.{ext}").read_bytes(), fmt)
    assert m.n == 4


def test_companion_variant(tmp_path):
    assert run(tmp_path, "companion", "--k", "4", "--e2-choice", "2", "--block-order", "3,2,1,0") == 0
    assert load(tmp_path, "companion_euclid_k4_report.json")["verified"] is True
    assert run(tmp_path, "companion", "--k", "4", "--block-order", "0,1") == 2
    assert run(tmp_path, "companion", "--k", "4", "--block-order", "a,b") == 2


def test_eigs_k6(tmp_path):
    assert run(tmp_path, "eigs", "--k", "6") == 0
    r = rows(tmp_path, "eigs_k6.csv")
    assert len(r) == 32
    assert list(r[0]) == ["re", "im", "cond", "resid_recurrence", "resid_sigma"]
    summ = load(tmp_path, "eigs_k6_summary.json")
    assert summ["n_roots"] == 32 and summ["max_residual"] < 1e-10
    assert (tmp_path / "eigs_k6.svg").read_text().startswith("<svg")


def test_eigs_k2(tmp_path):
    assert run(tmp_path, "eigs", "--k", "2", "--no-plot") == 0
    r = rows(tmp_path, "eigs_k2.csv")
    z = [complex(float(x["re"]), float(x["im"])) for x in r]
    assert z[0] == np.conj(z[1])
    assert abs(z[0] - complex(-0.5, -np.sqrt(3) / 2)) < 1e-15
    assert not (tmp_path / "eigs_k2.svg").exists()


def test_eigs_cap(tmp_path):
    assert run(tmp_path, "eigs", "--k", "13") == 2
    assert load(tmp_path, "eigs_manifest.json")["exit_code"] == 2


def test_fields_pseudospectrum(tmp_path):
    assert run(tmp_path, "fields", "--k", "6", "--kind", "pseudospectrum",
               "--eps", "1e-2:1e-1:10", "--n", "81") == 0
    stem = "field_pseudospectrum_k6"
    assert len(rows(tmp_path, f"{stem}.csv")) == 81 * 81
    side = load(tmp_path, f"{stem}.json")
    assert side["kind"] == "pseudospectrum" and len(side["levels"]) == 10
    assert side["n_invalid"] == 0
    svg = (tmp_path / f"{stem}.svg").read_text()
    assert svg.count("<polyline") > 10


def test_fields_pseudospectrum_k8(tmp_path):
    assert run(tmp_path, "fields", "--k", "8", "--kind", "pseudospectrum", "--n", "41") == 0


def test_fields_pseudozero_k2(tmp_path):
    assert run(tmp_path, "fields", "--k", "2", "--kind", "pseudozero_monomial",
               "--window=-1,0,-1,1", "--nx", "3", "--ny", "5",
               "--eps", "1e-3:1e-1:3") == 0
    r = rows(tmp_path, "field_pseudozero_monomial_k2.csv")
    vals = {(float(x["x"]), float(x["y"])): float(x["value"]) for x in r}
    # nodes (-0.5, +-0.866) are not on this grid; check the field is small near them
    near = min(v for (x, y), v in vals.items() if x == -0.5 and abs(y) > 0.4)
    assert near < vals[(-1.0, 0.0)]


def test_fields_budget(tmp_path):
    assert run(tmp_path, "fields", "--k", "3", "--n", "1001") == 2
    assert run(tmp_path, "fields", "--k", "3", "--eps", "1:0.1:3") == 2
    assert run(tmp_path, "fields", "--k", "3", "--window", "1,2,3") == 2


def test_verify_kmax8(tmp_path):
    assert run(tmp_path, "verify", "--kmax", "8") == 0
    rep = load(tmp_path, "verify.json")
    assert all(v["status"] in ("pass", "info") for v in rep.values())
    assert all("elapsed_ms" in v for v in rep.values())


def test_verify_kmax1(tmp_path):
    assert run(tmp_path, "verify", "--kmax", "1") == 0


def test_verify_egyptian(tmp_path):
    assert run(tmp_path, "verify", "--check", "egyptian", "--n", "10") == 0
    rep = load(tmp_path, "verify.json")
    assert list(rep) == ["egyptian"]
    assert rep["egyptian"]["status"] == "pass" and rep["egyptian"]["data"] == {"n_max": 10}
    assert run(tmp_path, "verify", "--check", "bogus") == 2


def test_verify_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["verify", "--kmax", "5", "--out", str(a)]) == 0
    assert main(["verify", "--kmax", "5", "--out", str(b), "--threads", "3"]) == 0
    ja, jb = json.loads((a / "verify.json").read_text()), json.loads((b / "verify.json").read_text())
    # everything but the wall-clock timings is identical
    for v in (*ja.values(), *jb.values()):
        v.pop("elapsed_ms")
    assert ja == jb
    assert (a / "verify.txt").read_bytes() == (b / "verify.txt").read_bytes()


def test_outputs_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["eigs", "--k", "7", "--out", str(out)]) == 0
        assert main(["fields", "--k", "4", "--n", "31", "--kind", "pseudozero_shifted",
                     "--out", str(out)]) == 0
    for name in ("eigs_k7.csv", "eigs_k7_summary.json", "eigs_k7.svg",
                 "field_pseudozero_shifted_k4.csv", "field_pseudozero_shifted_k4.json",
                 "field_pseudozero_shifted_k4_contours.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_eigs_threads_same_numbers(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["eigs", "--k", "7", "--no-plot", "--out", str(a)]) == 0
    assert main(["eigs", "--k", "7", "--no-plot", "--threads", "4", "--out", str(b)]) == 0
    assert (a / "eigs_k7.csv").read_bytes() == (b / "eigs_k7.csv").read_bytes()


def test_report_slope_small(tmp_path):
    assert run(tmp_path, "report", "--slope", "--kmax", "6") == 0
    fit = load(tmp_path, "slope.json")
    assert 0 < fit["slope"] < 2 and len(fit["rows"]) == 5
    assert len(rows(tmp_path, "slope.csv")) == 5


def test_report_slope_refuses(tmp_path):
    assert run(tmp_path, "report", "--slope", "--kmax", "3") == 2
    assert run(tmp_path, "report", "--slope", "--kmax", "13") == 2
    assert run(tmp_path, "report") == 2


def test_report_bcond(tmp_path):
    assert run(tmp_path, "report", "--bcond") == 0
    assert len(rows(tmp_path, "bcond.csv")) == 7 * 201


@pytest.mark.slow
def test_report_table1_k6(tmp_path):
    assert run(tmp_path, "report", "--table1", "--k", "6") == 0
    t = rows(tmp_path, "table1.csv")
    assert [r["representation"] for r in t] == ["monomial", "shifted", "matrix"]
    assert load(tmp_path, "table1.json")[0]["ordered"] is True


def test_bad_flags(tmp_path):
    assert main(["poly"]) == 2
    assert main(["nonsense"]) == 2
    assert run(tmp_path, "poly", "--k", "0") == 2
    assert run(tmp_path, "poly", "--k", "3", "--threads", "0") == 2
    assert run(tmp_path, "poly", "--k", "13") == 2
    assert run(tmp_path, "poly", "--k", "13", "--force") == 0
