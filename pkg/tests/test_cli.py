"""CLI behavior: exit codes, report/trace formats, instance generation,
benchmark summaries, and replay determinism."""

import csv
import json
import math
import os

import numpy as np
import pytest

from matgames.cli import main


def write(path, text):
    with open(path, "w") as f:
        f.write(text)
    return str(path)


@pytest.fixture
def small_instance(tmp_path):
    d = tmp_path / "inst"
    assert main(["gen", "--m", "6", "--n", "5", "--nnz", "18",
                 "--dist", "uniform", "--seed", "3", "--out", str(d)]) == 0
    return d


def read_trace(outdir):
    with open(os.path.join(outdir, "trace.csv"), newline="") as f:
        return list(csv.reader(f))


def read_report(outdir):
    with open(os.path.join(outdir, "report.json")) as f:
        return json.load(f)


class TestGen:
    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            assert main(["gen", "--m", "5", "--n", "4", "--nnz", "12",
                         "--dist", "uniform", "--seed", "1", "--out", str(d)]) == 0
        assert (a / "matrix.mtx").read_bytes() == (b / "matrix.mtx").read_bytes()
        assert (a / "meta.json").read_bytes() == (b / "meta.json").read_bytes()

    def test_spanning_pattern_only(self, tmp_path):
        d = tmp_path / "s"
        assert main(["gen", "--m", "5", "--n", "4", "--nnz", "8",
                     "--dist", "uniform", "--seed", "0", "--out", str(d)]) == 0
        meta = json.loads((d / "meta.json").read_text())
        assert meta["nnz"] == 8  # exactly m+n-1
        lines = (d / "matrix.mtx").read_text().splitlines()
        rows = {int(ln.split()[0]) for ln in lines[2:]}
        cols = {int(ln.split()[1]) for ln in lines[2:]}
        assert rows == set(range(1, 6)) and cols == set(range(1, 5))

    def test_too_few_nnz_is_config_error(self, tmp_path):
        assert main(["gen", "--m", "5", "--n", "4", "--nnz", "7",
                     "--dist", "uniform", "--out", str(tmp_path / "x")]) == 3

    def test_numsparse_is_numerically_sparse(self, tmp_path):
        d = tmp_path / "ns"
        assert main(["gen", "--m", "20", "--n", "20", "--nnz", "300",
                     "--dist", "numsparse", "--seed", "2", "--out", str(d)]) == 0
        meta = json.loads((d / "meta.json").read_text())
        assert meta["L11"] < meta["amax"] * math.sqrt(meta["rcs"])


class TestSolve:
    def test_l1l1_run_writes_report_and_trace(self, small_instance, tmp_path):
        out = tmp_path / "run"
        code = main(["solve", "--geometry", "l1l1", "--method", "vr",
                     "--eps", "0.3", "--seed", "1", "--checkpoint", "1",
                     "--matrix", str(small_instance / "matrix.mtx"),
                     "--out", str(out)])
        assert code == 0
        rep = read_report(out)
        assert rep["config"]["seed"] == 1
        assert rep["result"]["gap"] <= 0.4
        tr = read_trace(out)
        assert tr[0] == ["iteration", "elapsed_ns", "gap_or_blank",
                        "coords_touched", "matvecs"]
        assert tr[1][0] == "0"  # first data row is iteration 0
        assert int(tr[-1][0]) == rep["result"]["iterations"]

    def test_simplex_linear_term_is_config_error(self, small_instance, tmp_path):
        bfile = write(small_instance / "b.txt", "0.1\n" * 5)
        assert main(["solve", "--geometry", "l1l1", "--method", "sublinear",
                     "--eps", "0.3", "--matrix", str(small_instance / "matrix.mtx"),
                     "--b", bfile, "--out", str(tmp_path / "o")]) == 3

    def test_missing_matrix_is_input_error(self, tmp_path):
        assert main(["solve", "--geometry", "l1l1", "--method", "sublinear",
                     "--eps", "0.3", "--matrix", str(tmp_path / "nope.mtx"),
                     "--out", str(tmp_path / "o")]) == 2

    def test_bad_vector_length_is_input_error(self, small_instance, tmp_path):
        bfile = write(small_instance / "short.txt", "0.1\n0.2\n")
        assert main(["solve", "--geometry", "l2l2", "--method", "vr",
                     "--eps", "0.3", "--matrix", str(small_instance / "matrix.mtx"),
                     "--b", bfile, "--out", str(tmp_path / "o")]) == 2

    def test_wrong_estimator_variant_is_config_error(self, small_instance, tmp_path):
        assert main(["solve", "--geometry", "l1l1", "--method", "vr",
                     "--estimator", "L2L2dynamic", "--eps", "0.3",
                     "--matrix", str(small_instance / "matrix.mtx"),
                     "--out", str(tmp_path / "o")]) == 3

    def test_mirror_prox_runs(self, small_instance, tmp_path):
        out = tmp_path / "mp"
        assert main(["solve", "--geometry", "l2l2", "--method", "mirror-prox",
                     "--eps", "0.01", "--checkpoint", "5",
                     "--matrix", str(small_instance / "matrix.mtx"),
                     "--out", str(out)]) == 0
        assert read_report(out)["result"]["gap"] <= 0.01

    def test_replay_is_bitwise_identical(self, small_instance, tmp_path):
        argv = lambda o: ["solve", "--geometry", "l2l1", "--method", "vr",
                          "--eps", "0.2", "--seed", "7", "--checkpoint", "2",
                          "--matrix", str(small_instance / "matrix.mtx"),
                          "--out", o]
        assert main(argv(str(tmp_path / "r1"))) == 0
        assert main(argv(str(tmp_path / "r2"))) == 0
        t1 = (tmp_path / "r1" / "trace.csv").read_text()
        t2 = (tmp_path / "r2" / "trace.csv").read_text()
        # strip wall-clock columns; everything else must match bitwise
        strip = lambda t: [",".join(r.split(",")[:1] + r.split(",")[2:])
                           for r in t.splitlines()]
        assert strip(t1) == strip(t2)
        r1, r2 = read_report(tmp_path / "r1"), read_report(tmp_path / "r2")
        assert r1["result"]["gap"] == r2["result"]["gap"]
        assert r1["result"]["x"] == r2["result"]["x"]


class TestApp:
    def test_mineb_two_points(self, tmp_path):
        pts = write(tmp_path / "p.txt", "0 0\n3 0\n")
        out = tmp_path / "eb"
        assert main(["app", "mineb", "--points", pts, "--eps", "0.05",
                     "--out", str(out)]) == 0
        rep = read_report(out)
        assert rep["result"]["metric_name"] == "radius"
        assert rep["result"]["metric"] == pytest.approx(1.5, rel=0.06)

    def test_regress_bad_mu_is_config_error(self, small_instance, tmp_path):
        bfile = write(small_instance / "rb.txt", "1.0\n" * 6)
        assert main(["app", "regress", "--matrix",
                     str(small_instance / "matrix.mtx"), "--b", bfile,
                     "--mu", "0", "--eps", "1e-3",
                     "--out", str(tmp_path / "o")]) == 3

    def test_maxib_unbounded_is_input_error(self, tmp_path):
        hs = write(tmp_path / "h.txt", "1 0 1\n0 1 1\n")
        assert main(["app", "maxib", "--halfspaces", hs,
                     "--out", str(tmp_path / "o")]) == 2

    def test_maxib_square(self, tmp_path):
        hs = write(tmp_path / "sq.txt", "1 0 1\n-1 0 1\n0 1 1\n0 -1 1\n")
        out = tmp_path / "ib"
        assert main(["app", "maxib", "--halfspaces", hs, "--eps", "0.1",
                     "--r-bound", "2.0", "--out", str(out)]) == 0
        rep = read_report(out)
        assert rep["result"]["metric_name"] == "inradius"
        assert rep["result"]["metric"] >= 0.9

    def test_regress_small_system(self, tmp_path):
        mtx = write(tmp_path / "m.mtx",
                    "%%MatrixMarket matrix coordinate real general\n"
                    "2 2 2\n1 1 2.0\n2 2 2.0\n")
        bfile = write(tmp_path / "b.txt", "2.0\n4.0\n")
        out = tmp_path / "rg"
        assert main(["app", "regress", "--matrix", mtx, "--b", bfile,
                     "--mu", "4.0", "--eps", "1e-3", "--out", str(out)]) == 0
        rep = read_report(out)
        x = np.array(rep["result"]["x"])
        assert np.allclose(x, [1.0, 2.0], atol=2e-3)
        assert rep["result"]["error_bound"] <= 1e-3


class TestBench:
    def test_two_methods_summary(self, small_instance, tmp_path):
        out = tmp_path / "bench"
        code = main(["bench", "--methods", "vr,mirror-prox",
                     "--geometry", "l2l2", "--eps", "0.2",
                     "--matrix", str(small_instance / "matrix.mtx"),
                     "--out", str(out)])
        assert code == 0
        with open(out / "summary.csv", newline="") as f:
            rows = list(csv.reader(f))
        assert [r[0] for r in rows] == ["method", "vr", "mirror-prox"]
        for r in rows[1:]:
            assert float(r[4]) <= 1.2 * 0.2
        assert (out / "vr" / "report.json").exists()
        assert (out / "mirror-prox" / "trace.csv").exists()

    def test_unknown_method_is_config_error(self, small_instance, tmp_path):
        assert main(["bench", "--methods", "vr,nope", "--geometry", "l2l2",
                     "--eps", "0.2",
                     "--matrix", str(small_instance / "matrix.mtx"),
                     "--out", str(tmp_path / "o")]) == 3
