import numpy as np
import pytest

from bracketflow import io
from bracketflow.cli import main


def run(tmp_path, *argv):
    return main(list(argv) + ["--out", str(tmp_path)]) if argv[0] != "verify" else main(list(argv))


def test_flow_heisenberg_csv(tmp_path):
    assert run(tmp_path, "flow", "--example", "heisenberg3", "--t-end", "10") == 0
    cols = io.read_trace_csv(tmp_path / "trace.csv")
    assert len(cols["t"]) == 101  # floor(t_final / stride) + 1
    exact = 1 / (1 + 2 * cols["t"])
    assert np.max(np.abs(cols["norm_sq"] - exact)) < 1e-6
    summary = io.parse_report((tmp_path / "summary.txt").read_text())
    assert summary["status"] == "completed" and summary["samples"] == "101"


def test_flow_row_count_with_uneven_stride(tmp_path):
    assert run(tmp_path, "flow", "--example", "filiform4", "--t-end", "1",
               "--record-stride", "0.3") == 0
    assert len(io.read_trace_csv(tmp_path / "trace.csv")["t"]) == 4


def test_flow_normalized_fixed_point(tmp_path):
    assert run(tmp_path, "flow", "--example", "heisenberg3", "--normalized") == 0
    summary = io.parse_report((tmp_path / "summary.txt").read_text())
    assert summary["fixed_point"] == "t=0"
    assert summary["status"] == "fixed-point"


def test_flow_rk4_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["flow", "--example", "filiform4", "--t-end", "2", "--step", "0.01",
                     "--out", str(d)]) == 0
    assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()


def test_flow_gauged_and_split(tmp_path):
    assert run(tmp_path / "g", "flow", "--example", "filiform4", "--gauged", "--t-end", "2") == 0
    cols = io.read_trace_csv(tmp_path / "g" / "trace.csv")
    assert np.all(cols["centre_dim"] == 1) and np.max(cols["centre_angle"]) < 1e-8
    assert run(tmp_path / "s", "flow", "--example", "filiform4", "--split", "--t-end", "2") == 0
    cols = io.read_trace_csv(tmp_path / "s" / "trace.csv")
    assert np.all(np.isfinite(cols["phi"]))
    assert (tmp_path / "s" / "trace_eta1.csv").exists()


def test_flow_from_files(tmp_path):
    (tmp_path / "b.txt").write_text("dim 4\n1 2 3 1 0\n1 3 4 1 0\n")
    assert main(["flow", "--bracket", str(tmp_path / "b.txt"), "--t-end", "1",
                 "--out", str(tmp_path / "o1")]) == 0
    (tmp_path / "m.txt").write_text("dim 2\n0,0 1,0\n0,0 0,0\n")
    assert main(["flow", "--matrix", str(tmp_path / "m.txt"), "--t-end", "1",
                 "--out", str(tmp_path / "o2")]) == 0


@pytest.mark.parametrize("argv", [
    ["flow", "--example", "no-such-example"],
    ["flow", "--example", "heisenberg3", "--t-end", "-1"],
    ["flow", "--example", "heisenberg3", "--split"],
    ["flow", "--example", "heisenberg3", "--normalized", "--gauged"],
    ["flow", "--example", "heisenberg3", "--step", "0.1", "--tol", "1e-8"],
    ["flow"],
    ["aa", "--jordan-type", "1,2", "--construct"],
    ["aa", "--example", "e12", "--construct"],
    ["aa"],
])
def test_input_errors_exit_2(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path)]) == 2


def test_bad_files_exit_2(tmp_path, caplog):
    bad = tmp_path / "bad.txt"
    bad.write_text("dim 3\n1 2 2 1 0\n2 3 1 1 0\n")   # violates Jacobi
    assert main(["flow", "--bracket", str(bad), "--out", str(tmp_path)]) == 2
    broken = tmp_path / "broken.txt"
    broken.write_text("dim 3\n1 2 3 1 0\n1 2\n")
    assert main(["flow", "--bracket", str(broken), "--out", str(tmp_path)]) == 2
    assert f"{broken}:3:" in caplog.text
    assert main(["flow", "--bracket", str(tmp_path / "missing.txt"),
                 "--out", str(tmp_path)]) == 2
    huge = tmp_path / "huge.txt"
    huge.write_text("dim 2\n1e200,0 0,0\n0,0 0,0\n")
    assert main(["aa", "--matrix", str(huge), "--flow", "--out", str(tmp_path)]) == 2


def test_integration_abort_exit_3(tmp_path):
    m = tmp_path / "m.txt"
    m.write_text("dim 2\n1e5,0 1e5,0\n0,0 1e5,0\n")
    with np.errstate(all="ignore"):
        code = main(["aa", "--matrix", str(m), "--flow", "--step", "1", "--t-end", "3",
                     "--out", str(tmp_path)])
    assert code == 3
    assert (tmp_path / "trace.csv").exists()
    assert "error" in io.parse_report((tmp_path / "summary.txt").read_text())


def test_aa_classify_jordan_block(tmp_path):
    m = tmp_path / "jordan2.txt"
    m.write_text("dim 2\n1,0 1,0\n0,0 1,0\n")
    assert main(["aa", "--matrix", str(m), "--classify", "--out", str(tmp_path)]) == 0
    rep = io.parse_report((tmp_path / "report.txt").read_text())
    assert rep["exists"] == "false" and rep["class"] == "neither"


def test_aa_construct(tmp_path):
    assert run(tmp_path, "aa", "--jordan-type", "1,1,1", "--construct") == 0
    B = io.read_matrix(tmp_path / "canonical.txt")
    assert np.array_equal(B, np.array([[0, np.sqrt(2), 0], [0, 0, 1], [0, 0, 0]]))
    rep = io.parse_report((tmp_path / "construct.txt").read_text())
    assert float(rep["residual"]) < 1e-12


def test_aa_flow_e12(tmp_path):
    m = tmp_path / "e12.txt"
    m.write_text("dim 2\n0,0 1,0\n0,0 0,0\n")
    assert main(["aa", "--matrix", str(m), "--flow", "--t-end", "4.5",
                 "--out", str(tmp_path)]) == 0
    rep = io.parse_report((tmp_path / "summary.txt").read_text())
    assert abs(float(rep["final_norm_sq"]) - 0.1) < 1e-6
    cols = io.read_trace_csv(tmp_path / "trace.csv")
    assert "normality_defect" in cols and "trace_power_drift" in cols
    assert io.read_matrix(tmp_path / "final_matrix.txt").shape == (2, 2)


def test_aa_classify_example(tmp_path):
    assert run(tmp_path, "aa", "--example", "rot2") == 0
    rep = io.parse_report((tmp_path / "report.txt").read_text())
    assert rep["type"] == "steady"


def test_verify_suites(capsys):
    assert main(["verify", "moment-map"]) == 0
    assert main(["verify", "gauge-equivalence", "--example", "filiform4"]) == 0
    out = capsys.readouterr().out
    assert "suite gauge-equivalence: PASS" in out


def test_verify_unknown_suite():
    assert main(["verify", "no-such-suite"]) == 2


def test_verify_rejects_example_for_unparameterized_suite():
    assert main(["verify", "moment-map", "--example", "filiform4"]) == 2
