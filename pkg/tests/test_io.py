import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bracketflow import io
from bracketflow.flows import integrate_bracket_flow
from bracketflow.integrate import FlowConfig
from bracketflow.library import filiform4
from bracketflow.sampling import complex_gaussian, random_nilpotent_bracket


def test_parse_bracket_with_comments():
    mu = io.parse_bracket("# heisenberg\ndim 3\n\n1 2 3 1 0   # [Z1, Z2] = Z3\n")
    assert mu.dim == 3 and mu.matrix[2, 0] == 1 and np.count_nonzero(mu.matrix) == 1


@pytest.mark.parametrize("text, line, fragment", [
    ("", 0, "empty"),
    ("dimension 3\n", 1, "expected 'dim n'"),
    ("dim x\n", 1, "bad dimension"),
    ("dim 3\n1 2 3 1\n", 2, "expected 'i j k re im'"),
    ("dim 3\n# ok\n2 1 3 1 0\n", 3, "1 <= i < j"),
    ("dim 3\n1 2 4 1 0\n", 2, "1 <= k"),
    ("dim 3\n1 2 3 1 0\n1 2 3 2 0\n", 3, "duplicate"),
    ("dim 3\n1 2 3 one 0\n", 2, "not a number"),
    ("dim 3\n1 2 3 inf 0\n", 2, "non-finite"),
])
def test_bracket_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(io.FormatError) as err:
        io.parse_bracket(text, "in.txt")
    assert err.value.line == line
    assert fragment in str(err.value)
    assert str(err.value).startswith("in.txt:")


@pytest.mark.parametrize("text, line", [
    ("dim 2\n1,0 0,0\n", 2),
    ("dim 2\n1,0 0,0\n0,0\n", 3),
    ("dim 2\n1,0 0,0\n0,0 1\n", 3),
    ("dim 2\n1,0 0,0\n0,0 1,0\n1,0 1,0\n", 4),
])
def test_matrix_errors_carry_line_numbers(text, line):
    with pytest.raises(io.FormatError) as err:
        io.parse_matrix(text)
    assert err.value.line == line


def test_bracket_file_round_trip_is_exact(tmp_path, rng):
    mu = random_nilpotent_bracket(rng, 5)
    io.write_bracket(tmp_path / "b.txt", mu)
    assert np.array_equal(io.read_bracket(tmp_path / "b.txt").matrix, mu.matrix)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-300, 1e300))
def test_matrix_round_trip_is_exact(n, seed, scale):
    A = complex_gaussian(np.random.default_rng(seed), (n, n)) * scale
    assert np.array_equal(io.parse_matrix(io.format_matrix(A)), A)


def test_trace_csv_round_trip(tmp_path):
    tr = integrate_bracket_flow(filiform4(), FlowConfig(t_end=1.0, stop_on_fixed_point=False))
    io.write_trace_csv(tmp_path / "t.csv", tr)
    cols = io.read_trace_csv(tmp_path / "t.csv")
    assert list(cols)[:8] == ["t", "norm_sq", "field_norm", "lambda_hat", "soliton_residual",
                              "phi", "centre_dim", "jacobi_residual"]
    assert np.array_equal(cols["norm_sq"], tr["norm_sq"])
    assert np.all(np.isnan(cols["phi"]))
    assert np.all(cols["centre_dim"] == 1)
    header, first = (tmp_path / "t.csv").read_text().splitlines()[:2]
    assert first.split(",")[6] == "1"


def test_report_round_trip():
    A = np.array([[0, 1j], [0.5, 0]])
    rec = {"exists": True, "lambda": -1.0, "type": "expanding", "representative": A,
           "missing": None}
    text = io.format_report(rec)
    back = io.parse_report(text)
    assert back["exists"] == "true" and back["type"] == "expanding"
    assert float(back["lambda"]) == -1.0 and back["missing"] == "none"
    assert np.array_equal(io.parse_inline_matrix(back["representative"]), A)
    assert all("=" in line for line in text.splitlines())
