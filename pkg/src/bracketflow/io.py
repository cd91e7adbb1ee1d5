"""Text formats: brackets, matrices, trace CSV and key=value reports.

Bracket file::

    dim 3
    1 2 3 1 0          # i j k re im : mu(Z_i, Z_j) has Z_k-coefficient re + i im

Matrix file::

    dim 2
    0,0 1,0            # n rows of n re,im pairs
    0,0 0,0

Blank lines and ``#`` comments are ignored.  Floats are written with 17
significant digits, so write/read round-trips bit-exactly.
"""

from __future__ import annotations

import csv
import io as _io
import math
from pathlib import Path

import numpy as np

from .brackets import Bracket
from .flows import TRACE_COLUMNS, FlowTrace
from .hermitian import pair_list


class FormatError(ValueError):
    """Malformed input text; ``line`` is 1-based (0 when not line-specific)."""

    def __init__(self, message: str, line: int = 0, source: str = "<text>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line else f"{source}: "
        super().__init__(where + message)


def fmt(x: float) -> str:
    return f"{x:.17g}"


def _content_lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _parse_float(tok: str, no: int, source: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise FormatError(f"not a number: {tok!r}", no, source) from None


def _parse_header(lines, source: str) -> int:
    try:
        no, line = next(lines)
    except StopIteration:
        raise FormatError("empty input, expected 'dim n'", 0, source) from None
    parts = line.split()
    if len(parts) != 2 or parts[0] != "dim":
        raise FormatError(f"expected 'dim n', got {line!r}", no, source)
    try:
        n = int(parts[1])
    except ValueError:
        raise FormatError(f"bad dimension {parts[1]!r}", no, source) from None
    if n < 1:
        raise FormatError(f"dimension must be positive, got {n}", no, source)
    return n


# ---------------------------------------------------------------- brackets

def parse_bracket(text: str, source: str = "<text>") -> Bracket:
    lines = _content_lines(text)
    n = _parse_header(lines, source)
    consts = {}
    for no, line in lines:
        parts = line.split()
        if len(parts) != 5:
            raise FormatError(f"expected 'i j k re im', got {len(parts)} fields", no, source)
        try:
            i, j, k = (int(p) for p in parts[:3])
        except ValueError:
            raise FormatError(f"bad index in {line!r}", no, source) from None
        if not (1 <= i < j <= n):
            raise FormatError(f"need 1 <= i < j <= {n}, got i={i} j={j}", no, source)
        if not 1 <= k <= n:
            raise FormatError(f"need 1 <= k <= {n}, got k={k}", no, source)
        if (i, j, k) in consts:
            raise FormatError(f"duplicate constant ({i}, {j}, {k})", no, source)
        c = complex(_parse_float(parts[3], no, source), _parse_float(parts[4], no, source))
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise FormatError("non-finite constant", no, source)
        consts[(i, j, k)] = c
    return Bracket.from_constants(n, consts)


def format_bracket(mu: Bracket) -> str:
    out = [f"dim {mu.dim}"]
    pairs = pair_list(mu.dim)
    for p, (i, j) in enumerate(pairs):
        for k in range(mu.dim):
            c = mu.matrix[k, p]
            if c != 0:
                out.append(f"{i + 1} {j + 1} {k + 1} {fmt(c.real)} {fmt(c.imag)}")
    return "\n".join(out) + "\n"


def read_bracket(path) -> Bracket:
    return parse_bracket(Path(path).read_text(), str(path))


def write_bracket(path, mu: Bracket):
    Path(path).write_text(format_bracket(mu))


# ---------------------------------------------------------------- matrices

def _parse_entry(tok: str, no: int, source: str) -> complex:
    parts = tok.split(",")
    if len(parts) != 2:
        raise FormatError(f"expected 're,im', got {tok!r}", no, source)
    return complex(_parse_float(parts[0], no, source), _parse_float(parts[1], no, source))


def parse_matrix(text: str, source: str = "<text>") -> np.ndarray:
    lines = _content_lines(text)
    n = _parse_header(lines, source)
    rows = []
    last = 0
    for no, line in lines:
        last = no
        if len(rows) == n:
            raise FormatError(f"more than {n} rows", no, source)
        toks = line.split()
        if len(toks) != n:
            raise FormatError(f"expected {n} entries, got {len(toks)}", no, source)
        rows.append([_parse_entry(t, no, source) for t in toks])
    if len(rows) != n:
        raise FormatError(f"expected {n} rows, got {len(rows)}", last, source)
    A = np.array(rows, dtype=complex)
    if not np.all(np.isfinite(A)):
        raise FormatError("non-finite entry", 0, source)
    return A


def format_matrix_rows(A: np.ndarray) -> list:
    return [" ".join(f"{fmt(z.real)},{fmt(z.imag)}" for z in row) for row in np.asarray(A)]


def format_matrix(A: np.ndarray) -> str:
    A = np.asarray(A, dtype=complex)
    return "\n".join([f"dim {A.shape[0]}"] + format_matrix_rows(A)) + "\n"


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text(), str(path))


def write_matrix(path, A: np.ndarray):
    Path(path).write_text(format_matrix(A))


# ---------------------------------------------------------------- traces

def _cell(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "" if math.isnan(x) else fmt(x)


def trace_csv(trace: FlowTrace, extra_columns=()) -> str:
    """CSV text with the standard columns followed by ``extra_columns``.

    phi is left empty where it does not apply.
    """
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = list(TRACE_COLUMNS) + list(extra_columns)
    w.writerow(cols)
    data = [trace[c] for c in cols]
    for i in range(len(trace)):
        w.writerow([_cell(col[i]) if name != "centre_dim" else str(int(col[i]))
                    for name, col in zip(cols, data)])
    return buf.getvalue()


def write_trace_csv(path, trace: FlowTrace, extra_columns=()):
    Path(path).write_text(trace_csv(trace, extra_columns))


def read_trace_csv(path) -> dict:
    """Columns of a trace CSV as float arrays (empty cells become NaN)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {name: np.array([float(r[c]) if r[c] != "" else np.nan for r in body])
            for c, name in enumerate(header)}


# ---------------------------------------------------------------- reports

def _value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt(float(v))
    if isinstance(v, np.ndarray) and v.ndim == 2:
        return " | ".join([f"dim {v.shape[0]}"] + format_matrix_rows(v))
    if v is None:
        return "none"
    return str(v).replace("\n", " ")


def format_report(record: dict) -> str:
    """Flat ``key=value`` lines; matrices go inline as 'dim n | row | row ...'."""
    return "".join(f"{k}={_value(v)}\n" for k, v in record.items())


def parse_report(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def parse_inline_matrix(value: str) -> np.ndarray:
    return parse_matrix("\n".join(p.strip() for p in value.split("|")))


def write_report(path, record: dict):
    Path(path).write_text(format_report(record))
