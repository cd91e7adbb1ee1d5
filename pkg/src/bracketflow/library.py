"""Named example brackets and matrices."""

from __future__ import annotations

import re

import numpy as np

from .brackets import Bracket, make_almost_abelian


def heisenberg3(c: complex = 1.0) -> Bracket:
    return Bracket.from_constants(3, {(1, 2, 3): c})


def filiform4() -> Bracket:
    return Bracket.from_constants(4, {(1, 2, 3): 1.0, (1, 3, 4): 1.0})


def abelian(n: int) -> Bracket:
    return Bracket.zero(n)


def e12(n: int = 2) -> np.ndarray:
    A = np.zeros((n, n), dtype=complex)
    A[0, 1] = 1.0
    return A


JORDAN2 = np.array([[1, 1], [0, 1]], dtype=complex)
DIAG12 = np.diag([1.0, 2.0]).astype(complex)


def parse_jordan_type(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in re.split(r"[,\s]+", text.strip()) if x)
    except ValueError:
        raise ValueError(f"malformed Jordan type {text!r}") from None
    if not dims:
        raise ValueError("empty Jordan type")
    return dims


def example_matrix(name: str) -> np.ndarray:
    """Matrices with names 'e12', 'jordan2', 'diag12', 'rot2' or 'canonical:<jt>'."""
    from .almost_abelian import nilpotent_soliton_canonical

    if name == "e12":
        return e12()
    if name == "jordan2":
        return JORDAN2.copy()
    if name == "diag12":
        return DIAG12.copy()
    if name == "rot2":
        return np.array([[0, 1], [-1, 0]], dtype=complex)
    if name.startswith("canonical:"):
        return nilpotent_soliton_canonical(parse_jordan_type(name.split(":", 1)[1])).A.copy()
    raise KeyError(name)


def example_bracket(name: str) -> Bracket:
    """Resolve a library name.

    Brackets: ``abelian<n>``, ``heisenberg3``, ``filiform4``; almost-abelian
    brackets ``aa-diag``, ``aa-jordan``, ``aa-e12``, ``aa-rot`` and
    ``aa-canonical:<d0,d1,...>``.
    """
    m = re.fullmatch(r"abelian(\d+)", name)
    if m:
        return abelian(int(m.group(1)))
    if name == "heisenberg3":
        return heisenberg3()
    if name == "filiform4":
        return filiform4()
    aa = {"aa-diag": "diag12", "aa-jordan": "jordan2", "aa-e12": "e12", "aa-rot": "rot2"}
    if name in aa:
        return make_almost_abelian(example_matrix(aa[name]))
    if name.startswith("aa-canonical:"):
        return make_almost_abelian(example_matrix("canonical:" + name.split(":", 1)[1]))
    raise KeyError(f"unknown example {name!r}")


EXAMPLE_NAMES = ["abelian3", "heisenberg3", "filiform4", "aa-diag", "aa-jordan",
                 "aa-e12", "aa-rot", "aa-canonical:1,1,1"]
