"""The thirteen acceptance criteria, each at its stated tolerance.

Every test records one summary line (printed by conftest at the end of the
run) and then asserts that all of its property results passed.
"""

import pytest

from bracketflow import suites

from conftest import CRITERIA


def _check(k, results):
    passed = all(r.passed for r in results)
    CRITERIA[k] = (passed, "; ".join(r.line() for r in results))
    failed = [r.line() for r in results if not r.passed]
    assert not failed, "\n".join(failed)


def test_criterion_01_heisenberg_closed_form():
    _check(1, suites.heisenberg_closed_form(t_end=100.0, tol=1e-6))


def test_criterion_02_matrix_flow_limit():
    _check(2, suites.matrix_limit(t_end=1e4, tol=1e-3))


def test_criterion_03_isospectrality():
    _check(3, suites.isospectrality(seed=0, count=50, t_end=100.0, tol=1e-8))


def test_criterion_04_norm_monotonicity():
    _check(4, suites.norm_monotonicity(seed=0, count=50, t_end=100.0, slack=1e-12))


def test_criterion_05_moment_map_identity():
    _check(5, suites.moment_map(seed=0, count=100, tol=1e-10))


def test_criterion_06_gauge_equivalence():
    _check(6, suites.gauge_equivalence(t_end=5.0, tol=1e-6, unit_tol=1e-8))


def test_criterion_07_centre_preservation():
    _check(7, suites.centre_preservation(seed=0, count=20, t_end=10.0, tol=1e-8))


def test_criterion_08_growth_envelope():
    _check(8, suites.envelope(seed=0, t_end=1e14, rel_tol=1e-12, slack=1e-10))


def test_criterion_09_phi_monotonicity():
    _check(9, suites.phi_monotonicity(seed=0, slack=1e-10, field_tol=1e-8))


def test_criterion_10_subconvergence():
    _check(10, suites.subconvergence(seed=1, eps=1e-8, tol=1e-6))


def test_criterion_11_canonical_solitons():
    _check(11, suites.canonical_solitons(n_max=8, tol=1e-12))


def test_criterion_12_classification():
    _check(12, suites.classification(tol=1e-12))


def test_criterion_13_uniqueness():
    _check(13, suites.uniqueness(seed=0, count=20, n_max=6))
