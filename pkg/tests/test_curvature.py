import numpy as np
from hypothesis import given, settings, strategies as st

from bracketflow.brackets import Bracket, make_almost_abelian, pi_action
from bracketflow.curvature import (
    SOLITON_TOL,
    algebraic_soliton_fit,
    curvature_term,
    git_soliton_identity_residual,
    moment_identity_residual,
    p_endo,
    q_endo,
    semialgebraic_soliton_fit,
    soliton_block_residuals,
    static_fit,
    theta_form,
)
from bracketflow.hermitian import adjoint, norm
from bracketflow.library import abelian, filiform4, heisenberg3
from bracketflow.sampling import complex_gaussian, random_nilpotent_bracket, random_normal_matrix

MU_DIAG = make_almost_abelian(np.diag([1.0, 2.0]))
JORDAN = make_almost_abelian(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_p_endo_examples():
    assert np.all(p_endo(abelian(3)) == 0)
    assert np.allclose(p_endo(heisenberg3()), np.diag([0, 0, 1]))
    assert np.allclose(p_endo(MU_DIAG), np.diag([0, 1, 4]))


def test_q_endo_examples():
    assert np.all(q_endo(abelian(3)) == 0)
    assert np.allclose(q_endo(heisenberg3()), np.diag([1, 1, 0]))
    assert np.allclose(q_endo(MU_DIAG), np.diag([5, 1, 4]))


def test_p_and_q_are_hermitian_psd(rng):
    mu = random_nilpotent_bracket(rng, 5)
    for M in (p_endo(mu), q_endo(mu)):
        assert np.allclose(M, adjoint(M))
        assert np.min(np.linalg.eigvalsh(M)) > -1e-12


def test_theta_form():
    assert np.all(theta_form(abelian(3)) == 0)
    T = theta_form(heisenberg3())
    assert T[2, 2] == 1 and np.count_nonzero(T) == 1
    mu = filiform4()
    assert np.allclose(theta_form(mu * (2 - 1j)), 5 * theta_form(mu))


def test_curvature_term_is_pi_of_p():
    mu = filiform4()
    assert np.allclose(curvature_term(mu).matrix, pi_action(p_endo(mu), mu).matrix)


def test_moment_identity_examples(rng):
    assert moment_identity_residual(abelian(3), complex_gaussian(rng, (3, 3))) == 0
    assert moment_identity_residual(heisenberg3(), np.diag([1.0, 0, 0])) < 1e-15


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 2**32 - 1))
def test_moment_identity_on_arbitrary_tensors(n, seed):
    # the identity is algebraic: it holds for any tensor, Lie or not
    rng = np.random.default_rng(seed)
    mu = Bracket(complex_gaussian(rng, (n, n * (n - 1) // 2)))
    E = complex_gaussian(rng, (n, n))
    assert moment_identity_residual(mu, E) < 1e-12 * (1 + mu.norm_sq() * norm(E))


def test_git_identity_examples(rng):
    assert git_soliton_identity_residual(heisenberg3(), np.diag([1.0, 1.0, 2.0])) < 1e-15
    A = random_normal_matrix(rng, 3)
    # diag(0, id) is a Hermitian derivation of every mu_A
    D = np.diag([0.0, 1.0, 1.0, 1.0])
    assert norm(pi_action(D, make_almost_abelian(A)).matrix) < 1e-12
    assert git_soliton_identity_residual(make_almost_abelian(A), D) < 1e-12
    # non-soliton data: the value is recorded, not required to vanish
    assert np.isfinite(git_soliton_identity_residual(filiform4(), complex_gaussian(rng, (4, 4))))


def test_static_fit_examples():
    f = static_fit(abelian(3))
    assert f.lam == 0 and f.residual == 0
    f = static_fit(heisenberg3())
    assert abs(f.lam - 1 / 3) < 1e-15
    assert abs(f.residual - np.sqrt(6) / 3) < 1e-14
    assert static_fit(MU_DIAG).residual > 0
    assert static_fit(filiform4()).residual > 0


def test_algebraic_fit_examples(rng):
    f = algebraic_soliton_fit(heisenberg3())
    assert abs(f.lam + 1) < 1e-14 and f.residual < 1e-14
    A = random_normal_matrix(rng, 3)
    f = algebraic_soliton_fit(make_almost_abelian(A))
    assert abs(f.lam) < 1e-12 and f.residual < 1e-12
    assert algebraic_soliton_fit(filiform4()).residual > SOLITON_TOL


def test_semialgebraic_fit_examples():
    f = semialgebraic_soliton_fit(heisenberg3())
    assert f.residual < 1e-12 and abs(f.lam + 1) < 1e-12
    D = f.derivation
    assert np.allclose(0.5 * (D + adjoint(D)), np.diag([1, 1, 2]))
    assert norm(pi_action(D, heisenberg3()).matrix) < 1e-12
    assert semialgebraic_soliton_fit(JORDAN).residual > 1e-3


def test_block_residuals_of_filiform_soliton():
    # the soliton in the filiform4 orbit: coefficients 1 and sqrt(2), D = diag(1, 1, 2, 3)
    mu = Bracket.from_constants(4, {(1, 2, 3): 1.0, (1, 3, 4): np.sqrt(2.0)})
    fit = algebraic_soliton_fit(mu)
    assert fit.residual < 1e-12 and abs(fit.lam + 1) < 1e-12
    assert np.allclose(fit.derivation, np.diag([1, 1, 2, 3]))
    res = soliton_block_residuals(mu, fit.lam, fit.derivation)
    assert max(res.values()) < 1e-12


@settings(max_examples=20, deadline=None)
@given(n=st.integers(3, 5), seed=st.integers(0, 2**32 - 1), c=st.floats(0.1, 10.0))
def test_fit_scaling(n, seed, c):
    # lambda scales with c^2 and the residual with c^3
    mu = random_nilpotent_bracket(np.random.default_rng(seed), n)
    a, b = algebraic_soliton_fit(mu), algebraic_soliton_fit(mu * c)
    assert abs(b.lam - c * c * a.lam) < 1e-10 * (1 + abs(b.lam))
    assert abs(b.residual / c**3 - a.residual) < 1e-10 * (1 + a.residual)
