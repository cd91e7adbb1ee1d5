import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bracketflow.brackets import (
    Bracket,
    act_gl,
    almost_abelian_matrix,
    centre,
    centre_split,
    derivation_space,
    is_lie,
    is_nilpotent,
    jacobi_residual,
    lower_central_series,
    make_almost_abelian,
    nilpotency_degree,
    pi_action,
)
from bracketflow.hermitian import adjoint, norm, random_unitary, subspace_angle, wedge_vectors
from bracketflow.library import abelian, e12, filiform4, heisenberg3
from bracketflow.sampling import complex_gaussian, random_nilpotent_bracket

E3 = np.eye(3)


def test_shape_validation():
    with pytest.raises(ValueError):
        Bracket(np.zeros((3, 4)))
    with pytest.raises(ValueError):
        Bracket.from_constants(3, {(1, 1, 2): 1.0})


def test_from_constants_antisymmetry():
    a = Bracket.from_constants(3, {(1, 2, 3): 1.0})
    b = Bracket.from_constants(3, {(2, 1, 3): -1.0})
    assert np.array_equal(a.matrix, b.matrix)
    assert np.allclose(a(E3[0], E3[1]), E3[2])
    assert np.allclose(a(E3[1], E3[0]), -E3[2])
    assert np.allclose(Bracket.from_tensor(a.tensor()).matrix, a.matrix)


def test_heisenberg_adjoint():
    mu = heisenberg3()
    assert np.allclose(mu.adjoint() @ E3[2], wedge_vectors(E3[0], E3[1]))
    assert np.allclose(mu.adjoint() @ E3[0], 0)
    assert np.allclose(mu.adjoint() @ E3[1], 0)


def test_jacobi_examples():
    assert jacobi_residual(abelian(3)) == 0
    assert jacobi_residual(heisenberg3()) == 0
    bad = Bracket.from_constants(3, {(1, 2, 2): 1.0, (2, 3, 1): 1.0})
    assert jacobi_residual(bad) > 0
    assert not is_lie(bad)


def test_act_gl_examples(rng):
    mu = random_nilpotent_bracket(rng, 4)
    assert np.allclose(act_gl(3.0 * np.eye(4), mu).matrix, mu.matrix / 3.0)
    k = random_unitary(4, rng)
    assert abs(act_gl(k, mu).norm() - mu.norm()) < 1e-12
    h = act_gl(np.diag([2.0, 1.0, 1.0]), heisenberg3())
    assert np.allclose(h.matrix, Bracket.from_constants(3, {(1, 2, 3): 0.5}).matrix)


def test_pi_action_examples(rng):
    mu = random_nilpotent_bracket(rng, 5)
    assert np.allclose(pi_action(np.eye(5), mu).matrix, -mu.matrix)
    assert np.all(pi_action(complex_gaussian(rng, (3, 3)), abelian(3)).matrix == 0)
    assert norm(pi_action(np.diag([1.0, 1.0, 2.0]), heisenberg3()).matrix) == 0


def test_pi_is_derivative_of_action(rng):
    mu = random_nilpotent_bracket(rng, 4)
    A = complex_gaussian(rng, (4, 4))
    s = 1e-6
    fd = (act_gl(np.eye(4) + s * A, mu).matrix - act_gl(np.eye(4) - s * A, mu).matrix) / (2 * s)
    assert norm(fd - pi_action(A, mu).matrix) < 1e-8 * (1 + norm(A) * mu.norm())


def test_centre_examples():
    assert centre(abelian(3)).shape[1] == 3
    assert subspace_angle(centre(heisenberg3()), E3[:, [2]]) < 1e-14
    assert subspace_angle(centre(filiform4()), np.eye(4)[:, [3]]) < 1e-14


def test_lower_central_series_examples():
    assert nilpotency_degree(abelian(3)) == 1
    assert nilpotency_degree(heisenberg3()) == 2
    assert nilpotency_degree(filiform4()) == 3
    mu = make_almost_abelian(np.diag([1.0, 2.0]))
    assert not is_nilpotent(mu)
    assert nilpotency_degree(mu) is None
    assert lower_central_series(mu)[-1] == 2


def test_centre_split_examples():
    s = centre_split(heisenberg3())
    assert np.allclose(s.mu0.matrix, heisenberg3().matrix) and s.mu1.norm_sq() == 0
    s = centre_split(filiform4())
    assert np.allclose(s.mu0.matrix, Bracket.from_constants(4, {(1, 3, 4): 1.0}).matrix)
    assert np.allclose(s.mu1.matrix, Bracket.from_constants(4, {(1, 2, 3): 1.0}).matrix)
    s = centre_split(abelian(3))
    assert s.mu0.norm_sq() == 0 and s.mu1.norm_sq() == 0


def test_derivation_space_dimensions():
    assert derivation_space(abelian(2)).dim == 4
    assert derivation_space(heisenberg3()).dim == 6
    assert derivation_space(make_almost_abelian(np.eye(2))).dim == 6


def test_derivation_basis_consists_of_derivations(rng):
    mu = random_nilpotent_bracket(rng, 4)
    for D in derivation_space(mu).basis:
        assert norm(pi_action(D, mu).matrix) < 1e-10


def test_almost_abelian_brackets():
    assert make_almost_abelian(np.zeros((2, 2))).norm_sq() == 0
    mu = make_almost_abelian(e12())
    # only mu(Z_0 ^ Z_2) = Z_1: a Heisenberg algebra with relabelled basis
    assert np.count_nonzero(mu.matrix) == 1
    assert nilpotency_degree(mu) == 2
    assert jacobi_residual(make_almost_abelian(np.diag([1.0, 2.0]))) == 0
    A = np.array([[1, 2j], [3, 4]])
    assert np.array_equal(almost_abelian_matrix(make_almost_abelian(A)), A)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(3, 6), seed=st.integers(0, 2**32 - 1))
def test_sampled_brackets_are_nilpotent_lie(n, seed):
    mu = random_nilpotent_bracket(np.random.default_rng(seed), n)
    assert jacobi_residual(mu) < 1e-12 * max(1.0, mu.norm_sq())
    assert is_nilpotent(mu)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(3, 5), seed=st.integers(0, 2**32 - 1))
def test_unitary_equivariance_of_centre(n, seed):
    rng = np.random.default_rng(seed)
    mu = random_nilpotent_bracket(rng, n)
    k = random_unitary(n, rng)
    assert subspace_angle(centre(act_gl(k, mu)), k @ centre(mu)) < 1e-9
    assert jacobi_residual(act_gl(k, mu)) < 1e-12 * max(1.0, mu.norm_sq())
