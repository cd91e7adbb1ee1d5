"""Random test inputs: nilpotent brackets, matrices and endomorphisms."""

from __future__ import annotations

import numpy as np

from .brackets import Bracket, act_gl, jacobi_residual, nilpotency_degree
from .hermitian import pair_list, random_unitary


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_nilpotent_bracket(
    rng: np.random.Generator,
    n: int,
    density: float = 0.6,
    min_step: int = 2,
    rotate: bool = True,
    jacobi_tol: float = 1e-12,
    max_tries: int = 10_000,
) -> Bracket:
    """Sample a nilpotent Lie bracket on C^n.

    Constants c_{ij}^k are complex Gaussian, kept with probability
    ``density`` and only when k > max(i, j); this triangular mask makes
    every sample nilpotent.  Samples failing Jacobi (relative residual
    above ``jacobi_tol``) or with nilpotency degree below ``min_step`` are
    rejected.  With ``rotate`` the result is conjugated by a Haar unitary so
    the basis is no longer adapted to the filtration.  The bracket is
    scaled to unit norm.
    """
    pairs = pair_list(n)
    for _ in range(max_tries):
        m = np.zeros((n, len(pairs)), dtype=complex)
        for p, (i, j) in enumerate(pairs):
            for k in range(max(i, j) + 1, n):
                if rng.random() < density:
                    m[k, p] = complex_gaussian(rng, ())
        mu = Bracket(m)
        nsq = mu.norm_sq()
        if nsq == 0.0:
            continue
        mu = mu * (1 / np.sqrt(nsq))
        if jacobi_residual(mu) > jacobi_tol:
            continue
        deg = nilpotency_degree(mu)
        if deg is None or deg < min_step:
            continue
        if rotate:
            mu = act_gl(random_unitary(n, rng), mu)
        return mu
    raise RuntimeError(f"no Jacobi-valid sample after {max_tries} tries (n={n})")


def random_matrix(rng: np.random.Generator, n: int, unit: bool = True) -> np.ndarray:
    A = complex_gaussian(rng, (n, n))
    return A / np.linalg.norm(A) if unit else A


def random_normal_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    u = random_unitary(n, rng)
    return u @ np.diag(complex_gaussian(rng, n)) @ u.conj().T


def random_heisenberg_extension(rng: np.random.Generator, n: int, rotate: bool = False) -> Bracket:
    """Nilpotent bracket whose centre-complement part is the 3-dim Heisenberg bracket.

    [Z1, Z2] = Z3 plus a random map Lambda^2 span(Z1, Z2, Z3) -> span(Z4, ..., Zn)
    with [Z1, Z3] or [Z2, Z3] nonzero, so the centre is span(Z4, ..., Zn) and
    mu1 is Heisenberg (a fixed point of the normalized flow after scaling).
    Needs n >= 4.
    """
    if n < 4:
        raise ValueError("heisenberg extension needs n >= 4")
    while True:
        consts = {(1, 2, 3): 1.0}
        for i, j in ((1, 2), (1, 3), (2, 3)):
            for k in range(4, n + 1):
                consts[(i, j, k)] = complex_gaussian(rng, ())
        mu = Bracket.from_constants(n, consts)
        if nilpotency_degree(mu) == 3:
            break
    if rotate:
        mu = act_gl(random_unitary(n, rng), mu)
    return mu
