"""Complex linear algebra on C^n, Lambda^2 C^n, endomorphisms and bracket tensors.

Everything lives in a fixed unitary basis Z_1..Z_n.  The Lambda^2 basis is
{Z_i ^ Z_j : i < j} in lexicographic order.  A bracket is stored as the
n x N matrix of the linear map Lambda^2 -> C^n, N = n(n-1)/2.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

DEFAULT_REL_TOL = 1e-10


@lru_cache(maxsize=None)
def pair_list(n: int) -> tuple[tuple[int, int], ...]:
    """Lexicographic list of index pairs (i, j), i < j (0-based)."""
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


@lru_cache(maxsize=None)
def _pair_tables(n: int):
    pairs = pair_list(n)
    N = len(pairs)
    index = -np.ones((n, n), dtype=int)
    sign = np.zeros((n, n))
    for p, (i, j) in enumerate(pairs):
        index[i, j] = index[j, i] = p
        sign[i, j], sign[j, i] = 1.0, -1.0
    # E[p, a, b]: coefficient of Z_p (pair) in Z_a ^ Z_b
    E = np.zeros((N, n, n))
    for p, (i, j) in enumerate(pairs):
        E[p, i, j] = 1.0
        E[p, j, i] = -1.0
    E.setflags(write=False)
    return index, sign, E


def wedge_dim(n: int) -> int:
    return n * (n - 1) // 2


def dim_from_wedge(N: int) -> int:
    n = int(round((1 + np.sqrt(1 + 8 * N)) / 2))
    if wedge_dim(n) != N:
        raise ValueError(f"{N} is not of the form n(n-1)/2")
    return n


def wedge_vectors(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Coordinates of v ^ w in the lexicographic Lambda^2 basis."""
    n = v.shape[0]
    _, _, E = _pair_tables(n)
    return np.einsum("pab,a,b->p", E, v, w)


def wedge_endo(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix of A ^ B on Lambda^2, where (A ^ B)(v ^ w) = Av ^ Bw + Bv ^ Aw."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    n = A.shape[0]
    _, _, E = _pair_tables(n)
    pairs = pair_list(n)
    if not pairs:
        return np.zeros((0, 0), dtype=np.result_type(A, B, float))
    ii = np.array([p[0] for p in pairs])
    jj = np.array([p[1] for p in pairs])
    # image of basis element (i, j): sum_ab (A_ai B_bj + B_ai A_bj) Z_a ^ Z_b
    T = (np.einsum("aq,bq->abq", A[:, ii], B[:, jj])
         + np.einsum("aq,bq->abq", B[:, ii], A[:, jj]))
    return np.einsum("pab,abq->pq", E, T)


def id_wedge(A: np.ndarray) -> np.ndarray:
    """id ^ A, the derivation extension of A to Lambda^2."""
    A = np.asarray(A)
    return wedge_endo(np.eye(A.shape[0], dtype=A.dtype), A)


@lru_cache(maxsize=None)
def id_wedge_units(n: int) -> np.ndarray:
    """Array W[a, b] = id ^ E_ab for the matrix units E_ab, shape (n, n, N, N)."""
    N = wedge_dim(n)
    W = np.zeros((n, n, N, N))
    for a in range(n):
        for b in range(n):
            E = np.zeros((n, n))
            E[a, b] = 1.0
            W[a, b] = id_wedge(E)
    W.setflags(write=False)
    return W


def adjoint(M: np.ndarray) -> np.ndarray:
    """Adjoint with respect to the unitary bases: the conjugate transpose."""
    return np.conj(np.swapaxes(np.asarray(M), -1, -2))


def inner(x: np.ndarray, y: np.ndarray) -> complex:
    """<x, y> = tr(x y*), linear in x and conjugate-linear in y."""
    return complex(np.vdot(np.asarray(y).ravel(), np.asarray(x).ravel()))


def norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(x).ravel()))


def kernel_basis(M: np.ndarray, rel_tol: float = DEFAULT_REL_TOL,
                 scale: float | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical kernel of M.

    A right singular vector belongs to the kernel when its singular value is
    below ``rel_tol * scale``; ``scale`` defaults to the largest singular value.
    The zero map returns the whole domain.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    M = np.atleast_2d(np.asarray(M))
    ncols = M.shape[1]
    if M.size == 0 or ncols == 0:
        return np.eye(ncols, dtype=complex)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    smax = s[0] if s.size else 0.0
    ref = smax if scale is None else scale
    if smax == 0.0 or (scale is not None and smax < rel_tol * ref):
        return np.eye(ncols, dtype=complex)
    cutoff = rel_tol * ref
    rank = int(np.sum(s >= cutoff))
    return adjoint(vh[rank:]).astype(complex)


def range_basis(M: np.ndarray, rel_tol: float = DEFAULT_REL_TOL,
                scale: float | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical column space of M."""
    M = np.atleast_2d(np.asarray(M))
    if M.size == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    ref = (s[0] if s.size else 0.0) if scale is None else scale
    if ref == 0.0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    rank = int(np.sum(s >= rel_tol * ref))
    return u[:, :rank].astype(complex)


def orth_complement(Q: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(Q) in C^n."""
    if Q.shape[1] == 0:
        return np.eye(n, dtype=complex)
    if Q.shape[1] >= n:
        return np.zeros((n, 0), dtype=complex)
    u, _, _ = np.linalg.svd(Q, full_matrices=True)
    return u[:, Q.shape[1]:]


def subspace_angle(Q1: np.ndarray, Q2: np.ndarray) -> float:
    """Largest principal angle between two subspaces given orthonormal columns."""
    if Q1.shape[1] != Q2.shape[1]:
        return float(np.pi / 2)
    if Q1.shape[1] == 0:
        return 0.0
    # sine form: arccos of the cosines loses half the digits near zero
    R = Q1 - Q2 @ (adjoint(Q2) @ Q1)
    s = np.linalg.norm(R, 2)
    return float(np.arcsin(min(s, 1.0)))


def is_unitary(k: np.ndarray, tol: float = 1e-10) -> bool:
    return norm(adjoint(k) @ k - np.eye(k.shape[0])) < tol


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
