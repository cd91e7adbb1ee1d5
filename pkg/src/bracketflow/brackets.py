"""Complex Lie brackets: construction, group actions and structural invariants."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .hermitian import (
    DEFAULT_REL_TOL,
    _pair_tables,
    adjoint,
    id_wedge,
    id_wedge_units,
    inner,
    kernel_basis,
    norm,
    orth_complement,
    pair_list,
    range_basis,
    wedge_dim,
    dim_from_wedge,
)

log = logging.getLogger(__name__)

#: brackets whose Jacobi residual exceeds this multiple of |mu|^2 are not Lie
JACOBI_INGEST_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Bracket:
    """Structure constants of mu: Lambda^2 C^n -> C^n.

    ``matrix[k, p]`` is the Z_k component of mu(Z_i ^ Z_j) where p indexes
    the pair (i, j), i < j, lexicographically.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2:
            raise ValueError("bracket matrix must be 2-dimensional")
        n = m.shape[0]
        if m.shape[1] != wedge_dim(n):
            raise ValueError(f"bracket on C^{n} needs {wedge_dim(n)} columns, got {m.shape[1]}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def zero(cls, n: int) -> "Bracket":
        return cls(np.zeros((n, wedge_dim(n)), dtype=complex))

    @classmethod
    def from_constants(cls, n: int, constants: dict) -> "Bracket":
        """Build from {(i, j, k): c} meaning mu(Z_i ^ Z_j) has Z_k-coefficient c.

        Indices are 1-based as in the text format; (i, j) with i > j is
        accepted and stored with the sign flipped.
        """
        index, _, _ = _pair_tables(n)
        m = np.zeros((n, wedge_dim(n)), dtype=complex)
        for (i, j, k), c in constants.items():
            if not (1 <= i <= n and 1 <= j <= n and 1 <= k <= n) or i == j:
                raise ValueError(f"bad index triple {(i, j, k)} for dim {n}")
            sgn = 1.0 if i < j else -1.0
            m[k - 1, index[i - 1, j - 1]] += sgn * c
        return cls(m)

    @classmethod
    def from_tensor(cls, C: np.ndarray) -> "Bracket":
        """From the full antisymmetric tensor C[k, a, b] = mu(Z_a, Z_b)_k."""
        n = C.shape[0]
        pairs = pair_list(n)
        m = np.array([[C[k, i, j] for (i, j) in pairs] for k in range(n)], dtype=complex)
        return cls(m.reshape(n, wedge_dim(n)))

    def tensor(self) -> np.ndarray:
        """Full antisymmetric tensor C[k, a, b] = mu(Z_a, Z_b)_k."""
        _, _, E = _pair_tables(self.dim)
        return np.einsum("kp,pab->kab", self.matrix, E)

    def __call__(self, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        return np.einsum("kab,a,b->k", self.tensor(), v, w)

    def norm(self) -> float:
        return norm(self.matrix)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.matrix) ** 2))

    def adjoint(self) -> np.ndarray:
        """mu*: C^n -> Lambda^2 as an N x n matrix."""
        return adjoint(self.matrix)

    def ad(self, v: np.ndarray) -> np.ndarray:
        """Matrix of w -> mu(v, w)."""
        return np.einsum("kab,a->kb", self.tensor(), v)

    def __add__(self, other: "Bracket") -> "Bracket":
        return Bracket(self.matrix + other.matrix)

    def __sub__(self, other: "Bracket") -> "Bracket":
        return Bracket(self.matrix - other.matrix)

    def __mul__(self, c) -> "Bracket":
        return Bracket(self.matrix * c)

    __rmul__ = __mul__

    def __repr__(self):
        nz = np.argwhere(np.abs(self.matrix) > 0)
        pairs = pair_list(self.dim)
        terms = [f"[{pairs[p][0] + 1},{pairs[p][1] + 1}]->{self.matrix[k, p]:.4g}Z{k + 1}"
                 for k, p in nz[:6]]
        more = " ..." if len(nz) > 6 else ""
        return f"Bracket(dim={self.dim}, {', '.join(terms)}{more})"


@dataclass(frozen=True)
class CentreSplit:
    centre: np.ndarray           # n x p orthonormal columns spanning z
    complement: np.ndarray       # n x (n - p) orthonormal columns spanning z^perp
    mu0: Bracket                 # Pr_z mu
    mu1: Bracket                 # Pr_{z^perp} mu
    trivial_centre: bool = False

    @property
    def projector(self) -> np.ndarray:
        return self.centre @ adjoint(self.centre)


@dataclass(frozen=True)
class DerivationSpace:
    basis: list = field(default_factory=list)   # orthonormal n x n complex matrices

    @property
    def dim(self) -> int:
        return len(self.basis)


def _as_matrix(mu) -> np.ndarray:
    return mu.matrix if isinstance(mu, Bracket) else np.asarray(mu)


def jacobi_residual(mu: Bracket) -> float:
    """Norm of the cyclic sum mu(mu(x,y),z) + mu(mu(y,z),x) + mu(mu(z,x),y)."""
    C = mu.tensor()
    # mu(mu(Z_a, Z_b), Z_c)_k = sum_m C[m, a, b] C[k, m, c]
    T = np.einsum("mab,kmc->kabc", C, C)
    J = T + np.transpose(T, (0, 2, 3, 1)) + np.transpose(T, (0, 3, 1, 2))
    return float(np.linalg.norm(J.ravel()))


def is_lie(mu: Bracket, tol: float = JACOBI_INGEST_TOL) -> bool:
    return jacobi_residual(mu) <= tol * max(mu.norm_sq(), 1e-300) or mu.norm_sq() == 0.0


def act_gl(h: np.ndarray, mu: Bracket) -> Bracket:
    """Change of basis h . mu = h mu(h^-1 ., h^-1 .)."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (mu.dim, mu.dim):
        raise ValueError("dimension mismatch")
    cond = np.linalg.cond(h)
    if not np.isfinite(cond) or cond > 1e14:
        raise np.linalg.LinAlgError("singular change of basis")
    hinv = np.linalg.inv(h)
    C = mu.tensor()
    C2 = np.einsum("kl,lab,ai,bj->kij", h, C, hinv, hinv)
    return Bracket.from_tensor(C2)


def pi_action_matrix(A: np.ndarray, m: np.ndarray) -> np.ndarray:
    """pi(A) on raw bracket matrices: A m - m (id ^ A)."""
    return A @ m - m @ id_wedge(A)


def pi_action(A: np.ndarray, mu: Bracket) -> Bracket:
    """pi(A) mu = A mu(., .) - mu(A ., .) - mu(., A .)."""
    A = np.asarray(A, dtype=complex)
    return Bracket(pi_action_matrix(A, mu.matrix))


def _ad_stack(mu: Bracket) -> np.ndarray:
    """The linear map v -> mu(v ^ .) as an (n*n) x n matrix."""
    C = mu.tensor()
    n = mu.dim
    # column a: flattened matrix ad_{Z_a}[k, b] = C[k, a, b]
    return np.transpose(C, (0, 2, 1)).reshape(n * n, n)


def centre(mu: Bracket, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Orthonormal columns spanning the centre of mu."""
    n = mu.dim
    if mu.norm_sq() == 0.0:
        return np.eye(n, dtype=complex)
    return kernel_basis(_ad_stack(mu), rel_tol)


def lower_central_series(mu: Bracket, rel_tol: float = DEFAULT_REL_TOL, max_terms: int | None = None):
    """Dimensions of C^1 = mu(g, g), C^{j+1} = mu(g, C^j) until zero or stable."""
    n = mu.dim
    scale = mu.norm()
    if scale == 0.0:
        return [0]
    C = mu.tensor()
    dims = []
    Q = range_basis(mu.matrix, rel_tol)
    dims.append(Q.shape[1])
    max_terms = max_terms or n + 1
    while Q.shape[1] > 0 and len(dims) <= max_terms:
        # span of mu(Z_a, q) for all a and q in current basis
        imgs = np.einsum("kab,bq->kaq", C, Q).reshape(n, -1)
        Qn = range_basis(imgs, rel_tol, scale=scale)
        dims.append(Qn.shape[1])
        if Qn.shape[1] == Q.shape[1]:
            break
        Q = Qn
    return dims


def nilpotency_degree(mu: Bracket, rel_tol: float = DEFAULT_REL_TOL) -> int | None:
    """Smallest k with C^k(mu) = 0, or None when mu is not nilpotent."""
    dims = lower_central_series(mu, rel_tol)
    if dims[-1] != 0:
        return None
    return len(dims)


def is_nilpotent(mu: Bracket, rel_tol: float = DEFAULT_REL_TOL) -> bool:
    return nilpotency_degree(mu, rel_tol) is not None


def centre_split(mu: Bracket, rel_tol: float = DEFAULT_REL_TOL, z: np.ndarray | None = None) -> CentreSplit:
    """Orthogonal splitting mu = mu0 + mu1 along the centre and its complement.

    ``z`` may supply a fixed centre basis (used by the gauged flows, whose
    centre is constant in time).
    """
    n = mu.dim
    Z = centre(mu, rel_tol) if z is None else z
    trivial = Z.shape[1] == 0
    if trivial:
        log.warning("bracket has trivial centre; centre split is degenerate")
    Pz = Z @ adjoint(Z)
    m0 = Pz @ mu.matrix
    m1 = mu.matrix - m0
    return CentreSplit(Z, orth_complement(Z, n), Bracket(m0), Bracket(m1), trivial)


def derivation_operator(mu) -> np.ndarray:
    """Matrix of B -> pi(B) mu from C^{n*n} (row-major vec) to C^{n*N}."""
    m = _as_matrix(mu)
    n, N = m.shape
    # pi(E_ab) m = E_ab m - m (id ^ E_ab)
    L = np.einsum("ka,bp->kpab", np.eye(n), m) - np.einsum("kq,abqp->kpab", m, id_wedge_units(n))
    return L.reshape(n * N, n * n)


def derivation_space(mu: Bracket, rel_tol: float = DEFAULT_REL_TOL) -> DerivationSpace:
    """Orthonormal basis (Frobenius product) of Der(mu) inside gl_n(C)."""
    n = mu.dim
    if mu.norm_sq() == 0.0 or n < 2:
        K = np.eye(n * n, dtype=complex)
    else:
        K = kernel_basis(derivation_operator(mu), rel_tol)
    return DerivationSpace([K[:, c].reshape(n, n) for c in range(K.shape[1])])


def make_almost_abelian(A: np.ndarray) -> Bracket:
    """Bracket on C Z_0 + C^n with mu(Z_0 ^ Z_i) = A Z_i and an abelian ideal."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    m = np.zeros((n + 1, wedge_dim(n + 1)), dtype=complex)
    # pairs (0, i) for i = 1..n are the first n columns
    m[1:, :n] = A
    return Bracket(m)


def almost_abelian_matrix(mu: Bracket) -> np.ndarray:
    """Recover A from mu_A (inverse of make_almost_abelian, ignoring other entries)."""
    n = mu.dim - 1
    return np.array(mu.matrix[1:, :n])


def unit_bracket(mu: Bracket) -> Bracket:
    nrm = mu.norm()
    if nrm == 0.0:
        raise ValueError("zero bracket has no direction")
    return mu * (1.0 / nrm)


def bracket_inner(mu: Bracket, nu: Bracket) -> complex:
    return inner(mu.matrix, nu.matrix)


__all__ = [
    "Bracket", "CentreSplit", "DerivationSpace", "JACOBI_INGEST_TOL",
    "jacobi_residual", "is_lie", "act_gl", "pi_action", "pi_action_matrix",
    "centre", "lower_central_series", "nilpotency_degree", "is_nilpotent",
    "centre_split", "derivation_space", "derivation_operator",
    "make_almost_abelian", "almost_abelian_matrix", "unit_bracket",
    "bracket_inner", "dim_from_wedge",
]
