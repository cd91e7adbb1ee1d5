"""Almost-abelian brackets: the matrix flow A' = A[A,A*], soliton classification
and the canonical form of nilpotent solitons.

An almost-abelian bracket on C Z_0 + C^n is determined by one matrix A
(mu_A(Z_0, Z_i) = A Z_i).  Under the bracket flow it stays almost abelian
and A follows the isospectral double-bracket flow.  A soliton exists iff A
is semisimple or nilpotent; nilpotent solitons have a unique canonical
form determined by the Jordan type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .brackets import make_almost_abelian
from .flows import FlowTrace, _Recorder, _scaled, bracket_diagnostics
from .hermitian import DEFAULT_REL_TOL, adjoint, kernel_basis, norm, orth_complement
from .integrate import FlowConfig, IntegrationAborted, integrate

ZERO_TOL = 1e-14          # absolute: ||A|| below this is the zero matrix
CLUSTER_TOL = 1e-4        # eigenvalues closer than this * ||A|| are grouped
CONDITIONING_TOL = 1e-8   # a group spread wider than this * ||A|| is ill-conditioned
SOLITON_CHECK_TOL = 1e-9


@dataclass
class AAMatrix:
    """The n x n matrix of an almost-abelian bracket on C^{n+1}."""

    A: np.ndarray

    def __post_init__(self):
        self.A = np.array(self.A, dtype=complex)
        if self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {self.A.shape}")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.A if dtype is None else self.A.astype(dtype)

    def bracket(self):
        return make_almost_abelian(self.A)


def _mat(A) -> np.ndarray:
    A = np.asarray(A.A if isinstance(A, AAMatrix) else A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


@dataclass(frozen=True)
class JordanType:
    """Kernel-filtration dimensions (d_0, ..., d_k) of a nilpotent matrix.

    d_i = dim ker A^{i+1} - dim ker A^i is the number of Jordan blocks of
    size > i; blocks of size exactly i number d_{i-1} - d_i.
    """

    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"Jordan type needs positive entries, got {dims}")
        if any(a < b for a, b in zip(dims, dims[1:])):
            raise ValueError(f"Jordan type must be weakly decreasing, got {dims}")

    @property
    def n(self) -> int:
        return sum(self.dims)

    @property
    def depth(self) -> int:
        """k, so that the matrix is (k+1)-step nilpotent."""
        return len(self.dims) - 1

    def block_sizes(self) -> list:
        d = list(self.dims) + [0]
        sizes = []
        for i in range(len(self.dims), 0, -1):
            sizes += [i] * (d[i - 1] - d[i])
        return sizes

    @classmethod
    def from_block_sizes(cls, sizes) -> "JordanType":
        sizes = [int(s) for s in sizes if s > 0]
        if not sizes:
            raise ValueError("no Jordan blocks")
        return cls(tuple(sum(1 for s in sizes if s > i) for i in range(max(sizes))))

    def __str__(self):
        return ",".join(str(d) for d in self.dims)


def _as_jordan_type(jt) -> JordanType:
    return jt if isinstance(jt, JordanType) else JordanType(tuple(jt))


# ---------------------------------------------------------------- matrix flow

def matrix_field(A: np.ndarray) -> np.ndarray:
    """A[A, A*]."""
    As = adjoint(A)
    return A @ (A @ As - As @ A)


def normality_defect(A) -> float:
    """Frobenius norm of [A, A*]; zero iff A is normal."""
    A = _mat(A)
    As = adjoint(A)
    return norm(A @ As - As @ A)


def trace_powers(A: np.ndarray) -> np.ndarray:
    """tr(A^m) for m = 1..n."""
    out = np.empty(A.shape[0], dtype=complex)
    P = np.eye(A.shape[0], dtype=complex)
    for m in range(A.shape[0]):
        P = P @ A
        out[m] = np.trace(P)
    return out


def integrate_matrix_flow(A0, cfg: FlowConfig) -> FlowTrace:
    """Integrate A' = A[A, A*].

    The trace holds the matrices A_t as states; its columns are the
    standard bracket diagnostics of mu_{A_t} (norm_sq equals ||A||^2 and
    field_norm equals ||A[A,A*]||), plus ``normality_defect`` and
    ``trace_power_drift`` (max over m of |tr A_t^m - tr A_0^m| at that
    sample).
    """
    A0 = _mat(A0)
    tp0 = trace_powers(A0)

    def diagnose(t, A):
        row = bracket_diagnostics(make_almost_abelian(A).matrix, norm(matrix_field(A)),
                                  cfg.rank_tol)
        row["normality_defect"] = normality_defect(A)
        row["trace_power_drift"] = float(np.max(np.abs(trace_powers(A) - tp0), initial=0.0))
        return row

    rec = _Recorder("matrix", cfg, diagnose,
                    lambda A, r: _scaled(r["field_norm"], r["norm_sq"]))
    try:
        status = integrate(lambda t, A: matrix_field(A), A0, cfg, rec)
    except IntegrationAborted as exc:
        tr = rec.trace("aborted")
        tr.warnings.append(str(exc))
        exc.trace = tr
        raise
    return rec.trace("fixed-point" if status == "stopped" else "completed")


def trace_power_drift(trace: FlowTrace) -> float:
    """max over samples and m = 1..n of |tr(A_t^m) - tr(A_0^m)|."""
    if "trace_power_drift" in trace.extras:
        return float(np.max(trace.extras["trace_power_drift"]))
    tp0 = trace_powers(trace.states[0])
    return max(float(np.max(np.abs(trace_powers(A) - tp0), initial=0.0))
               for A in trace.states)


# ---------------------------------------------------------------- classification

@dataclass
class MatrixClass:
    """Verdict of classify_matrix.

    ``kind`` is one of 'zero', 'nilpotent', 'semisimple', 'neither'.
    ``warning`` is set when the eigenproblem was ill-conditioned (a group of
    nearly equal eigenvalues that do not coincide to working precision); the
    verdict is then the conservative 'neither'.
    """

    kind: str
    rel_tol: float
    eigenvalues: np.ndarray
    warning: bool = False
    message: str = ""

    def __str__(self):
        return self.kind


def _cluster(values: np.ndarray, gap: float) -> list:
    """Single-linkage groups of complex numbers closer than ``gap``."""
    n = len(values)
    parent = list(range(n))

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= gap:
                parent[root(i)] = root(j)
    groups = {}
    for i in range(n):
        groups.setdefault(root(i), []).append(i)
    return sorted(groups.values())


def classify_matrix(A, rel_tol: float = DEFAULT_REL_TOL) -> MatrixClass:
    """Decide zero / nilpotent / semisimple / neither with explicit tolerances.

    Nilpotent: ||A^n|| < rel_tol ||A||^n.  Semisimple: for each group of
    (numerically) equal eigenvalues lam, dim ker(A - lam) equals the group
    size, with kernel ranks decided relative to ||A||.  A group whose
    members spread more than 1e-8 ||A|| cannot be told apart from a
    perturbed Jordan block at this precision: it gets a warning and the
    verdict 'neither'.
    """
    A = _mat(A)
    n = A.shape[0]
    scale = float(np.linalg.norm(A, 2)) if n else 0.0
    if scale < ZERO_TOL:
        return MatrixClass("zero", rel_tol, np.zeros(n, dtype=complex))
    if norm(np.linalg.matrix_power(A / scale, n)) < rel_tol:
        return MatrixClass("nilpotent", rel_tol, np.zeros(n, dtype=complex))
    ev = np.linalg.eigvals(A)
    groups = _cluster(ev, CLUSTER_TOL * scale)
    eye = np.eye(n, dtype=complex)
    for g in groups:
        vals = ev[g]
        spread = float(np.max(np.abs(vals - vals.mean()))) if len(g) > 1 else 0.0
        lam = vals.mean()
        geo = kernel_basis(A - lam * eye, rel_tol, scale=scale).shape[1]
        if geo < len(g):
            return MatrixClass("neither", rel_tol, ev,
                               warning=spread > CONDITIONING_TOL * scale,
                               message=f"eigenvalue {lam:.6g}: geometric multiplicity {geo} "
                                       f"< algebraic {len(g)}")
        if spread > CONDITIONING_TOL * scale:
            return MatrixClass("neither", rel_tol, ev, warning=True,
                               message=f"eigenvalue cluster near {lam:.6g} with spread "
                                       f"{spread:.3g}: verdict withheld")
    return MatrixClass("semisimple", rel_tol, ev)


def jordan_type_of_nilpotent(A, rel_tol: float = DEFAULT_REL_TOL) -> JordanType:
    """Kernel-filtration dimensions d_i = dim ker A^{i+1} - dim ker A^i."""
    A = _mat(A)
    n = A.shape[0]
    verdict = classify_matrix(A, rel_tol)
    if verdict.kind == "zero":
        return JordanType((n,))
    if verdict.kind != "nilpotent":
        raise ValueError(f"Jordan type needs a nilpotent matrix (classified {verdict.kind})")
    scale = float(np.linalg.norm(A, 2))
    B = A / scale
    kdims = [0]
    P = np.eye(n, dtype=complex)
    while kdims[-1] < n:
        P = P @ B
        kdims.append(kernel_basis(P, rel_tol, scale=1.0).shape[1])
        if len(kdims) > n + 1:
            raise ValueError("kernel filtration did not exhaust the space")
    dims = [b - a for a, b in zip(kdims, kdims[1:])]
    return JordanType(tuple(dims))


# ---------------------------------------------------------------- canonical solitons

def canonical_sigma_squares(jt) -> list:
    """Squares of the diagonal entries of Sigma_1..Sigma_k, as integers.

    sigma_{ij}^2 = 1 + sigma_{(i+1)j}^2 while V_{i+1} has a j-th coordinate,
    and 1 otherwise; the squares are integers, so the recursion is exact.
    """
    d = list(_as_jordan_type(jt).dims)
    k = len(d) - 1
    sq = [None] * (k + 2)
    sq[k + 1] = []
    for i in range(k, 0, -1):
        nxt = sq[i + 1]
        sq[i] = [1 + nxt[j] if j < len(nxt) else 1 for j in range(d[i])]
    return sq[1:k + 1]


def canonical_sigmas(jt) -> list:
    """Diagonal entries of the blocks Sigma_1..Sigma_k.

    Along a chain of length m the entries are sqrt(m-1), ..., sqrt(2), 1.
    """
    return [[math.sqrt(v) for v in row] for row in canonical_sigma_squares(jt)]


def nilpotent_soliton_canonical(jt) -> AAMatrix:
    """Block-superdiagonal nilpotent soliton B[B,B*] = -B of the given Jordan type.

    The basis is ordered V_0, V_1, ..., V_k; the block Sigma_i (rows V_{i-1},
    columns V_i) carries its positive entries on the leading diagonal with
    the surplus rows of V_{i-1} left zero.
    """
    jt = _as_jordan_type(jt)
    d = jt.dims
    offs = np.concatenate([[0], np.cumsum(d)])
    B = np.zeros((jt.n, jt.n), dtype=complex)
    for i, s in enumerate(canonical_sigmas(jt), start=1):
        for j, v in enumerate(s):
            B[offs[i - 1] + j, offs[i] + j] = v
    return AAMatrix(B)


@dataclass
class NilpotentSolitonCheck:
    """Residuals of the nilpotent soliton equation B[B,B*] = -B.

    ``residual`` is ||B[B,B*] + B||.  The remaining fields come from the
    recovered orthogonal splitting V_0 = ker B, V_1, ..., V_k:
    ``relation_residual`` is the largest defect of
    E_i* E_i - E_{i+1} E_{i+1}* = id, ``cross_residual`` the largest
    ||B_1 B_2*|| over the recursive two-block splittings and
    ``block_residual`` the size of B outside the superdiagonal blocks.
    """

    residual: float
    relation_residual: float
    cross_residual: float
    block_residual: float
    dims: tuple

    def ok(self, tol: float = SOLITON_CHECK_TOL) -> bool:
        return max(self.residual, self.relation_residual, self.cross_residual,
                   self.block_residual) < tol


def verify_nilpotent_soliton(B, rel_tol: float = DEFAULT_REL_TOL) -> NilpotentSolitonCheck:
    B = _mat(B)
    n = B.shape[0]
    residual = norm(matrix_field(B) + B)
    scale = float(np.linalg.norm(B, 2)) if n else 0.0
    scale = scale or 1.0
    # recursive splitting W = ker C (+) rest, C the compression of B to W
    W = np.eye(n, dtype=complex)
    spaces, cross = [], 0.0
    while W.shape[1] > 0:
        C = adjoint(W) @ B @ W
        K = kernel_basis(C, rel_tol, scale=scale)
        if K.shape[1] == 0:
            break
        R = orth_complement(K, W.shape[1])
        cross = max(cross, norm((adjoint(K) @ C @ R) @ adjoint(adjoint(R) @ C @ R)))
        spaces.append(W @ K)
        W = W @ R
    if W.shape[1] > 0:
        return NilpotentSolitonCheck(residual, math.inf, cross, math.inf,
                                     tuple(Q.shape[1] for Q in spaces))
    E = [adjoint(spaces[i - 1]) @ B @ spaces[i] for i in range(1, len(spaces))]
    rel = 0.0
    for i, Ei in enumerate(E):
        lhs = adjoint(Ei) @ Ei
        if i + 1 < len(E):
            lhs = lhs - E[i + 1] @ adjoint(E[i + 1])
        rel = max(rel, norm(lhs - np.eye(lhs.shape[0])))
    block = B.copy()
    for i, Ei in enumerate(E, start=1):
        block = block - spaces[i - 1] @ Ei @ adjoint(spaces[i])
    return NilpotentSolitonCheck(residual, rel, cross, norm(block),
                                 tuple(Q.shape[1] for Q in spaces))


@dataclass
class SolitonReport:
    """Outcome of soliton_decision.

    ``lam`` is the soliton constant of the representative R in
    R[R,R*] = lam R: 0 for steady (semisimple) solitons and -1 for the
    canonical expanding (nilpotent) one; rescaling R by c multiplies it
    by c^2.  ``residual`` is ||R[R,R*] - lam R||.
    """

    matrix_class: str
    exists: bool
    soliton_type: str
    representative: Optional[AAMatrix]
    lam: float
    residual: float
    rel_tol: float
    warning: bool = False
    jordan_type: Optional[JordanType] = None
    notes: list = field(default_factory=list)


def soliton_decision(A, rel_tol: float = DEFAULT_REL_TOL) -> SolitonReport:
    """Classify A and build a soliton representative in its similarity class, if any."""
    A = _mat(A)
    n = A.shape[0]
    verdict = classify_matrix(A, rel_tol)
    notes = [verdict.message] if verdict.message else []
    if verdict.kind == "zero":
        R = np.zeros((n, n), dtype=complex)
        return SolitonReport("zero", True, "none", AAMatrix(R), 0.0, 0.0, rel_tol,
                             notes=notes + ["abelian: every metric is flat and static"])
    if verdict.kind == "semisimple":
        groups = _cluster(verdict.eigenvalues, CLUSTER_TOL * float(np.linalg.norm(A, 2)))
        ev = np.empty(n, dtype=complex)
        for g in groups:
            ev[g] = verdict.eigenvalues[g].mean()
        R = np.diag(ev)
        return SolitonReport("semisimple", True, "steady", AAMatrix(R), 0.0,
                             norm(matrix_field(R)), rel_tol, notes=notes)
    if verdict.kind == "nilpotent":
        jt = jordan_type_of_nilpotent(A, rel_tol)
        R = nilpotent_soliton_canonical(jt)
        chk = verify_nilpotent_soliton(R, rel_tol)
        return SolitonReport("nilpotent", True, "expanding", R, -1.0, chk.residual, rel_tol,
                             jordan_type=jt,
                             notes=notes + ["scale law: c*R solves with lambda = -c^2"])
    return SolitonReport("neither", False, "none", None, math.nan, math.nan, rel_tol,
                         warning=verdict.warning, notes=notes)


def canonical_compare(B1, B2, rel_tol: float = DEFAULT_REL_TOL,
                      tol: float = SOLITON_CHECK_TOL) -> bool:
    """True iff two nilpotent solitons are unitarily similar (same Jordan type)."""
    types = []
    for label, B in (("first", B1), ("second", B2)):
        chk = verify_nilpotent_soliton(B, rel_tol)
        if not chk.ok(tol):
            raise ValueError(f"{label} matrix is not a nilpotent soliton "
                             f"(residual {chk.residual:.3g})")
        types.append(jordan_type_of_nilpotent(B, rel_tol))
    return types[0] == types[1]
