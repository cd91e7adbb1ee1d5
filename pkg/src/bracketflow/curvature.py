"""Curvature endomorphisms of a bracket and soliton residual fits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .brackets import Bracket, centre_split, derivation_space, pi_action_matrix
from .hermitian import DEFAULT_REL_TOL, adjoint, inner, norm

#: residual below this multiple of |mu|^2 declares a soliton
SOLITON_TOL = 1e-9


@dataclass(frozen=True)
class SolitonFit:
    kind: str                      # "static" | "algebraic" | "semi-algebraic"
    lam: float
    residual: float
    derivation: Optional[np.ndarray] = None
    lam_imag: float = 0.0          # diagnostic only (algebraic fit)

    def is_soliton(self, mu: Bracket, tol: float = SOLITON_TOL) -> bool:
        return self.residual < tol * max(mu.norm_sq(), 1e-300)


def p_endo(mu: Bracket) -> np.ndarray:
    """P_mu = mu mu*."""
    m = mu.matrix
    return m @ adjoint(m)


def q_endo(mu: Bracket) -> np.ndarray:
    """Q_mu with <Q v, w> = sum_i <mu(v ^ Z_i), mu(w ^ Z_i)>."""
    C = mu.tensor()
    return np.einsum("kbi,kai->ba", np.conj(C), C)


def theta_form(mu: Bracket) -> np.ndarray:
    """Matrix of the torsion-twisted Chern-Ricci form in the background unitary frame.

    With the background metric g, g(P_mu ., .) = Theta_mu(g), so the form's
    matrix Theta(Z_i, Zbar_j) equals P_mu evaluated entrywise.
    """
    return p_endo(mu)


def curvature_term(mu: Bracket) -> Bracket:
    """pi(P_mu) mu, the (negated) bracket-flow velocity."""
    m = mu.matrix
    return Bracket(pi_action_matrix(m @ adjoint(m), m))


def moment_identity_residual(mu: Bracket, E: np.ndarray) -> float:
    """|tr((P - Q) E) - <pi(E) mu, mu>|; zero for every mu and E."""
    E = np.asarray(E, dtype=complex)
    lhs = np.trace((p_endo(mu) - q_endo(mu)) @ E)
    rhs = inner(pi_action_matrix(E, mu.matrix), mu.matrix)
    return float(abs(lhs - rhs))


def git_soliton_identity_residual(mu: Bracket, D: np.ndarray) -> float:
    """|‖pi(D*) mu‖^2 + tr(Q_mu [D, D*])|, which vanishes on semi-algebraic soliton data."""
    D = np.asarray(D, dtype=complex)
    Ds = adjoint(D)
    first = norm(pi_action_matrix(Ds, mu.matrix)) ** 2
    second = np.trace(q_endo(mu) @ (D @ Ds - Ds @ D))
    return float(abs(first + second))


def static_fit(mu: Bracket) -> SolitonFit:
    """Best multiple of the identity approximating P_mu."""
    P = p_endo(mu)
    n = mu.dim
    lam = float(np.real(np.trace(P))) / n
    return SolitonFit("static", lam, norm(P - lam * np.eye(n)))


def algebraic_soliton_fit(mu: Bracket) -> SolitonFit:
    """Fit pi(P_mu) mu = -lam mu; the derivation returned is P_mu - lam id."""
    nsq = mu.norm_sq()
    if nsq == 0.0:
        raise ValueError("algebraic soliton fit needs a nonzero bracket")
    m = mu.matrix
    P = m @ adjoint(m)
    v = pi_action_matrix(P, m)
    q = -inner(v, m) / nsq
    lam = float(np.real(q))
    res = norm(v + lam * m)
    return SolitonFit("algebraic", lam, res, P - lam * np.eye(mu.dim), float(np.imag(q)))


def semialgebraic_soliton_fit(mu: Bracket, rel_tol: float = DEFAULT_REL_TOL) -> SolitonFit:
    """Least squares for P_mu = lam id + (D + D*)/2 with D in Der(mu).

    Unknowns are lam and the real and imaginary coordinates of D in an
    orthonormal basis of Der(mu); lstsq returns the minimum-norm solution,
    which discards anti-Hermitian derivation directions.
    """
    if mu.norm_sq() == 0.0:
        raise ValueError("semi-algebraic soliton fit needs a nonzero bracket")
    n = mu.dim
    P = p_endo(mu)
    basis = derivation_space(mu, rel_tol).basis

    def herm(X):
        return 0.5 * (X + adjoint(X))

    def realify(X):
        return np.concatenate([X.real.ravel(), X.imag.ravel()])

    cols = [realify(np.eye(n, dtype=complex))]
    for D in basis:
        cols.append(realify(herm(D)))
        cols.append(realify(herm(1j * D)))
    M = np.array(cols).T
    x, *_ = np.linalg.lstsq(M, realify(P), rcond=None)
    lam = float(x[0])
    D = np.zeros((n, n), dtype=complex)
    for idx, B in enumerate(basis):
        D += (x[1 + 2 * idx] + 1j * x[2 + 2 * idx]) * B
    res = norm(P - lam * np.eye(n) - herm(D))
    return SolitonFit("semi-algebraic", lam, res, D)


def soliton_block_residuals(mu: Bracket, lam: float, D: np.ndarray,
                            rel_tol: float = DEFAULT_REL_TOL) -> dict:
    """Residuals of the block relations of a semi-algebraic soliton in the centre split.

    Returns the defects of mu_i mu_i* = lam id + (D_ii + D_ii*)/2 (i = 0, 1),
    mu_0 mu_1* = D_01 / 2 and of D mapping the centre into itself.
    """
    split = centre_split(mu, rel_tol)
    Z, W = split.centre, split.complement
    m0, m1 = split.mu0.matrix, split.mu1.matrix
    Zs, Ws = adjoint(Z), adjoint(W)
    D00, D01, D10, D11 = Zs @ D @ Z, Zs @ D @ W, Ws @ D @ Z, Ws @ D @ W
    P00 = Zs @ m0 @ adjoint(m0) @ Z
    P11 = Ws @ m1 @ adjoint(m1) @ W
    P01 = Zs @ m0 @ adjoint(m1) @ W
    I0, I1 = np.eye(Z.shape[1]), np.eye(W.shape[1])
    return {
        "block00": norm(P00 - lam * I0 - 0.5 * (D00 + adjoint(D00))),
        "block11": norm(P11 - lam * I1 - 0.5 * (D11 + adjoint(D11))),
        "block01": norm(P01 - 0.5 * D01),
        "centre_invariance": norm(D10),
    }
