"""Built-in property suites: each check returns pass/fail results at stated tolerances.

Every suite is a function returning a list of PropertyResult.  Sampled
suites take an explicit seed, so a suite run is deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import almost_abelian as aa
from .brackets import Bracket, centre, centre_split, make_almost_abelian, pi_action_matrix
from .curvature import algebraic_soliton_fit, moment_identity_residual
from .flows import (
    detect_fixed_point,
    growth_envelope_check,
    integrate_bracket_flow,
    integrate_gauged_flow,
    integrate_normalized_flow,
    integrate_split_normalized_flow,
    phi_monotonicity_check,
    verify_gauge_equivalence,
)
from .hermitian import adjoint, norm, random_unitary
from .integrate import FlowConfig
from .library import e12, filiform4, heisenberg3
from .sampling import (
    complex_gaussian,
    random_heisenberg_extension,
    random_matrix,
    random_nilpotent_bracket,
    random_normal_matrix,
)


@dataclass
class PropertyResult:
    name: str
    passed: bool
    value: float
    tol: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{status} {self.name}: {self.value:.3e} (tol {self.tol:.0e}){extra}"


def _le(name, value, tol, detail="") -> PropertyResult:
    return PropertyResult(name, bool(np.isfinite(value) and value < tol), float(value), tol, detail)


def _nilpotent_sample(rng, count, sizes=(3, 4, 5)):
    return [random_nilpotent_bracket(rng, int(rng.choice(sizes))) for _ in range(count)]


# ---------------------------------------------------------------- bracket flows

def heisenberg_closed_form(t_end: float = 100.0, tol: float = 1e-6) -> list:
    """|mu(t)|^2 = 1 / (1 + 2t) for the unit Heisenberg bracket."""
    tr = integrate_bracket_flow(heisenberg3(), FlowConfig(t_end=t_end, record_stride=0.5,
                                                           stop_on_fixed_point=False))
    exact = 1.0 / (1.0 + 2.0 * tr.times)
    err = float(np.max(np.abs(tr["norm_sq"] - exact) / exact))
    return [_le("heisenberg norm_sq relative error", err, tol, f"t_end={t_end:g}")]


def moment_map(seed: int = 0, count: int = 100, tol: float = 1e-10) -> list:
    """tr((P - Q) E) = <pi(E) mu, mu> on random nilpotent brackets and random E."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for mu in _nilpotent_sample(rng, count):
        E = complex_gaussian(rng, (mu.dim, mu.dim))
        worst = max(worst, moment_identity_residual(mu, E))
    return [_le("moment identity residual", worst, tol, f"{count} samples, n<=5")]


def gauge_equivalence(mu: Bracket | None = None, t_end: float = 5.0,
                      tol: float = 1e-6, unit_tol: float = 1e-8) -> list:
    """nu_t = k_t . mu_t with k_t unitary along the whole run."""
    mu = filiform4() if mu is None else mu
    rep = verify_gauge_equivalence(mu, FlowConfig(t_end=t_end, record_stride=0.1,
                                                  stop_on_fixed_point=False))
    return [_le("gauge discrepancy |nu - k.mu|", rep.max_discrepancy, tol),
            _le("gauge unitarity |k*k - id|", rep.max_unitarity_defect, unit_tol)]


def centre_preservation(seed: int = 0, count: int = 20, t_end: float = 10.0,
                        tol: float = 1e-8) -> list:
    """Gauged flow keeps the centre: constant dimension, angle to the initial centre < tol."""
    rng = np.random.default_rng(seed)
    worst, dim_changes = 0.0, 0
    for mu in _nilpotent_sample(rng, count):
        tr = integrate_gauged_flow(mu, FlowConfig(t_end=t_end, record_stride=0.1,
                                                  stop_on_fixed_point=False))
        d0 = tr.extras["centre_basis"].shape[1]
        dim_changes += int(np.sum(tr["centre_dim"] != d0))
        worst = max(worst, float(np.max(tr["centre_angle"])))
    return [PropertyResult("centre dimension constant", dim_changes == 0, dim_changes, 1,
                           f"{count} samples"),
            _le("centre subspace angle", worst, tol, f"{count} samples")]


ENVELOPE_SIZES = (3, 4, 5, 5, 4, 5)


def envelope(seed: int = 0, t_end: float = 1e14, rel_tol: float = 1e-12,
             slack: float = 1e-10) -> list:
    """Growth envelope on heisenberg3, filiform4 and random nilpotent brackets.

    t |mu|^2 must not increase across the trailing half of the samples by
    more than ``slack``; the horizon has to be long enough for t |mu|^2 to
    have settled to that level (its tail increase decays like 1/t).
    """
    rng = np.random.default_rng(seed)
    sample = [heisenberg3(), filiform4()] + [random_nilpotent_bracket(rng, n)
                                             for n in ENVELOPE_SIZES]
    cfg = FlowConfig(t_end=t_end, record_stride=t_end / 1000, rel_tol=rel_tol,
                     stop_on_fixed_point=False)
    worst_tail, worst_ratio, ok_b, ok_l = -np.inf, np.inf, True, True
    for mu in sample:
        rep = growth_envelope_check(integrate_bracket_flow(mu, cfg), slack=slack)
        worst_tail = max(worst_tail, rep.tail_increase)
        worst_ratio = min(worst_ratio, rep.min_envelope_ratio)
        ok_b &= rep.bounded
        ok_l &= rep.lower_envelope
    return [PropertyResult("envelope: t|mu|^2 bounded (tail increase)", ok_b, worst_tail, slack,
                           f"{len(sample)} brackets, t_end={t_end:g}"),
            PropertyResult("envelope: lower bound ratio", ok_l, worst_ratio, 1.0,
                           "min |mu|^2 / envelope, must be >= 1")]


PHI_SIZES = (4, 5, 5, 6)


def phi_monotonicity(seed: int = 0, t_end: float = 60.0, record_stride: float = 1.0,
                     slack: float = 1e-10, field_tol: float = 1e-8) -> list:
    """phi along the split normalized system, eta1 started at a fixed point.

    Test set: brackets whose centre-complement part is Heisenberg, rotated
    by random unitaries.  The eta1 start is the fixed point detected by the
    normalized flow from mu1.
    """
    rng = np.random.default_rng(seed)
    worst_inc, worst_field, ok_m, ok_s, stat = -np.inf, 0.0, True, True, 0
    for n in PHI_SIZES:
        mu = random_heisenberg_extension(rng, n, rotate=True)
        fp = detect_fixed_point(integrate_normalized_flow(centre_split(mu).mu1,
                                                          FlowConfig(t_end=20.0)))
        if fp is None:
            return [PropertyResult("phi: eta1 fixed point found", False, np.nan, 0.0)]
        run = integrate_split_normalized_flow(
            mu, FlowConfig(t_end=t_end, record_stride=record_stride, stop_on_fixed_point=False),
            eta1_init=Bracket(fp[1]))
        rep = phi_monotonicity_check(run, slack=slack, field_tol=field_tol)
        worst_inc = max(worst_inc, rep.max_increase)
        worst_field = max(worst_field, rep.max_field_when_stationary)
        stat += rep.stationary_count
        ok_m &= rep.monotone
        ok_s &= rep.stationary_ok
    return [PropertyResult("phi nonincreasing (max step increase)", ok_m, worst_inc, slack),
            PropertyResult("phi stationary only where eta0 field small", ok_s, worst_field,
                           field_tol, f"{stat} stationary samples")]


SUBCONVERGENCE_SIZES = (3, 4, 5, 5, 5, 4, 5, 5, 3, 5)


def subconvergence(seed: int = 1, t_end: float = 2000.0, eps: float = 1e-8,
                   tol: float = 1e-6) -> list:
    """Normalized flow on filiform4 and random nilpotent brackets reaches a soliton.

    At the first sample with field norm < eps the algebraic soliton fit must
    have residual < tol, and its derivation D must satisfy |pi(D*) mu| < tol.
    """
    rng = np.random.default_rng(seed)
    sample = [filiform4()] + [random_nilpotent_bracket(rng, n) for n in SUBCONVERGENCE_SIZES]
    reached, worst_fit, worst_der = 0, 0.0, 0.0
    for mu in sample:
        tr = integrate_normalized_flow(mu, FlowConfig(t_end=t_end, record_stride=0.5))
        hits = np.nonzero(tr["field_norm"] < eps)[0]
        if len(hits) == 0:
            worst_fit = worst_der = np.inf
            continue
        reached += 1
        nu = tr.bracket(int(hits[0]))
        fit = algebraic_soliton_fit(nu)
        worst_fit = max(worst_fit, fit.residual)
        worst_der = max(worst_der, norm(pi_action_matrix(adjoint(fit.derivation), nu.matrix)))
    return [PropertyResult("normalized flow reaches field < eps", reached == len(sample),
                           reached, len(sample), f"{reached}/{len(sample)}"),
            _le("soliton fit residual at first small-field sample", worst_fit, tol),
            _le("|pi(D*) mu| of the fitted derivation", worst_der, tol)]


# ---------------------------------------------------------------- matrix flow

def matrix_limit(t_end: float = 1e4, tol: float = 1e-3) -> list:
    """[[1,1],[0,1]] flows to the identity (the only normal matrix with spectrum {1,1})."""
    tr = aa.integrate_matrix_flow(np.array([[1, 1], [0, 1]], dtype=complex),
                                  FlowConfig(t_end=t_end, record_stride=t_end / 100,
                                             stop_on_fixed_point=False))
    return [_le("jordan2 final |A - id|", norm(tr.final - np.eye(2)), tol, f"t={tr.t_final:g}")]


def _matrix_sample(seed, count):
    rng = np.random.default_rng(seed)
    return [random_matrix(rng, int(rng.integers(2, 7))) for _ in range(count)]


def isospectrality(seed: int = 0, count: int = 50, t_end: float = 100.0,
                   tol: float = 1e-8) -> list:
    cfg = FlowConfig(t_end=t_end, record_stride=0.5, stop_on_fixed_point=False)
    worst = max(aa.trace_power_drift(aa.integrate_matrix_flow(A, cfg))
                for A in _matrix_sample(seed, count))
    return [_le("trace-power drift", worst, tol, f"{count} random matrices, n<=6")]


def norm_monotonicity(seed: int = 0, count: int = 50, t_end: float = 100.0,
                      slack: float = 1e-12) -> list:
    cfg = FlowConfig(t_end=t_end, record_stride=0.5, stop_on_fixed_point=False)
    worst = -np.inf
    for A in _matrix_sample(seed, count):
        worst = max(worst, float(np.max(np.diff(aa.integrate_matrix_flow(A, cfg)["norm_sq"]))))
    # normal inputs at the same scale as the sample (|A0| = 1)
    rng = np.random.default_rng(seed + 1)
    normal_dev = 0.0
    for _ in range(10):
        A = random_normal_matrix(rng, int(rng.integers(2, 7)))
        A = A / norm(A)
        tr = aa.integrate_matrix_flow(A, cfg)
        normal_dev = max(normal_dev, max(norm(S - A) for S in tr.states))
    return [PropertyResult("|A|^2 nonincreasing (max step increase)", worst <= slack, worst, slack),
            _le("normal inputs stay constant", normal_dev, slack)]


def flow_consistency(seed: int = 0, count: int = 5, t_end: float = 5.0,
                     tol: float = 1e-8) -> list:
    """The bracket flow of mu_A is mu_{A_t} with A_t the matrix flow."""
    cfg = FlowConfig(t_end=t_end, record_stride=0.5, stop_on_fixed_point=False)
    worst = 0.0
    for A in _matrix_sample(seed, count):
        tm = aa.integrate_matrix_flow(A, cfg)
        tb = integrate_bracket_flow(make_almost_abelian(A), cfg)
        worst = max(worst, max(norm(make_almost_abelian(a).matrix - b)
                               for a, b in zip(tm.states, tb.states)))
    return [_le("bracket flow of mu_A vs matrix flow", worst, tol)]


# ---------------------------------------------------------------- solitons

def partitions(n: int):
    """All partitions of n as weakly decreasing tuples."""
    def rec(n, largest):
        if n == 0:
            yield ()
            return
        for k in range(min(n, largest), 0, -1):
            for rest in rec(n - k, k):
                yield (k,) + rest
    yield from rec(n, n)


def all_jordan_types(n_max: int):
    for n in range(1, n_max + 1):
        for p in partitions(n):
            yield aa.JordanType.from_block_sizes(p)


def canonical_solitons(n_max: int = 8, tol: float = 1e-12) -> list:
    worst, count = 0.0, 0
    for jt in all_jordan_types(n_max):
        worst = max(worst, aa.verify_nilpotent_soliton(aa.nilpotent_soliton_canonical(jt)).residual)
        count += 1
    exact_dev = 0.0
    for m in range(1, n_max + 1):
        sig = [s[0] for s in aa.canonical_sigmas((1,) * m)]
        expect = [np.sqrt(m - i) for i in range(1, m)]
        exact_dev = max([exact_dev] + [abs(a - b) for a, b in zip(sig, expect)])
    return [_le("canonical soliton residual |B[B,B*]+B|", worst, tol,
                f"{count} Jordan types, n<={n_max}"),
            PropertyResult("single-block sigmas sqrt(m-1),...,1", exact_dev == 0.0, exact_dev, 0.0,
                           "exact equality")]


def classification(tol: float = 1e-12) -> list:
    out = []
    rep = aa.soliton_decision(np.array([[1, 1], [0, 1]], dtype=complex))
    out.append(PropertyResult("jordan2: no soliton", not rep.exists, float(rep.exists), 0.0,
                              rep.matrix_class))
    rep = aa.soliton_decision(e12())
    ok = (rep.exists and rep.soliton_type == "expanding" and rep.lam == -1.0
          and np.array_equal(rep.representative.A, e12()) and rep.residual < tol)
    out.append(PropertyResult("E12: expanding, canonical E12", ok, rep.residual, tol))
    rng = np.random.default_rng(0)
    normals = [np.diag([1.0, 2.0]), np.array([[0, 1], [-1, 0]]), np.diag([1j, 3.0]),
               np.eye(3)] + [random_normal_matrix(rng, n) for n in (2, 3, 4, 5)]
    bad, worst, eig_dev = [], 0.0, 0.0
    for A in normals:
        rep = aa.soliton_decision(A)
        R = rep.representative.A if rep.representative is not None else None
        good = (rep.exists and rep.soliton_type == "steady" and R is not None
                and np.count_nonzero(R - np.diag(np.diag(R))) == 0)
        if good:
            ev_A = np.sort_complex(np.linalg.eigvals(np.asarray(A, dtype=complex)))
            worst = max(worst, rep.residual)
            eig_dev = max(eig_dev, float(np.max(np.abs(np.sort_complex(np.diag(R)) - ev_A))))
        else:
            bad.append(rep.matrix_class)
    out.append(PropertyResult("normal matrices: steady, diagonal representative",
                              not bad and worst < tol and eig_dev < 1e-10, worst, tol,
                              f"{len(normals)} matrices, eigenvalue deviation {eig_dev:.1e}"
                              + (f", failures {bad}" if bad else "")))
    return out


def uniqueness(seed: int = 0, count: int = 20, n_max: int = 6) -> list:
    rng = np.random.default_rng(seed)
    types = list(all_jordan_types(n_max))
    same_fail = 0
    for jt in types:
        B = aa.nilpotent_soliton_canonical(jt).A
        for _ in range(count):
            u = random_unitary(jt.n, rng)
            if not aa.canonical_compare(B, u @ B @ adjoint(u)):
                same_fail += 1
    cross_fail = 0
    for a, b in itertools.combinations(types, 2):
        if a.n == b.n and aa.canonical_compare(aa.nilpotent_soliton_canonical(a),
                                               aa.nilpotent_soliton_canonical(b)):
            cross_fail += 1
    return [PropertyResult("unitary conjugates compare equal", same_fail == 0, same_fail, 1,
                           f"{len(types)} types x {count} conjugates"),
            PropertyResult("distinct Jordan types compare unequal", cross_fail == 0,
                           cross_fail, 1)]


SUITES: dict[str, Callable[..., list]] = {
    "heisenberg": heisenberg_closed_form,
    "matrix-limit": matrix_limit,
    "isospectrality": isospectrality,
    "norm-monotonicity": norm_monotonicity,
    "moment-map": moment_map,
    "gauge-equivalence": gauge_equivalence,
    "centre": centre_preservation,
    "envelope": envelope,
    "phi": phi_monotonicity,
    "subconvergence": subconvergence,
    "canonical": canonical_solitons,
    "classification": classification,
    "uniqueness": uniqueness,
    "flow-consistency": flow_consistency,
}
