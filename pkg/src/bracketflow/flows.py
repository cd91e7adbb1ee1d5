"""Bracket flow, gauged and normalized variants, and their monitors."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .brackets import (
    Bracket,
    JACOBI_INGEST_TOL,
    _ad_stack,
    act_gl,
    centre,
    centre_split,
    derivation_operator,
    is_lie,
    is_nilpotent,
    jacobi_residual,
    pi_action_matrix,
)
from .hermitian import adjoint, id_wedge, inner, norm, subspace_angle, wedge_endo
from .integrate import FlowConfig, IntegrationAborted, integrate

log = logging.getLogger(__name__)

TRACE_COLUMNS = ("t", "norm_sq", "field_norm", "lambda_hat", "soliton_residual",
                 "phi", "centre_dim", "jacobi_residual")


@dataclass
class FlowTrace:
    """Sampled trajectory with per-sample diagnostics.

    ``detect_field`` is the quantity fixed-point detection looks at: the
    vector-field norm divided by |state|^3 for the scale-covariant
    (unnormalized) flows, and the plain field norm for normalized ones.
    """

    kind: str
    times: np.ndarray
    states: list
    columns: dict
    detect_field: np.ndarray
    extras: dict = field(default_factory=dict)
    status: str = "completed"
    warnings: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    def __getitem__(self, name: str) -> np.ndarray:
        if name == "t":
            return self.times
        if name in self.columns:
            return self.columns[name]
        return self.extras[name]

    @property
    def final(self):
        return self.states[-1]

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    def bracket(self, i: int = -1) -> Bracket:
        return Bracket(self.states[i])


class _Recorder:
    def __init__(self, kind, cfg: FlowConfig, diagnose: Callable, detect: Callable,
                 stop: bool = True):
        self.kind = kind
        self.cfg = cfg
        self.diagnose = diagnose
        self.detect = detect
        self.stop = stop and cfg.stop_on_fixed_point
        self.times, self.states, self.rows, self.detect_vals = [], [], [], []
        self.warnings = []
        self._since = None

    def __call__(self, t, y):
        self.times.append(t)
        self.states.append(np.array(y))
        row = self.diagnose(t, y)
        for w in row.pop("_warnings", []):
            if w not in self.warnings:
                self.warnings.append(w)
        self.rows.append(row)
        d = self.detect(y, row)
        self.detect_vals.append(d)
        if d < self.cfg.eps_fix:
            if self._since is None:
                self._since = t
            if self.stop and t - self._since >= self.cfg.dwell * (1 - 1e-12):
                return True
        else:
            self._since = None
        return False

    def trace(self, status) -> FlowTrace:
        keys = self.rows[0].keys() if self.rows else []
        cols = {k: np.array([r[k] for r in self.rows]) for k in keys}
        main = {k: cols.pop(k) for k in TRACE_COLUMNS[1:] if k in cols}
        return FlowTrace(self.kind, np.array(self.times), self.states, main,
                         np.array(self.detect_vals), cols, status, self.warnings)


# ---------------------------------------------------------------- vector fields

def bracket_field(m: np.ndarray) -> np.ndarray:
    """-pi(P_mu) mu on a raw bracket matrix."""
    return -pi_action_matrix(m @ adjoint(m), m)


def centre_projector(m: np.ndarray, d: int) -> np.ndarray:
    """Orthogonal projector onto the d-dimensional (numerical) centre of mu.

    Spanned by the d smallest right singular vectors of v -> mu(v ^ .); with
    d fixed there is no rank decision, so this is smooth along a flow that
    preserves the centre dimension.
    """
    n = m.shape[0]
    if d == 0:
        return np.zeros((n, n), dtype=complex)
    _, _, Vh = np.linalg.svd(_ad_stack(Bracket(m)))
    V = adjoint(Vh[n - d:])
    return V @ adjoint(V)


def gauge_map(m: np.ndarray, Pz: np.ndarray) -> np.ndarray:
    """S_nu = nu1 nu0* - nu0 nu1* for the split along the projector Pz."""
    m0 = Pz @ m
    m1 = m - m0
    return m1 @ adjoint(m0) - m0 @ adjoint(m1)


def gauged_field(m: np.ndarray, Pz: np.ndarray) -> np.ndarray:
    """-pi(P_nu - S_nu) nu."""
    return -pi_action_matrix(m @ adjoint(m) - gauge_map(m, Pz), m)


def split_field(m0: np.ndarray, m1: np.ndarray):
    """Right-hand side of the centre-split system for (nu0, nu1)."""
    N = m0.shape[1]
    W = id_wedge(m1 @ adjoint(m1))
    d0 = m0 @ (W - 2 * adjoint(m1) @ m1 - adjoint(m0) @ m0)
    d1 = -pi_action_matrix(m1 @ adjoint(m1), m1)
    return d0, d1


def normalizing_alpha(m: np.ndarray) -> float:
    """alpha = -<pi(P) mu, mu> / |mu|^2 (the unit-norm formula, scale-corrected)."""
    nsq = float(np.vdot(m, m).real)
    if nsq == 0.0:
        return 0.0
    v = pi_action_matrix(m @ adjoint(m), m)
    return -float(np.real(inner(v, m))) / nsq


def normalized_field(m: np.ndarray) -> np.ndarray:
    """-pi(P - alpha id) mu = -(pi(P) mu + alpha mu)."""
    v = pi_action_matrix(m @ adjoint(m), m)
    nsq = float(np.vdot(m, m).real)
    if nsq == 0.0:
        return np.zeros_like(m)
    alpha = -float(np.real(inner(v, m))) / nsq
    return -(v + alpha * m)


def eta_field(e0: np.ndarray, e1: np.ndarray):
    """Right-hand side of the split normalized system keeping |eta1| = 1."""
    alpha = normalizing_alpha(e1)
    N = e0.shape[1]
    W = id_wedge(e1 @ adjoint(e1))
    d0 = e0 @ (W - 2 * adjoint(e1) @ e1 - adjoint(e0) @ e0 - alpha * np.eye(N))
    d1 = -(pi_action_matrix(e1 @ adjoint(e1), e1) + alpha * e1)
    return d0, d1


def phi(eta0, eta1) -> float:
    """Monotone quantity of the split normalized system.

    phi = (|eta0 eta1*|^2 + |id^(eta1 eta1*) - eta1* eta1 - eta0* eta0 - alpha id|^2) / 2
    with alpha computed from eta1 (assumed unit norm).
    """
    e0 = eta0.matrix if isinstance(eta0, Bracket) else np.asarray(eta0)
    e1 = eta1.matrix if isinstance(eta1, Bracket) else np.asarray(eta1)
    N = e0.shape[1]
    alpha = normalizing_alpha(e1)
    F = id_wedge(e1 @ adjoint(e1)) - adjoint(e1) @ e1 - adjoint(e0) @ e0 - alpha * np.eye(N)
    return 0.5 * (norm(e0 @ adjoint(e1)) ** 2 + norm(F) ** 2)


def phi_rate(e0: np.ndarray, e1: np.ndarray, d0: np.ndarray, d1: np.ndarray):
    """Time derivative of phi along the velocity (d0, d1), by the chain rule.

    Returns (rate0, rate1, noise): the parts of the rate due to the motion
    of eta0 and of eta1, and a bound on the rounding error of rate0.
    Unlike a difference quotient of phi, whose resolution is limited by the
    size of phi itself, rate0 is resolved relative to the size of the eta0
    velocity, so it separates a slow decrease from a stationary point.
    With eta1 at a fixed point of the normalized flow rate1 vanishes
    exactly; numerically it is of the order of the eta1 field norm.
    """
    N = e0.shape[1]
    A = e0 @ adjoint(e1)
    alpha = normalizing_alpha(e1)
    F = id_wedge(e1 @ adjoint(e1)) - adjoint(e1) @ e1 - adjoint(e0) @ e0 - alpha * np.eye(N)
    dA0 = d0 @ adjoint(e1)
    dF0 = -(adjoint(d0) @ e0 + adjoint(e0) @ d0)
    rate0 = float(np.real(inner(dA0, A) + inner(dF0, F)))
    noise = 64 * np.finfo(float).eps * (norm(A) * norm(dA0) + norm(F) * norm(dF0))
    s1 = norm(d1)
    if s1 > 0.0:
        h = 1e-6 * max(norm(e1), 1.0) / s1
        dalpha = (normalizing_alpha(e1 + h * d1) - normalizing_alpha(e1 - h * d1)) / (2 * h)
        dA1 = e0 @ adjoint(d1)
        dF1 = (id_wedge(d1 @ adjoint(e1) + e1 @ adjoint(d1))
               - adjoint(d1) @ e1 - adjoint(e1) @ d1 - dalpha * np.eye(N))
        rate1 = float(np.real(inner(dA1, A) + inner(dF1, F)))
    else:
        rate1 = 0.0
    return rate0, rate1, float(noise)


# ---------------------------------------------------------------- diagnostics

def bracket_diagnostics(m: np.ndarray, field_norm: float, rank_tol: float) -> dict:
    mu = Bracket(m)
    nsq = mu.norm_sq()
    if nsq > 0.0:
        v = pi_action_matrix(m @ adjoint(m), m)
        q = -inner(v, m) / nsq
        lam = float(np.real(q))
        res = norm(v + lam * m)
    else:
        lam, res = 0.0, 0.0
    warnings = []
    if nsq > 0.0:
        s = np.linalg.svd(_ad_stack(mu), compute_uv=False)
        cut = rank_tol * s[0]
        cdim = int(np.sum(s < cut))
        gray = (s >= cut) & (s < 1e3 * cut)
        if np.any(gray):
            warnings.append("near rank drop in centre computation")
    else:
        cdim = mu.dim
    return {
        "norm_sq": nsq,
        "field_norm": field_norm,
        "lambda_hat": lam,
        "soliton_residual": res,
        "phi": np.nan,
        "centre_dim": cdim,
        "jacobi_residual": jacobi_residual(mu),
        "_warnings": warnings,
    }


def _scaled(field_norm: float, nsq: float) -> float:
    return 0.0 if nsq == 0.0 else field_norm / nsq ** 1.5


def _check_lie(mu0: Bracket):
    if not is_lie(mu0):
        raise ValueError(
            f"not a Lie bracket: Jacobi residual {jacobi_residual(mu0):.3g} exceeds "
            f"{JACOBI_INGEST_TOL:g} |mu|^2")


# ---------------------------------------------------------------- generators
#
# Every flow here has the form mu' = pi(X(mu)) mu for an endomorphism-valued
# generator X, homogeneous of degree two in mu.

def bracket_generator(m: np.ndarray) -> np.ndarray:
    return -(m @ adjoint(m))


def gauged_generator(m: np.ndarray, d: int) -> np.ndarray:
    """-(P_nu - S_nu), the split taken along the current d-dimensional centre of nu."""
    return -(m @ adjoint(m) - gauge_map(m, centre_projector(m, d)))


def normalized_generator(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    return -(m @ adjoint(m) - normalizing_alpha(m) * np.eye(n))


def eta_generator(m: np.ndarray, d: int) -> np.ndarray:
    """Generator of the split normalized system, alpha taken from the eta1 part."""
    n = m.shape[0]
    Pz = centre_projector(m, d)
    a = normalizing_alpha(m - Pz @ m)
    return -(m @ adjoint(m) - gauge_map(m, Pz) - a * np.eye(n))


GENERATOR_CUT = 1e-9
REBASE_COND = 100.0


def minimal_generator(X: np.ndarray, m: np.ndarray) -> np.ndarray:
    """X with its Der(mu) component filtered out; same bracket velocity up to a tiny error.

    Used to move the orbit coordinate h: any generator differing from X by a
    derivation gives the same velocity pi(X) mu, and at a soliton X itself
    is a derivation, so without this h would drift along Aut(mu) and lose
    conditioning while the bracket stands still.  The component of X along
    each right singular vector v_i of B -> pi(B) mu is damped by
    c^2 / (sigma_i^2 + c^2) with c = GENERATOR_CUT * sigma_max.  This is a
    smooth function of mu (a hard rank cutoff flickers on rounding noise
    and wrecks step-size control) and changes the velocity by at most
    c |X| / 2.
    """
    n = m.shape[0]
    L = derivation_operator(m)
    _, s, Vh = np.linalg.svd(L, full_matrices=True)
    sig = np.zeros(n * n)
    sig[:len(s)] = s
    c = GENERATOR_CUT * (s[0] if len(s) else 0.0)
    if c == 0.0:
        return X
    w = c ** 2 / (sig ** 2 + c ** 2)
    x = X.ravel()
    return (x - adjoint(Vh) @ (w * (Vh @ x))).reshape(n, n)


def orbit_act(h: np.ndarray, base: np.ndarray) -> np.ndarray:
    """h . mu on raw matrices: h mu Lambda^2(h^-1), with Lambda^2(g) = (g ^ g) / 2."""
    cond = np.linalg.cond(h)
    if not np.isfinite(cond) or cond > 1e14:
        raise np.linalg.LinAlgError("gauge matrix became singular")
    hinv = np.linalg.inv(h)
    return h @ base @ (0.5 * wedge_endo(hinv, hinv))


class _Coordinates:
    """State layout for one flow run.

    direct: the state is the bracket matrix itself.
    orbit:  the state is h in GL(n) with the bracket equal to h . base, so
            every sample lies exactly on the orbit of the initial bracket
            (the variety of Lie brackets is not numerically attracting, so
            integrating the tensor directly lets rounding errors grow off
            it).  For unnormalized flows the scale is split off: the state
            is (h, rho) with mu = (h . base) / sqrt(rho), |h . base| = 1 and
            rho = |mu|^-2, which evolves by rho' = -2 beta.  When h becomes
            ill-conditioned (approach to a degeneration) the chart is
            restarted at the current bracket.
    ``unit`` selects the normalization (None for unnormalized flows, else
    a function of the bracket returning the norm to be kept at one).
    """

    def __init__(self, base, generator, cfg: FlowConfig, unit=None):
        self.base = base
        self.gen = generator
        self.unit = unit
        self.orbit = cfg.coordinates == "orbit" and norm(base) > 0.0
        self.rebases = 0
        n = base.shape[0]
        self.n = n
        if not self.orbit:
            self.y0 = base.copy()
            if unit is not None:
                self.y0 = base / unit(base)
        elif unit is None:
            nb = norm(base)
            y0 = np.zeros((2, n, n), dtype=complex)
            y0[0] = nb * np.eye(n)
            y0[1, 0, 0] = 1.0 / nb ** 2
            self.y0 = y0
        else:
            self.y0 = unit(base) * np.eye(n, dtype=complex)

    @property
    def blocks(self) -> bool:
        return self.orbit and self.unit is None

    def bracket(self, y) -> np.ndarray:
        if not self.orbit:
            return y
        if self.unit is None:
            u = orbit_act(y[0], self.base)
            return u / (norm(u) * np.sqrt(y[1, 0, 0].real))
        return orbit_act(y, self.base)

    def rhs(self, t, y):
        try:
            if not self.orbit:
                return pi_action_matrix(self.gen(y), y)
            if self.unit is None:
                rho = y[1, 0, 0].real
                if not rho > 0.0:
                    raise np.linalg.LinAlgError("scale blew up")
                u = orbit_act(y[0], self.base)
                u = u / norm(u)
                X = self.gen(u)
                beta = float(np.real(inner(pi_action_matrix(X, u), u)))
                d = np.zeros_like(y)
                d[0] = minimal_generator(X + beta * np.eye(self.n), u) @ y[0] / rho
                d[1, 0, 0] = -2.0 * beta
                return d
            u = orbit_act(y, self.base)
            return minimal_generator(self.gen(u), u) @ y
        except np.linalg.LinAlgError:
            return np.full_like(y, np.nan)

    def project(self, y):
        if not self.orbit:
            return None if self.unit is None else y / self.unit(y)
        h = y[0] if self.unit is None else y
        if np.linalg.cond(h) > REBASE_COND:
            # restart the chart at the current bracket; h -> id
            self.base = orbit_act(h, self.base)
            self.rebases += 1
            h = np.eye(self.n, dtype=complex)
        if self.unit is None:
            y = y.copy()
            y[0] = h * norm(orbit_act(h, self.base))
            return y
        return h * self.unit(orbit_act(h, self.base))

    def field(self, m) -> np.ndarray:
        """Velocity pi(X(mu)) mu at the bracket mu."""
        return pi_action_matrix(self.gen(m), m)

    def cond(self, y) -> float:
        if not self.orbit:
            return 1.0
        return float(np.linalg.cond(y[0] if self.unit is None else y))


def _run_coords(kind, coords: _Coordinates, cfg, diagnose, detect) -> FlowTrace:
    cond = {}

    def on_sample(t, y):
        cond["last"] = coords.cond(y)
        return rec(t, coords.bracket(y))

    def diag(t, m):
        row = diagnose(t, m)
        row["orbit_cond"] = cond["last"]
        return row

    rec = _Recorder(kind, cfg, diag, lambda m, r: detect(r))
    project = coords.project if (coords.orbit or coords.unit is not None) else None
    try:
        status = integrate(coords.rhs, coords.y0, cfg, on_sample, project, coords.blocks)
    except IntegrationAborted as exc:
        tr = rec.trace("aborted")
        tr.warnings.append(str(exc))
        tr.extras["rebases"] = coords.rebases
        exc.trace = tr
        raise
    tr = rec.trace("fixed-point" if status == "stopped" else "completed")
    tr.extras["rebases"] = coords.rebases
    return tr


# ---------------------------------------------------------------- flows

def integrate_bracket_flow(mu0: Bracket, cfg: FlowConfig) -> FlowTrace:
    """mu' = -pi(P_mu) mu."""
    _check_lie(mu0)
    coords = _Coordinates(mu0.matrix, bracket_generator, cfg)

    def diagnose(t, m):
        return bracket_diagnostics(m, norm(coords.field(m)), cfg.rank_tol)

    return _run_coords("bracket", coords, cfg, diagnose,
                       lambda r: _scaled(r["field_norm"], r["norm_sq"]))


def integrate_gauged_flow(mu0: Bracket, cfg: FlowConfig) -> FlowTrace:
    """nu' = -pi(P_nu - S_nu) nu with S_nu = nu1 nu0* - nu0 nu1*.

    The split nu = nu0 + nu1 is taken along the centre of nu itself, whose
    dimension is that of the centre of mu0.  In exact arithmetic this centre
    never moves, but evaluating S along a frozen copy of it is unstable:
    a rounding-size tilt of the actual centre then grows exponentially.

    Extras: ``centre_angle`` (largest principal angle between the centre of
    nu(t) and that of mu0) and ``split_defect`` (difference between the full
    velocity and the centre-split component system).
    """
    _check_lie(mu0)
    if not is_nilpotent(mu0, cfg.rank_tol):
        raise ValueError("gauged flow needs a nilpotent bracket")
    Z = centre(mu0, cfg.rank_tol)
    d = Z.shape[1]
    coords = _Coordinates(mu0.matrix, lambda m: gauged_generator(m, d), cfg)

    def diagnose(t, m):
        v = coords.field(m)
        row = bracket_diagnostics(m, norm(v), cfg.rank_tol)
        Zt = centre(Bracket(m), cfg.rank_tol)
        row["centre_angle"] = subspace_angle(Zt, Z) if Zt.shape[1] == Z.shape[1] else np.pi / 2
        m0 = centre_projector(m, d) @ m
        d0, d1 = split_field(m0, m - m0)
        row["split_defect"] = norm(v - d0 - d1)
        return row

    tr = _run_coords("gauged", coords, cfg, diagnose,
                     lambda r: _scaled(r["field_norm"], r["norm_sq"]))
    tr.extras["centre_basis"] = Z
    return tr


def integrate_normalized_flow(mu0: Bracket, cfg: FlowConfig) -> FlowTrace:
    """Unit-sphere flow mu' = -pi(P_mu - alpha_mu id) mu, renormalized after each step."""
    _check_lie(mu0)
    if mu0.norm() == 0.0:
        raise ValueError("normalized flow needs a nonzero bracket")
    coords = _Coordinates(mu0.matrix, normalized_generator, cfg, unit=norm)

    def diagnose(t, m):
        row = bracket_diagnostics(m, norm(coords.field(m)), cfg.rank_tol)
        row["alpha"] = normalizing_alpha(m)
        row["norm_drift"] = abs(np.sqrt(row["norm_sq"]) - 1.0)
        return row

    return _run_coords("normalized", coords, cfg, diagnose, lambda r: r["field_norm"])


@dataclass
class SplitRun:
    eta0: FlowTrace
    eta1: FlowTrace
    centre_basis: np.ndarray

    def __iter__(self):
        return iter((self.eta0, self.eta1))


def integrate_split_normalized_flow(mu0: Bracket, cfg: FlowConfig,
                                    eta1_init: Optional[Bracket] = None) -> SplitRun:
    """Coupled (eta0, eta1) system with |eta1| held at one.

    ``eta1_init`` optionally replaces mu1 / |mu1| (e.g. by a fixed point of
    the normalized flow); eta0 still starts at mu0 / |mu1|.  The eta0 trace
    carries the full-bracket diagnostics, phi and the eta0 field norm; the
    eta1 trace carries the diagnostics of eta1 on its own.
    """
    _check_lie(mu0)
    if mu0.norm_sq() == 0.0:
        raise ValueError("zero bracket: split normalized flow undefined")
    if not is_nilpotent(mu0, cfg.rank_tol):
        raise ValueError("split normalized flow needs a nilpotent bracket")
    split = centre_split(mu0, cfg.rank_tol)
    n1 = split.mu1.norm()
    if n1 <= cfg.rank_tol * mu0.norm():
        raise ValueError("mu1 = 0: the image of mu lies in its centre (2-step or abelian), "
                         "so the split normalization is degenerate")
    d = split.centre.shape[1]
    base = split.mu0.matrix / n1
    base = base + (split.mu1.matrix / n1 if eta1_init is None
                   else eta1_init.matrix / eta1_init.norm())

    def parts(m):
        e0 = centre_projector(m, d) @ m
        return e0, m - e0

    coords = _Coordinates(base, lambda m: eta_generator(m, d), cfg,
                          unit=lambda m: norm(parts(m)[1]))
    rows1 = []

    def diagnose(t, m):
        e0, e1 = parts(m)
        d0, d1 = eta_field(e0, e1)
        row = bracket_diagnostics(m, norm(d0), cfg.rank_tol)
        row["phi"] = phi(e0, e1)
        row["phi_rate0"], row["phi_rate1"], row["phi_rate_noise"] = phi_rate(e0, e1, d0, d1)
        row["eta0_norm_sq"] = float(np.vdot(e0, e0).real)
        row["system_defect"] = norm(coords.field(m) - d0 - d1)
        r1 = bracket_diagnostics(e1, norm(d1), cfg.rank_tol)
        r1.pop("_warnings")
        r1["norm_drift"] = abs(np.sqrt(r1["norm_sq"]) - 1.0)
        rows1.append(r1)
        return row

    # the pair is stationary when both component fields vanish
    def detect(row):
        return max(row["field_norm"], rows1[-1]["field_norm"])

    tr0 = _run_coords("split-eta0", coords, cfg, diagnose, detect)
    full = tr0.states
    tr0.states = [parts(m)[0] for m in full]
    states1 = [parts(m)[1] for m in full]
    tr0.extras["eta_full"] = full
    cols1 = {k: np.array([r[k] for r in rows1]) for k in rows1[0]}
    main1 = {k: cols1.pop(k) for k in TRACE_COLUMNS[1:]}
    tr1 = FlowTrace("split-eta1", tr0.times.copy(), states1, main1,
                    main1["field_norm"].copy(), cols1, tr0.status, [])
    return SplitRun(tr0, tr1, split.centre)


@dataclass
class PhiReport:
    max_increase: float          # largest phi(t_{k+1}) - phi(t_k)
    monotone: bool
    stationary_count: int        # samples whose phi rate is zero to rounding
    max_field_when_stationary: float
    stationary_ok: bool

    @property
    def passed(self) -> bool:
        return self.monotone and self.stationary_ok


def phi_monotonicity_check(run: SplitRun, slack: float = 1e-10,
                           field_tol: float = 1e-8) -> PhiReport:
    """phi nonincreasing between samples (up to ``slack``), and stationary only
    where the eta0 field is below ``field_tol``.

    A sample counts as stationary when the eta0 part of its instantaneous
    phi rate is not resolvably negative (rate0 >= -noise, see phi_rate).
    The eta1 part is excluded: with eta1 started at a fixed point it is
    zero up to the eta1 field norm, which the eta1 trace reports.
    """
    tr = run.eta0
    p = tr["phi"]
    inc = float(np.max(np.diff(p))) if len(p) > 1 else 0.0
    stat = tr["phi_rate0"] >= -tr["phi_rate_noise"]
    f = tr["field_norm"]
    fmax = float(np.max(f[stat])) if np.any(stat) else 0.0
    return PhiReport(inc, inc <= slack, int(np.sum(stat)), fmax, fmax < field_tol)


# ---------------------------------------------------------------- gauge equivalence

@dataclass
class GaugeReport:
    times: np.ndarray
    gauge_path: list                 # sampled k_t
    discrepancy: np.ndarray          # |nu_t - k_t . mu_t|
    unitarity_defect: np.ndarray     # |k_t* k_t - id|
    mu_trace: list
    nu_trace: list

    @property
    def max_discrepancy(self) -> float:
        return float(np.max(self.discrepancy))

    @property
    def max_unitarity_defect(self) -> float:
        return float(np.max(self.unitarity_defect))


def verify_gauge_equivalence(mu0: Bracket, cfg: FlowConfig) -> GaugeReport:
    """Co-integrate mu_t, the gauged nu_t and k' = S_{k.mu} k, and compare nu_t with k_t . mu_t."""
    _check_lie(mu0)
    if not is_nilpotent(mu0, cfg.rank_tol):
        raise ValueError("gauge equivalence check needs a nilpotent bracket")
    n = mu0.dim
    N = mu0.matrix.shape[1]
    Z = centre(mu0, cfg.rank_tol)
    d = Z.shape[1]
    W = n + 2 * N   # packed columns: [k | mu | nu]

    def unpack(y):
        return y[:, :n], y[:, n:n + N], y[:, n + N:]

    def conj_action(k, m):
        return act_gl(k, Bracket(m)).matrix if N else m

    def rhs(t, y):
        k, m, v = unpack(y)
        km = conj_action(k, m)
        dk = gauge_map(km, centre_projector(km, d)) @ k
        return np.concatenate([dk, bracket_field(m), gauged_field(v, centre_projector(v, d))],
                              axis=1)

    times, ks, mus, nus, disc, unit = [], [], [], [], [], []

    def on_sample(t, y):
        k, m, v = unpack(y)
        times.append(t)
        ks.append(k.copy())
        mus.append(m.copy())
        nus.append(v.copy())
        disc.append(norm(v - conj_action(k, m)))
        unit.append(norm(adjoint(k) @ k - np.eye(n)))
        return False

    y0 = np.concatenate([np.eye(n, dtype=complex), mu0.matrix, mu0.matrix], axis=1)
    integrate(rhs, y0, cfg, on_sample)
    return GaugeReport(np.array(times), ks, np.array(disc), np.array(unit), mus, nus)


# ---------------------------------------------------------------- monitors

@dataclass
class EnvelopeReport:
    applicable: bool
    sup_t_norm_sq: float = np.nan
    tail_increase: float = np.nan
    bounded: bool = False
    c_hat: float = np.nan
    min_envelope_ratio: float = np.nan
    lower_envelope: bool = False

    @property
    def passed(self) -> bool:
        return self.applicable and self.bounded and self.lower_envelope


def growth_envelope_check(trace: FlowTrace, slack: float = 1e-10,
                          envelope_rtol: float = 1e-8, rank_tol: float = 1e-10) -> EnvelopeReport:
    """Check the two growth bounds of the nilpotent bracket flow on a sampled trace.

    Upper: t |mu(t)|^2 stays bounded; on a finite trace this is read as "no
    increase of t |mu|^2 across the trailing half of the samples beyond
    ``slack``".  Lower: |mu(t)|^2 >= 1 / (C t + |mu_0|^-2) with
    C = max over samples of 2 |pi(P) mu| / |mu|^3, up to ``envelope_rtol``.
    """
    if trace.kind != "bracket" or not is_nilpotent(Bracket(trace.states[0]), rank_tol):
        return EnvelopeReport(False)
    t = trace.times
    nsq = trace.columns["norm_sq"]
    if nsq[0] == 0.0:
        return EnvelopeReport(True, 0.0, 0.0, True, 0.0, 1.0, True)
    tn = t * nsq
    half = len(t) // 2
    tail = tn[half:]
    tail_increase = float(np.max(tail) - tail[0]) if len(tail) else 0.0
    pos = nsq > 0
    c_hat = float(np.max(2 * trace.columns["field_norm"][pos] / nsq[pos] ** 1.5))
    env = 1.0 / (c_hat * t + 1.0 / nsq[0])
    ratio = nsq / env
    return EnvelopeReport(
        True,
        sup_t_norm_sq=float(np.max(tn)),
        tail_increase=tail_increase,
        bounded=bool(np.all(np.isfinite(tn)) and tail_increase <= slack),
        c_hat=c_hat,
        min_envelope_ratio=float(np.min(ratio)),
        lower_envelope=bool(np.all(ratio >= 1 - envelope_rtol)),
    )


def detect_fixed_point(trace: FlowTrace, eps: float = 1e-8, dwell: float = 1.0):
    """First sample after which the detection field stays below eps for at least ``dwell``.

    Returns (time, state) or None.  A run of small values reaching the end
    of the trace counts only if it already lasts ``dwell``.
    """
    small = trace.detect_field < eps
    t = trace.times
    i = 0
    while i < len(t):
        if not small[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(t) and small[j + 1]:
            j += 1
        if t[j] - t[i] >= dwell * (1 - 1e-12):
            return float(t[i]), trace.states[i]
        i = j + 1
    return None
