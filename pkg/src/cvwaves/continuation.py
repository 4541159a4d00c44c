"""Branch switching and pseudo-arclength continuation of bifurcating wave families.

The continuation unknown is ``u = (lam, mu, a_1..a_N)`` where ``a_j`` are the
cosine coefficients of ``w``.  Each step predicts along the secant, then
corrects with Newton on the residual augmented by the arclength plane
``t . (u - u_prev) = ds``.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import spectral
from .governing import (
    BifurcationPoint,
    SolutionPoint,
    WaveParameters,
    find_bifurcation_point,
    jacobian_F,
    linearized_operator,
    residual_components,
)
from .spectral import PeriodicSeries, average_product, derivative, product

__all__ = [
    "ContinuationConfig",
    "ContinuationState",
    "BranchRecord",
    "NodalReport",
    "ContinuationError",
    "TERMINATION_CAUSES",
    "switch_branch",
    "continue_branch",
    "nodal_monitor",
    "scan_trivial_branch",
    "sign_changes",
]

log = logging.getLogger(__name__)

TERMINATION_CAUSES = (
    "Q_floor_hit",
    "norm_ceiling_hit",
    "self_intersection",
    "loop_detected",
    "max_steps",
    "newton_failure",
    "amplitude_target",
    "resolution_limit",
)


class ContinuationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ContinuationConfig:
    n: int = 1
    sign: str = "+"
    ds0: float = 0.02
    ds_min: float = 1e-6
    ds_max: float = 0.1
    newton_tol: float = 1e-10
    newton_max_iter: int = 5
    max_steps: int = 500
    q_floor: float | None = None
    norm_ceiling: float = 1e3
    s_init: float | None = None
    max_amplitude: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if self.sign not in ("+", "-"):
            raise ValueError(f"sign must be '+' or '-', got {self.sign!r}")
        if not (0 < self.ds_min <= self.ds0 <= self.ds_max):
            raise ValueError(f"need 0 < ds_min <= ds0 <= ds_max, got {self.ds_min}, {self.ds0}, {self.ds_max}")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if self.newton_max_iter < 1 or self.max_steps < 1:
            raise ValueError("iteration budgets must be positive")
        if self.q_floor is not None and self.q_floor < 0:
            raise ValueError("q_floor must be non-negative")
        if not self.norm_ceiling > 0:
            raise ValueError("norm_ceiling must be positive")
        if self.max_amplitude is not None and not self.max_amplitude > 0:
            raise ValueError("max_amplitude must be positive")

    def resolved_q_floor(self, params: WaveParameters) -> float:
        return 1e-3 * params.g * params.h if self.q_floor is None else self.q_floor

    def resolved_s_init(self, params: WaveParameters) -> float:
        return 1e-3 * params.h if self.s_init is None else self.s_init


@dataclass
class NodalReport:
    positivity: bool
    nontrivial: bool
    monotone: bool
    crest_trough_curvature: bool
    u_range: bool
    surface_Vy_pos: bool
    sign_condition: bool
    min_Q_minus_2gv: float
    self_intersection_margin: float

    FLAGS = (
        "positivity",
        "nontrivial",
        "monotone",
        "crest_trough_curvature",
        "u_range",
        "surface_Vy_pos",
        "sign_condition",
    )

    @property
    def all_true(self) -> bool:
        return all(getattr(self, f) for f in self.FLAGS)


@dataclass
class ContinuationState:
    """Everything needed to resume a trace exactly."""

    u_prev: np.ndarray
    u: np.ndarray
    ds: float
    good_streak: int
    step: int
    s: float
    u0: np.ndarray
    u1: np.ndarray

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("u_prev", "u", "u0", "u1"):
            d[key] = [float(x) for x in d[key]]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ContinuationState":
        kw = dict(d)
        for key in ("u_prev", "u", "u0", "u1"):
            kw[key] = np.asarray(kw[key], dtype=float)
        return cls(**kw)


@dataclass
class BranchRecord:
    params: WaveParameters
    config: ContinuationConfig
    bifurcation: BifurcationPoint
    points: list = field(default_factory=list)
    monitors: list = field(default_factory=list)
    det_signs: list = field(default_factory=list)
    states: list = field(default_factory=list)
    termination: str | None = None

    @property
    def arclength(self) -> np.ndarray:
        return np.array([p.s for p in self.points])

    def amplitudes(self) -> np.ndarray:
        return np.array([_amplitude(self.params, p) for p in self.points])


# ---------------------------------------------------------------------------
# vector plumbing

def _pack(p: SolutionPoint, N: int) -> np.ndarray:
    return np.concatenate(([p.lam, p.mu], p.w.resized(N).cos_coeffs))


def _unpack(params: WaveParameters, u: np.ndarray, **kw) -> SolutionPoint:
    return SolutionPoint.build(params, u[0], u[1], PeriodicSeries.from_trig(0.0, u[2:]), **kw)


def _residual(params: WaveParameters, u: np.ndarray):
    """Galerkin residual (cos modes 1..N of F1, F2), its norms, and the norm of F1 above mode N."""
    N = len(u) - 2
    F1, F2 = residual_components(params, u[0], u[1], PeriodicSeries.from_trig(0.0, u[2:]))
    r = np.append(F1.resized(N).cos_coeffs, F2)
    tail = float(np.max(np.abs(F1.coeffs[N + 1 :]), initial=0.0)) * 2.0
    return r, (float(np.max(np.abs(r[:N]))), abs(F2)), tail


def _jacobian_u(params: WaveParameters, u: np.ndarray) -> np.ndarray:
    """(N+1) x (N+2) Jacobian in the ordering (lam, mu, a)."""
    N = len(u) - 2
    J, J_lam = jacobian_F(params, _unpack(params, u))
    return np.column_stack([J_lam, J[:, N], J[:, :N]])


def _converged(norms, tol) -> bool:
    return max(norms) <= tol


def _amplitude(params: WaveParameters, p: SolutionPoint) -> float:
    return float(p.w(0.0) - p.w(np.pi)) / 2.0


# ---------------------------------------------------------------------------
# branch switching

def _solve_fixed_mode(params, bp, s, tol, max_iter):
    N = params.N
    u = np.zeros(N + 2)
    u[0] = bp.lambda_star
    u[2 + bp.n - 1] = s
    free = [i for i in range(N + 2) if i != 2 + bp.n - 1]
    for it in range(1, max_iter + 1):
        r, _, _ = _residual(params, u)
        A = _jacobian_u(params, u)[:, free]
        du = np.linalg.solve(A, -r)
        u[free] += du
        r, norms, _ = _residual(params, u)
        if not np.all(np.isfinite(u)):
            return None, it, norms
        if _converged(norms, tol):
            r, _, _ = _residual(params, u)
            v = u.copy()
            v[free] -= np.linalg.solve(_jacobian_u(params, u)[:, free], r)
            _, polished, _ = _residual(params, v)
            if max(polished) < max(norms):
                return v, it + 1, polished
            return u, it, norms
    return None, max_iter, norms


def switch_branch(
    params: WaveParameters,
    bp: BifurcationPoint,
    s_init: float = None,
    tol: float = 1e-10,
    max_iter: int = 25,
    s_min: float = 1e-9,
) -> SolutionPoint:
    """First nontrivial point near ``bp``: Newton with the n-th cosine coefficient pinned to ``s_init``.

    The pinned coordinate is the null direction of the linearization, so the
    constraint plane is orthogonal to it.  On divergence, or when the modes
    above N are not resolved to ``tol``, the amplitude is halved.
    """
    if bp.n > params.N:
        raise ValueError(f"mode {bp.n} exceeds the resolution N={params.N}")
    s = 1e-3 * params.h if s_init is None else float(s_init)
    if s == 0.0:
        return SolutionPoint.build(params, bp.lambda_star, 0.0, residual_norms=(0.0, 0.0))
    while abs(s) >= s_min:
        u, it, norms = _solve_fixed_mode(params, bp, s, tol, max_iter)
        if u is not None and _residual(params, u)[2] <= tol:
            return _unpack(params, u, residual_norms=norms, newton_iters=it)
        log.info("branch switch at s=%g failed or unresolved, halving", s)
        s /= 2.0
    raise ContinuationError(f"branch switch failed down to |s| < {s_min}")


# ---------------------------------------------------------------------------
# nodal monitor

def nodal_monitor(params: WaveParameters, p: SolutionPoint, sign: str = "+", n: int = 1, tol: float = 1e-10) -> NodalReport:
    """Pointwise structural conditions on a surface profile, sampled on 8N nodes.

    Monotonicity, the range of U(x, 0) and the interior conditions are checked on
    the half period (0, pi/n) of a profile with minimal period 2 pi / n.
    """
    g, ups, k, h = params.g, params.upsilon, params.k, params.h
    d = params.depth
    w = p.w
    N = w.N
    v = w + h
    M = max(8 * N, 64)
    x = spectral.grid(M)
    vv = v.to_grid(M)
    vp = derivative(v)
    vpp = derivative(vp)
    Cvp = spectral.conjugation(vp, d)
    Vy = Cvp + 1.0 / k
    half = np.pi / n
    interior = (x > 0) & (x < half - 1e-14)

    positivity = bool(np.min(vv) > tol)
    nontrivial = bool(w.sup_norm_coeffs() > tol)

    # v' < 0 inside the half period; refine around sampled local maxima
    vp_grid = vp.to_grid(M)
    xi = x[interior]
    vpi = vp_grid[interior]
    monotone = bool(xi.size and np.all(vpi < -tol))
    if monotone:
        step = 2.0 * np.pi / M
        peaks = [i for i in range(len(vpi)) if (i == 0 or vpi[i] >= vpi[i - 1]) and (i == len(vpi) - 1 or vpi[i] >= vpi[i + 1])]
        for i in peaks:
            lo, hi = max(xi[i] - step, xi[0]), min(xi[i] + step, xi[-1])
            if hi <= lo:
                continue
            res = minimize_scalar(lambda t: -vp(t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
            if -res.fun >= -tol:
                monotone = False
                break

    curvature = bool(vpp(0.0) < -tol and vpp(half) > tol)

    Cw = spectral.conjugation(w, d) if w.sup_norm_coeffs() > 0 else PeriodicSeries.zeros(N)
    U = xi / k + Cw(xi)
    Umax = half / k
    margin = float(np.min(np.minimum(U, Umax - U))) if xi.size else float("nan")
    u_range = bool(xi.size and margin > 0.0)

    surface_Vy = bool(Vy(0.0) > tol and Vy(half) > tol)

    vvp = derivative(product(v, v)) * 0.5
    B = (
        p.m / (k * h)
        - ups * average_product(v, v) / (2.0 * k * h)
        - ups * spectral.conjugation(vvp, d)
        + ups * product(v, Vy)
    )
    Bg = B.to_grid(max(M, 2 * B.N + 2))
    sgn = 1.0 if sign == "+" else -1.0
    sign_condition = bool(np.min(sgn * Bg) > tol)

    min_q = float(np.min(p.Q - 2.0 * g * vv))
    return NodalReport(positivity, nontrivial, monotone, curvature, u_range, surface_Vy, sign_condition, min_q, margin)


# ---------------------------------------------------------------------------
# trivial-branch scan

def scan_trivial_branch(params: WaveParameters, lambda_range, n_grid: int = 100) -> list:
    """Sign of the w-block determinant of the laminar linearization on a lam-grid."""
    lo, hi = lambda_range
    out = []
    for lam in np.linspace(lo, hi, n_grid):
        d = linearized_operator(params, lam).multipliers
        out.append((float(lam), int(np.prod(np.sign(d)))))
    return out


def sign_changes(scan) -> list:
    """Brackets (lam_a, lam_b) where consecutive det signs differ."""
    return [(a[0], b[0]) for a, b in zip(scan[:-1], scan[1:]) if a[1] != b[1]]


def _det_sign(params: WaveParameters, u: np.ndarray) -> int:
    J = _jacobian_u(params, u)[:, 1:]
    sgn, _ = np.linalg.slogdet(np.column_stack([J[:, 1:], J[:, 0]]))
    return int(sgn)


# ---------------------------------------------------------------------------
# pseudo-arclength continuation

def _corrector(params, u_prev, t, ds, tol, max_iter):
    u = u_prev + ds * t
    norms = (np.inf, np.inf)
    for it in range(1, max_iter + 1):
        r, _, _ = _residual(params, u)
        A = np.vstack([_jacobian_u(params, u), t])
        rhs = -np.append(r, t @ (u - u_prev) - ds)
        try:
            du = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError:
            return None, it, norms
        u = u + du
        if not np.all(np.isfinite(u)):
            return None, it, norms
        _, norms, _ = _residual(params, u)
        if _converged(norms, tol):
            if it < max_iter:
                u, norms, it = _polish(params, u, u_prev, t, ds, norms, it)
            return u, it, norms
    return None, max_iter, norms


def _polish(params, u, u_prev, t, ds, norms, it):
    # one extra quadratic step so derived residuals (Bernoulli) sit well under tol
    r, _, _ = _residual(params, u)
    A = np.vstack([_jacobian_u(params, u), t])
    try:
        du = np.linalg.solve(A, -np.append(r, t @ (u - u_prev) - ds))
    except np.linalg.LinAlgError:
        return u, norms, it
    _, new, _ = _residual(params, u + du)
    if max(new) < max(norms):
        return u + du, new, it + 1
    return u, norms, it


def _record_point(record, params, cfg, u, s, iters, norms, state):
    p = _unpack(params, u, residual_norms=norms, s=s, newton_iters=iters)
    record.points.append(p)
    record.monitors.append(nodal_monitor(params, p, cfg.sign, cfg.n, tol=1e-10))
    record.det_signs.append(_det_sign(params, u))
    record.states.append(state)
    return p


def _stop_cause(params, cfg, p, mon, u, u0, u1, s, ds):
    if mon.min_Q_minus_2gv <= cfg.resolved_q_floor(params):
        return "Q_floor_hit"
    size = np.sqrt(p.m**2 + p.Q**2 + params.h**2 + np.sum(u[2:] ** 2))
    if size >= cfg.norm_ceiling:
        return "norm_ceiling_hit"
    if mon.self_intersection_margin <= 0.0:
        return "self_intersection"
    if s > 10.0 * cfg.ds0 and min(np.linalg.norm(u - u0), np.linalg.norm(u - u1)) < ds:
        return "loop_detected"
    if cfg.max_amplitude is not None and abs(_amplitude(params, p)) >= cfg.max_amplitude:
        return "amplitude_target"
    return None


def continue_branch(params: WaveParameters, config: ContinuationConfig, resume: ContinuationState | None = None) -> BranchRecord:
    """Trace the branch bifurcating at lam*_{n,sign} until a termination cause fires."""
    cfg = config
    bp = find_bifurcation_point(params, cfg.n, cfg.sign)
    record = BranchRecord(params, cfg, bp)
    N = params.N

    if resume is None:
        first = switch_branch(params, bp, cfg.resolved_s_init(params), tol=cfg.newton_tol)
        u0 = _pack(bp.trivial_point(params), N)
        u1 = _pack(first, N)
        s = float(np.linalg.norm(u1 - u0))
        state = ContinuationState(u0.copy(), u1.copy(), cfg.ds0, 0, 0, s, u0, u1)
        p = _record_point(record, params, cfg, u1, s, first.newton_iters, first.residual_norms, state)
        cause = _stop_cause(params, cfg, p, record.monitors[-1], u1, u0, u1, s, cfg.ds0)
        if cause:
            record.termination = cause
            return record
    else:
        state = ContinuationState.from_dict(resume.to_dict())

    u_prev, u, ds, good, step, s = state.u_prev, state.u, state.ds, state.good_streak, state.step, state.s
    u0, u1 = state.u0, state.u1
    while True:
        if step >= cfg.max_steps:
            record.termination = "max_steps"
            break
        t = u - u_prev
        t = t / np.linalg.norm(t)
        unresolved = False
        while True:
            u_new, iters, norms = _corrector(params, u, t, ds, cfg.newton_tol, cfg.newton_max_iter)
            # modes above N must stay negligible, else the truncation no longer resolves the profile
            unresolved = u_new is not None and _residual(params, u_new)[2] > cfg.newton_tol
            if u_new is not None and not unresolved:
                break
            u_new = None
            ds /= 2.0
            good = 0
            log.info("step %d: step rejected (unresolved=%s), ds -> %g", step, unresolved, ds)
            if ds < cfg.ds_min:
                break
        if u_new is None:
            record.termination = "resolution_limit" if unresolved else "newton_failure"
            break
        step += 1
        s += float(np.linalg.norm(u_new - u))
        u_prev, u = u, u_new
        used_ds = ds
        if iters <= 3:
            good += 1
            if good >= 2:
                ds = min(2.0 * ds, cfg.ds_max)
                good = 0
        else:
            good = 0
        state = ContinuationState(u_prev.copy(), u.copy(), ds, good, step, s, u0, u1)
        p = _record_point(record, params, cfg, u, s, iters, norms, state)
        cause = _stop_cause(params, cfg, p, record.monitors[-1], u, u0, u1, s, used_ds)
        if cause:
            record.termination = cause
            break
    return record
