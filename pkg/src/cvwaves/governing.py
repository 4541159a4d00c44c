"""Residual map of the steady constant-vorticity wave problem on the conformal strip.

Unknowns are the surface-speed parameter ``lam``, the head defect ``mu`` and the
even, mean-zero surface perturbation ``w = v - h``.  They relate to the
physical flux ``m`` and Bernoulli constant ``Q`` by

    m = h (lam - upsilon h / 2),        Q = mu + lam^2 + 2 g h.

``residual_F`` returns the pair (F1, F2): F1 is the mean-zero part of the
kinematic/dynamic surface equation and F2 the scalar constraint fixing its
average.  On the laminar family ``w = 0`` one has F = (0, -mu/k^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import spectral
from .spectral import PeriodicSeries, average_product, coth_multiplier, derivative, product

__all__ = [
    "WaveParameters",
    "SolutionPoint",
    "BifurcationPoint",
    "EquivalenceReport",
    "LinearizedOperator",
    "residual_F",
    "residual_components",
    "residual_bernoulli",
    "residual_norms",
    "check_equivalence",
    "linearized_operator",
    "transversality",
    "jacobian_F",
    "directional_derivative",
    "bifurcation_points",
    "find_bifurcation_point",
    "bernoulli_norm",
    "dispersion_residual",
    "convert_parameters",
    "irrotational_reduction_check",
]


@dataclass(frozen=True)
class WaveParameters:
    """Physical constants and spectral resolution."""

    g: float = 1.0
    upsilon: float = 0.0
    k: float = 1.0
    h: float = 1.0
    N: int = 64

    def __post_init__(self):
        for name in ("g", "upsilon", "k", "h"):
            val = getattr(self, name)
            if not np.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val}")
        if self.g <= 0:
            raise ValueError(f"g must be positive, got {self.g}")
        if self.k <= 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.h <= 0:
            raise ValueError(f"h must be positive, got {self.h}")
        if int(self.N) != self.N or self.N < 8:
            raise ValueError(f"N must be an integer >= 8, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def depth(self) -> float:
        """Conformal strip depth kh."""
        return self.k * self.h

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.k

    def with_(self, **kw) -> "WaveParameters":
        return replace(self, **kw)


@dataclass(frozen=True, eq=False)
class SolutionPoint:
    """One state in both parametrizations.

    ``w`` is the even, mean-zero series ``v - h``; ``m`` and ``Q`` follow from
    (lam, mu) and are filled in by :meth:`build`.
    """

    lam: float
    mu: float
    w: PeriodicSeries
    m: float
    Q: float
    residual_norms: tuple = (np.nan, np.nan)
    s: float = 0.0
    newton_iters: int = 0

    @classmethod
    def build(cls, params: WaveParameters, lam: float, mu: float, w=None, **kw) -> "SolutionPoint":
        if w is None:
            w = PeriodicSeries.zeros(params.N)
        elif not isinstance(w, PeriodicSeries):
            w = PeriodicSeries.from_trig(0.0, np.asarray(w, dtype=float))
        m, Q = convert_parameters(params, lam=lam, mu=mu)
        return cls(float(lam), float(mu), w, m, Q, **kw)

    @classmethod
    def trivial(cls, params: WaveParameters, lam: float, mu: float = 0.0) -> "SolutionPoint":
        return cls.build(params, lam, mu)

    def v(self, params: WaveParameters) -> PeriodicSeries:
        return self.w + params.h

    @property
    def cos_coeffs(self) -> np.ndarray:
        return self.w.cos_coeffs

    def with_residual(self, params: WaveParameters) -> "SolutionPoint":
        return replace(self, residual_norms=residual_norms(params, self))


@dataclass(frozen=True)
class BifurcationPoint:
    n: int
    sign: str
    lambda_star: float
    m_star: float
    Q_star: float

    def trivial_point(self, params: WaveParameters) -> SolutionPoint:
        return SolutionPoint.build(params, self.lambda_star, 0.0)


class LinearizedOperator(NamedTuple):
    """Diagonal linearization about a laminar state: cos(nx) -> multipliers[n-1] cos(nx), nu -> mu_entry nu."""

    modes: np.ndarray
    multipliers: np.ndarray
    mu_entry: float


@dataclass
class EquivalenceReport:
    system_residual: tuple
    bernoulli_residual: float
    min_grad_V_sq: float
    tol: float
    direction_i: bool = field(init=False)
    direction_ii: bool = field(init=False)

    def __post_init__(self):
        sys_ok = max(self.system_residual) <= self.tol
        self.direction_i = bool(sys_ok and self.bernoulli_residual <= 10 * self.tol)
        self.direction_ii = bool(self.min_grad_V_sq > 0.0 and self.min_grad_V_sq > 1e-12)


# ---------------------------------------------------------------------------
# parametrizations

def convert_parameters(params: WaveParameters, *, m=None, Q=None, lam=None, mu=None):
    """Map (lam, mu) -> (m, Q) or (m, Q) -> (lam, mu); exactly one pair must be given."""
    g, ups, h = params.g, params.upsilon, params.h
    if lam is not None and mu is not None and m is None and Q is None:
        return h * (lam - ups * h / 2.0), mu + lam * lam + 2.0 * g * h
    if m is not None and Q is not None and lam is None and mu is None:
        lam = m / h + ups * h / 2.0
        return lam, Q - lam * lam - 2.0 * g * h
    raise ValueError("pass exactly one of the pairs (m, Q) or (lam, mu)")


# ---------------------------------------------------------------------------
# residuals

def _parts(params, w):
    d = params.depth
    C = lambda f: spectral.conjugation(f, d)
    wp = derivative(w)
    Cwp = C(wp)
    ww_p = derivative(product(w, w)) * 0.5
    return C, wp, Cwp, ww_p


def residual_components(params: WaveParameters, lam: float, mu: float, w: PeriodicSeries):
    """Return (F1, F2) for raw unknowns; F1 is the untruncated series of degree <= 3N."""
    g, ups, k, h = params.g, params.upsilon, params.k, params.h
    C, wp, Cwp, ww_p = _parts(params, w)
    w2 = product(w, w)
    w2_avg = w2.mean
    wCwp_avg = average_product(w, Cwp)
    C_wwp = C(ww_p)
    w3_p = derivative(product(w2, w)) * (1.0 / 3.0)
    U2 = ups * ups
    F1 = (
        2.0 * (mu + lam * lam) * Cwp
        - 2.0 * g * (C_wwp + product(w, Cwp))
        - U2 * (C(w3_p) + product(w2, Cwp) - 2.0 * product(w, C_wwp))
        + (U2 * w2_avg / (k * h)) * w
        - (U2 / k) * w2
        + (U2 / k * w2_avg + 2.0 * g * wCwp_avg)
        - (2.0 * g / k + 2.0 * lam * ups / k) * w
    )
    E = C_wwp - product(w, Cwp) - w / k + w2_avg / (2.0 * k * h)
    F2 = (
        U2 * average_product(E, E)
        + 2.0 * (2.0 * g + lam * ups) / k * wCwp_avg
        + 2.0 * g * average_product(w, product(wp, wp))
        + 2.0 * g * average_product(w, product(Cwp, Cwp))
        - lam * ups * w2_avg / (k * k * h)
        - (mu + lam * lam) * (average_product(Cwp, Cwp) + average_product(wp, wp))
        - mu / (k * k)
    )
    # mean is zero analytically; remove rounding drift
    F1 = F1 - F1.mean
    return F1, float(F2)


def residual_F(params: WaveParameters, p: SolutionPoint):
    """(F1, F2) at a :class:`SolutionPoint`."""
    return residual_components(params, p.lam, p.mu, p.w)


def residual_norms(params: WaveParameters, p: SolutionPoint) -> tuple:
    """(max coefficient of F1, |F2|)."""
    F1, F2 = residual_F(params, p)
    return F1.sup_norm_coeffs(), abs(F2)


def residual_bernoulli(params: WaveParameters, m: float, Q: float, v: PeriodicSeries) -> PeriodicSeries:
    """Squared Bernoulli condition on the surface written in conformal variables.

    Returns B^2 - (Q - 2gv)(v'^2 + (1/k + C(v'))^2) with
    B = m/(kh) - ups [v^2]/(2kh) - ups C(vv') + ups v (1/k + C(v')); exact series of degree 4N.
    """
    g, ups, k, h = params.g, params.upsilon, params.k, params.h
    if abs(v.mean - h) > 1e-10 * max(1.0, h):
        raise ValueError(f"[v] must equal h={h}, got {v.mean}")
    d = params.depth
    vp = derivative(v)
    Vy = spectral.conjugation(vp, d) + 1.0 / k
    vvp = derivative(product(v, v)) * 0.5
    B = m / (k * h) - ups * average_product(v, v) / (2.0 * k * h) - ups * spectral.conjugation(vvp, d) + ups * product(v, Vy)
    return product(B, B) - product(Q - 2.0 * g * v, product(vp, vp) + product(Vy, Vy))


def bernoulli_norm(params: WaveParameters, p: SolutionPoint) -> float:
    """Sup of the Bernoulli residual over a grid of 8N points (>= its degree + 1)."""
    r = residual_bernoulli(params, p.m, p.Q, p.v(params))
    return r.sup_norm(max(8 * p.w.N, 2 * r.N + 2))


def check_equivalence(params: WaveParameters, p: SolutionPoint, tol: float = 1e-10) -> EquivalenceReport:
    """Compare the system residual with the Bernoulli residual and the conformal-gradient floor."""
    from .flowfield import min_conformal_gradient

    return EquivalenceReport(
        system_residual=residual_norms(params, p),
        bernoulli_residual=bernoulli_norm(params, p),
        min_grad_V_sq=min_conformal_gradient(params, p.v(params)),
        tol=tol,
    )


# ---------------------------------------------------------------------------
# linearization

def linearized_operator(params: WaveParameters, lam: float, mu: float = 0.0) -> LinearizedOperator:
    """Diagonal Jacobian at the laminar state (lam, mu, w = 0)."""
    g, ups, k = params.g, params.upsilon, params.k
    n = np.arange(1, params.N + 1)
    d = 2.0 * (mu + lam * lam) * n * coth_multiplier(n, params.depth) - 2.0 * g / k - 2.0 * lam * ups / k
    return LinearizedOperator(n, d, -1.0 / (k * k))


def transversality(params: WaveParameters, lam: float, n: int) -> float:
    """d/dlam of the n-th multiplier: 4 lam n coth(nkh) - 2 ups / k."""
    return 4.0 * lam * n * float(coth_multiplier(n, params.depth)) - 2.0 * params.upsilon / params.k


def directional_derivative(params: WaveParameters, lam, mu, w: PeriodicSeries, phi: PeriodicSeries, dlam=0.0, nu=0.0):
    """Frechet derivative of (F1, F2) at (lam, mu, w) along (dlam, nu, phi).

    ``phi`` may carry a batch axis; the result is then batched the same way.
    """
    g, ups, k, h = params.g, params.upsilon, params.k, params.h
    U2 = ups * ups
    C, wp, Cwp, ww_p = _parts(params, w)
    phip = derivative(phi)
    Cphip = C(phip)
    wphi = product(w, phi)
    C_wphi_p = C(derivative(wphi))
    C_wwp = C(ww_p)
    w2 = product(w, w)
    w2_avg = w2.mean
    wphi_avg = average_product(w, phi)
    wCwp_avg = average_product(w, Cwp)
    lin_avg = average_product(phi, Cwp) + average_product(w, Cphip)
    dlam = np.asarray(dlam, dtype=float)
    nu = np.asarray(nu, dtype=float)
    mu_lam = mu + lam * lam

    dF1 = (
        mu_lam * 2.0 * Cphip
        - 2.0 * g * (C_wphi_p + product(phi, Cwp) + product(w, Cphip))
        - U2 * (
            C(derivative(product(w2, phi)))
            + 2.0 * product(wphi, Cwp)
            + product(w2, Cphip)
            - 2.0 * product(phi, C_wwp)
            - 2.0 * product(w, C_wphi_p)
        )
        + (U2 / (k * h)) * (phi * w2_avg + w * (2.0 * wphi_avg))
        - (2.0 * U2 / k) * wphi
        + ((2.0 * U2 / k) * wphi_avg + 2.0 * g * lin_avg)
        - (2.0 * g / k + 2.0 * lam * ups / k) * phi
        + Cwp * (2.0 * nu + 4.0 * lam * dlam)
        - w * ((2.0 * ups / k) * dlam)
    )
    dF1 = dF1 - dF1.mean

    E = C_wwp - product(w, Cwp) - w / k + w2_avg / (2.0 * k * h)
    dE = C_wphi_p - product(phi, Cwp) - product(w, Cphip) - phi / k + wphi_avg / (k * h)
    grad_sq = average_product(Cwp, Cwp) + average_product(wp, wp)
    dF2 = (
        2.0 * U2 * average_product(dE, E)
        + 2.0 * (2.0 * g + lam * ups) / k * lin_avg
        + 2.0 * g * (average_product(phi, product(wp, wp)) + 2.0 * average_product(phip, product(w, wp)))
        + 2.0 * g * (average_product(phi, product(Cwp, Cwp)) + 2.0 * average_product(Cphip, product(w, Cwp)))
        - 2.0 * lam * ups * wphi_avg / (k * k * h)
        - 2.0 * mu_lam * (average_product(Cphip, Cwp) + average_product(phip, wp))
        - nu * (grad_sq + 1.0 / (k * k))
        + dlam * (2.0 * ups / k * wCwp_avg - ups * w2_avg / (k * k * h) - 2.0 * lam * grad_sq)
    )
    return dF1, dF2


def _cos_basis(N: int) -> PeriodicSeries:
    c = np.zeros((N, N + 1), dtype=complex)
    c[np.arange(N), np.arange(1, N + 1)] = 0.5
    return PeriodicSeries(c)


def jacobian_F(params: WaveParameters, p: SolutionPoint):
    """Dense Jacobian in the (cos coefficients of w, mu) unknowns.

    Returns ``(J, J_lam)``: ``J`` is (N+1, N+1) with rows (cos modes 1..N of F1, F2)
    and columns (a_1..a_N, mu); ``J_lam`` is the derivative along lam.
    """
    N = p.w.N
    w = p.w
    dF1, dF2 = directional_derivative(params, p.lam, p.mu, w, _cos_basis(N))
    J = np.zeros((N + 1, N + 1))
    J[:N, :N] = dF1.resized(N).cos_coeffs.T
    J[N, :N] = dF2
    g1, g2 = directional_derivative(params, p.lam, p.mu, w, PeriodicSeries.zeros(N), nu=1.0)
    J[:N, N] = g1.resized(N).cos_coeffs
    J[N, N] = g2
    l1, l2 = directional_derivative(params, p.lam, p.mu, w, PeriodicSeries.zeros(N), dlam=1.0)
    J_lam = np.append(l1.resized(N).cos_coeffs, l2)
    return J, J_lam


# ---------------------------------------------------------------------------
# bifurcation from the laminar family

def dispersion_residual(params: WaveParameters, lam: float, n: int) -> float:
    """Relative residual of lam^2 n k coth(nkh) = g + ups lam."""
    lhs = lam * lam * n * params.k * float(coth_multiplier(n, params.depth))
    rhs = params.g + params.upsilon * lam
    return abs(lhs - rhs) / max(abs(lhs), abs(params.g), abs(params.upsilon * lam))


def bifurcation_points(params: WaveParameters, n_max: int) -> list:
    """Laminar states where the n-th mode multiplier vanishes, for n = 1..n_max and both roots."""
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be a positive integer, got {n_max}")
    g, ups, k, h = params.g, params.upsilon, params.k, params.h
    out = []
    for n in range(1, int(n_max) + 1):
        t = np.tanh(n * k * h)
        # lam^2 - b lam - c = 0
        b = ups * t / (n * k)
        c = g * t / (n * k)
        disc = np.sqrt(b * b / 4.0 + c)
        big = b / 2.0 + (disc if b >= 0 else -disc)
        small = -c / big
        roots = {"+": max(big, small), "-": min(big, small)}
        for sign in ("+", "-"):
            lam = float(roots[sign])
            m, Q = convert_parameters(params, lam=lam, mu=0.0)
            out.append(BifurcationPoint(n, sign, lam, m, Q))
    return out


def find_bifurcation_point(params: WaveParameters, n: int, sign: str) -> BifurcationPoint:
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return next(bp for bp in bifurcation_points(params, n) if bp.n == n and bp.sign == sign)


# ---------------------------------------------------------------------------
# irrotational special case

def irrotational_reduction_check(params: WaveParameters, p: SolutionPoint) -> float:
    """Max coefficient of the classical irrotational surface equation in shifted variables.

    With beta = [w C(w')], v~ = w - beta and mu~ = (mu + lam^2)/g - 2 beta, returns
    the residual of mu~ C(v~') - v~ - v~ C(v~') - C(v~ v~').
    """
    if params.upsilon != 0.0:
        raise ValueError("the irrotational reduction needs zero vorticity")
    if params.k != 1.0:
        raise ValueError("the irrotational reduction is stated for k = 1")
    d = params.depth
    w = p.w
    Cwp = spectral.conjugation(derivative(w), d)
    beta = average_product(w, Cwp)
    vt = w - beta
    mut = (p.mu + p.lam**2) / params.g - 2.0 * beta
    Cvt = spectral.conjugation(derivative(vt), d)
    r = mut * Cvt - vt - product(vt, Cvt) - spectral.conjugation(derivative(product(vt, vt)) * 0.5, d)
    return r.sup_norm_coeffs()
