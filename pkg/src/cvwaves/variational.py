"""Energy functional on the conformal strip and its first variations.

For v = h + w with [w] = 0 the functional is

    Lam(w, h) = int (Q v - g v^2 - ups^2 v^3 / 3)(1/k + C(v')) dx
              + int (m - ups v^2 / 2)(m/(kh) - ups [v^2]/(2kh) - ups C(v v')) dx,

integrated over one period in x, with C = C_{kh}.  Its w-gradient ``eta`` has
mean-zero part equal to F1, and its h-derivative combines F1 and F2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .governing import WaveParameters, SolutionPoint, convert_parameters
from .spectral import PeriodicSeries, average_product, derivative, inner, product

__all__ = [
    "VariationalState",
    "lambda_functional",
    "lambda_functional_flat",
    "variation_w",
    "variation_h",
    "eta_average_formula",
    "variation_h_identity",
]


@dataclass(frozen=True, eq=False)
class VariationalState:
    """Point (w, h) of the functional with fixed (m, Q); ``params.h`` is ignored in favour of ``h``."""

    w: PeriodicSeries
    h: float
    m: float
    Q: float
    params: WaveParameters

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h}")
        if abs(self.w.mean) > 1e-12 * max(1.0, self.w.sup_norm_coeffs()):
            raise ValueError(f"w must have zero mean, got {self.w.mean}")

    @classmethod
    def from_point(cls, params: WaveParameters, p: SolutionPoint) -> "VariationalState":
        return cls(p.w, params.h, p.m, p.Q, params)

    @property
    def v(self) -> PeriodicSeries:
        return self.w + self.h

    @property
    def depth(self) -> float:
        return self.params.k * self.h

    def with_w(self, w) -> "VariationalState":
        return VariationalState(w, self.h, self.m, self.Q, self.params)

    def with_h(self, h) -> "VariationalState":
        return VariationalState(self.w, h, self.m, self.Q, self.params)

    def as_point(self) -> SolutionPoint:
        """(lam, mu) representation at this state's own h."""
        prm = self.params.with_(h=self.h)
        lam, mu = convert_parameters(prm, m=self.m, Q=self.Q)
        return SolutionPoint.build(prm, lam, mu, self.w)


def _pieces(state: VariationalState):
    prm = state.params
    g, ups, k = prm.g, prm.upsilon, prm.k
    h, m, Q = state.h, state.m, state.Q
    d = state.depth
    v = state.v
    vp = derivative(v)
    Vy = spectral.conjugation(vp, d) + 1.0 / k
    v2 = product(v, v)
    C_vvp = spectral.conjugation(derivative(v2) * 0.5, d)
    top = m / (k * h) - ups * v2.mean / (2.0 * k * h) - ups * C_vvp
    return g, ups, k, h, m, Q, d, v, vp, Vy, v2, C_vvp, top


def lambda_functional(state: VariationalState) -> float:
    g, ups, k, h, m, Q, d, v, vp, Vy, v2, C_vvp, top = _pieces(state)
    P = Q * v - g * v2 - (ups * ups / 3.0) * product(v2, v)
    return float(inner(P, Vy) + inner(m - 0.5 * ups * v2, top))


def lambda_functional_flat(params: WaveParameters, h: float, m: float, Q: float) -> float:
    """Closed form of the functional at w = 0."""
    g, ups, k = params.g, params.upsilon, params.k
    return 2.0 * np.pi * (
        (Q * h - g * h * h - ups * ups * h**3 / 3.0) / k + (m - ups * h * h / 2.0) * (m / (k * h) - ups * h / (2.0 * k))
    )


def variation_w(state: VariationalState) -> PeriodicSeries:
    """eta such that dLam(w)[phi] = int eta phi dx for mean-zero phi."""
    g, ups, k, h, m, Q, d, v, vp, Vy, v2, C_vvp, top = _pieces(state)
    Pp = Q - 2.0 * g * v - ups * ups * v2
    return spectral.conjugation(product(Pp, vp), d) + product(Pp, Vy) - 2.0 * ups * product(v, top)


def variation_h(state: VariationalState) -> float:
    """d Lam / d h at fixed w, m, Q."""
    g, ups, k, h, m, Q, d, v, vp, Vy, v2, C_vvp, top = _pieces(state)
    w = state.w
    D = lambda f: spectral.dh_conjugation_derivative(f, d, k)
    P = Q * v - g * v2 - (ups * ups / 3.0) * product(v2, v)
    Pp = Q - 2.0 * g * v - ups * ups * v2
    dtop = (
        -m / (k * h * h)
        - ups / k
        + ups * v2.mean / (2.0 * k * h * h)
        - ups * spectral.conjugation(derivative(w), d)
        - ups * D(v2 * 0.5)
    )
    out = inner(Pp, Vy) + inner(P, D(w)) - ups * inner(v, top) + inner(m - 0.5 * ups * v2, dtop)
    return float(out)


def eta_average_formula(state: VariationalState) -> float:
    """[eta] = (Q - 2gh - 2 ups m)/k - 2g [v C(v')]."""
    g, ups, k = state.params.g, state.params.upsilon, state.params.k
    v = state.v
    Cvp = spectral.conjugation(derivative(v), state.depth)
    return (state.Q - 2.0 * g * state.h - 2.0 * ups * state.m) / k - 2.0 * g * average_product(v, Cvp)


def variation_h_identity(state: VariationalState) -> float:
    """-k int F1 C(v') dx - 2 pi k F2, the combination the h-derivative must equal."""
    from .governing import residual_F

    prm = state.params.with_(h=state.h)
    F1, F2 = residual_F(prm, state.as_point())
    Cvp = spectral.conjugation(derivative(state.w), state.depth)
    k = prm.k
    return float(-k * inner(F1, Cvp) - 2.0 * np.pi * k * F2)
