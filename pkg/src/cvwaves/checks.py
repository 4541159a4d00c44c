"""Cross-module diagnostic suite: operator identities, gradient checks and equivalence residuals.

Every check calls library functions through their module (``spectral.conjugation``
and so on) so a patched operator is seen by all checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import continuation, flowfield, governing, spectral, variational
from .spectral import PeriodicSeries

__all__ = ["CheckResult", "run_checks", "random_series"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.error) and self.error <= self.tol)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name:<34s} error={self.error:.3e} tol={self.tol:.1e}"


def random_series(rng, N, decay=1.0, mean=0.0, even=False, scale=1.0) -> PeriodicSeries:
    n = np.arange(1, N + 1, dtype=float)
    a = rng.normal(size=N) * scale * n**-decay
    b = np.zeros(N) if even else rng.normal(size=N) * scale * n**-decay
    return PeriodicSeries.from_trig(mean, a, b)


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def check_multipliers(rng, d=1.0, N=64):
    worst = 0.0
    for n in range(1, N + 1):
        expect = float(spectral.coth_multiplier(n, d))
        for kind in ("cos", "sin"):
            f = spectral.trig_monomial(n, kind, N)
            out = spectral.conjugation(f, d)
            if kind == "cos":
                got, other = out.sin_coeffs[n - 1], out.cos_coeffs
            else:
                got, other = -out.cos_coeffs[n - 1], out.sin_coeffs
            worst = max(worst, abs(got - expect) / expect, np.max(np.abs(other)))
    return CheckResult("conjugation multipliers", worst, 1e-12)


def check_skew_adjoint(rng, d=0.7, N=16, trials=5):
    worst = 0.0
    for _ in range(trials):
        f, g = random_series(rng, N), random_series(rng, N)
        worst = max(worst, _rel(spectral.inner(f, spectral.conjugation(g, d)), -spectral.inner(spectral.conjugation(f, d), g)))
    return CheckResult("conjugation skew-adjointness", worst, 1e-10)


def check_self_adjoint(rng, d=0.7, N=16, trials=5):
    worst = 0.0
    C = lambda f: spectral.conjugation(spectral.derivative(f), d)
    for _ in range(trials):
        f, g = random_series(rng, N, 1.5), random_series(rng, N, 1.5)
        worst = max(worst, _rel(spectral.inner(f, C(g)), spectral.inner(g, C(f))))
    return CheckResult("C(d/dx) self-adjointness", worst, 1e-10)


def check_average_identity(rng, d=0.9, N=16, trials=5):
    worst = 0.0
    for _ in range(trials):
        v = random_series(rng, N, 2.0, mean=1.0, even=False, scale=0.2)
        vp = spectral.derivative(v)
        lhs = spectral.average_product(spectral.product(v, v), spectral.conjugation(vp, d))
        vvp = spectral.derivative(spectral.product(v, v)) * 0.5
        rhs = 2.0 * spectral.average_product(v, spectral.conjugation(vvp, d))
        worst = max(worst, _rel(lhs, rhs))
    return CheckResult("average identity [v^2 C(v')]", worst, 1e-10)


def check_algebra(rng, d=0.8, N=12, trials=5):
    worst = 0.0
    for _ in range(trials):
        w1, w2 = random_series(rng, N, 2.0), random_series(rng, N, 2.0)
        z1 = spectral.conjugation(w1, d) + rng.normal()
        z2 = spectral.conjugation(w2, d) + rng.normal()
        z = spectral.product(z1, z2) - spectral.product(w1, w2)
        w = spectral.product(z1, w2) + spectral.product(z2, w1)
        wm = w.mean
        err = (z - z.mean - spectral.conjugation(w - wm, d)).sup_norm_coeffs()
        worst = max(worst, err / max(1.0, z.sup_norm_coeffs()), abs(wm))
    return CheckResult("boundary-pair algebra", worst, 1e-10)


def check_kernel(rng, d=0.6, N=16, K=64, trials=3):
    worst = 0.0
    for _ in range(trials):
        w = random_series(rng, N, 2.0)
        a = spectral.conjugation(w, d)
        b = spectral.conjugation_via_kernel(w, d, K)
        worst = max(worst, (a - b).sup_norm_coeffs() / max(1.0, a.sup_norm_coeffs()))
    return CheckResult("kernel path vs multiplier", worst, 1e-8)


def check_trivial_branch(rng, params):
    worst = 0.0
    for lam in np.linspace(-2, 2, 10):
        for mu in np.linspace(-1, 1, 10):
            F1, F2 = governing.residual_F(params, governing.SolutionPoint.build(params, lam, mu))
            worst = max(worst, F1.sup_norm_coeffs(), abs(F2 + mu / params.k**2))
    return CheckResult("trivial branch F = (0, -mu/k^2)", worst, 1e-14)


def check_jacobian(rng, params, trials=3, eps=1e-6):
    worst = 0.0
    N = params.N
    for _ in range(trials):
        a = random_series(rng, N, 2.0, even=True, scale=0.05).cos_coeffs
        lam, mu = rng.uniform(0.5, 1.5), rng.uniform(-0.2, 0.2)
        p = governing.SolutionPoint.build(params, lam, mu, a)
        J, J_lam = governing.jacobian_F(params, p)

        def F(lam, mu, a):
            F1, F2 = governing.residual_components(params, lam, mu, PeriodicSeries.from_trig(0.0, a))
            return np.append(F1.resized(N).cos_coeffs, F2)

        cols = []
        for j in range(N):
            e = np.zeros(N)
            e[j] = eps
            cols.append((F(lam, mu, a + e) - F(lam, mu, a - e)) / (2 * eps))
        cols.append((F(lam, mu + eps, a) - F(lam, mu - eps, a)) / (2 * eps))
        Jfd = np.column_stack(cols)
        jl = (F(lam + eps, mu, a) - F(lam - eps, mu, a)) / (2 * eps)
        scale = max(1.0, np.max(np.abs(J)))
        worst = max(worst, np.max(np.abs(J - Jfd)) / scale, np.max(np.abs(J_lam - jl)) / scale)
    return CheckResult("Jacobian vs finite differences", worst, 1e-6)


def check_dispersion(rng, params, n_max=8):
    worst = 0.0
    for ups in [params.upsilon, *rng.uniform(-2, 2, 5)]:
        prm = params.with_(upsilon=float(ups))
        for bp in governing.bifurcation_points(prm, n_max):
            worst = max(worst, governing.dispersion_residual(prm, bp.lambda_star, bp.n))
    return CheckResult("bifurcation dispersion residual", worst, 1e-12)


def _state(rng, params):
    w = random_series(rng, params.N, 2.5, even=True, scale=0.05)
    h = params.h * rng.uniform(0.8, 1.2)
    return variational.VariationalState(w, h, rng.uniform(0.3, 1.2), rng.uniform(2.2, 3.5), params)


def check_variation_w(rng, params, trials=3, eps=1e-5):
    worst = 0.0
    for _ in range(trials):
        st = _state(rng, params)
        phi = random_series(rng, params.N, 2.0, even=True)
        eta = variational.variation_w(st)
        fd = (variational.lambda_functional(st.with_w(st.w + eps * phi)) - variational.lambda_functional(st.with_w(st.w - eps * phi))) / (2 * eps)
        worst = max(worst, _rel(fd, spectral.inner(eta, phi)))
    return CheckResult("functional w-gradient vs FD", worst, 1e-5)


def check_variation_h(rng, params, trials=3, eps=1e-6):
    worst_fd = worst_id = 0.0
    for _ in range(trials):
        st = _state(rng, params)
        dh = variational.variation_h(st)
        fd = (variational.lambda_functional(st.with_h(st.h + eps)) - variational.lambda_functional(st.with_h(st.h - eps))) / (2 * eps)
        worst_fd = max(worst_fd, _rel(fd, dh))
        worst_id = max(worst_id, _rel(dh, variational.variation_h_identity(st)))
    return [
        CheckResult("functional h-derivative vs FD", worst_fd, 1e-5),
        CheckResult("h-derivative identity", worst_id, 1e-9),
    ]


def check_eta_vs_F1(rng, params, trials=3):
    worst = 0.0
    for _ in range(trials):
        st = _state(rng, params)
        eta = variational.variation_w(st)
        F1, _ = governing.residual_F(params.with_(h=st.h), st.as_point())
        worst = max(worst, (eta - eta.mean - F1).sup_norm_coeffs())
    return CheckResult("eta - [eta] = F1", worst, 1e-10)


def check_equivalence(rng, params, tol=1e-10):
    bp = governing.find_bifurcation_point(params, 1, "+")
    p = continuation.switch_branch(params, bp, 0.02 * params.h, tol=tol)
    rep = governing.check_equivalence(params, p, tol)
    return CheckResult("Bernoulli residual at branch point", rep.bernoulli_residual, 10 * tol)


def check_field(rng, params):
    bp = governing.find_bifurcation_point(params, 1, "+")
    p = continuation.switch_branch(params, bp, 0.02 * params.h)
    fl = flowfield.build_flowfield(params, p, 64, 33)
    return [
        CheckResult("Cauchy-Riemann residual", flowfield.cauchy_riemann_residual(fl), 1e-8),
        CheckResult("flux per column", flowfield.flux_residual(fl), 1e-8),
        CheckResult("surface Bernoulli / Q", flowfield.surface_bernoulli_residual(fl), 1e-8),
    ]


def run_checks(seed: int = 0, params: governing.WaveParameters | None = None) -> list:
    """Run the full diagnostic suite; returns a list of :class:`CheckResult`."""
    rng = np.random.default_rng(seed)
    params = params or governing.WaveParameters(N=16)
    small = params.with_(N=min(params.N, 16))
    out = [
        check_multipliers(rng),
        check_skew_adjoint(rng),
        check_self_adjoint(rng),
        check_average_identity(rng),
        check_algebra(rng),
        check_kernel(rng),
        check_trivial_branch(rng, small),
        check_jacobian(rng, small),
        check_dispersion(rng, params),
        check_variation_w(rng, small),
        *check_variation_h(rng, small),
        check_eta_vs_F1(rng, small),
        check_equivalence(rng, small),
        *check_field(rng, small),
    ]
    return out
