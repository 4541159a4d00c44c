import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from cvwaves import governing, spectral
from cvwaves.continuation import scan_trivial_branch, sign_changes, switch_branch
from cvwaves.governing import SolutionPoint, WaveParameters
from cvwaves.spectral import PeriodicSeries

# frozen 40-digit oracles
SQRT_TANH1 = 0.87269362089782969154
TWO_PLUS_TANH1 = 2.7615941559557648881
D1_AT_LAMBDA_ONE = 0.62607057099866260727
# roots of lam^2 coth(1) = 1 - 2 lam (g = k = h = 1, ups = -2)
UPS_M2_PLUS = 0.39668897624539896457
UPS_M2_MINUS = -1.9198772881569287408

BASE = WaveParameters()
SMALL = WaveParameters(N=16)


def even_series(rng, N, scale=0.05, decay=2.0):
    n = np.arange(1, N + 1, dtype=float)
    return PeriodicSeries.from_trig(0.0, rng.normal(size=N) * scale * n**-decay)


# -- parameters -------------------------------------------------------------

@pytest.mark.parametrize("kw", [dict(g=0.0), dict(k=-1.0), dict(h=0.0), dict(N=4), dict(upsilon=np.inf)])
def test_wave_parameters_validation(kw):
    with pytest.raises(ValueError):
        WaveParameters(**kw)


def test_convert_parameters_example():
    m, Q = governing.convert_parameters(BASE, lam=1.0, mu=0.0)
    assert (m, Q) == (1.0, 3.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-3, 3), st.floats(0.2, 3))
def test_convert_parameters_roundtrip(lam, mu, ups, h):
    p = WaveParameters(upsilon=ups, h=h)
    m, Q = governing.convert_parameters(p, lam=lam, mu=mu)
    lam2, mu2 = governing.convert_parameters(p, m=m, Q=Q)
    assert lam2 == pytest.approx(lam, abs=1e-14 * max(1.0, abs(lam), abs(ups * h)))
    assert mu2 == pytest.approx(mu, abs=1e-14 * max(1.0, abs(Q)))


def test_convert_parameters_needs_one_pair():
    with pytest.raises(ValueError):
        governing.convert_parameters(BASE, lam=1.0, Q=2.0)


@pytest.mark.parametrize("mu", [0.0, 0.3])
def test_trivial_pair_satisfies_laminar_relation_iff_mu_zero(mu):
    p = WaveParameters(upsilon=-1.3, h=0.8, g=2.0)
    m, Q = governing.convert_parameters(p, lam=0.7, mu=mu)
    gap = Q - (2 * p.g * p.h + (m / p.h + p.upsilon * p.h / 2) ** 2)
    assert abs(gap - mu) <= 1e-14


# -- residual -----------------------------------------------------------------

def test_trivial_branch_identity_grid():
    p = WaveParameters(upsilon=0.7, k=1.3, h=0.9, N=16)
    for lam in np.linspace(-2, 2, 10):
        for mu in np.linspace(-1, 1, 10):
            F1, F2 = governing.residual_F(p, SolutionPoint.build(p, lam, mu))
            assert F1.sup_norm_coeffs() == 0.0
            assert F2 == pytest.approx(-mu / p.k**2, abs=1e-15)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_evenness_closure(seed):
    rng = np.random.default_rng(seed)
    p = WaveParameters(upsilon=rng.uniform(-2, 2), N=16)
    F1, _ = governing.residual_F(p, SolutionPoint.build(p, rng.uniform(-1, 1), rng.uniform(-1, 1), even_series(rng, 16)))
    assert np.max(np.abs(F1.sin_coeffs)) <= 1e-12
    assert abs(F1.mean) <= 1e-12


def test_residual_linearization_slope_two():
    rng = np.random.default_rng(7)
    p = WaveParameters(upsilon=-0.6, k=1.2, N=16)
    phi = even_series(rng, 16, scale=1.0)
    lam, mu = 0.9, 0.1
    lin = governing.linearized_operator(p, lam, mu)
    errs, eps = [], np.array([1e-2, 5e-3, 2.5e-3])
    for e in eps:
        F1, _ = governing.residual_F(p, SolutionPoint.build(p, lam, mu, phi * e))
        expect = PeriodicSeries.from_trig(0.0, lin.multipliers * phi.cos_coeffs * e)
        errs.append((F1.resized(16) - expect).sup_norm_coeffs())
    slope = np.polyfit(np.log(eps), np.log(errs), 1)[0]
    assert abs(slope - 2.0) < 0.1


# -- Bernoulli and equivalence -------------------------------------------------

def test_bernoulli_trivial_zero():
    p = WaveParameters(upsilon=-1.0, g=1.5, h=0.7, k=2.0, N=8)
    m = 0.4
    Q = 2 * p.g * p.h + (m / p.h + p.upsilon * p.h / 2) ** 2
    r = governing.residual_bernoulli(p, m, Q, PeriodicSeries.constant(p.h, 8))
    assert r.sup_norm() <= 1e-14


def test_bernoulli_off_relation_is_constant():
    p = WaveParameters(upsilon=-1.0, g=1.5, h=0.7, k=2.0, N=8)
    m, Q = 0.4, 3.0
    r = governing.residual_bernoulli(p, m, Q, PeriodicSeries.constant(p.h, 8))
    expect = ((m / p.h + p.upsilon * p.h / 2) ** 2 - (Q - 2 * p.g * p.h)) / p.k**2
    vals = r.to_grid(8 * r.N)
    np.testing.assert_allclose(vals, expect, rtol=1e-13)


def test_bernoulli_requires_mean_h():
    with pytest.raises(ValueError):
        governing.residual_bernoulli(BASE, 1.0, 3.0, PeriodicSeries.constant(2.0, 4))


def test_equivalence_trivial():
    rep = governing.check_equivalence(BASE, SolutionPoint.build(BASE, 0.5, 0.0))
    assert rep.bernoulli_residual <= 1e-14
    assert max(rep.system_residual) == 0.0
    assert rep.min_grad_V_sq == pytest.approx(1.0 / BASE.k**2, rel=1e-12)
    assert rep.direction_i and rep.direction_ii


@pytest.mark.parametrize("ups", [0.0, -2.0, 1.0])
def test_equivalence_converged_point(ups):
    p = WaveParameters(upsilon=ups, N=32)
    bp = governing.find_bifurcation_point(p, 1, "+")
    pt = switch_branch(p, bp, 0.05)
    rep = governing.check_equivalence(p, pt, 1e-10)
    assert rep.bernoulli_residual <= 1e-9
    assert rep.direction_i and rep.direction_ii


def test_equivalence_flags_surface_stagnation():
    p = WaveParameters(k=1.3, h=0.8, N=16)
    a = -np.tanh(p.depth) / p.k  # 1/k + C(v')(0) = 0 and v'(0) = 0
    w = PeriodicSeries.from_trig(0.0, np.eye(16)[0] * a)
    rep = governing.check_equivalence(p, SolutionPoint.build(p, 0.5, 0.0, w))
    assert rep.min_grad_V_sq <= 1e-12
    assert not rep.direction_ii


# -- linearization ----------------------------------------------------------------

def test_linearized_operator_example():
    lin = governing.linearized_operator(BASE, 1.0)
    assert lin.multipliers[0] == pytest.approx(D1_AT_LAMBDA_ONE, rel=1e-14)
    assert lin.mu_entry == -1.0


@pytest.mark.parametrize("ups", [0.0, -2.0, 1.5])
def test_multiplier_vanishes_at_bifurcation(ups):
    p = WaveParameters(upsilon=ups)
    for bp in governing.bifurcation_points(p, 5):
        d = governing.linearized_operator(p, bp.lambda_star).multipliers[bp.n - 1]
        assert abs(d) <= 1e-12


def test_jacobian_at_trivial_equals_diagonal():
    p = WaveParameters(upsilon=-0.8, N=12)
    J, _ = governing.jacobian_F(p, SolutionPoint.build(p, 0.9, 0.0))
    lin = governing.linearized_operator(p, 0.9)
    np.testing.assert_allclose(J, np.diag(np.append(lin.multipliers, lin.mu_entry)), atol=1e-13)


def _fd_jacobian(p, lam, mu, a, eps=1e-6):
    def F(lam, mu, a):
        F1, F2 = governing.residual_components(p, lam, mu, PeriodicSeries.from_trig(0.0, a))
        return np.append(F1.resized(p.N).cos_coeffs, F2)

    cols = []
    for j in range(p.N):
        e = np.zeros(p.N)
        e[j] = eps
        cols.append((F(lam, mu, a + e) - F(lam, mu, a - e)) / (2 * eps))
    cols.append((F(lam, mu + eps, a) - F(lam, mu - eps, a)) / (2 * eps))
    return np.column_stack(cols), (F(lam + eps, mu, a) - F(lam - eps, mu, a)) / (2 * eps)


def test_jacobian_matches_fd_random_points():
    rng = np.random.default_rng(11)
    for _ in range(20):
        p = WaveParameters(upsilon=rng.uniform(-2, 2), k=rng.uniform(0.5, 2), N=10)
        a = even_series(rng, p.N).cos_coeffs
        lam, mu = rng.uniform(-1.5, 1.5), rng.uniform(-0.3, 0.3)
        J, J_lam = governing.jacobian_F(p, SolutionPoint.build(p, lam, mu, a))
        Jfd, jl = _fd_jacobian(p, lam, mu, a)
        scale = max(1.0, np.max(np.abs(J)))
        assert np.max(np.abs(J - Jfd)) / scale <= 1e-6
        assert np.max(np.abs(J_lam - jl)) / scale <= 1e-6


def test_transversality_matches_fd_and_nonzero():
    p = WaveParameters(upsilon=-1.0, k=1.4)
    for bp in governing.bifurcation_points(p, 3):
        t = governing.transversality(p, bp.lambda_star, bp.n)
        eps = 1e-6
        d = lambda lam: governing.linearized_operator(p, lam).multipliers[bp.n - 1]
        assert t == pytest.approx((d(bp.lambda_star + eps) - d(bp.lambda_star - eps)) / (2 * eps), rel=1e-7)
        assert abs(t) > 1e-3


# -- bifurcation points ----------------------------------------------------------

def test_bifurcation_irrotational_values():
    pts = {(bp.n, bp.sign): bp for bp in governing.bifurcation_points(BASE, 1)}
    assert pts[1, "+"].lambda_star == pytest.approx(SQRT_TANH1, rel=1e-15)
    assert pts[1, "-"].lambda_star == pytest.approx(-SQRT_TANH1, rel=1e-15)
    assert pts[1, "+"].m_star == pytest.approx(SQRT_TANH1, rel=1e-15)
    assert pts[1, "-"].m_star == pytest.approx(-SQRT_TANH1, rel=1e-15)
    for s in "+-":
        assert pts[1, s].Q_star == pytest.approx(TWO_PLUS_TANH1, rel=1e-15)


def test_bifurcation_dispersion_residual():
    rng = np.random.default_rng(5)
    for ups in [0.0, *rng.uniform(-2, 2, 5)]:
        p = WaveParameters(upsilon=float(ups))
        pts = governing.bifurcation_points(p, 8)
        assert len(pts) == 16
        lams = [bp.lambda_star for bp in pts]
        assert len(set(np.round(lams, 14))) == 16 and all(lam != 0 for lam in lams)
        for bp in pts:
            assert governing.dispersion_residual(p, bp.lambda_star, bp.n) <= 1e-12


def test_bifurcation_with_vorticity_against_bisection():
    p = WaveParameters(upsilon=-2.0)
    f = lambda lam: lam**2 / np.tanh(1.0) - 1.0 + 2.0 * lam
    plus = brentq(f, 0.0, 1.0, xtol=1e-15)
    minus = brentq(f, -3.0, -1.0, xtol=1e-15)
    assert plus == pytest.approx(UPS_M2_PLUS, rel=1e-13)
    assert minus == pytest.approx(UPS_M2_MINUS, rel=1e-13)
    assert governing.find_bifurcation_point(p, 1, "+").lambda_star == pytest.approx(UPS_M2_PLUS, rel=1e-14)
    assert governing.find_bifurcation_point(p, 1, "-").lambda_star == pytest.approx(UPS_M2_MINUS, rel=1e-14)


def test_bifurcation_points_validation():
    with pytest.raises(ValueError):
        governing.bifurcation_points(BASE, 0)
    with pytest.raises(ValueError):
        governing.find_bifurcation_point(BASE, 1, "x")


@pytest.mark.parametrize("lo,expected", [(0.8, 1), (0.6, 2), (0.5, 3)])
def test_det_scan_brackets_bifurcations(lo, expected):
    scan = scan_trivial_branch(BASE, (lo, 1.0), 100)
    changes = sign_changes(scan)
    assert len(changes) == expected
    stars = [bp.lambda_star for bp in governing.bifurcation_points(BASE, BASE.N) if lo < bp.lambda_star < 1.0]
    assert len(stars) == expected
    for a, b in changes:
        assert sum(a < s < b for s in stars) == 1


def test_det_scan_without_bifurcation():
    assert sign_changes(scan_trivial_branch(BASE, (1.0, 2.0), 100)) == []


# -- irrotational reduction -------------------------------------------------------------

def test_irrotational_reduction_trivial():
    assert governing.irrotational_reduction_check(BASE, SolutionPoint.build(BASE, 0.8, 0.0)) == 0.0


def test_irrotational_reduction_converged_point():
    p = WaveParameters(N=32, h=0.7)
    pt = switch_branch(p, governing.find_bifurcation_point(p, 1, "+"), 0.05)
    assert governing.irrotational_reduction_check(p, pt) <= 1e-8


def test_irrotational_reduction_discriminates():
    rng = np.random.default_rng(2)
    pt = SolutionPoint.build(SMALL, 0.8, 0.1, even_series(rng, 16))
    assert governing.irrotational_reduction_check(SMALL, pt) > 1e-4


def test_irrotational_reduction_preconditions():
    pt = SolutionPoint.build(BASE, 0.8, 0.0)
    with pytest.raises(ValueError):
        governing.irrotational_reduction_check(BASE.with_(upsilon=1.0), pt)
    with pytest.raises(ValueError):
        governing.irrotational_reduction_check(BASE.with_(k=2.0), pt)


def test_directional_derivative_batched():
    rng = np.random.default_rng(4)
    p = WaveParameters(upsilon=0.5, N=8)
    w = even_series(rng, 8)
    phis = PeriodicSeries.from_trig(np.zeros(3), rng.normal(size=(3, 8)))
    F1b, F2b = governing.directional_derivative(p, 0.9, 0.1, w, phis)
    for i in range(3):
        F1, F2 = governing.directional_derivative(p, 0.9, 0.1, w, PeriodicSeries(phis.coeffs[i]))
        np.testing.assert_allclose(F1b.coeffs[i], F1.coeffs, atol=1e-14)
        assert F2b[i] == pytest.approx(F2, abs=1e-14)
