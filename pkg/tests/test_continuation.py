import numpy as np
import pytest

from cvwaves import continuation, governing
from cvwaves.continuation import (
    TERMINATION_CAUSES,
    ContinuationConfig,
    ContinuationState,
    NodalReport,
    continue_branch,
    nodal_monitor,
    switch_branch,
)
from cvwaves.governing import SolutionPoint, WaveParameters
from cvwaves.spectral import PeriodicSeries

BASE = WaveParameters()


@pytest.fixture(scope="module")
def branch():
    return continue_branch(BASE, ContinuationConfig(max_amplitude=0.15))


def bp(params=BASE, n=1, sign="+"):
    return governing.find_bifurcation_point(params, n, sign)


# -- configuration -------------------------------------------------------------

@pytest.mark.parametrize(
    "kw",
    [
        dict(ds0=0.5, ds_max=0.1),
        dict(ds_min=0.0),
        dict(ds_min=0.05, ds0=0.02),
        dict(newton_tol=0.0),
        dict(sign="x"),
        dict(n=0),
        dict(n=1.5),
        dict(newton_max_iter=0),
        dict(q_floor=-1.0),
        dict(norm_ceiling=0.0),
        dict(max_amplitude=-0.1),
    ],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        ContinuationConfig(**kw)


def test_config_defaults():
    cfg = ContinuationConfig()
    assert cfg.resolved_q_floor(BASE) == pytest.approx(1e-3)
    assert cfg.resolved_s_init(BASE.with_(h=2.0)) == pytest.approx(2e-3)


def test_state_dict_roundtrip():
    st = ContinuationState(np.arange(3.0), np.ones(3), 0.1, 1, 4, 0.5, np.zeros(3), np.ones(3))
    back = ContinuationState.from_dict(st.to_dict())
    np.testing.assert_array_equal(back.u, st.u)
    assert (back.ds, back.step, back.s) == (0.1, 4, 0.5)


# -- branch switching ------------------------------------------------------------

def test_switch_zero_amplitude_is_trivial():
    p = switch_branch(BASE, bp(), 0.0)
    assert p.w.sup_norm_coeffs() == 0.0
    assert p.lam == bp().lambda_star


def test_switch_local_shape_slope_two():
    b = bp()
    ss = np.array([1e-3, 5e-4, 2.5e-4])
    shape_err, lam_err = [], []
    for s in ss:
        p = switch_branch(BASE, b, s)
        assert max(p.residual_norms) <= 1e-10
        w = p.w.cos_coeffs.copy()
        w[0] -= s
        shape_err.append(np.max(np.abs(w)))
        lam_err.append(abs(p.lam - b.lambda_star))
    assert abs(np.polyfit(np.log(ss), np.log(shape_err), 1)[0] - 2.0) <= 0.2
    assert abs(np.polyfit(np.log(ss), np.log(lam_err), 1)[0] - 2.0) <= 0.2


def test_switch_mode_two_has_period_pi():
    p = switch_branch(BASE, bp(n=2), 5e-3)
    odd = p.w.cos_coeffs[0::2]
    assert np.max(np.abs(odd)) <= 1e-10
    assert np.max(np.abs(p.w.cos_coeffs)) > 1e-3


@pytest.mark.parametrize("n", [2, 3])
def test_mode_confinement_near_onset(n):
    p = switch_branch(BASE, bp(n=n), 1e-2)
    a = p.w.cos_coeffs
    idx = np.arange(1, len(a) + 1)
    assert np.max(np.abs(a[idx % n != 0])) <= 1e-6 * np.max(np.abs(a))


@pytest.mark.parametrize("ups", [0.0, -1.0])
def test_half_turn_symmetry_local(ups):
    prm = WaveParameters(upsilon=ups, N=32)
    for s in (1e-3, 1e-2):
        plus = switch_branch(prm, bp(prm), s)
        minus = switch_branch(prm, bp(prm), -s)
        j = np.arange(1, prm.N + 1)
        np.testing.assert_allclose(minus.w.cos_coeffs, (-1.0) ** j * plus.w.cos_coeffs, atol=1e-8)
        assert minus.lam == pytest.approx(plus.lam, abs=1e-8)
        assert minus.mu == pytest.approx(plus.mu, abs=1e-8)


def test_half_turn_symmetry_along_branch():
    prm = WaveParameters(N=32)
    a = continue_branch(prm, ContinuationConfig(max_steps=4))
    b = continue_branch(prm, ContinuationConfig(max_steps=4, s_init=-1e-3))
    j = np.arange(1, prm.N + 1)
    for p, q in zip(a.points, b.points):
        np.testing.assert_allclose(q.w.cos_coeffs, (-1.0) ** j * p.w.cos_coeffs, atol=1e-8)
        assert q.lam == pytest.approx(p.lam, abs=1e-8)


def test_switch_rejects_unresolved_mode():
    with pytest.raises(ValueError):
        switch_branch(WaveParameters(N=8), bp(n=9), 1e-3)


# -- nodal monitor ------------------------------------------------------------------

def test_monitor_trivial_point():
    rep = nodal_monitor(BASE, SolutionPoint.build(BASE, bp().lambda_star, 0.0))
    assert not rep.nontrivial and not rep.monotone
    assert rep.u_range and rep.self_intersection_margin > 0


def test_monitor_small_amplitude_all_true():
    for ups, sign in ((0.0, "+"), (0.0, "-"), (-2.0, "+"), (1.5, "-")):
        prm = WaveParameters(upsilon=ups, N=32)
        p = switch_branch(prm, bp(prm, sign=sign), 1e-3)
        rep = nodal_monitor(prm, p, sign)
        assert rep.all_true, (ups, sign, rep)


def test_monitor_synthetic_self_intersection():
    prm = WaveParameters(k=1.2, h=0.9, N=16)
    # U(pi/2, 0) = pi/(2k) + a coth(kh) reaches pi/k
    a = 1.01 * (np.pi / (2 * prm.k)) * np.tanh(prm.depth)
    w = PeriodicSeries.from_trig(0.0, np.eye(16)[0] * a)
    rep = nodal_monitor(prm, SolutionPoint.build(prm, 0.8, 0.0, w))
    assert rep.self_intersection_margin <= 0.0
    assert not rep.u_range


def test_monitor_detects_non_monotone_profile():
    prm = WaveParameters(N=16)
    w = PeriodicSeries.from_trig(0.0, [0.01, 0.0, 0.01])
    rep = nodal_monitor(prm, SolutionPoint.build(prm, 0.9, 0.0, w))
    assert not rep.monotone


# -- continuation ---------------------------------------------------------------------

def test_branch_terminates_with_known_cause(branch):
    assert branch.termination in TERMINATION_CAUSES
    assert branch.termination == "amplitude_target"


def test_branch_points_satisfy_tolerance(branch):
    tol = branch.config.newton_tol
    for p in branch.points:
        assert max(p.residual_norms) <= tol
        assert max(governing.residual_norms(BASE, p)) <= tol


def test_branch_monitors_along_branch(branch):
    for mon in branch.monitors:
        assert mon.all_true
        assert mon.min_Q_minus_2gv > 0


def test_branch_newton_budget(branch):
    assert all(p.newton_iters <= branch.config.newton_max_iter for p in branch.points)


def test_branch_arclength_bookkeeping(branch):
    s = branch.arclength
    assert np.all(np.diff(s) > 0)
    us = [continuation._pack(p, BASE.N) for p in branch.points]
    for i in range(1, len(us)):
        ratio = np.linalg.norm(us[i] - us[i - 1]) / (s[i] - s[i - 1])
        assert 0.5 <= ratio <= 2.0


def test_branch_amplitude_grows(branch):
    amp = branch.amplitudes()
    assert np.all(np.diff(amp) > 0)
    assert amp[-1] >= 0.15


def test_branch_det_signs_recorded(branch):
    assert set(branch.det_signs) <= {-1, 1}
    assert len(branch.det_signs) == len(branch.points)


def test_restart_reproduces_points(branch):
    i = 2
    resumed = continue_branch(BASE, branch.config, resume=branch.states[i])
    tail = branch.points[i + 1 :]
    assert len(resumed.points) == len(tail)
    for p, q in zip(tail, resumed.points):
        np.testing.assert_allclose(q.w.cos_coeffs, p.w.cos_coeffs, atol=1e-8)
        assert q.lam == pytest.approx(p.lam, abs=1e-8)
        assert q.s == pytest.approx(p.s, abs=1e-8)


def test_terminates_on_q_floor():
    rec = continue_branch(WaveParameters(N=32), ContinuationConfig(q_floor=0.6))
    assert rec.termination == "Q_floor_hit"
    assert all(m.min_Q_minus_2gv > 0.6 for m in rec.monitors[:-1])


def test_terminates_on_norm_ceiling():
    rec = continue_branch(WaveParameters(N=32), ContinuationConfig(norm_ceiling=1.0))
    assert rec.termination == "norm_ceiling_hit"
    assert len(rec.points) == 1


def test_terminates_on_step_budget():
    rec = continue_branch(WaveParameters(N=32), ContinuationConfig(max_steps=2))
    assert rec.termination == "max_steps"
    assert len(rec.points) == 3


def _report(margin=1.0, q=1.0):
    return NodalReport(True, True, True, True, True, True, True, q, margin)


def test_stop_cause_self_intersection_and_loop():
    cfg = ContinuationConfig()
    p = switch_branch(WaveParameters(N=8), bp(WaveParameters(N=8)), 1e-3)
    u = continuation._pack(p, 8)
    far = u + 1.0
    assert continuation._stop_cause(WaveParameters(N=8), cfg, p, _report(margin=-1e-3), u, far, far, 1.0, 0.02) == "self_intersection"
    assert continuation._stop_cause(WaveParameters(N=8), cfg, p, _report(), u, far, u + 1e-3, 1.0, 0.02) == "loop_detected"
    assert continuation._stop_cause(WaveParameters(N=8), cfg, p, _report(), u, far, far, 1.0, 0.02) is None
    # a short trace cannot be flagged as a loop
    assert continuation._stop_cause(WaveParameters(N=8), cfg, p, _report(), u, far, u, 0.1, 0.02) is None


def test_newton_failure_is_reported(monkeypatch):
    monkeypatch.setattr(continuation, "_corrector", lambda *a, **k: (None, 5, (1.0, 1.0)))
    rec = continue_branch(WaveParameters(N=16), ContinuationConfig())
    assert rec.termination == "newton_failure"
    assert len(rec.points) == 1
