"""Physical flow reconstructed from a surface solution through the conformal map.

The strip ``-kh <= y <= 0`` is mapped onto the fluid by ``(x, y) -> (U, V)``
where ``V`` is the harmonic extension of ``v`` (zero on the bed) and ``U`` its
harmonic conjugate.  The stream function is carried on the strip as
``xi = psi(U, V) = zeta - m + ups V^2 / 2`` with ``zeta`` harmonic, equal to
``m - ups v^2 / 2`` on top and 0 on the bed.

Vertical dependence is evaluated analytically, per mode, with the ratios
sinh(n(y+d))/sinh(nd) and cosh(n(y+d))/sinh(nd) written in decaying form.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from . import spectral
from .governing import BifurcationPoint, SolutionPoint, WaveParameters, find_bifurcation_point
from .spectral import PeriodicSeries, derivative, product

__all__ = [
    "HarmonicExtension",
    "FlowModel",
    "FlowField",
    "LaminarFlow",
    "CriticalSet",
    "StagnationPoint",
    "CriterionResult",
    "SurfaceReport",
    "extend_harmonic",
    "extend_zeta",
    "build_flowfield",
    "stream_function",
    "velocity",
    "critical_set",
    "laminar_critical_criterion",
    "surface_curve",
    "small_amplitude_reference",
    "min_conformal_gradient",
    "cauchy_riemann_residual",
    "flux_residual",
    "surface_bernoulli_residual",
    "streamline_residual",
    "laplacian_residual",
]


class HarmonicExtension:
    """Harmonic function on -d <= y <= 0 with top data ``top`` and zero bottom data."""

    def __init__(self, top: PeriodicSeries, d: float):
        if top.batch_shape:
            raise ValueError("HarmonicExtension needs a single series")
        self.d = spectral.check_depth(d)
        self.mean = top.mean
        self.c = np.asarray(top.coeffs[1:])
        self.n = np.arange(1, top.N + 1, dtype=float)

    def _profiles(self, y):
        n, d = self.n, self.d
        y = np.asarray(y, dtype=float)[..., None]
        t = np.maximum(y + d, 0.0)
        with np.errstate(under="ignore"):
            base = np.exp(n * y) / (-np.expm1(-2.0 * n * d))
            decay = np.exp(-2.0 * n * t)
        return base * (1.0 - decay), base * (1.0 + decay)

    def evaluate(self, x, y) -> dict:
        """Value, first/second derivatives and harmonic conjugate at broadcast points (x, y)."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        S, Ch = self._profiles(y)
        cn = self.c * np.exp(1j * x[..., None] * self.n)
        n = self.n
        red = lambda arr: 2.0 * np.sum(arr, axis=-1).real
        slope = self.mean / self.d
        out = {
            "f": slope * (y + self.d) + red(cn * S),
            "f_x": red(1j * n * cn * S),
            "f_y": slope + red(n * cn * Ch),
            "f_xx": red(-(n**2) * cn * S),
            "f_xy": red(1j * n**2 * cn * Ch),
            "conj": slope * x + red(-1j * cn * Ch),
        }
        out["f_yy"] = -out["f_xx"]
        return out

    def on_grid(self, x, y) -> dict:
        """Same as :meth:`evaluate` on the tensor grid; arrays have shape (len(y), len(x))."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        S, Ch = self._profiles(y)
        E = np.exp(1j * np.outer(x, self.n))
        n = self.n
        mm = lambda prof, mult: 2.0 * ((prof * (self.c * mult)) @ E.T).real
        slope = self.mean / self.d
        Y = (y + self.d)[:, None]
        out = {
            "f": slope * Y + mm(S, 1.0),
            "f_x": mm(S, 1j * n),
            "f_y": slope + mm(Ch, n),
            "f_xx": mm(S, -(n**2)),
            "f_xy": mm(Ch, 1j * n**2),
            "conj": slope * x[None, :] + mm(Ch, -1j),
        }
        out["f"] = np.broadcast_to(out["f"], (len(y), len(x))).copy()
        out["f_y"] = np.broadcast_to(out["f_y"], (len(y), len(x))).copy()
        out["f_yy"] = -out["f_xx"]
        return out


def _check_mean(v: PeriodicSeries, h: float):
    if abs(v.mean - h) > 1e-10 * max(1.0, abs(h)):
        raise ValueError(f"surface must have mean h={h}, got {v.mean}")


def extend_harmonic(v: PeriodicSeries, params: WaveParameters, x, y):
    """(V, U) on the tensor grid x by y; arrays are shaped (len(y), len(x))."""
    _check_mean(v, params.h)
    ext = HarmonicExtension(v, params.depth).on_grid(x, y)
    return ext["f"], ext["conj"]


def _zeta_top(v: PeriodicSeries, m: float, ups: float) -> PeriodicSeries:
    return m - (0.5 * ups) * product(v, v)


def extend_zeta(v: PeriodicSeries, m: float, params: WaveParameters, x, y):
    _check_mean(v, params.h)
    return HarmonicExtension(_zeta_top(v, m, params.upsilon), params.depth).on_grid(x, y)["f"]


def _assemble(Vd: dict, Zd: dict, m: float, ups: float) -> dict:
    """Stream function, velocity and xi-derivatives from V and zeta derivative dicts."""
    V, Vx, Vy = Vd["f"], Vd["f_x"], Vd["f_y"]
    Z = Zd
    grad2 = Vx * Vx + Vy * Vy
    xi_x = Z["f_x"] + ups * V * Vx
    xi_y = Z["f_y"] + ups * V * Vy
    with np.errstate(divide="ignore", invalid="ignore"):
        psiY = (Vx * xi_x + Vy * xi_y) / grad2
        psiX = (Vy * xi_x - Vx * xi_y) / grad2
    return {
        "V": V,
        "U": Vd["conj"],
        "zeta": Z["f"],
        "psi": Z["f"] - m + 0.5 * ups * V * V,
        "psiY": psiY,
        "psiX": psiX,
        "grad2": grad2,
        "xi_x": xi_x,
        "xi_y": xi_y,
        "xi_xx": Z["f_xx"] + ups * (Vx * Vx + V * Vd["f_xx"]),
        "xi_xy": Z["f_xy"] + ups * (Vx * Vy + V * Vd["f_xy"]),
        "xi_yy": Z["f_yy"] + ups * (Vy * Vy + V * Vd["f_yy"]),
        "Vx": Vx,
        "Vy": Vy,
        "zeta_x": Z["f_x"],
        "zeta_y": Z["f_y"],
    }


class FlowModel:
    """Pointwise evaluator of the flow below a surface solution."""

    def __init__(self, params: WaveParameters, point: SolutionPoint):
        self.params = params
        self.point = point
        self.v = point.v(params)
        _check_mean(self.v, params.h)
        self.m = point.m
        self.V = HarmonicExtension(self.v, params.depth)
        self.zeta = HarmonicExtension(_zeta_top(self.v, point.m, params.upsilon), params.depth)

    @property
    def depth(self) -> float:
        return self.params.depth

    def at(self, x, y) -> dict:
        return _assemble(self.V.evaluate(x, y), self.zeta.evaluate(x, y), self.m, self.params.upsilon)

    def on_grid(self, x, y) -> dict:
        return _assemble(self.V.on_grid(x, y), self.zeta.on_grid(x, y), self.m, self.params.upsilon)

    def psiY(self, x, y) -> float:
        return float(self.at(x, y)["psiY"])


@dataclass(eq=False)
class FlowField:
    """Fields sampled on the conformal grid x in [-pi, pi), y in [-kh, 0]; arrays are (ny, nx)."""

    params: WaveParameters
    point: SolutionPoint
    x: np.ndarray
    y: np.ndarray
    V: np.ndarray
    U: np.ndarray
    zeta: np.ndarray
    psi: np.ndarray
    psiY: np.ndarray
    psiX: np.ndarray
    Vx: np.ndarray
    Vy: np.ndarray
    zeta_x: np.ndarray
    zeta_y: np.ndarray
    mask: np.ndarray
    model: FlowModel = field(repr=False)

    @property
    def shape(self):
        return self.V.shape

    @property
    def velocity(self):
        return self.psiY, -self.psiX

    @property
    def surface(self):
        return self.U[-1], self.V[-1]

    def columns(self) -> dict:
        """Flattened node table in dump order."""
        Xg, Yg = np.meshgrid(self.x, self.y)
        return {
            "x": Xg.ravel(),
            "y": Yg.ravel(),
            "X": self.U.ravel(),
            "Y": self.V.ravel(),
            "V": self.V.ravel(),
            "U": self.U.ravel(),
            "zeta": self.zeta.ravel(),
            "psi": self.psi.ravel(),
            "psiY": self.psiY.ravel(),
            "psiX": self.psiX.ravel(),
        }


FIELD_COLUMNS = ("x", "y", "X", "Y", "V", "U", "zeta", "psi", "psiY", "psiX")


def flow_grid(params: WaveParameters, nx: int = 256, ny: int = 129):
    if nx < 4 or ny < 3:
        raise ValueError(f"grid needs nx >= 4 and ny >= 3, got {nx}x{ny}")
    x = -np.pi + 2.0 * np.pi * np.arange(nx) / nx
    y = np.linspace(-params.depth, 0.0, ny)
    return x, y


def build_flowfield(params: WaveParameters, point: SolutionPoint, nx: int = 256, ny: int = 129) -> FlowField:
    model = FlowModel(params, point)
    x, y = flow_grid(params, nx, ny)
    F = model.on_grid(x, y)
    # boundary rows are known exactly
    F["V"][0] = 0.0
    F["zeta"][0] = 0.0
    F["psi"][0] = -point.m
    F["psi"][-1] = 0.0
    F["V"][-1] = model.v(x)
    F["zeta"][-1] = point.m - 0.5 * params.upsilon * F["V"][-1] ** 2
    mask = F["grad2"] > 1e-14 * max(1.0, 1.0 / params.k**2)
    if not np.all(mask):
        warnings.warn("conformal gradient vanishes at some grid nodes; velocity masked there", RuntimeWarning)
        F["psiY"] = np.where(mask, F["psiY"], np.nan)
        F["psiX"] = np.where(mask, F["psiX"], np.nan)
    return FlowField(
        params, point, x, y, F["V"], F["U"], F["zeta"], F["psi"], F["psiY"], F["psiX"],
        F["Vx"], F["Vy"], F["zeta_x"], F["zeta_y"], mask, model,
    )


def stream_function(flow: FlowField, params: WaveParameters, m: float) -> np.ndarray:
    """psi at the image points (U, V): zeta - m + ups V^2 / 2."""
    psi = flow.zeta - m + 0.5 * params.upsilon * flow.V**2
    psi[0] = -m
    psi[-1] = 0.0
    return psi


def velocity(flow: FlowField, params: WaveParameters):
    """(psi_Y, -psi_X) on the grid; NaN where the conformal gradient vanishes."""
    return flow.psiY, -flow.psiX


def min_conformal_gradient(params: WaveParameters, v: PeriodicSeries, nx: int | None = None, ny: int = 33) -> float:
    """min of V_x^2 + V_y^2 over a closed grid of the strip, surface row included."""
    nx = nx or max(8 * v.N, 64)
    x = 2.0 * np.pi * np.arange(nx) / nx
    y = np.linspace(-params.depth, 0.0, ny)
    ext = HarmonicExtension(v, params.depth).on_grid(x, y)
    return float(np.min(ext["f_x"] ** 2 + ext["f_y"] ** 2))


# ---------------------------------------------------------------------------
# laminar flows and the critical-point criterion

@dataclass(frozen=True)
class LaminarFlow:
    """Parallel shear flow with flat surface Y = h."""

    params: WaveParameters
    lam: float

    @property
    def m(self) -> float:
        p = self.params
        return self.lam * p.h - p.upsilon * p.h**2 / 2.0

    def psi(self, Y):
        p = self.params
        Y = np.asarray(Y, dtype=float)
        return p.upsilon * Y**2 / 2.0 + (self.lam - p.upsilon * p.h) * Y - self.lam * p.h + p.upsilon * p.h**2 / 2.0

    def velocity(self, Y):
        p = self.params
        Y = np.asarray(Y, dtype=float)
        return p.upsilon * Y + self.lam - p.upsilon * p.h, np.zeros_like(Y)

    def critical_line(self):
        """Height of the line of stagnation points, or None if it misses [0, h]."""
        p = self.params
        if p.upsilon == 0.0:
            return None
        Y = p.h - self.lam / p.upsilon
        return Y if 0.0 <= Y <= p.h else None

    def point(self) -> SolutionPoint:
        return SolutionPoint.build(self.params, self.lam, 0.0)


class CriterionResult(NamedTuple):
    holds: bool
    margin: float
    range_holds: bool
    lambda_star: float
    critical_line: float | None


def laminar_critical_criterion(params: WaveParameters, n: int = 1, sign: str = "-") -> CriterionResult:
    """Does the laminar flow bifurcating at lam*_{n,sign} contain stagnation points?

    Closed form: ups must be negative for the '-' family (positive for '+') and
    tanh(nkh)/(nkh) <= ups^2 h / (g + ups^2 h).  ``margin`` is RHS - LHS.  The
    direct test 0 <= lam*/ups <= h is returned alongside.
    """
    g, ups, k, h = params.g, params.upsilon, params.k, params.h
    bp = find_bifurcation_point(params, n, sign)
    nkh = n * k * h
    margin = ups * ups * h / (g + ups * ups * h) - np.tanh(nkh) / nkh
    sign_ok = ups < 0 if sign == "-" else ups > 0
    holds = bool(sign_ok and margin >= 0.0)
    ratio = bp.lambda_star / ups if ups != 0.0 else np.nan
    range_holds = bool(ups != 0.0 and 0.0 <= ratio <= h)
    line = h - ratio if range_holds else None
    return CriterionResult(holds, float(margin), range_holds, bp.lambda_star, line)


# ---------------------------------------------------------------------------
# critical layers and stagnation points

@dataclass(frozen=True)
class StagnationPoint:
    X: float
    Y: float
    x: float
    y: float
    kind: str  # center, saddle, degenerate, boundary
    location: str  # interior, bed, surface
    hessian_det: float
    residual: float


@dataclass
class CriticalSet:
    critical_layer: list = field(default_factory=list)
    stagnation_points: list = field(default_factory=list)
    degenerate_line: float | None = None

    @property
    def is_empty(self) -> bool:
        return not self.critical_layer and not self.stagnation_points and self.degenerate_line is None

    def records(self) -> list:
        """Flat labeled rows: (kind, location, X, Y)."""
        rows = []
        if self.degenerate_line is not None:
            rows.append(("degenerate_line", "interior", np.nan, self.degenerate_line))
        for sp in self.stagnation_points:
            rows.append((sp.kind, sp.location, sp.X, sp.Y))
        for i, line in enumerate(self.critical_layer):
            for X, Y in line:
                rows.append((f"critical_layer_{i}", "interior", X, Y))
        return rows


def _wrap(x):
    return (np.asarray(x) + np.pi) % (2.0 * np.pi) - np.pi


def _newton_critical(model: FlowModel, x0: float, y0: float, max_iter: int = 60):
    d = model.depth
    x, y = x0, y0
    for _ in range(max_iter):
        F = model.at(x, y)
        g = np.array([F["xi_x"], F["xi_y"]], dtype=float)
        H = np.array([[F["xi_xx"], F["xi_xy"]], [F["xi_xy"], F["xi_yy"]]], dtype=float)
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            return None
        x, y = x + step[0], y + step[1]
        if not (-d - 1e-9 <= y <= 1e-9):
            return None
        if np.max(np.abs(step)) < 1e-14 * max(1.0, d):
            break
    F = model.at(x, y)
    res = float(np.hypot(F["xi_x"], F["xi_y"]))
    det = float(F["xi_xx"] * F["xi_yy"] - F["xi_xy"] ** 2)
    return float(_wrap(x)), float(y), res, det, F


def _velocity_scale(flow: FlowField) -> float:
    vals = np.abs(flow.psiY[np.isfinite(flow.psiY)])
    return float(max(np.max(vals, initial=0.0), abs(flow.point.m) / flow.params.h, 1e-300))


def critical_set(flow: FlowField, params: WaveParameters) -> CriticalSet:
    """Critical layers (psi_Y = 0) and stagnation points (grad psi = 0)."""
    model = flow.model
    out = CriticalSet()
    d = params.depth
    ups = params.upsilon
    if flow.point.w.sup_norm_coeffs() == 0.0:
        lam = LaminarFlow(params, flow.point.lam)
        out.degenerate_line = lam.critical_line()
        return out

    # critical layer: roots of psi_Y along each grid column
    pY = flow.psiY
    per_col = []
    for i, xi in enumerate(flow.x):
        col = pY[:, i]
        roots = []
        for j in range(len(flow.y) - 1):
            a, b = col[j], col[j + 1]
            if not (np.isfinite(a) and np.isfinite(b)):
                continue
            if a == 0.0:
                roots.append(flow.y[j])
            elif a * b < 0.0:
                roots.append(brentq(lambda yy: model.psiY(xi, yy), flow.y[j], flow.y[j + 1], xtol=1e-14))
        if col[-1] == 0.0:
            roots.append(flow.y[-1])
        per_col.append((xi, roots))
    depth_max = max((len(r) for _, r in per_col), default=0)
    for kth in range(depth_max):
        pts = []
        for xi, roots in per_col:
            if len(roots) > kth:
                F = model.at(xi, roots[kth])
                pts.append((float(F["U"]), float(F["V"])))
        out.critical_layer.append(np.array(pts))

    # interior stagnation points: Newton seeds from cells where both xi_x and xi_y change sign
    F = model.on_grid(flow.x, flow.y)
    gx, gy = F["xi_x"], F["xi_y"]
    scale = _velocity_scale(flow)
    found = []

    def add(cand, location):
        x, y, res, det, Fp = cand
        for sp in found:
            if abs(_wrap(sp.x - x)) < 1e-7 and abs(sp.y - y) < 1e-7:
                return
        if location == "interior":
            kind = "center" if det > 0 else ("saddle" if det < 0 else "degenerate")
        else:
            kind = "boundary"
        found.append(StagnationPoint(float(Fp["U"]), float(Fp["V"]), x, y, kind, location, det, res))

    nx = len(flow.x)
    for j in range(1, len(flow.y) - 2):
        for i in range(nx):
            i2 = (i + 1) % nx
            cx = (gx[j, i], gx[j, i2], gx[j + 1, i], gx[j + 1, i2])
            cy = (gy[j, i], gy[j, i2], gy[j + 1, i], gy[j + 1, i2])
            if min(cx) <= 0.0 <= max(cx) and min(cy) <= 0.0 <= max(cy):
                x0 = flow.x[i] + 0.5 * (2.0 * np.pi / nx)
                y0 = 0.5 * (flow.y[j] + flow.y[j + 1])
                cand = _newton_critical(model, x0, y0)
                if cand is None or not (-d < cand[1] < 0.0):
                    continue
                if cand[2] <= 1e-10 * max(1.0, scale):
                    add(cand, "interior")

    # boundary rows: grad psi = 0 reduces to psi_Y = 0 there
    for yb, location in ((-d, "bed"), (0.0, "surface")):
        row = model.at(flow.x, np.full(nx, yb))["psiY"]
        for i in range(nx):
            a, b = row[i], row[(i + 1) % nx]
            x_lo = flow.x[i]
            x_hi = x_lo + 2.0 * np.pi / nx
            if a * b < 0.0 or a == 0.0:
                xr = x_lo if a == 0.0 else brentq(lambda xx: model.psiY(xx, yb), x_lo, x_hi, xtol=1e-14)
                Fp = model.at(xr, yb)
                det = float(Fp["xi_xx"] * Fp["xi_yy"] - Fp["xi_xy"] ** 2)
                add((float(_wrap(xr)), float(yb), abs(float(Fp["psiY"])), det, Fp), location)
    out.stagnation_points = sorted(found, key=lambda sp: (sp.location, sp.x))
    return out


# ---------------------------------------------------------------------------
# surface geometry

@dataclass
class SurfaceReport:
    X: np.ndarray
    Y: np.ndarray
    is_graph: bool
    crest: float
    trough: float
    amplitude: float
    min_Ux: float
    overturning_intervals: list
    injectivity_margin: float


def surface_curve(p: SolutionPoint, params: WaveParameters, n_samples: int = 512) -> SurfaceReport:
    """Sample the free surface (U(x,0), V(x,0)) and report its geometry."""
    v = p.v(params)
    d = params.depth
    k = params.k
    x = -np.pi + 2.0 * np.pi * np.arange(n_samples) / n_samples
    wdev = v - params.h
    Cw = spectral.conjugation(wdev, d) if wdev.sup_norm_coeffs() > 0 else PeriodicSeries.zeros(v.N)
    Ux = spectral.conjugation(derivative(v), d) + 1.0 / k
    X = x / k + Cw(x)
    Y = v(x)
    ux = Ux(x)
    neg = ux <= 0.0
    intervals = []
    if np.any(neg):
        idx = np.flatnonzero(neg)
        start = idx[0]
        for a, b in zip(idx[:-1], idx[1:]):
            if b != a + 1:
                intervals.append((float(x[start]), float(x[a])))
                start = b
        intervals.append((float(x[start]), float(x[idx[-1]])))
    xi = x[(x > 0) & (x < np.pi)]
    Ui = xi / k + Cw(xi)
    margin = float(np.min(np.minimum(Ui, np.pi / k - Ui))) if xi.size else np.nan
    crest, trough = float(v(0.0)), float(v(np.pi))
    return SurfaceReport(X, Y, bool(np.all(~neg)), crest, trough, (crest - trough) / 2.0, float(np.min(ux)), intervals, margin)


# ---------------------------------------------------------------------------
# small-amplitude asymptotics

def small_amplitude_reference(params: WaveParameters, bp: BifurcationPoint, s: float, x, y) -> dict:
    """First-order fields near the bifurcation point on the tensor grid (x, y).

    Returns V, U, zeta (shape (ny, nx)) and the bed horizontal velocity at x.
    """
    k, h, ups, n = params.k, params.h, params.upsilon, bp.n
    d = params.depth
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    probe = HarmonicExtension(PeriodicSeries.from_trig(0.0, np.eye(n)[n - 1]), d)
    S, Ch = probe._profiles(y)
    Sn, Cn = S[:, n - 1][:, None], Ch[:, n - 1][:, None]
    cosx, sinx = np.cos(n * x)[None, :], np.sin(n * x)[None, :]
    Y = (y + d)[:, None]
    V = Y / k + s * cosx * Sn
    U = x[None, :] / k + s * sinx * Cn
    zeta = (bp.m_star - ups * h * h / 2.0) * Y / d - ups * s * h * cosx * Sn
    bed = (bp.lambda_star - ups * h) - s * n * k * bp.lambda_star * np.cos(n * x) / np.sinh(n * d)
    return {"V": V, "U": U, "zeta": zeta, "bed_psiY": bed}


# ---------------------------------------------------------------------------
# field integrity checks

def cauchy_riemann_residual(flow: FlowField) -> float:
    """max |U_x - V_y| + max |U_y + V_x| on interior nodes, x-derivatives spectral."""
    k = flow.params.k
    nx = len(flow.x)
    kx = np.fft.rfftfreq(nx, d=1.0 / nx)
    per = flow.U - flow.x[None, :] / k
    Ux = 1.0 / k + np.fft.irfft(1j * kx * np.fft.rfft(per, axis=1), n=nx, axis=1)
    Vx = np.fft.irfft(1j * kx * np.fft.rfft(flow.V, axis=1), n=nx, axis=1)
    F = flow.model.V.on_grid(flow.x, flow.y)
    Uy = -F["f_x"]  # analytic from the conjugate kernel
    inner = slice(1, -1)
    r1 = np.max(np.abs(Ux - flow.Vy)[inner])
    r2 = np.max(np.abs(Uy + Vx)[inner])
    return float(r1 + r2)


def flux_residual(flow: FlowField, n_gauss: int = 64) -> float:
    """max over columns of |int_{-kh}^0 (psi_X U_y + psi_Y V_y) dy - m|."""
    model = flow.model
    d = flow.params.depth
    t, wts = np.polynomial.legendre.leggauss(n_gauss)
    yq = -d / 2.0 + (d / 2.0) * t
    worst = 0.0
    for xi in flow.x:
        F = model.at(np.full_like(yq, xi), yq)
        Uy = -F["Vx"]
        integrand = F["psiX"] * Uy + F["psiY"] * F["Vy"]
        worst = max(worst, abs((d / 2.0) * np.dot(wts, integrand) - flow.point.m))
    return float(worst)


def surface_bernoulli_residual(flow: FlowField) -> float:
    """max |psi_X^2 + psi_Y^2 + 2 g V - Q| along the surface row, divided by Q."""
    g = flow.params.g
    Q = flow.point.Q
    r = flow.psiX[-1] ** 2 + flow.psiY[-1] ** 2 + 2.0 * g * flow.V[-1] - Q
    return float(np.max(np.abs(r)) / abs(Q))


def streamline_residual(flow: FlowField) -> float:
    """Derivative of psi along the reported velocity, mapped back to the strip; interior max."""
    F = flow.model.on_grid(flow.x, flow.y)
    qx, qy = F["psiY"], -F["psiX"]
    Ux, Uy, Vx, Vy = F["Vy"], -F["Vx"], F["Vx"], F["Vy"]
    det = Ux * Vy - Uy * Vx
    # conformal direction (dx, dy) with J (dx, dy) = q
    dx = (Vy * qx - Uy * qy) / det
    dy = (-Vx * qx + Ux * qy) / det
    r = F["xi_x"] * dx + F["xi_y"] * dy
    return float(np.max(np.abs(r[1:-1])))


def laplacian_residual(values: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """Max 5-point Laplacian on interior nodes (periodic in x)."""
    hx = x[1] - x[0]
    hy = y[1] - y[0]
    f = values
    lap_x = (np.roll(f, -1, axis=1) - 2.0 * f + np.roll(f, 1, axis=1)) / hx**2
    lap_y = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / hy**2
    return float(np.max(np.abs(lap_x[1:-1] + lap_y)))
