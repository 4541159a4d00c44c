"""Fourier-multiplier operators for 2pi-periodic functions on a strip.

Every real periodic function is carried as a :class:`PeriodicSeries`, which
stores the one-sided complex spectrum ``c[..., n]``, ``n = 0..N``, with

    f(x) = c_0 + sum_{n>=1} 2 Re(c_n e^{inx}),   c_n = (a_n - i b_n) / 2,

so that ``a_n`` / ``b_n`` are the usual cosine / sine coefficients.  Leading
array dimensions are treated as a batch; all operators broadcast over them.

Products are evaluated on a grid large enough to hold the full product degree,
so they are exact for trigonometric polynomials (no aliasing, no truncation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PeriodicSeries",
    "coth_multiplier",
    "check_depth",
    "grid",
    "average",
    "average_product",
    "inner",
    "derivative",
    "product",
    "conjugation",
    "hilbert",
    "dirichlet_neumann",
    "commutator",
    "kernel_kappa",
    "conjugation_via_kernel",
    "dh_conjugation_derivative",
]

MIN_DEPTH = 1e-8
_MEAN_TOL = 1e-12


def check_depth(d: float) -> float:
    d = float(d)
    if not np.isfinite(d) or d < MIN_DEPTH:
        raise ValueError(f"strip depth must be a finite number >= {MIN_DEPTH}, got {d}")
    return d


def coth_multiplier(n, d: float) -> np.ndarray:
    """coth(n d) for n >= 1, written as 1 + 2/(e^{2nd} - 1) so large n d cannot overflow."""
    arg = 2.0 * np.asarray(n, dtype=float) * check_depth(d)
    with np.errstate(over="ignore"):
        return 1.0 + 2.0 / np.expm1(np.minimum(arg, 1400.0))


def grid(M: int) -> np.ndarray:
    """Uniform nodes x_j = 2 pi j / M on [0, 2 pi)."""
    return 2.0 * np.pi * np.arange(M) / M


@dataclass(frozen=True, eq=False)
class PeriodicSeries:
    """Real trigonometric polynomial ``mean + sum a_n cos nx + b_n sin nx``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim == 0 or c.shape[-1] < 1:
            raise ValueError("coefficient array must have a trailing mode axis of length >= 1")
        c[..., 0] = c[..., 0].real
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- construction -------------------------------------------------
    @classmethod
    def from_trig(cls, mean=0.0, cos_coeffs=(), sin_coeffs=()) -> "PeriodicSeries":
        a = np.atleast_1d(np.asarray(cos_coeffs, dtype=float))
        b = np.atleast_1d(np.asarray(sin_coeffs, dtype=float))
        mean = np.asarray(mean, dtype=float)
        n = max(a.shape[-1] if a.size else 0, b.shape[-1] if b.size else 0)
        batch = np.broadcast_shapes(mean.shape, a.shape[:-1] if a.size else (), b.shape[:-1] if b.size else ())
        c = np.zeros(batch + (n + 1,), dtype=complex)
        c[..., 0] = mean
        if a.size:
            c[..., 1 : a.shape[-1] + 1] += a / 2
        if b.size:
            c[..., 1 : b.shape[-1] + 1] -= 1j * b / 2
        return cls(c)

    @classmethod
    def zeros(cls, N: int, batch: tuple = ()) -> "PeriodicSeries":
        return cls(np.zeros(tuple(batch) + (N + 1,), dtype=complex))

    @classmethod
    def constant(cls, value: float, N: int = 0) -> "PeriodicSeries":
        c = np.zeros(N + 1, dtype=complex)
        c[0] = value
        return cls(c)

    @classmethod
    def from_grid(cls, values, N: int) -> "PeriodicSeries":
        """Interpolate samples on ``grid(M)``; needs 2N < M."""
        f = np.asarray(values, dtype=float)
        M = f.shape[-1]
        if 2 * N >= M:
            raise ValueError(f"{M} grid points cannot resolve {N} modes (need M > 2N)")
        c = np.fft.rfft(f, axis=-1)[..., : N + 1] / M
        return cls(c)

    @classmethod
    def from_function(cls, func, N: int, M: int | None = None) -> "PeriodicSeries":
        M = M or 4 * N + 4
        return cls.from_grid(func(grid(M)), N)

    # -- views ----------------------------------------------------------
    @property
    def N(self) -> int:
        return self.coeffs.shape[-1] - 1

    @property
    def batch_shape(self) -> tuple:
        return self.coeffs.shape[:-1]

    @property
    def mean(self):
        m = self.coeffs[..., 0].real
        return float(m) if m.ndim == 0 else m

    @property
    def cos_coeffs(self) -> np.ndarray:
        return 2.0 * self.coeffs[..., 1:].real

    @property
    def sin_coeffs(self) -> np.ndarray:
        return -2.0 * self.coeffs[..., 1:].imag

    def resized(self, N: int) -> "PeriodicSeries":
        """Zero-pad or truncate to ``N`` modes."""
        c = np.zeros(self.batch_shape + (N + 1,), dtype=complex)
        k = min(N, self.N) + 1
        c[..., :k] = self.coeffs[..., :k]
        return PeriodicSeries(c)

    def to_grid(self, M: int) -> np.ndarray:
        """Values on ``grid(M)``; needs 2N < M."""
        if 2 * self.N >= M:
            raise ValueError(f"{M} grid points cannot carry {self.N} modes (need M > 2N)")
        X = np.zeros(self.batch_shape + (M // 2 + 1,), dtype=complex)
        X[..., : self.N + 1] = self.coeffs * M
        return np.fft.irfft(X, n=M, axis=-1)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = np.arange(1, self.N + 1)
        phase = np.exp(1j * x[..., None] * n)
        if self.batch_shape:
            body = np.einsum("...n,bn->b...", phase, self.coeffs[..., 1:].reshape(-1, self.N))
            body = body.reshape(self.batch_shape + x.shape)
            return self.coeffs[..., 0].real.reshape(self.batch_shape + (1,) * x.ndim) + 2.0 * body.real
        return self.coeffs[0].real + 2.0 * (phase @ self.coeffs[1:]).real

    def sup_norm_coeffs(self) -> float:
        """Largest |mean|, |a_n|, |b_n| over all modes and batch entries."""
        return float(max(np.max(np.abs(self.coeffs[..., 0].real)), np.max(np.abs(2.0 * self.coeffs[..., 1:].real), initial=0.0), np.max(np.abs(2.0 * self.coeffs[..., 1:].imag), initial=0.0)))

    def sup_norm(self, M: int | None = None) -> float:
        """Max |f| sampled on an ``M``-point grid (default 8N)."""
        M = M or max(8 * self.N, 16)
        return float(np.max(np.abs(self.to_grid(M))))

    def is_even(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.sin_coeffs) <= tol))

    # -- arithmetic -----------------------------------------------------
    def _lift(self, other):
        if isinstance(other, PeriodicSeries):
            N = max(self.N, other.N)
            return self.resized(N).coeffs, other.resized(N).coeffs
        return None

    def __add__(self, other):
        if isinstance(other, PeriodicSeries):
            a, b = self._lift(other)
            return PeriodicSeries(a + b)
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(self.batch_shape, other.shape)
        c = np.array(np.broadcast_to(self.coeffs, shape + (self.N + 1,)))
        c[..., 0] += other
        return PeriodicSeries(c)

    __radd__ = __add__

    def __neg__(self):
        return PeriodicSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PeriodicSeries):
            return product(self, other)
        other = np.asarray(other, dtype=float)
        if other.ndim:
            other = other[..., None]
        return PeriodicSeries(self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1.0 / np.asarray(other, dtype=float))

    def __repr__(self):
        return f"PeriodicSeries(N={self.N}, batch={self.batch_shape}, mean={self.mean!r})"


def average(f: PeriodicSeries):
    """Period average [f]."""
    return f.mean


def average_product(f: PeriodicSeries, g: PeriodicSeries):
    """[f g] evaluated exactly from the coefficients (Parseval)."""
    N = min(f.N, g.N)
    a, b = f.coeffs[..., : N + 1], g.coeffs[..., : N + 1]
    val = a[..., 0].real * b[..., 0].real + 2.0 * np.sum((a[..., 1:] * np.conj(b[..., 1:])).real, axis=-1)
    return float(val) if np.ndim(val) == 0 else val


def inner(f: PeriodicSeries, g: PeriodicSeries):
    """Integral of f g over one period."""
    return 2.0 * np.pi * average_product(f, g)


def derivative(f: PeriodicSeries) -> PeriodicSeries:
    n = np.arange(f.N + 1)
    return PeriodicSeries(1j * n * f.coeffs)


def product(f: PeriodicSeries, g: PeriodicSeries, N: int | None = None) -> PeriodicSeries:
    """Pointwise product, exact up to degree deg f + deg g (optionally truncated to ``N``)."""
    deg = f.N + g.N
    M = 2 * deg + 2
    out = PeriodicSeries.from_grid(f.to_grid(M) * g.to_grid(M), deg)
    return out if N is None else out.resized(N)


def _require_mean_zero(w: PeriodicSeries, name: str = "w"):
    scale = max(1.0, w.sup_norm_coeffs())
    if np.any(np.abs(np.asarray(w.mean)) > _MEAN_TOL * scale):
        raise ValueError(f"{name} must have zero mean (subtract [{name}] first), got mean {w.mean}")


def conjugation(w: PeriodicSeries, d: float) -> PeriodicSeries:
    """Periodic Hilbert transform C_d of the strip of depth ``d``.

    cos nx -> coth(nd) sin nx,  sin nx -> -coth(nd) cos nx.  ``w`` must have mean zero.
    """
    d = check_depth(d)
    _require_mean_zero(w)
    n = np.arange(w.N + 1)
    mult = np.zeros(w.N + 1, dtype=complex)
    mult[1:] = -1j * coth_multiplier(n[1:], d)
    return PeriodicSeries(mult * w.coeffs)


def hilbert(w: PeriodicSeries) -> PeriodicSeries:
    """Standard periodic Hilbert transform (the infinite-depth limit of C_d)."""
    _require_mean_zero(w)
    mult = np.full(w.N + 1, -1j)
    mult[0] = 0.0
    return PeriodicSeries(mult * w.coeffs)


def dirichlet_neumann(w: PeriodicSeries, d: float) -> PeriodicSeries:
    """G_d(w) = [w]/d + C_d(w')."""
    d = check_depth(d)
    out = conjugation(derivative(w), d)
    c = out.coeffs.copy()
    c[..., 0] = np.asarray(w.mean) / d
    return PeriodicSeries(c)


def commutator(f: PeriodicSeries, g: PeriodicSeries, d: float) -> PeriodicSeries:
    """f C_d(g) - C_d(fg - [fg]) for mean-zero ``g``."""
    _require_mean_zero(g, "g")
    fg = product(f, g)
    fg = fg - fg.mean
    return product(f, conjugation(g, d)) - conjugation(fg, d)


def kernel_kappa(t, d: float, K: int) -> np.ndarray:
    """Smooth kernel of C_d - C: sum_{n<=K} 2 lambda_n sin(nt), lambda_n = 2/(e^{2nd}-1)."""
    d = check_depth(d)
    t = np.asarray(t, dtype=float)
    n = np.arange(1, K + 1)
    with np.errstate(over="ignore"):
        lam = 2.0 / np.expm1(np.minimum(2.0 * n * d, 1400.0))
    return np.sin(t[..., None] * n) @ (2.0 * lam)


def conjugation_via_kernel(w: PeriodicSeries, d: float, K: int = 64) -> PeriodicSeries:
    """C_d(w) as C(w) plus the convolution (1/2pi) int kappa_d(t-s) w(s) ds.

    The convolution is an explicit trapezoidal sum on a uniform grid, which is
    exact for the truncated kernel; it does not use the coth multiplier.
    """
    if w.batch_shape:
        raise ValueError("conjugation_via_kernel works on a single series")
    if K < w.N:
        raise ValueError(f"kernel truncation K={K} is below the input degree N={w.N}")
    d = check_depth(d)
    _require_mean_zero(w)
    M = 2 * (K + w.N) + 2
    s = grid(M)
    idx = (np.arange(M)[:, None] - np.arange(M)[None, :]) % M
    kap = kernel_kappa(s, d, K)[idx]
    conv = kap @ w.to_grid(M) / M
    smooth = PeriodicSeries.from_grid(conv, w.N)
    return hilbert(w) + smooth


def dh_conjugation_derivative(f: PeriodicSeries, d: float, k: float = 1.0) -> PeriodicSeries:
    """d/dh of C_{kh}(f') at d = kh, i.e. -k f'' - k C_{kh}^2(f'').

    Termwise: mode n is scaled by k n^2 (1 - coth^2(n k h)).
    """
    d = check_depth(d)
    n = np.arange(f.N + 1)
    mult = np.zeros(f.N + 1)
    cth = coth_multiplier(n[1:], d)
    mult[1:] = k * n[1:] ** 2 * (1.0 - cth**2)
    return PeriodicSeries(mult * f.coeffs)


def roundtrip_error(f: PeriodicSeries, M: int) -> float:
    """Relative grid/coefficient round-trip error on ``M`` points."""
    back = PeriodicSeries.from_grid(f.to_grid(M), f.N)
    scale = max(f.sup_norm_coeffs(), np.finfo(float).tiny)
    return (back - f).sup_norm_coeffs() / scale


def trig_monomial(n: int, kind: str = "cos", N: int | None = None, amplitude: float = 1.0) -> PeriodicSeries:
    """amplitude * cos(nx) or sin(nx) carried with ``N`` modes."""
    N = max(n, N or n)
    c = np.zeros(N + 1, dtype=complex)
    if n == 0:
        c[0] = amplitude if kind == "cos" else 0.0
    elif kind == "cos":
        c[n] = amplitude / 2
    elif kind == "sin":
        c[n] = -1j * amplitude / 2
    else:
        raise ValueError(f"kind must be 'cos' or 'sin', got {kind!r}")
    return PeriodicSeries(c)
