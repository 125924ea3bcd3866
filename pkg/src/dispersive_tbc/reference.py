"""Independent solutions and error measures for the Gaussian test problem.

* ``airy_function``: Maclaurin series near the origin, asymptotic expansions
  (truncated at the smallest term) further out.
* ``airy_exact``: u(t) = E(t) * u0 with E(t, x) = Ai(x / (3t)^{1/3}) / (3t)^{1/3},
  the whole-line solution for g = 0.
* ``fourier_constant_g``: the whole-line solution for constant g, from the
  Fourier multiplier exp(i (k^3 - g k) t) on a wide periodic box.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, quad_vec

AIRY_RANGE = 200.0
MAX_TRANSFORM = 1 << 22
_AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
_AIP0 = 3.0 ** (-1.0 / 3.0) / math.gamma(1.0 / 3.0)  # -Ai'(0)
_SERIES_LO, _SERIES_HI = -8.0, 5.5


class RangeError(ValueError):
    pass


class QuadratureError(RuntimeError):
    pass


class AliasWarning(UserWarning):
    pass


class GridMismatchError(ValueError):
    pass


def _asymptotic_coeffs(n: int = 80) -> np.ndarray:
    u = np.empty(n)
    u[0] = 1.0
    for k in range(1, n):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
    return u


_U = _asymptotic_coeffs()


def _airy_series(x: np.ndarray) -> np.ndarray:
    x3 = x**3
    f = np.ones_like(x)
    g = x.copy()
    tf = np.ones_like(x)
    tg = x.copy()
    for k in range(200):
        tf = tf * x3 / ((3 * k + 2) * (3 * k + 3))
        tg = tg * x3 / ((3 * k + 3) * (3 * k + 4))
        f += tf
        g += tg
        if np.all(np.abs(tf) + np.abs(tg) <= 1e-17 * (np.abs(f) + np.abs(g))):
            break
    return _AI0 * f - _AIP0 * g


def _airy_decaying(x: float) -> float:
    z = 2.0 / 3.0 * x**1.5
    terms = _U * (-1.0) ** np.arange(len(_U)) / z ** np.arange(len(_U))
    k = int(np.argmin(np.abs(terms)))
    return math.exp(-z) / (2 * math.sqrt(math.pi) * x**0.25) * float(np.sum(terms[:k]))


def _airy_oscillating(x: float) -> float:
    """Ai(-x) for large positive x."""
    z = 2.0 / 3.0 * x**1.5
    terms = _U / z ** np.arange(len(_U))
    k = int(np.argmin(np.abs(terms)))
    sign = np.array([(-1.0) ** (j // 2) for j in range(k)])
    even = float(np.sum((sign * terms[:k])[0::2]))
    odd = float(np.sum((sign * terms[:k])[1::2]))
    phase = z + math.pi / 4
    return (math.sin(phase) * even - math.cos(phase) * odd) / (math.sqrt(math.pi) * x**0.25)


def airy_function(x):
    """Airy function Ai on |x| <= 200, absolute accuracy about 1e-12."""
    xa = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xa)) or np.any(np.abs(xa) > AIRY_RANGE):
        raise RangeError(f"Ai evaluated outside |x| <= {AIRY_RANGE}")
    flat = xa.ravel()
    out = np.empty_like(flat)
    mid = (flat >= _SERIES_LO) & (flat <= _SERIES_HI)
    out[mid] = _airy_series(flat[mid])
    for i in np.flatnonzero(~mid):
        out[i] = _airy_decaying(flat[i]) if flat[i] > 0 else _airy_oscillating(-flat[i])
    return float(out[0]) if xa.ndim == 0 else out.reshape(xa.shape)


def airy_kernel(t: float, x):
    s = (3.0 * t) ** (1.0 / 3.0)
    return airy_function(np.asarray(x) / s) / s


def airy_exact(t: float, x, u0, support: float = 8.0, tol: float = 1e-11):
    """(E(t) * u0)(x) for u0 negligible outside [-support, support].

    The convolution is cut where |x - y| exceeds AIRY_RANGE (3t)^{1/3}; that
    cut only matters for small t.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    s = (3.0 * t) ** (1.0 / 3.0)
    reach = AIRY_RANGE * s
    if np.all(np.abs(xa) + support <= reach):
        res, err = quad_vec(
            lambda y: airy_kernel(t, xa - y) * u0(y), -support, support, epsabs=tol, epsrel=0, limit=2000
        )
        if err > 100 * tol:
            raise QuadratureError(f"convolution error estimate {err:.2e}")
    else:
        res = np.empty_like(xa)
        for i, xi in enumerate(xa):
            lo, hi = max(-support, xi - reach), min(support, xi + reach)
            if lo >= hi:
                res[i] = 0.0
                continue
            val, err = quad(lambda y: airy_kernel(t, xi - y) * u0(y), lo, hi, epsabs=tol, epsrel=0, limit=2000)
            if err > 100 * tol:
                raise QuadratureError(f"convolution error estimate {err:.2e} at x={xi}")
            res[i] = val
    return float(res[0]) if np.ndim(x) == 0 else res


def _effective_support(u0, rel: float = 1e-16) -> float:
    y = np.linspace(-100.0, 100.0, 40001)
    v = np.abs(u0(y))
    big = np.flatnonzero(v > rel * v.max())
    return float(max(abs(y[big[0]]), abs(y[big[-1]]))) + 1.0


def fourier_constant_g(t: float, x_points, u0, g: float, support: float | None = None, kmax_tol: float = 1e-13):
    """Whole-line solution of u_t + g u_x + u_xxx = 0 at time t.

    The box width is 4 (W + |g| t + 3 kmax^2 t), W the support width of u0
    and kmax the wavenumber beyond which |u0^| < kmax_tol max|u0^| (the
    fastest relevant group velocity is 3 kmax^2). Sampling puts the Nyquist
    wavenumber at twice kmax.
    """
    return _whole_line(t, x_points, u0, g, lambda k: np.exp(1j * (k**3 - g * k) * t), support, kmax_tol)


def fourier_semidiscrete(t_final: float, n_steps: int, x_points, u0, g: float, support: float | None = None):
    """Whole-line solution of the time-discrete scheme u^m + tau u^m_xxx = u^{m-1} - tau g u^{m-1}_x.

    Each step multiplies mode k by (1 - i tau g k) / (1 - i tau k^3). A
    truncated-domain run with exact transparent conditions must reproduce
    this up to spatial discretization error, whatever the step size.
    """
    tau = t_final / n_steps
    return _whole_line(
        t_final, x_points, u0, g, lambda k: ((1 - 1j * tau * g * k) / (1 - 1j * tau * k**3)) ** n_steps, support, 1e-13
    )


def _whole_line(t, x_points, u0, g, multiplier, support, kmax_tol):
    x = np.atleast_1d(np.asarray(x_points, dtype=float))
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        out = np.asarray(u0(x), dtype=float)
        return float(out[0]) if np.ndim(x_points) == 0 else out
    W = 2 * (_effective_support(u0) if support is None else support)
    # wavenumber content of u0 from a fine sampling of its support
    probe_n = 1 << 14
    probe = np.linspace(-W / 2, W / 2, probe_n, endpoint=False)
    spec = np.abs(np.fft.rfft(u0(probe)))
    kp = 2 * np.pi * np.fft.rfftfreq(probe_n, d=W / probe_n)
    kmax = float(kp[np.flatnonzero(spec > kmax_tol * spec.max())[-1]]) + 1.0
    width = 4 * (W + abs(g) * t + 3 * kmax**2 * t) + 2 * float(np.max(np.abs(x)))
    n = 1 << int(math.ceil(math.log2(width * 2 * kmax / math.pi)))
    if n > MAX_TRANSFORM:
        warnings.warn(f"transform size {n} capped at {MAX_TRANSFORM}; u0 is under-resolved", AliasWarning, stacklevel=3)
        n = MAX_TRANSFORM
    h = width / n
    grid = -width / 2 + h * np.arange(n)
    uh = np.fft.fft(u0(grid))
    power = np.abs(uh) ** 2
    near_nyq = power[n // 2 - n // 16 : n // 2 + n // 16].sum()
    if near_nyq > 1e-10 * power.sum():
        warnings.warn(f"u0 energy near Nyquist: {near_nyq / power.sum():.2e}", AliasWarning, stacklevel=3)
    if not power.sum() > 0:
        return np.zeros_like(x) if np.ndim(x_points) else 0.0
    k = 2 * np.pi * np.fft.fftfreq(n, d=h)
    keep = np.abs(uh) > 1e-18 * np.abs(uh).max()
    k, uh = k[keep], uh[keep] * multiplier(k[keep])
    out = np.empty_like(x)
    for lo in range(0, len(x), 256):
        xs = x[lo : lo + 256]
        out[lo : lo + 256] = (np.exp(1j * np.outer(xs + width / 2, k)) @ uh).real / n
    return float(out[0]) if np.ndim(x_points) == 0 else out


def amplification_factor(g: float, tau: float, k) -> float:
    """Squared per-step amplification (1 + tau^2 g^2 k^2)/(1 + tau^2 k^6) of Fourier mode k."""
    k = np.asarray(k, dtype=float)
    out = (1 + tau**2 * g**2 * k**2) / (1 + tau**2 * k**6)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ErrorReport:
    err_m: np.ndarray  # pointwise-relative l2 error per snapshot (small |u_ref| excluded)
    l2: float  # sqrt(tau * sum err_m^2)
    rel_m: np.ndarray  # ||u_num - u_ref|| / ||u_ref|| per snapshot
    rel_l2: float  # sqrt(tau * sum rel_m^2)
    max_err: float
    n_points: int
    n_snapshots: int
    excluded: int  # points dropped from err_m by the small-reference guard


REL_GUARD = 1e-10


def error_norms(u_num, u_ref, tau: float) -> ErrorReport:
    """Error measures between snapshot arrays of shape (n_snapshots, n_points).

    ``err_m`` is the pointwise-relative l2 error; points where
    |u_ref| < 1e-10 max|u_ref| are left out of it. ``rel_m`` is the plain
    normwise relative error.
    """
    a = np.atleast_2d(np.asarray(u_num, dtype=float))
    b = np.atleast_2d(np.asarray(u_ref, dtype=float))
    if a.shape != b.shape:
        raise GridMismatchError(f"shapes differ: {a.shape} vs {b.shape}")
    diff = a - b
    keep = np.abs(b) >= REL_GUARD * np.max(np.abs(b), axis=1, keepdims=True)
    ratio = np.where(keep, diff / np.where(keep, b, 1.0), 0.0)
    err_m = np.sqrt(np.sum(ratio**2, axis=1))
    ref_norm = np.linalg.norm(b, axis=1)
    rel_m = np.linalg.norm(diff, axis=1) / np.where(ref_norm > 0, ref_norm, 1.0)
    return ErrorReport(
        err_m,
        float(np.sqrt(tau * np.sum(err_m**2))),
        rel_m,
        float(np.sqrt(tau * np.sum(rel_m**2))),
        float(np.max(np.abs(diff))) if diff.size else 0.0,
        a.shape[1],
        a.shape[0],
        int(np.sum(~keep)),
    )
