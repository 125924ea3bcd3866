"""Discrete transparent boundary conditions for the split scheme.

In the exterior of [-1, 1] the Z-transformed semi-discrete scheme reduces to

    z tau r^3 + tau g r + z - 1 = 0,

whose roots r1 (Re < 0) and r2, r3 (Re > 0) give the symbols of four
convolution kernels. Their taps are recovered with a trapezoidal contour
integral on a circle of radius ``radius`` (one inverse FFT), and the history
sums of past boundary traces feed the boundary conditions of the next step.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

OMEGA = np.exp(2j * np.pi / 3)


class ClassificationError(ArithmeticError):
    """The characteristic roots do not split into one decaying and two growing roots."""


class DegenerateError(ArithmeticError):
    """Cardano's auxiliary quantity vanished; roots are not well defined."""


class ToleranceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class RootTriple:
    r1: complex
    r2: complex
    r3: complex
    z: complex


def _cardano(z, tau, g):
    """The three roots of z tau r^3 + tau g r + z - 1 for an array of z (shape (3, n))."""
    z = np.asarray(z, dtype=complex)
    q = (z - 1) / (z * tau)
    p = g / z
    disc = np.sqrt(q * q + 4.0 / 27.0 * p**3)
    # either sign of the square root is a valid Cardano branch; the larger |G| avoids cancellation
    G = np.where(np.abs(q + disc) >= np.abs(q - disc), q + disc, q - disc)
    if np.any(G == 0):
        bad = z[np.flatnonzero(G == 0)[0]]
        raise DegenerateError(f"zeta(z) = 0 at z = {bad}")
    zeta = -((G / 2) ** (1.0 / 3.0))
    roots = np.empty((3,) + z.shape, dtype=complex)
    for j in range(3):
        wz = OMEGA**j * zeta
        roots[j] = wz - p / (3 * wz)
    # Newton polish on the monic cubic r^3 + p r + q
    for _ in range(2):
        f = roots**3 + p * roots + q
        df = 3 * roots**2 + p
        roots = roots - np.where(df != 0, f / np.where(df != 0, df, 1), 0)
    return roots


def classified_roots(z, tau: float, g: float) -> np.ndarray:
    """Roots for each z, ordered as (r1, r2, r3) with r1 the unique Re < 0 root.

    Raises ClassificationError naming the first offending z when the number
    of roots with negative real part is not exactly one.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    roots = _cardano(z, tau, g)
    neg = np.sum(roots.real < 0, axis=0)
    if np.any(neg != 1):
        i = int(np.flatnonzero(neg != 1)[0])
        raise ClassificationError(
            f"{neg[i]} roots with negative real part at z = {z[i]!r} "
            f"(tau={tau}, g={g}): {roots[:, i]}"
        )
    order = np.argsort(roots.real, axis=0)
    return np.take_along_axis(roots, order, axis=0)


def characteristic_roots(z: complex, tau: float, g_side: float) -> RootTriple:
    if not abs(z) > 1:
        raise ValueError("|z| must exceed 1")
    if not tau > 0:
        raise ValueError("tau must be positive")
    r = classified_roots([z], tau, g_side)[:, 0]
    return RootTriple(complex(r[0]), complex(r[1]), complex(r[2]), complex(z))


def polynomial_residual(r, z, tau: float, g: float):
    return np.abs(z * tau * r**3 + tau * g * r + z - 1)


def kernel_symbols(roots):
    """(s1, s2, s3, s4) = (1/r2 + 1/r3, -1/(r2 r3), 1/r1^2, 1/r1).

    Accepts a RootTriple or a (3, n) array from ``classified_roots``.
    """
    if isinstance(roots, RootTriple):
        r1, r2, r3 = roots.r1, roots.r2, roots.r3
    else:
        r1, r2, r3 = roots
    if np.any(np.asarray(r1) == 0) or np.any(np.asarray(r2) == 0) or np.any(np.asarray(r3) == 0):
        raise DegenerateError("zero characteristic root")
    return 1 / r2 + 1 / r3, -1 / (r2 * r3), 1 / r1**2, 1 / r1


def inverse_z_transform(
    symbol_sampler: Callable[[np.ndarray], np.ndarray],
    radius: float,
    n_samples: int,
    n_taps: int,
    return_imag: bool = False,
):
    """First ``n_taps`` terms of the causal sequence whose Z-transform is sampled.

    The Cauchy integral on |z| = radius is discretized by the trapezoidal rule
    with ``n_samples`` points, i.e. u^l ~ radius^l * ifft(U)[l].
    """
    if not radius > 1:
        raise ValueError("radius must exceed 1")
    if n_taps < 1 or n_samples < 2 * n_taps:
        raise ValueError("need n_taps >= 1 and n_samples >= 2 * n_taps")
    z = radius * np.exp(2j * np.pi * np.arange(n_samples) / n_samples)
    U = np.asarray(symbol_sampler(z), dtype=complex)
    seq = np.fft.ifft(U)[:n_taps] * radius ** np.arange(n_taps)
    max_imag = float(np.max(np.abs(seq.imag)))
    if max_imag > 1e-8:
        warnings.warn(
            f"discarded imaginary part {max_imag:.2e} exceeds 1e-8", ToleranceWarning, stacklevel=2
        )
    if return_imag:
        return seq.real.copy(), max_imag
    return seq.real.copy()


def critical_radius(tau: float, g: float) -> float:
    """Largest |z| at which a characteristic root lies on the imaginary axis.

    Setting r = i k gives z = (1 - i tau g k)/(1 - i tau k^3), so this is the
    square root of max_k (1 + tau^2 g^2 k^2)/(1 + tau^2 k^6). Outside this
    radius exactly one root has negative real part.
    """
    if g == 0:
        return 1.0
    a, b = (tau * g) ** 2, tau**2
    # stationary points in s = k^2: 2ab s^3 + 3b s^2 - a = 0
    cand = [0.0] + [s.real for s in np.roots([2 * a * b, 3 * b, 0.0, -a]) if abs(s.imag) < 1e-12 * (1 + abs(s)) and s.real > 0]
    amp = max((1 + a * s) / (1 + b * s**3) for s in cand)
    return math.sqrt(amp)


def kernel_radius(tau: float, g_minus: float, g_plus: float, c_radius: float) -> float:
    """exp(c_radius * tau), raised if needed so that log r >= 2 log(critical radius)."""
    log_r = c_radius * tau
    for g in (g_minus, g_plus):
        log_r = max(log_r, 2 * math.log(critical_radius(tau, g)))
    return math.exp(log_r)


def default_samples(m_max: int) -> int:
    """m * ceil(|log 1e-7|) = 17 m, rounded up to a power of two."""
    n = m_max * math.ceil(abs(math.log(1e-7)))
    return 1 << (n - 1).bit_length()


@dataclass(frozen=True)
class TbcKernels:
    y1: np.ndarray
    y2: np.ndarray
    y3: np.ndarray
    y4: np.ndarray
    radius: float
    n_samples: int
    tau: float
    g_minus: float
    g_plus: float
    max_imag: float = 0.0
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def m_max(self) -> int:
        return len(self.y1) - 1

    @property
    def y1_0(self) -> float:
        return float(self.y1[0])

    @property
    def y2_0(self) -> float:
        return float(self.y2[0])

    @property
    def y3_0(self) -> float:
        return float(self.y3[0])

    @property
    def y4_0(self) -> float:
        return float(self.y4[0])

    @property
    def y0(self) -> tuple[float, float, float, float]:
        return self.y1_0, self.y2_0, self.y3_0, self.y4_0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["j", "Y1", "Y2", "Y3", "Y4"])
            for j in range(len(self.y1)):
                w.writerow([j] + ["%.17g" % y[j] for y in (self.y1, self.y2, self.y3, self.y4)])


def _side_sampler(tau: float, g: float, which: tuple[int, int]):
    def sampler(z):
        s = kernel_symbols(classified_roots(z, tau, g))
        return np.stack([s[which[0]], s[which[1]]])

    return sampler


def build_kernels(
    tau: float,
    g_minus: float,
    g_plus: float,
    m_max: int,
    c_radius: float = 1.0,
    n_samples: int | None = None,
) -> TbcKernels:
    """Kernel taps Y1..Y4 for steps 0..m_max.

    Y1, Y2 use the left exterior value g_minus, Y3, Y4 the right one g_plus.
    The result is cached on its arguments.
    """
    if not tau > 0 or m_max < 1 or not c_radius > 0:
        raise ValueError("need tau > 0, m_max >= 1, c_radius > 0")
    return _build_kernels(float(tau), float(g_minus), float(g_plus), int(m_max), float(c_radius), n_samples)


@lru_cache(maxsize=32)
def _build_kernels(tau, g_minus, g_plus, m_max, c_radius, n_samples):
    radius = kernel_radius(tau, g_minus, g_plus, c_radius)
    nz = default_samples(m_max) if n_samples is None else int(n_samples)
    n_taps = m_max + 1
    left = _side_sampler(tau, g_minus, (0, 1))
    right = _side_sampler(tau, g_plus, (2, 3))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ToleranceWarning)
        yl, im_l = _inverse_pair(left, radius, nz, n_taps)
        yr, im_r = _inverse_pair(right, radius, nz, n_taps)
    max_imag = max(im_l, im_r)
    if max_imag > 1e-8:
        warnings.warn(f"kernel imaginary residue {max_imag:.2e} exceeds 1e-8", ToleranceWarning, stacklevel=3)
    for arr in (*yl, *yr):
        arr.setflags(write=False)
    diag = {
        "critical_radius_minus": critical_radius(tau, g_minus),
        "critical_radius_plus": critical_radius(tau, g_plus),
        "requested_radius": math.exp(c_radius * tau),
    }
    return TbcKernels(yl[0], yl[1], yr[0], yr[1], radius, nz, tau, g_minus, g_plus, max_imag, diag)


def _inverse_pair(sampler, radius, nz, n_taps):
    z = radius * np.exp(2j * np.pi * np.arange(nz) / nz)
    U = sampler(z)
    seq = np.fft.ifft(U, axis=1)[:, :n_taps] * radius ** np.arange(n_taps)
    return (seq[0].real.copy(), seq[1].real.copy()), float(np.max(np.abs(seq.imag)))


def limit_zeroth_taps(tau: float) -> tuple[float, float, float, float]:
    """Y_k^0 as z -> infinity, where the roots tend to those of r^3 = -1/tau."""
    c = tau ** (1.0 / 3.0)
    return c, -c * c, c * c, -c


class BoundaryHistory:
    """Traces u, u_x, u_xx at x = -1 and x = +1, one row per completed step."""

    FIELDS = ("u_left", "ux_left", "uxx_left", "u_right", "ux_right", "uxx_right")

    def __init__(self, capacity: int):
        self._data = np.zeros((capacity, 6))
        self._n = 0

    def __len__(self) -> int:
        return self._n

    def append(self, left: tuple[float, float, float], right: tuple[float, float, float]) -> None:
        if self._n == len(self._data):
            self._data = np.concatenate([self._data, np.zeros_like(self._data)])
        self._data[self._n, :3] = left
        self._data[self._n, 3:] = right
        self._n += 1

    def column(self, name: str) -> np.ndarray:
        return self._data[: self._n, self.FIELDS.index(name)]

    def as_array(self) -> np.ndarray:
        return self._data[: self._n].copy()


def history_rhs(kernels: TbcKernels, history: BoundaryHistory, m: int) -> tuple[float, float, float]:
    """History sums (h1, h2, h3) for step m from steps 0..m-1."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > kernels.m_max:
        raise IndexError(f"step {m} exceeds kernel length {kernels.m_max}")
    if len(history) < m:
        raise IndexError(f"history holds {len(history)} steps, need {m}")
    d = history._data
    # reversed traces u^{m-1}, ..., u^0 pair with taps 1..m
    rev = d[:m][::-1]
    h1 = kernels.y1[1 : m + 1] @ rev[:, 1] + kernels.y2[1 : m + 1] @ rev[:, 2]
    h2 = kernels.y3[1 : m + 1] @ rev[:, 5]
    h3 = kernels.y4[1 : m + 1] @ rev[:, 5]
    return float(h1), float(h2), float(h3)
