"""Lie-Trotter splitting with transparent boundaries for u_t + g(x) u_x + u_xxx = 0.

Each step solves

    u^m + tau u^m_xxx = u^{m-1} - tau g u^{m-1}_x     on (-1, 1)

with the three discrete transparent boundary conditions, after the physical
domain [-A, A] has been mapped to [-1, 1] by x = A xi, t = A^3 s (which keeps
the dispersion coefficient equal to one and multiplies g by A^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .orthopoly import SpectralRule, build_rule, legendre_table
from .petrov_galerkin import (
    LiftingPolynomial,
    PetrovGalerkinBasis,
    SystemMatrices,
    assemble_rhs,
    build_basis,
    build_system,
    lifting,
    solve_step_system,
)
from .tbc import BoundaryHistory, TbcKernels, build_kernels, history_rhs


class NonFiniteError(FloatingPointError):
    pass


class StepError(RuntimeError):
    def __init__(self, step: int, cause: Exception):
        super().__init__(f"step {step} failed: {cause!r}")
        self.step = step
        self.cause = cause


@dataclass(frozen=True)
class Coefficient:
    """Advection coefficient g with its derivative and exterior constants."""

    value: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    label: str = "g"

    def __call__(self, x):
        return np.broadcast_to(self.value(np.asarray(x, dtype=float)), np.shape(x)).astype(float)

    @classmethod
    def constant(cls, g: float) -> "Coefficient":
        g = float(g)
        return cls(lambda x: np.full(np.shape(x), g), lambda x: np.zeros(np.shape(x)), f"{g:g}")

    @classmethod
    def cosine(cls, half_width: float = 6.0) -> "Coefficient":
        """pi (1 + cos(pi (x + A) / (2A))): 2 pi on the left, 0 on the right, flat at +-A."""
        A = float(half_width)
        k = math.pi / (2 * A)
        return cls(
            lambda x: math.pi * (1 + np.cos(k * (x + A))),
            lambda x: -math.pi * k * np.sin(k * (x + A)),
            "cosine",
        )


def gaussian(x):
    return np.exp(-np.asarray(x, dtype=float) ** 2)


@dataclass(frozen=True)
class ProblemSpec:
    half_width: float = 6.0
    g: Coefficient = field(default_factory=lambda: Coefficient.constant(0.0))
    u0: Callable[[np.ndarray], np.ndarray] = gaussian
    t_final: float = 2.0
    n_steps: int = 1024
    n_modes: int = 128
    c_radius: float | None = None  # None: 1 / (scaled final time), so that r^m = e

    def __post_init__(self):
        A = self.half_width
        if not A > 0 or not self.t_final > 0 or self.n_steps < 1:
            raise ValueError("need half_width > 0, t_final > 0, n_steps >= 1")
        edge = np.array([-A, A])
        if np.max(np.abs(self.u0(edge))) >= 1e-12:
            raise ValueError("initial data must vanish (< 1e-12) at the domain edges")
        if np.max(np.abs(self.g.deriv(edge))) >= 1e-12:
            raise ValueError("g must be flat (|g'| < 1e-12) at the domain edges")


@dataclass(frozen=True)
class ScaledProblem:
    half_width: float
    g: Callable[[np.ndarray], np.ndarray]
    g_deriv: Callable[[np.ndarray], np.ndarray]
    g_minus: float
    g_plus: float
    t_final: float
    tau: float
    n_steps: int

    def to_physical(self, s: float, xi):
        """(t, x) for scaled time s and scaled positions xi."""
        A = self.half_width
        return s * A**3, np.asarray(xi) * A


def scale_problem(spec: ProblemSpec) -> ScaledProblem:
    A = float(spec.half_width)
    g = spec.g
    gm, gp = float(g(-A)), float(g(A))
    t = spec.t_final / A**3
    return ScaledProblem(
        A,
        lambda xi: A**2 * g(A * np.asarray(xi)),
        lambda xi: A**3 * g.deriv(A * np.asarray(xi)),
        A**2 * gm,
        A**2 * gp,
        t,
        t / spec.n_steps,
        spec.n_steps,
    )


@dataclass(frozen=True)
class Machinery:
    rule: SpectralRule
    kernels: TbcKernels
    basis: PetrovGalerkinBasis
    matrices: SystemMatrices
    tau: float
    g_nodes: np.ndarray
    g_right: float
    g_right_deriv: float


def build_machinery(scaled: ScaledProblem, n_modes: int, c_radius: float | None = None) -> Machinery:
    rule = build_rule(n_modes)
    c = 1.0 / scaled.t_final if c_radius is None else c_radius
    kernels = build_kernels(scaled.tau, scaled.g_minus, scaled.g_plus, scaled.n_steps, c)
    basis = build_basis(rule, kernels.y0)
    matrices = build_system(basis, rule, scaled.tau)
    return Machinery(
        rule,
        kernels,
        basis,
        matrices,
        scaled.tau,
        np.asarray(scaled.g(rule.nodes), dtype=float),
        float(scaled.g(1.0)),
        float(scaled.g_deriv(1.0)),
    )


@dataclass
class SolverState:
    step: int
    coeffs: np.ndarray  # Legendre coefficients of u, degrees 0..N
    u_nodes: np.ndarray
    history: BoundaryHistory
    w_hat: np.ndarray | None = None
    p2: LiftingPolynomial | None = None


def spectral_derivative(coeffs, basis: PetrovGalerkinBasis, order: int = 1):
    """Values of d^order u/dx^order at the nodes and at (-1, +1).

    ``coeffs`` are Legendre coefficients of u (length N+1); differentiation is
    termwise on the Legendre expansion and exact for polynomials.
    """
    c = np.asarray(coeffs, dtype=float)
    nodes = c @ basis.leg_nodes[order]
    return nodes, (float(nodes[0]), float(nodes[-1]))


def boundary_traces(coeffs, basis: PetrovGalerkinBasis):
    """((u, u_x, u_xx) at -1, (u, u_x, u_xx) at +1)."""
    c = np.asarray(coeffs, dtype=float)
    left = tuple(float(v) for v in c @ basis.leg_nodes[:, :, 0].T)
    right = tuple(float(v) for v in c @ basis.leg_nodes[:, :, -1].T)
    return left, right


def initial_state(u0_scaled: Callable, mach: Machinery) -> SolverState:
    """Degree-N interpolant of u0 at the nodes with u'(1) = 0.

    The extra condition mirrors the derivative sample of the quadrature rule.
    Step-0 traces are recorded as zero: u0 vanishes outside the domain, and
    the derivatives of a truncated interpolant at +-1 are dominated by
    approximation error (O(N^4) amplified in u_xx).
    """
    rule, basis = mach.rule, mach.basis
    N = rule.n_points
    vals = np.asarray(u0_scaled(rule.nodes), dtype=float)
    V = np.vstack([legendre_table(N, rule.nodes).T, legendre_table(N, 1.0, 1)[None, :]])
    coeffs = np.linalg.solve(V, np.append(vals, 0.0))
    history = BoundaryHistory(mach.kernels.m_max + 1)
    history.append((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    return SolverState(0, coeffs, coeffs @ basis.leg_nodes[0], history)


def step(state: SolverState, mach: Machinery) -> SolverState:
    m = state.step + 1
    tau, basis, rule = mach.tau, mach.basis, mach.rule
    h1, h2, h3 = history_rhs(mach.kernels, state.history, m)
    p2 = lifting(h1, h2, h3, basis.y0)

    c = state.coeffs
    ux_nodes = c @ basis.leg_nodes[1]
    ux_r, uxx_r = ux_nodes[-1], float(c @ basis.leg_nodes[2, :, -1])
    f_deriv = ux_r - tau * (mach.g_right_deriv * ux_r + mach.g_right * uxx_r) - float(p2(1.0, 1))
    rhs = assemble_rhs(state.u_nodes, ux_nodes, mach.g_nodes, p2, basis, rule, tau, f_deriv)
    if not np.all(np.isfinite(rhs)):
        raise NonFiniteError(f"non-finite right-hand side at step {m}")
    w = solve_step_system(mach.matrices, rhs)

    coeffs = w @ basis.phi_leg
    coeffs[:3] += p2.legendre_coeffs()
    u_nodes = coeffs @ basis.leg_nodes[0]
    if not np.all(np.isfinite(u_nodes)):
        raise NonFiniteError(f"non-finite values at step {m}")
    state.history.append(*boundary_traces(coeffs, basis))
    return SolverState(m, coeffs, u_nodes, state.history, w, p2)


def boundary_residuals(state: SolverState, mach: Machinery) -> np.ndarray:
    """Residuals of the three transparent boundary rows for the current state."""
    m = state.step
    if m == 0:
        return np.zeros(3)
    y1, y2, y3, y4 = mach.basis.y0
    (u_l, ux_l, uxx_l), (u_r, ux_r, uxx_r) = boundary_traces(state.coeffs, mach.basis)
    saved = state.history._n
    state.history._n = m  # sums use steps 0..m-1 only
    try:
        h1, h2, h3 = history_rhs(mach.kernels, state.history, m)
    finally:
        state.history._n = saved
    return np.array(
        [
            u_l - y1 * ux_l - y2 * uxx_l - h1,
            u_r - y3 * uxx_r - h2,
            ux_r - y4 * uxx_r - h3,
        ]
    )


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    x: np.ndarray | None = None
    values: list = field(default_factory=list)
    coeffs: np.ndarray | None = None  # (n_steps + 1, N + 1) when recorded
    max_bc_residual: float = 0.0
    machinery: Machinery | None = None
    scaled: ScaledProblem | None = None

    def evaluate(self, step: int, x_phys) -> np.ndarray:
        """Solution polynomial at a recorded step, evaluated at physical points."""
        if self.coeffs is None:
            raise ValueError("run with record_coeffs=True to evaluate arbitrary steps")
        xi = np.asarray(x_phys, dtype=float) / self.scaled.half_width
        return self.coeffs[step] @ legendre_table(self.coeffs.shape[1] - 1, xi)


def run(
    spec: ProblemSpec,
    snapshot_times: Sequence[float] = (),
    record_coeffs: bool = False,
    check_bc: bool = False,
) -> Trajectory:
    """Integrate to spec.t_final; snapshots are taken at the step nearest each requested time."""
    scaled = scale_problem(spec)
    mach = build_machinery(scaled, spec.n_modes, spec.c_radius)
    A = spec.half_width
    state = initial_state(lambda xi: spec.u0(A * np.asarray(xi)), mach)

    m_total = spec.n_steps
    wanted = {}
    for t in snapshot_times:
        if t < 0 or t > spec.t_final * (1 + 1e-12):
            raise ValueError(f"snapshot time {t} outside [0, {spec.t_final}]")
        wanted.setdefault(int(round(t / spec.t_final * m_total)), []).append(t)

    traj = Trajectory(x=A * mach.rule.nodes, machinery=mach, scaled=scaled)
    if record_coeffs:
        traj.coeffs = np.zeros((m_total + 1, spec.n_modes + 1))
        traj.coeffs[0] = state.coeffs

    def snap(st):
        for _ in wanted.get(st.step, ()):
            traj.times.append(st.step * spec.t_final / m_total)
            traj.values.append(st.u_nodes.copy())

    snap(state)
    for m in range(1, m_total + 1):
        try:
            state = step(state, mach)
        except Exception as exc:  # noqa: BLE001 - re-raised with the step index
            raise StepError(m, exc) from exc
        if record_coeffs:
            traj.coeffs[m] = state.coeffs
        if check_bc:
            traj.max_bc_residual = max(traj.max_bc_residual, float(np.max(np.abs(boundary_residuals(state, mach)))))
        snap(state)
    traj.final_state = state
    return traj
