"""Dual-Petrov-Galerkin discretization of u + tau u_xxx = f on [-1, 1].

Trial functions phi_k = L_k + a L_{k+1} + b L_{k+2} + c L_{k+3} satisfy the
homogeneous boundary operators

    u(-1) - Y1 u_x(-1) - Y2 u_xx(-1) = 0,
    u(1)  - Y3 u_xx(1)               = 0,
    u_x(1) - Y4 u_xx(1)              = 0,

where (Y1, Y2, Y3, Y4) are the zeroth kernel taps. Test functions
psi_k = L_k - a L_{k+1} + b L_{k+2} - c L_{k+3} use the same coefficients and
satisfy the dual conditions that make (u_xxx, v) = -(u, v_xxx). With this
pairing the third-derivative matrix is diagonal and the mass matrix has
bandwidth three.

Matrices are stored with the test index first: ``mass[k, j] = (phi_j, psi_k)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .orthopoly import SpectralRule, legendre_endpoint_table, legendre_table


class SingularSystemError(np.linalg.LinAlgError):
    pass


class DualMismatchError(ArithmeticError):
    """A test function violates the dual boundary conditions."""


class SingularMatrixError(np.linalg.LinAlgError):
    pass


DUAL_TOL = 1e-8


def _trial_rows(kmax: int, y0) -> np.ndarray:
    """Boundary operators of the trial space applied to L_0..L_kmax, shape (3, kmax+1)."""
    y1, y2, y3, y4 = y0
    lm = legendre_endpoint_table(kmax, -1)
    lp = legendre_endpoint_table(kmax, 1)
    return np.array(
        [
            lm[0] - y1 * lm[1] - y2 * lm[2],
            lp[0] - y3 * lp[2],
            lp[1] - y4 * lp[2],
        ]
    )


def _dual_rows(kmax: int, y0) -> np.ndarray:
    """Dual boundary operators applied to L_0..L_kmax, shape (3, kmax+1), with their magnitudes."""
    y1, y2, y3, y4 = y0
    lm = legendre_endpoint_table(kmax, -1)
    lp = legendre_endpoint_table(kmax, 1)
    rows = np.array(
        [
            lp[0] - y4 * lp[1] + y3 * lp[2],
            lm[0] + y2 * lm[2],
            lm[1] - y1 * lm[2],
        ]
    )
    scale = np.array(
        [
            np.abs(lp[0]) + abs(y4) * np.abs(lp[1]) + abs(y3) * np.abs(lp[2]),
            np.abs(lm[0]) + abs(y2) * np.abs(lm[2]),
            np.abs(lm[1]) + abs(y1) * np.abs(lm[2]),
        ]
    )
    return rows, scale


def basis_coefficients(k: int, y0) -> tuple[float, float, float]:
    """(alpha_k, beta_k, gamma_k) placing phi_k in the trial space.

    The same coefficients are then checked against the dual conditions for
    psi_k; a relative residual above 1e-8 raises DualMismatchError.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    rows = _trial_rows(k + 3, y0)
    A = rows[:, k + 1 : k + 4]
    rhs = -rows[:, k]
    if not np.all(np.isfinite(A)) or np.linalg.cond(A) > 1e14:
        raise SingularSystemError(f"boundary system for k={k} is singular (y0={tuple(y0)})")
    alpha, beta, gamma = np.linalg.solve(A, rhs)

    drows, dscale = _dual_rows(k + 3, y0)
    psi = np.array([1.0, -alpha, beta, -gamma])
    res = drows[:, k : k + 4] @ psi
    mag = np.abs(drows[:, k : k + 4]) @ np.abs(psi)
    rel = np.max(np.abs(res) / np.maximum(mag, 1e-300))
    if rel > DUAL_TOL:
        raise DualMismatchError(
            f"psi_{k} violates the dual boundary conditions (relative residual {rel:.2e}, y0={tuple(y0)})"
        )
    return float(alpha), float(beta), float(gamma)


@dataclass(frozen=True)
class PetrovGalerkinBasis:
    """Trial/test bases on the nodes of a quadrature rule.

    ``phi_leg``/``psi_leg`` hold Legendre coefficients (rows k = 0..N-3,
    columns degrees 0..N). ``phi_at_nodes``/``psi_at_nodes`` are (N-2) x N.
    ``phi_bnd[s]`` (s = 0 for x = -1, 1 for x = +1) is a 3 x (N-2) table of
    phi_k, phi_k', phi_k''; ``psi_bnd`` likewise.
    """

    n: int
    coeffs: np.ndarray
    y0: tuple
    phi_leg: np.ndarray
    psi_leg: np.ndarray
    phi_at_nodes: np.ndarray
    psi_at_nodes: np.ndarray
    phi_bnd: np.ndarray
    psi_bnd: np.ndarray
    leg_nodes: np.ndarray  # (3, N+1, N): L_i^{(d)} at the rule nodes, d = 0..2

    @property
    def size(self) -> int:
        return self.n - 2

    @property
    def gamma(self) -> np.ndarray:
        return self.coeffs[:, 2]


def build_basis(rule: SpectralRule, y0) -> PetrovGalerkinBasis:
    N = rule.n_points
    y0 = tuple(float(v) for v in y0)
    coeffs = np.array([basis_coefficients(k, y0) for k in range(N - 2)])
    phi = np.zeros((N - 2, N + 1))
    psi = np.zeros((N - 2, N + 1))
    for k, (a, b, c) in enumerate(coeffs):
        phi[k, k : k + 4] = (1.0, a, b, c)
        psi[k, k : k + 4] = (1.0, -a, b, -c)
    leg_nodes = np.stack([legendre_table(N, rule.nodes, d) for d in range(3)])
    ends = [legendre_endpoint_table(N, s) for s in (-1, 1)]
    phi_bnd = np.stack([e @ phi.T for e in ends])
    psi_bnd = np.stack([e @ psi.T for e in ends])
    for arr in (coeffs, phi, psi, leg_nodes, phi_bnd, psi_bnd):
        arr.setflags(write=False)
    return PetrovGalerkinBasis(
        N, coeffs, y0, phi, psi, phi @ leg_nodes[0], psi @ leg_nodes[0], phi_bnd, psi_bnd, leg_nodes
    )


def assemble_stiffness(basis: PetrovGalerkinBasis) -> np.ndarray:
    """Diagonal of the third-derivative matrix: 2 (2j+3)(2j+5) gamma_j."""
    j = np.arange(basis.size)
    return 2.0 * (2 * j + 3) * (2 * j + 5) * basis.gamma


def _legendre_l2(a: np.ndarray, b: np.ndarray) -> float:
    deg = np.arange(len(a))
    return float(np.sum(a * b * 2.0 / (2 * deg + 1)))


def discrete_basis_product(basis: PetrovGalerkinBasis, rule: SpectralRule, j: int, k: int) -> float:
    """(phi_j, psi_k)_N including the derivative term at x = 1 (exact endpoint values)."""
    pj, qk = basis.phi_at_nodes[j], basis.psi_at_nodes[k]
    pb, qb = basis.phi_bnd[1], basis.psi_bnd[1]
    deriv = pb[1, j] * qb[0, k] + pb[0, j] * qb[1, k]
    return float(rule.weights @ (pj * qk) + rule.deriv_weight * deriv)


def assemble_mass(basis: PetrovGalerkinBasis, rule: SpectralRule) -> np.ndarray:
    """Mass matrix, ``mass[k, j] = (phi_j, psi_k)``, zero outside |j - k| <= 3.

    Entries come from Legendre orthogonality except the three with
    deg phi_j + deg psi_k > 2N - 2, which use the discrete product.
    """
    n = basis.size
    N = basis.n
    if rule.n_points != N:
        raise ValueError("basis and rule have different N")
    M = np.zeros((n, n))
    for k in range(n):
        for j in range(max(0, k - 3), min(n, k + 4)):
            if j + k + 6 <= 2 * N - 2:
                M[k, j] = _legendre_l2(basis.phi_leg[j], basis.psi_leg[k])
            else:
                M[k, j] = discrete_basis_product(basis, rule, j, k)
    return M


@dataclass(frozen=True)
class LiftingPolynomial:
    c0: float
    c1: float
    c2: float

    def __call__(self, x, order: int = 0):
        x = np.asarray(x, dtype=float)
        if order == 0:
            return self.c0 + self.c1 * x + self.c2 * x * x
        if order == 1:
            return self.c1 + 2 * self.c2 * x
        if order == 2:
            return np.full_like(x, 2 * self.c2)
        return np.zeros_like(x)

    def legendre_coeffs(self) -> np.ndarray:
        # x^2 = (2 L_2 + L_0) / 3
        return np.array([self.c0 + self.c2 / 3.0, self.c1, 2.0 * self.c2 / 3.0])


def lifting(h1: float, h2: float, h3: float, y0) -> LiftingPolynomial:
    """Quadratic satisfying the three inhomogeneous boundary conditions with data h."""
    y1, y2, y3, y4 = y0
    A = np.array(
        [
            [1.0, -1.0 - y1, 1.0 + 2 * y1 - 2 * y2],
            [1.0, 1.0, 1.0 - 2 * y3],
            [0.0, 1.0, 2.0 - 2 * y4],
        ]
    )
    if np.linalg.cond(A) > 1e14:
        raise SingularSystemError(f"lifting system is singular (y0={tuple(y0)})")
    c = np.linalg.solve(A, [h1, h2, h3])
    return LiftingPolynomial(*map(float, c))


def project_rhs(f_nodes, f_deriv_at_right: float, basis: PetrovGalerkinBasis, rule: SpectralRule) -> np.ndarray:
    """Vector of (psi_k, f)_N for k = 0..N-3.

    The derivative term d/dx(psi_k f)(1) uses psi_k'(1) from the basis tables
    and the caller's f'(1).
    """
    f = np.asarray(f_nodes, dtype=float)
    if f.shape != (rule.n_points,):
        raise ValueError(f"expected {rule.n_points} nodal values, got {f.shape}")
    qb = basis.psi_bnd[1]
    deriv = qb[1] * f[-1] + qb[0] * f_deriv_at_right
    return basis.psi_at_nodes @ (rule.weights * f) + rule.deriv_weight * deriv


def assemble_rhs(
    u_prev_nodes,
    u_prev_x_nodes,
    g_nodes,
    p2: LiftingPolynomial,
    basis: PetrovGalerkinBasis,
    rule: SpectralRule,
    tau: float,
    f_deriv_at_right: float,
) -> np.ndarray:
    """Right-hand side (psi_k, u - tau g u_x - p2)_N.

    ``f_deriv_at_right`` is d/dx(u - tau g u_x - p2) at x = 1; the solver
    obtains it from exact derivatives of the polynomial u, the analytic
    derivative of g and p2'.
    """
    u = np.asarray(u_prev_nodes, dtype=float)
    ux = np.asarray(u_prev_x_nodes, dtype=float)
    g = np.asarray(g_nodes, dtype=float)
    if not (u.shape == ux.shape == g.shape == (rule.n_points,)):
        raise ValueError("nodal arrays must match the rule")
    f = u - tau * g * ux - p2(rule.nodes)
    return project_rhs(f, f_deriv_at_right, basis, rule)


class BandedLU:
    """LU factorization with partial pivoting of a banded matrix (LAPACK gbtrf)."""

    def __init__(self, A: np.ndarray, kl: int, ku: int):
        n = A.shape[0]
        ab = np.zeros((2 * kl + ku + 1, n))
        for i in range(n):
            for j in range(max(0, i - kl), min(n, i + ku + 1)):
                ab[kl + ku + i - j, j] = A[i, j]
        lu, piv, info = lapack.dgbtrf(ab, kl, ku)
        if info > 0:
            raise SingularMatrixError(f"zero pivot at row {info - 1}")
        if info < 0:
            raise ValueError(f"dgbtrf argument {-info} invalid")
        self.lu, self.piv, self.kl, self.ku = lu, piv, kl, ku

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        x, info = lapack.dgbtrs(self.lu, self.kl, self.ku, b.reshape(len(b), -1), self.piv)
        if info != 0:
            raise SingularMatrixError(f"dgbtrs failed with info={info}")
        return x.reshape(b.shape)


@dataclass(frozen=True)
class SystemMatrices:
    mass: np.ndarray
    stiffness: np.ndarray
    tau: float
    combined: BandedLU

    @property
    def dense(self) -> np.ndarray:
        return self.mass + self.tau * np.diag(self.stiffness)


def build_system(basis: PetrovGalerkinBasis, rule: SpectralRule, tau: float) -> SystemMatrices:
    M = assemble_mass(basis, rule)
    S = assemble_stiffness(basis)
    A = M + tau * np.diag(S)
    return SystemMatrices(M, S, tau, BandedLU(A, 3, 3))


def solve_step_system(matrices: SystemMatrices, rhs) -> np.ndarray:
    """Solve (M + tau S) w = rhs with the stored banded factorization."""
    rhs = np.asarray(rhs, dtype=float)
    w = matrices.combined.solve(rhs)
    if not np.all(np.isfinite(w)):
        raise SingularMatrixError("non-finite solution of the step system")
    return w
