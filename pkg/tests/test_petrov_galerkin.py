import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from numpy.polynomial import legendre as npleg

from dispersive_tbc.orthopoly import build_rule
from dispersive_tbc.petrov_galerkin import (
    BandedLU,
    DualMismatchError,
    SingularMatrixError,
    SingularSystemError,
    _legendre_l2,
    assemble_mass,
    assemble_rhs,
    assemble_stiffness,
    basis_coefficients,
    build_basis,
    build_system,
    discrete_basis_product,
    lifting,
    project_rhs,
    solve_step_system,
)
from dispersive_tbc.tbc import build_kernels, limit_zeroth_taps


def ends(c, order):
    d = npleg.legder(c, order) if order else c
    return npleg.legval(-1.0, d), npleg.legval(1.0, d)


def trial_residuals(c, y0):
    y1, y2, y3, y4 = y0
    (u_l, u_r), (ux_l, ux_r), (uxx_l, uxx_r) = (ends(c, k) for k in range(3))
    return np.array([u_l - y1 * ux_l - y2 * uxx_l, u_r - y3 * uxx_r, ux_r - y4 * uxx_r])


def dual_residuals(c, y0):
    y1, y2, y3, y4 = y0
    (v_l, v_r), (vx_l, vx_r), (vxx_l, vxx_r) = (ends(c, k) for k in range(3))
    return np.array([v_r - y4 * vx_r + y3 * vxx_r, v_l + y2 * vxx_l, vx_l - y1 * vxx_l])


@pytest.fixture(scope="module")
def kernel_y0():
    return build_kernels(1e-4, 0.0, 0.0, 256, 1 / (256 * 1e-4)).y0


def test_homogeneous_coefficients_classical_form():
    # y0 = 0: phi_k = L_k - a L_{k+1} - L_{k+2} + a L_{k+3}, a = (2k+3)/(2k+5)
    for k in range(12):
        a = (2 * k + 3) / (2 * k + 5)
        assert np.allclose(basis_coefficients(k, (0, 0, 0, 0)), (-a, -1.0, a), atol=1e-14)


def test_homogeneous_k0_against_constraint_solve():
    # independent route: impose phi(-1) = phi(1) = phi'(1) = 0 on L0 + a L1 + b L2 + c L3
    A = np.array([[ends(np.eye(4)[i], o)[s] for i in (1, 2, 3)] for o, s in ((0, 0), (0, 1), (1, 1))])
    rhs = -np.array([ends(np.eye(4)[0], o)[s] for o, s in ((0, 0), (0, 1), (1, 1))])
    assert np.allclose(np.linalg.solve(A, rhs), basis_coefficients(0, (0, 0, 0, 0)), atol=1e-14)


@given(st.floats(-2, 2), st.floats(-2, 2), st.integers(0, 60))
def test_residuals_for_dual_compatible_y0(a, b, k):
    y0 = (a, b, -b, -a)
    try:
        coef = basis_coefficients(k, y0)
    except SingularSystemError:
        assume(False)
    phi = np.zeros(k + 4)
    phi[k:] = (1, *coef)
    psi = np.zeros(k + 4)
    psi[k:] = (1, -coef[0], coef[1], -coef[2])
    scale = 1 + (k + 3) ** 4
    assert np.max(np.abs(trial_residuals(phi, y0))) < 1e-10 * scale
    assert np.max(np.abs(dual_residuals(psi, y0))) < 1e-10 * scale


def test_kernel_y0_basis(kernel_y0):
    rule = build_rule(32)
    b = build_basis(rule, kernel_y0)
    assert np.all(b.gamma != 0)
    for k in range(b.size):
        assert np.max(np.abs(trial_residuals(b.phi_leg[k], kernel_y0))) < 1e-10 * (1 + k**4)
        assert np.max(np.abs(dual_residuals(b.psi_leg[k], kernel_y0))) < 1e-10 * (1 + k**4)


def test_dual_mismatch_detected():
    with pytest.raises(DualMismatchError):
        basis_coefficients(2, (0.3, 0.0, 0.0, 0.0))


def test_stiffness_formula(kernel_y0):
    b = build_basis(build_rule(16), kernel_y0)
    S = assemble_stiffness(b)
    assert S[0] == pytest.approx(30 * b.gamma[0])
    assert S[2] == pytest.approx(126 * b.gamma[2])


def test_mass_band_and_small_entry(kernel_y0):
    rule = build_rule(24)
    b = build_basis(rule, kernel_y0)
    M = assemble_mass(b, rule)
    i, j = np.indices(M.shape)
    assert np.all(M[np.abs(i - j) > 3] == 0)
    a0, b0, g0 = b.coeffs[0]
    assert M[0, 0] == pytest.approx(2 - 2 / 3 * a0**2 + 2 / 5 * b0**2 - 2 / 7 * g0**2, rel=1e-14)


def test_mass_matches_discrete_product_and_corners_differ(kernel_y0):
    rule = build_rule(20)
    b = build_basis(rule, kernel_y0)
    M = assemble_mass(b, rule)
    n = b.size
    for k in range(n):
        for j in range(max(0, k - 3), min(n, k + 4)):
            assert M[k, j] == pytest.approx(discrete_basis_product(b, rule, j, k), abs=1e-12)
    for k, j in [(n - 1, n - 2), (n - 2, n - 1), (n - 1, n - 1)]:
        assert abs(M[k, j] - _legendre_l2(b.phi_leg[j], b.psi_leg[k])) > 1e-3
    # off-band pairs of exact degree vanish under the quadrature too
    for k in range(n):
        for j in range(n):
            if abs(j - k) > 3 and j + k + 6 <= 2 * 20 - 2:
                assert abs(discrete_basis_product(b, rule, j, k)) < 1e-10


def test_lifting_examples():
    p = lifting(0, 0, 0, (0.1, 0.2, -0.2, -0.1))
    assert (p.c0, p.c1, p.c2) == (0.0, 0.0, 0.0)
    p = lifting(1, 0, 0, (0, 0, 0, 0))
    assert np.allclose([p.c0, p.c1, p.c2], [0.25, -0.5, 0.25], atol=1e-15)
    x = np.linspace(-1, 1, 5)
    assert np.allclose(npleg.legval(x, p.legendre_coeffs()), p(x))


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10), st.sampled_from([1e-2, 1e-4, 1e-6]))
def test_lifting_residuals(h1, h2, h3, tau):
    y1, y2, y3, y4 = limit_zeroth_taps(tau)
    p = lifting(h1, h2, h3, (y1, y2, y3, y4))
    r = [
        p(-1.0) - y1 * p(-1.0, 1) - y2 * p(-1.0, 2) - h1,
        p(1.0) - y3 * p(1.0, 2) - h2,
        p(1.0, 1) - y4 * p(1.0, 2) - h3,
    ]
    assert np.max(np.abs(r)) < 1e-12 * (1 + abs(h1) + abs(h2) + abs(h3))


def test_lifting_singular():
    # y0 = (0, 0, 0, 1): rows [1, -1, 1], [1, 1, 1], [0, 1, 0] have determinant 0
    with pytest.raises(SingularSystemError):
        lifting(1, 1, 1, (0.0, 0.0, 0.0, 1.0))


def test_rhs_consistency_with_mass(kernel_y0):
    rule = build_rule(20)
    b = build_basis(rule, kernel_y0)
    M = assemble_mass(b, rule)
    zero = np.zeros(20)
    assert np.all(project_rhs(zero, 0.0, b, rule) == 0)
    for j in (0, 5, b.size - 1):
        f = b.phi_at_nodes[j]
        fd = b.phi_bnd[1][1, j]
        assert np.allclose(project_rhs(f, fd, b, rule), M[:, j], atol=1e-12)


def test_assemble_rhs_previous_state_identity(kernel_y0):
    # g = 0, p2 = 0: rhs = M w + (psi_k, p2_prev)_N
    rule = build_rule(20)
    b = build_basis(rule, kernel_y0)
    M = assemble_mass(b, rule)
    rng = np.random.default_rng(0)
    w = rng.normal(size=b.size)
    prev = lifting(0.3, -0.2, 0.1, kernel_y0)
    u = w @ b.phi_at_nodes + prev(rule.nodes)
    uxr = w @ b.phi_bnd[1][1] + float(prev(1.0, 1))
    zero_p2 = lifting(0, 0, 0, kernel_y0)
    rhs = assemble_rhs(u, np.zeros(20), np.zeros(20), zero_p2, b, rule, 0.1, uxr)
    lift_part = project_rhs(prev(rule.nodes), float(prev(1.0, 1)), b, rule)
    assert np.allclose(rhs, M @ w + lift_part, atol=1e-12)
    with pytest.raises(ValueError):
        assemble_rhs(u[:-1], np.zeros(20), np.zeros(20), zero_p2, b, rule, 0.1, 0.0)


def test_solve_examples(kernel_y0):
    rule = build_rule(32)
    b = build_basis(rule, kernel_y0)
    sysm = build_system(b, rule, 1e-4)
    A = sysm.dense
    assert np.all(solve_step_system(sysm, np.zeros(b.size)) == 0)
    for j in (0, 7, b.size - 1):
        assert np.allclose(solve_step_system(sysm, A[:, j]), np.eye(b.size)[j], atol=1e-10)
    rng = np.random.default_rng(1)
    r = rng.normal(size=b.size)
    w = solve_step_system(sysm, r)
    assert np.max(np.abs(A @ w - r)) < 1e-10 * np.max(np.abs(r))
    assert np.allclose(w, np.linalg.solve(A, r), rtol=1e-9, atol=1e-12)


def test_banded_lu_singular():
    A = np.eye(6)
    A[3, 3] = 0
    with pytest.raises(SingularMatrixError):
        BandedLU(A, 3, 3)


def third_derivative_products(b, rule):
    """(phi_i''', psi_j)_N and (phi_i, psi_j''')_N via numpy's Legendre module."""
    n = b.size
    out1 = np.zeros((n, n))
    out2 = np.zeros((n, n))
    x = rule.nodes
    for i in range(n):
        d3p = npleg.legder(b.phi_leg[i], 3)
        for j in range(n):
            d3q = npleg.legder(b.psi_leg[j], 3)
            for out, a, c in ((out1, d3p, b.psi_leg[j]), (out2, b.phi_leg[i], d3q)):
                prod = npleg.legmul(a, c)
                deriv = npleg.legval(1.0, npleg.legder(prod))
                out[i, j] = rule.weights @ (npleg.legval(x, a) * npleg.legval(x, c)) + rule.deriv_weight * deriv
    return out1, out2


def test_duality_identity(kernel_y0):
    N = 20
    rule = build_rule(N)
    b = build_basis(rule, kernel_y0)
    D1, D2 = third_derivative_products(b, rule)
    k = N - 5  # indices 0..N-6
    scale = np.max(np.abs(D1[:k, :k]))
    assert np.max(np.abs(D1[:k, :k] + D2[:k, :k])) < 1e-9 * scale
    S = assemble_stiffness(b)
    assert np.max(np.abs(D1[:k, :k] - np.diag(S[:k]))) < 1e-9 * scale
