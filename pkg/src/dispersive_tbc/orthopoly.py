"""Legendre and Jacobi polynomials and the generalized Gauss-Jacobi rule.

The quadrature rule lives on [-1, 1]. Its nodes are x = -1, the N-2 roots of
the Jacobi polynomial P^{(2,1)}_{N-2}, and x = 1; besides point values it uses
one derivative sample at x = 1:

    (u, v)_N = sum_k w_k u(x_k) v(x_k) + w'_N d/dx(u v)(1)

Jacobi polynomials use the classical normalization P^{(a,b)}_n(1) = C(n+a, n).
With that convention the closed-form interior weights below integrate
polynomials up to degree 2N-2 exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal


class RootRefinementError(RuntimeError):
    """Newton polishing of the Jacobi roots did not reach tolerance."""


# ---------------------------------------------------------------------------
# Legendre polynomials
# ---------------------------------------------------------------------------


def legendre_table(kmax: int, x, order: int = 0) -> np.ndarray:
    """Values of d^order/dx^order L_k(x) for k = 0..kmax.

    Returns an array of shape (kmax + 1,) + np.shape(x). Values come from the
    three-term recurrence; derivatives from

        L^{(d)}_{k+1} = L^{(d)}_{k-1} + (2k + 1) L^{(d-1)}_k.
    """
    if order not in (0, 1, 2, 3):
        raise ValueError(f"order must be 0..3, got {order}")
    x = np.asarray(x, dtype=float)
    tab = np.zeros((order + 1, kmax + 1) + x.shape)
    tab[0, 0] = 1.0
    if kmax >= 1:
        tab[0, 1] = x
    for k in range(1, kmax):
        tab[0, k + 1] = ((2 * k + 1) * x * tab[0, k] - k * tab[0, k - 1]) / (k + 1)
    for d in range(1, order + 1):
        if kmax >= 1:
            tab[d, 1] = 1.0 if d == 1 else 0.0
        for k in range(1, kmax):
            tab[d, k + 1] = tab[d, k - 1] + (2 * k + 1) * tab[d - 1, k]
    return tab[order]


def legendre_eval(k: int, x, order: int = 0):
    """d^order/dx^order of the degree-k Legendre polynomial at x."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    out = legendre_table(k, x, order)[k]
    return float(out) if np.ndim(out) == 0 else out


def legendre_endpoint(k: int, side: int, order: int = 0) -> float:
    """Closed-form L_k, L_k' or L_k'' at x = side (side is -1 or +1)."""
    if side not in (-1, 1):
        raise ValueError("side must be -1 or +1")
    if order == 0:
        return float(side**k)
    if order == 1:
        return float(side ** (k - 1) * k * (k + 1) / 2) if k > 0 else 0.0
    if order == 2:
        return float(side**k * (k - 1) * k * (k + 1) * (k + 2) / 8) if k > 1 else 0.0
    raise ValueError(f"order must be 0..2, got {order}")


def legendre_endpoint_table(kmax: int, side: int) -> np.ndarray:
    """Array of shape (3, kmax+1): rows are L, L', L'' at x = side."""
    return np.array(
        [[legendre_endpoint(k, side, d) for k in range(kmax + 1)] for d in range(3)]
    )


def legendre_deriv_coeffs(c: np.ndarray, order: int = 1) -> np.ndarray:
    """Legendre coefficients of the derivative of sum_k c_k L_k.

    Uses the termwise rule L_i' = sum_{k < i, k + i odd} (2k+1) L_k in its
    backward-recurrence form d_{k-1} = (2k-1) c_k + d_{k+1}(2k-1)/(2k+3).
    The output keeps the input length (trailing zeros).
    """
    d = np.array(c, dtype=float)
    for _ in range(order):
        n = len(d)
        out = np.zeros(n)
        # out[k] = (2k+1) * sum_{j > k, j - k odd} d[j]
        acc_even = 0.0
        acc_odd = 0.0
        for j in range(n - 1, 0, -1):
            if j % 2 == 0:
                acc_even += d[j]
            else:
                acc_odd += d[j]
            k = j - 1
            out[k] = (2 * k + 1) * (acc_odd if k % 2 == 0 else acc_even)
        d = out
    return d


def legendre_series(c: np.ndarray, x, order: int = 0):
    """Evaluate d^order/dx^order of sum_k c_k L_k at x."""
    c = np.asarray(c, dtype=float)
    tab = legendre_table(len(c) - 1, x, order)
    return np.tensordot(c, tab, axes=(0, 0))


# ---------------------------------------------------------------------------
# Jacobi polynomials
# ---------------------------------------------------------------------------


def jacobi_eval(n: int, a: float, b: float, x):
    """P^{(a,b)}_n(x) by the standard three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p0 = np.ones_like(x)
    if n == 0:
        return p0
    p1 = 0.5 * (a + b + 2) * x + 0.5 * (a - b)
    for k in range(2, n + 1):
        s = 2 * k + a + b
        c1 = 2 * k * (k + a + b) * (s - 2)
        c2 = (s - 1) * (a * a - b * b)
        c3 = (s - 2) * (s - 1) * s
        c4 = 2 * (k + a - 1) * (k + b - 1) * s
        p0, p1 = p1, ((c2 + c3 * x) * p1 - c4 * p0) / c1
    return p1


def jacobi_deriv(n: int, a: float, b: float, x):
    if n == 0:
        return np.zeros_like(np.asarray(x, dtype=float))
    return 0.5 * (n + a + b + 1) * jacobi_eval(n - 1, a + 1, b + 1, x)


def _jacobi_matrix(n: int, a: float, b: float):
    k = np.arange(n, dtype=float)
    s = 2 * k + a + b
    diag = np.where(s == 0, (b - a) / (a + b + 2), (b * b - a * a) / (s * (s + 2)))
    k1 = np.arange(1, n, dtype=float)
    s1 = 2 * k1 + a + b
    off = np.sqrt(
        4 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b) / (s1**2 * (s1 + 1) * (s1 - 1))
    )
    return diag, off


def jacobi21_roots(n: int, tol: float = 1e-13, maxiter: int = 20) -> np.ndarray:
    """Ascending roots of P^{(2,1)}_n.

    Eigenvalues of the symmetric Jacobi matrix give the starting values;
    Newton steps polish them until the residual, measured relative to
    max |P_n| on [-1, 1] (attained at x = 1), is below ``tol``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a, b = 2.0, 1.0
    diag, off = _jacobi_matrix(n, a, b)
    x = np.sort(eigh_tridiagonal(diag, off, eigvals_only=True))
    scale = abs(float(jacobi_eval(n, a, b, 1.0)))
    for _ in range(maxiter):
        p = jacobi_eval(n, a, b, x)
        dx = p / jacobi_deriv(n, a, b, x)
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    res = np.max(np.abs(jacobi_eval(n, a, b, x))) / scale
    if not res < tol:
        raise RootRefinementError(f"P^(2,1)_{n} roots stagnated at residual {res:.3e}")
    if np.any(np.diff(x) <= 0) or x[0] <= -1 or x[-1] >= 1:
        raise RootRefinementError("roots are not strictly increasing inside (-1, 1)")
    return x


# ---------------------------------------------------------------------------
# Quadrature rule
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralRule:
    n_points: int
    nodes: np.ndarray
    weights: np.ndarray
    deriv_weight: float

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)


def build_rule(n_points: int) -> SpectralRule:
    """Generalized Gauss-Jacobi rule with ``n_points`` nodes (N >= 8)."""
    N = int(n_points)
    if N < 8:
        raise ValueError("n_points must be >= 8")
    xi = jacobi21_roots(N - 2)
    nodes = np.concatenate([[-1.0], xi, [1.0]])
    c = 8.0 / ((N - 1) * N**2 * (N + 1))
    weights = np.empty(N)
    pn = jacobi_eval(N - 1, 2.0, 1.0, xi)
    weights[1:-1] = 4.0 / (N**2 - 1) * ((2 * N + 1) / (N + 2)) ** 2 / ((1 - xi) * pn**2)
    weights[0] = 2.0 / (N**2 - 1)
    weights[-1] = 4.0 / N**2 + c * np.sum(1.0 / (1.0 - nodes[:-1]))
    return SpectralRule(N, nodes, weights, -c)


def discrete_inner_product(f_nodes, g_nodes, fg_deriv_at_right: float, rule: SpectralRule) -> float:
    """(f, g)_N from nodal values plus d/dx(f g) at x = 1 supplied by the caller."""
    f = np.asarray(f_nodes, dtype=float)
    g = np.asarray(g_nodes, dtype=float)
    if f.shape != (rule.n_points,) or g.shape != (rule.n_points,):
        raise ValueError(
            f"expected arrays of length {rule.n_points}, got {f.shape} and {g.shape}"
        )
    return float(rule.weights @ (f * g) + rule.deriv_weight * fg_deriv_at_right)
