import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dispersive_tbc.tbc import (
    BoundaryHistory,
    ClassificationError,
    DegenerateError,
    RootTriple,
    ToleranceWarning,
    _cardano,
    build_kernels,
    characteristic_roots,
    classified_roots,
    critical_radius,
    default_samples,
    history_rhs,
    inverse_z_transform,
    kernel_radius,
    kernel_symbols,
    limit_zeroth_taps,
    polynomial_residual,
)


def test_roots_z2_tau1_g0():
    rt = characteristic_roots(2.0, 1.0, 0.0)
    c = 2 ** (-1 / 3)
    assert rt.r1 == pytest.approx(-c, abs=1e-14)
    assert sorted([rt.r2, rt.r3], key=lambda r: r.imag) == [
        pytest.approx(complex(c / 2, -c * np.sqrt(3) / 2), abs=1e-14),
        pytest.approx(complex(c / 2, c * np.sqrt(3) / 2), abs=1e-14),
    ]
    assert abs(rt.r2.real - 0.39685) < 1e-5 and abs(abs(rt.r2.imag) - 0.68736) < 1e-5


def test_symbols_z2():
    rt = characteristic_roots(2.0, 1.0, 0.0)
    s1, s2, s3, s4 = kernel_symbols(rt)
    assert s4 == pytest.approx(-1.25992, abs=1e-5)
    assert s3 == pytest.approx(s4**2, rel=1e-14)
    # Vieta: r1 r2 r3 = -(z - 1)/(z tau) = -1/2, so s2 = -1/(r2 r3) = 2 r1
    assert np.prod([rt.r1, rt.r2, rt.r3]) == pytest.approx(-0.5, abs=1e-14)
    assert s2 == pytest.approx(2 * rt.r1, rel=1e-13)
    assert s2 == pytest.approx(-1.58740, abs=1e-5)
    assert s1 == pytest.approx(1 / rt.r2 + 1 / rt.r3)


def test_classification_on_sample_circle():
    theta = 2 * np.pi * np.arange(64) / 64
    for th in theta:
        rt = characteristic_roots(1.1 * np.exp(1j * th), 0.01, 6.0)
        assert rt.r1.real < 0 < min(rt.r2.real, rt.r3.real)


@given(
    st.floats(1.0001, 50.0),
    st.floats(0, 2 * np.pi),
    st.sampled_from([1e-4, 1e-3, 1e-2, 0.1, 1.0]),
    st.floats(-300, 300),
)
def test_residual_vieta_and_classification(rho, theta, tau, g):
    rho = max(rho, 1.0001 * critical_radius(tau, g))
    z = rho * np.exp(1j * theta)
    rt = characteristic_roots(z, tau, g)
    r = np.array([rt.r1, rt.r2, rt.r3])
    assert np.all(polynomial_residual(r, z, tau, g) < 1e-10 * max(1, abs(z) * tau))
    prod = -(z - 1) / (z * tau)
    assert abs(np.prod(r) - prod) <= 1e-9 * abs(prod)
    assert abs(np.sum(r)) <= 1e-9 * np.max(np.abs(r))
    assert rt.r1.real < 0 and rt.r2.real > 0 and rt.r3.real > 0


def test_classification_fails_inside_critical_radius():
    tau, g = 0.1, 6.0
    rc = critical_radius(tau, g)
    assert rc > 1.2
    z = 1.05 * np.exp(2j * np.pi * np.arange(256) / 256)
    with pytest.raises(ClassificationError, match="z ="):
        classified_roots(z, tau, g)


def test_critical_radius_is_sharp():
    tau, g = 0.1, 6.0
    rc = critical_radius(tau, g)
    z_out = 1.001 * rc * np.exp(2j * np.pi * np.arange(4096) / 4096)
    classified_roots(z_out, tau, g)
    z_in = 0.999 * rc * np.exp(2j * np.pi * np.arange(4096) / 4096)
    with pytest.raises(ClassificationError):
        classified_roots(z_in, tau, g)


def test_degenerate_and_domain_errors():
    with pytest.raises(DegenerateError):
        _cardano(np.array([1.0 + 0j]), 0.5, 0.0)
    with pytest.raises(ValueError):
        characteristic_roots(0.5, 1.0, 0.0)
    with pytest.raises(ValueError):
        characteristic_roots(2.0, -1.0, 0.0)


def test_symbol_array_form_matches_triple():
    z = 1.3 * np.exp(1j * np.linspace(0, 6, 9))
    arr = classified_roots(z, 0.05, 3.0)
    s_arr = kernel_symbols(arr)
    for i, zi in enumerate(z):
        s_t = kernel_symbols(characteristic_roots(zi, 0.05, 3.0))
        assert np.allclose([s[i] for s in s_arr], s_t, rtol=1e-13)


def test_inverse_z_ones_delta_shift():
    ones = inverse_z_transform(lambda z: z / (z - 1), 1.2, 256, 32)
    assert np.allclose(ones, 1.0, atol=1e-9)
    delta = inverse_z_transform(lambda z: np.ones_like(z), 1.2, 256, 32)
    assert np.allclose(delta, np.eye(32)[0], atol=1e-12)
    shift = inverse_z_transform(lambda z: z**-2.0, 1.2, 256, 32)
    assert np.allclose(shift, np.eye(32)[2], atol=1e-12)
    geo = inverse_z_transform(lambda z: z / (z - 0.5), 1.2, 256, 32)
    assert np.allclose(geo, 0.5 ** np.arange(32), atol=1e-9)


def test_inverse_z_warns_on_complex_sequence():
    with pytest.warns(ToleranceWarning):
        inverse_z_transform(lambda z: 1j * np.ones_like(z), 1.2, 64, 8)


def test_inverse_z_needs_enough_samples():
    with pytest.raises(ValueError):
        inverse_z_transform(lambda z: np.ones_like(z), 1.2, 31, 16)


def test_sample_count():
    assert default_samples(4) >= 68
    assert default_samples(4) == 128
    assert default_samples(1024) == 32768


def test_kernels_real_finite_g0():
    k = build_kernels(0.1, 0.0, 0.0, 64, 1.0)
    assert k.max_imag < 1e-8
    for y in (k.y1, k.y2, k.y3, k.y4):
        assert len(y) == 65 and np.all(np.isfinite(y))
    assert k.y0 == (k.y1[0], k.y2[0], k.y3[0], k.y4[0])
    assert k.radius == pytest.approx(np.exp(0.1))


@pytest.mark.parametrize("tau,g", [(0.1, 0.0), (1e-3, 6.0), (2e-4, -216.0), (1e-5, 216.0)])
def test_kernels_self_convergence(tau, g):
    m = 128
    c = 1 / (tau * m)
    k = build_kernels(tau, g, -g, m, c)
    k2 = build_kernels(tau, g, -g, m, c, 2 * k.n_samples)
    for a, b in zip((k.y1, k.y2, k.y3, k.y4), (k2.y1, k2.y2, k2.y3, k2.y4)):
        assert np.max(np.abs(a - b)) < 1e-9


def test_zeroth_taps_match_large_z_limit():
    for tau in (1e-2, 1e-4, 1e-6):
        k = build_kernels(tau, 0.0, 0.0, 64, 1 / (64 * tau))
        assert np.allclose(k.y0, limit_zeroth_taps(tau), rtol=1e-9)


def test_radius_floor_kicks_in():
    # C = 1 would put the circle inside the critical radius for g = 6, tau = 0.1
    assert np.exp(0.1) < critical_radius(0.1, 6.0)
    r = kernel_radius(0.1, 6.0, 0.0, 1.0)
    assert r >= critical_radius(0.1, 6.0) ** 2 * (1 - 1e-12)
    assert kernel_radius(0.1, 0.0, 0.0, 1.0) == pytest.approx(np.exp(0.1))


def test_round_trip_to_symbol():
    tau, m = 1e-3, 64
    c = 1 / (tau * m)
    k = build_kernels(tau, 0.0, 0.0, m, c)
    nz = k.n_samples
    z = k.radius * np.exp(2j * np.pi * np.arange(nz) / nz)
    sym = kernel_symbols(classified_roots(z, tau, 0.0))
    for which in range(4):
        taps = inverse_z_transform(
            lambda zz: kernel_symbols(classified_roots(zz, tau, 0.0))[which], k.radius, nz, nz // 2
        )
        sel = slice(0, nz // 4)
        back = np.polyval(taps[::-1], 1 / z[sel])
        assert np.max(np.abs(back - sym[which][sel]) / np.abs(sym[which][sel])) < 1e-6


def test_csv_dump(tmp_path):
    k = build_kernels(0.01, 0.0, 0.0, 8, 1.0)
    p = tmp_path / "k.csv"
    k.to_csv(p)
    lines = p.read_bytes().split(b"\n")
    assert lines[0] == b"j,Y1,Y2,Y3,Y4"
    assert b"\r" not in p.read_bytes()
    row = lines[3].split(b",")
    assert float(row[1]) == k.y1[2]


def test_history_examples():
    k = build_kernels(0.01, 0.0, 0.0, 16, 1.0)
    h = BoundaryHistory(4)
    h.append((0, 0, 0), (0, 0, 0))
    assert history_rhs(k, h, 1) == (0.0, 0.0, 0.0)
    h.append((0, 0, 0), (0, 0, 1.0))
    h1, h2, h3 = history_rhs(k, h, 2)
    assert h1 == 0.0
    assert h2 == pytest.approx(k.y3[1]) and h3 == pytest.approx(k.y4[1])
    with pytest.raises(IndexError):
        history_rhs(k, h, 3)
    with pytest.raises(ValueError):
        history_rhs(k, h, 0)


def test_history_matches_direct_sum():
    rng = np.random.default_rng(3)
    k = build_kernels(0.01, 1.0, -2.0, 40, 1.0)
    h = BoundaryHistory(2)  # grows on demand
    data = rng.normal(size=(30, 6))
    for row in data:
        h.append(tuple(row[:3]), tuple(row[3:]))
    assert len(h) == 30
    m = 30
    ref1 = sum(k.y1[j] * data[m - j, 1] + k.y2[j] * data[m - j, 2] for j in range(1, m + 1))
    ref2 = sum(k.y3[j] * data[m - j, 5] for j in range(1, m + 1))
    ref3 = sum(k.y4[j] * data[m - j, 5] for j in range(1, m + 1))
    assert np.allclose(history_rhs(k, h, m), (ref1, ref2, ref3), rtol=1e-12, atol=1e-14)
    assert np.array_equal(h.column("uxx_right"), data[:, 5])


def test_kernels_are_cached():
    assert build_kernels(0.02, 0.0, 0.0, 8) is build_kernels(0.02, 0.0, 0.0, 8)


def test_roottriple_is_frozen():
    rt = RootTriple(-1, 1, 1, 2)
    with pytest.raises(Exception):
        rt.r1 = 0
