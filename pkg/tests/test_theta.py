import itertools

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from theta_amoeba import NonPositive, TruncationOverflow
from theta_amoeba.abelian import validate_riemann_matrix
from theta_amoeba.theta import (
    distortion_fk,
    section_gauge_values,
    section_norm_sq_reference,
    theta_basis,
    theta_char,
    theta_char_log,
)

RNG = np.random.default_rng(7)


def mp_theta(tau, z):
    """Oracle: scalar theta sum via mpmath's Jacobi theta3."""
    q = mpmath.exp(1j * mpmath.pi * mpmath.mpc(tau))
    return complex(mpmath.jtheta(3, mpmath.pi * mpmath.mpc(z), q))


def mp_theta_char(tau, z, a, b):
    """Oracle: reduce characteristics to a shifted theta3."""
    pre = mpmath.exp(1j * mpmath.pi * a * a * tau + 2j * mpmath.pi * a * (z + b))
    return complex(pre * mpmath.mpc(mp_theta(tau, z + a * tau + b)))


def brute_theta(om, z, a, b, r=12):
    """Oracle: direct double-precision lattice sum, independent code path."""
    om = np.atleast_2d(om)
    n = om.shape[0]
    z = np.atleast_1d(z)
    total = 0.0 + 0.0j
    for l in itertools.product(range(-r, r + 1), repeat=n):
        la = np.array(l, dtype=float) + a
        w = 0.5 * la @ om @ la + la @ (z + b)
        total += np.exp(2j * np.pi * w)
    return total


def test_theta_square_lattice_origin():
    val = theta_char(np.array([[1j]]), np.array([[0.0 + 0.0j]]))[0]
    assert val == pytest.approx(mp_theta(1j, 0.0), rel=1e-13)


def test_theta_matches_mpmath_generic_point():
    tau = 0.3 + 0.8j
    z = 0.17 - 0.05j
    val = theta_char(np.array([[tau]]), np.array([[z]]))[0]
    assert val == pytest.approx(mp_theta(tau, z), rel=1e-12)


def test_theta_with_characteristics_matches_oracle():
    tau = -0.1 + 1.3j
    z = 0.4 + 0.2j
    for a, b in [(0.5, 0.0), (0.0, 0.5), (0.25, -0.5), (1.0 / 3.0, 0.125)]:
        val = theta_char(np.array([[tau]]), np.array([[z]]), a=[a], b=[b])[0]
        assert val == pytest.approx(mp_theta_char(tau, z, a, b), rel=1e-11)


def test_theta_diagonal_period_matrix_factorizes():
    om = np.diag([0.2 + 1.1j, -0.3 + 0.7j])
    z = np.array([0.1 + 0.3j, -0.2 + 0.1j])
    val = theta_char(om, z[None, :])[0]
    oracle = mp_theta(om[0, 0], z[0]) * mp_theta(om[1, 1], z[1])
    assert val == pytest.approx(oracle, rel=1e-12)


def test_theta_coupled_period_matrix_vs_brute_sum():
    om = np.array([[0.1 + 1.0j, 0.3 + 0.2j], [0.3 + 0.2j, -0.2 + 1.5j]])
    a = np.array([0.5, 0.0])
    b = np.array([0.0, 0.25])
    z = np.array([0.21 + 0.4j, -0.3 - 0.1j])
    val = theta_char(om, z[None, :], a=a, b=b)[0]
    assert val == pytest.approx(brute_theta(om, z, a, b), rel=1e-11)


def test_theta_quasi_periodicity():
    # theta(om, z + om m) = e(-1/2 tm om m - tm z) theta(om, z)
    om = np.array([[0.2 + 0.9j]])
    z = np.array([0.3 + 0.25j])
    m = np.array([1.0])
    lhs = theta_char(om, (z + om @ m)[None, :])[0]
    factor = np.exp(2j * np.pi * (-0.5 * m @ om @ m - m @ z))
    rhs = factor[()] * theta_char(om, z[None, :])[0]
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_theta_integer_periodicity_exact_magnitude():
    om = np.array([[0.1 + 1.2j]])
    z = np.array([[0.37 + 0.11j]])
    v0 = theta_char(om, z)[0]
    v1 = theta_char(om, z + 1.0)[0]
    assert v1 == pytest.approx(v0, rel=1e-13)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(-0.5, 0.5),
    st.floats(0.4, 3.0),
    st.floats(-1.0, 1.0),
    st.floats(-0.6, 0.6),
)
def test_theta_random_vs_mpmath(re_tau, im_tau, re_z, im_z):
    tau = re_tau + 1j * im_tau
    z = re_z + 1j * im_z
    lm, ph = theta_char_log(np.array([[tau]]), np.array([[z]]))
    ours = np.exp(lm[0] + 1j * ph[0])
    assert ours == pytest.approx(mp_theta(tau, z), rel=1e-10)


def test_truncation_overflow_for_thin_lattice():
    om = np.array([[1e-7j]])
    with pytest.raises(TruncationOverflow):
        theta_char_log(om, np.array([[0.0 + 0.0j]]))


def test_basis_rejects_nonpositive_level():
    rm = validate_riemann_matrix([[1j]])
    with pytest.raises(NonPositive):
        theta_basis(rm, 0)


def test_basis_enumeration():
    rm = validate_riemann_matrix(np.diag([1j, 2j]) + 0.0)
    basis = theta_basis(rm, 3)
    assert basis.n_sections == 9
    assert basis.indices[0].tolist() == [0, 0]
    assert basis.indices[-1].tolist() == [2, 2]
    assert np.allclose(basis.b_points[4], [1.0 / 3.0, 1.0 / 3.0])


def test_gauge_norm_matches_classical_route():
    rm = validate_riemann_matrix([[0.3 + 1.4j]])
    basis = theta_basis(rm, 4)
    x = RNG.uniform(-0.5, 1.5, size=(6, 1))
    y = RNG.uniform(-0.5, 1.5, size=(6, 1))
    gauge = section_gauge_values(basis, x, y).norm_sq()
    ref = section_norm_sq_reference(basis, x, y)
    assert np.allclose(gauge, ref, rtol=1e-10)


def test_gauge_norm_is_periodic():
    rm = validate_riemann_matrix([[0.2 + 0.8j]])
    basis = theta_basis(rm, 5)
    x = np.array([[0.3], [0.3], [0.3]])
    y = np.array([[0.6], [0.6], [0.6]])
    shifted_x = x + np.array([[0.0], [1.0], [-2.0]])
    shifted_y = y + np.array([[0.0], [3.0], [1.0]])
    base = section_gauge_values(basis, x, y).norm_sq()
    moved = section_gauge_values(basis, shifted_x, shifted_y).norm_sq()
    assert np.allclose(moved, base[:, [0, 0, 0]], rtol=1e-11)


def test_gauge_magnitude_never_overflows_at_high_level():
    rm = validate_riemann_matrix([[1j]])
    basis = theta_basis(rm, 64)
    gv = section_gauge_values(basis, np.array([[0.5]]), np.array([[0.5]]))
    assert np.all(np.isfinite(gv.log_mag))
    assert np.all(np.isfinite(gv.phase))


def test_section_shift_symmetry():
    # translating y by the basis spacing permutes the section norms
    rm = validate_riemann_matrix([[1j]])
    basis = theta_basis(rm, 4)
    x = np.array([[0.21]])
    y = np.array([[0.37]])
    base = section_gauge_values(basis, x, y).norm_sq()[:, 0]
    moved = section_gauge_values(basis, x, y + 0.25).norm_sq()[:, 0]
    assert np.allclose(np.roll(base, 1), moved, rtol=1e-11)


def test_distortion_closed_matches_direct():
    rm = validate_riemann_matrix([[0.4 + 1.1j]])
    basis = theta_basis(rm, 6)
    x = RNG.uniform(size=(8, 1))
    y = RNG.uniform(size=(8, 1))
    direct = distortion_fk(basis, x, y, mode="direct")
    closed = distortion_fk(basis, x, y, mode="closed")
    assert np.allclose(closed, direct, rtol=1e-10)


def test_distortion_closed_matches_direct_n2():
    rm = validate_riemann_matrix(
        np.array([[0.1 + 1.0j, 0.2 + 0.3j], [0.2 + 0.3j, 1.4j]])
    )
    basis = theta_basis(rm, 2)
    x = RNG.uniform(size=(4, 2))
    y = RNG.uniform(size=(4, 2))
    direct = distortion_fk(basis, x, y, mode="direct")
    closed = distortion_fk(basis, x, y, mode="closed")
    assert np.allclose(closed, direct, rtol=1e-9)


def test_distortion_weighted_direct():
    rm = validate_riemann_matrix([[1j]])
    basis = theta_basis(rm, 3)
    x = np.array([[0.4]])
    y = np.array([[0.1]])
    sq = section_gauge_values(basis, x, y).norm_sq()[:, 0]
    w = np.array([1.0, 2.0, 0.5])
    val = distortion_fk(basis, x, y, mode="direct", weights=w)
    assert val[0] == pytest.approx(w @ sq, rel=1e-12)


def test_distortion_mean_is_total_sections():
    # integral of f_k over X equals k^n when the Gram matrix is near identity
    rm = validate_riemann_matrix([[1j]])
    basis = theta_basis(rm, 8)
    m = 48
    g = (np.arange(m) + 0.5) / m
    xg, yg = np.meshgrid(g, g, indexing="ij")
    pts_x = xg.reshape(-1, 1)
    pts_y = yg.reshape(-1, 1)
    f = distortion_fk(basis, pts_x, pts_y, mode="closed")
    assert np.all(f > 0.0)
    assert f.mean() == pytest.approx(8.0, rel=1e-6)
