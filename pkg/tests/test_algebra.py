import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singosc import algebra
from singosc.config import load_scenario, stationary
from singosc.envelope import integrate_envelope, quad_coeffs
from singosc.errors import AdmissibilityError, CollapseError, FrameError

MODULATED = {"m": "1 + 0.3*sin(t)*sin(t)", "omega": "1 + 0.2*sin(2*t)", "b": "0.1*sin(t)*sin(t)", "c": 2.0,
             "t1": 3.0}

real = st.floats(-3, 3, allow_nan=False)
vec = st.tuples(real, real, real)


@pytest.mark.parametrize("c, kappa", [(2.0, 1.25), (0.0, 0.75), (-0.25, 0.5), (12.0, 2.25)])
def test_kappa_examples(c, kappa):
    k = algebra.kappa_from_c(c)
    assert k.kappa == pytest.approx(kappa)
    assert k.casimir == pytest.approx(-3 / 16 + c / 4)
    assert algebra.c_from_kappa(kappa) == pytest.approx(c)


def test_kappa_branches():
    with pytest.raises(CollapseError):
        algebra.kappa_from_c(-0.3)
    with pytest.raises(AdmissibilityError):
        algebra.kappa_from_c(0.0, "secondary")
    assert algebra.kappa_from_c(0.0, "secondary", allow_kappa_quarter=True).kappa == 0.25


@given(vec, vec)
def test_bracket_antisymmetric(a, b):
    np.testing.assert_allclose(algebra.lie_bracket(a, b), -algebra.lie_bracket(b, a), atol=1e-12)


@given(vec, vec, vec)
def test_jacobi_identity(a, b, c):
    br = algebra.lie_bracket
    total = br(a, br(b, c)) + br(b, br(c, a)) + br(c, br(a, b))
    np.testing.assert_allclose(total, 0, atol=1e-9)


def test_structure_constants_match_matrices():
    i1, i2, i3 = algebra.cartesian_matrices(1.3, 40)
    sl = slice(0, 30)
    comm = lambda a, b: (a @ b - b @ a)[sl, sl]
    np.testing.assert_allclose(comm(i1, i2), -1j * i3[sl, sl], atol=1e-10)
    np.testing.assert_allclose(comm(i2, i3), 1j * i1[sl, sl], atol=1e-10)
    np.testing.assert_allclose(comm(i3, i1), 1j * i2[sl, sl], atol=1e-10)


def test_casimir_on_ladder():
    kappa = 1.7
    i1, i2, i3 = algebra.cartesian_matrices(kappa, 40)
    cas = (i3 @ i3 - i1 @ i1 - i2 @ i2)[:30, :30]
    np.testing.assert_allclose(cas, kappa * (kappa - 1) * np.eye(30), atol=1e-9)


def test_ladder_matrices_read_only():
    low, _, _ = algebra.ladder_matrices(1.0, 5)
    with pytest.raises(ValueError):
        low.entries[0, 1] = 3.0


def test_element_frames():
    a = algebra.SU11Element.from_cartesian((1, 0, 0))
    b = algebra.SU11Element.from_cartesian((0, 1, 0), frame=2.0)
    with pytest.raises(FrameError):
        a.commutator(b)
    with pytest.raises(FrameError):
        a + b


def test_commutator_of_elements():
    a = algebra.SU11Element.from_cartesian((1, 0, 0))
    b = algebra.SU11Element.from_cartesian((0, 1, 0))
    np.testing.assert_allclose(a.commutator(b).cartesian, [0, 0, -1j])
    assert a.is_hermitian()


def test_hamiltonian_stationary_is_l3():
    sc = stationary(c=2.0, omega=1.0)
    h = algebra.hamiltonian_coeffs(sc, 0.7)
    np.testing.assert_allclose(h.cartesian, [0, 0, 2.0], atol=1e-14)


def test_lambda_identity_at_canonical_start():
    sc = load_scenario(MODULATED)
    traj = integrate_envelope(sc)
    lam, cond = algebra.lambda_matrix(quad_coeffs(traj, sc, 0.0), sc)
    np.testing.assert_allclose(lam, np.eye(3), atol=1e-12)
    assert cond == pytest.approx(1.0)


def test_stationary_invariants_rotate():
    sc = stationary(c=2.0, omega=1.0, t1=3.0)
    traj = integrate_envelope(sc)
    t = 0.8
    m = algebra.coefficient_matrix(quad_coeffs(traj, sc, t), sc)
    c, s = np.cos(2 * t), np.sin(2 * t)
    np.testing.assert_allclose(np.abs(m[:2, :2]), np.abs([[c, s], [s, c]]), atol=1e-9)
    assert m[2, 2] == pytest.approx(1.0, abs=1e-9)


def test_invariants_obey_heisenberg_equation():
    """d k/dt = (i/hbar) [k, h] for each invariant coefficient vector."""
    sc = load_scenario(MODULATED)
    traj = integrate_envelope(sc)
    t, dt = 1.4, 1e-4
    before = algebra.invariant_elements(quad_coeffs(traj, sc, t - dt), sc)
    after = algebra.invariant_elements(quad_coeffs(traj, sc, t + dt), sc)
    now = algebra.invariant_elements(quad_coeffs(traj, sc, t), sc)
    h = algebra.hamiltonian_coeffs(sc, t).cartesian
    for k0, k1, k2 in zip(before, now, after):
        deriv = (k2.cartesian - k0.cartesian) / (2 * dt)
        rhs = 1j / sc.hbar * algebra.lie_bracket(k1.cartesian, h)
        np.testing.assert_allclose(deriv, rhs, atol=1e-6)


def test_invariants_close_the_algebra():
    sc = load_scenario(MODULATED)
    traj = integrate_envelope(sc)
    k1, k2, k3 = (e.cartesian for e in algebra.invariant_elements(quad_coeffs(traj, sc, 2.1), sc))
    np.testing.assert_allclose(algebra.lie_bracket(k1, k2), -1j * k3, atol=1e-10)
    np.testing.assert_allclose(algebra.lie_bracket(k2, k3), 1j * k1, atol=1e-10)
    assert algebra.casimir_form(k3).real == pytest.approx(1.0, abs=1e-10)


def test_lambda_report_and_transport():
    sc = load_scenario(MODULATED)
    traj = integrate_envelope(sc)
    qc = quad_coeffs(traj, sc, 1.0)
    rep = algebra.lambda_report(qc, sc)
    assert set(rep) >= {"lambda_numeric", "lambda_paper", "max_abs_diff", "condition_number"}
    lam = np.array(rep["lambda_numeric"])
    sig = algebra.transport_moments(np.eye(3), lam)
    np.testing.assert_allclose(sig, lam @ lam.T)


@settings(max_examples=30)
@given(vec)
def test_operator_coefficients_of_l3(v):
    sc = stationary(c=2.0)
    el = algebra.SU11Element.from_cartesian(v)
    co = algebra.operator_coefficients(el, sc)
    # k.L with k = (0, 0, 1) is H/(2 hbar w): p^2/(4) + x^2/4 + c/(4 x^2)
    assert co["x2"] == pytest.approx((v[2] + v[0]) / 4)
    assert co["p2"] == pytest.approx((v[2] - v[0]) / 4)
    assert co["inv_x2"] == pytest.approx((v[2] - v[0]) * sc.c / 4)
