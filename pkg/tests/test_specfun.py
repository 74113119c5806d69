import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from singosc import specfun
from singosc.errors import ConvergenceError, DomainError

finite = dict(allow_nan=False, allow_infinity=False)


@given(st.floats(0.05, 60.0, **finite))
def test_log_gamma_matches_scipy(x):
    assert specfun.log_gamma(x) == pytest.approx(special.gammaln(x), rel=1e-12, abs=1e-12)


@given(st.floats(0.1, 20.0, **finite))
def test_gamma_recurrence(x):
    assert specfun.gamma(x + 1.0) == pytest.approx(x * specfun.gamma(x), rel=1e-12)


def test_pochhammer_small_cases():
    assert specfun.pochhammer(3.0, 0) == 1.0
    assert specfun.pochhammer(3.0, 4) == pytest.approx(3 * 4 * 5 * 6)
    assert specfun.pochhammer(-2.0, 3) == 0.0


@given(st.integers(0, 12), st.floats(-0.5, 4.0, **finite), st.floats(0.0, 30.0, **finite))
def test_laguerre_matches_scipy(n, d, x):
    ref = special.eval_genlaguerre(n, d, x)
    assert specfun.laguerre(n, d, x) == pytest.approx(ref, rel=1e-9, abs=1e-9 * max(1.0, abs(ref)))


def test_laguerre_table_rows_agree():
    x = np.linspace(0, 10, 7)
    table = specfun.laguerre_table(5, 1.5, x)
    for n in range(6):
        np.testing.assert_allclose(table[n], [specfun.laguerre(n, 1.5, xi) for xi in x], rtol=1e-12, atol=1e-12)


@settings(max_examples=60)
@given(
    st.floats(-3, 3, **finite),
    st.floats(-3, 3, **finite),
    st.floats(0.2, 5, **finite),
    st.floats(-0.9, 0.9, **finite),
)
def test_gauss_2f1_matches_scipy(a, b, c, z):
    ref = special.hyp2f1(a, b, c, z)
    got = specfun.gauss_2f1(a, b, c, z).value
    assert got == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_gauss_2f1_terminating_outside_disk():
    # 2F1(-2, b; c; z) is a quadratic polynomial
    a, b, c, z = -2, 1.5, 2.5, 3.0
    poly = 1 + a * b / c * z + a * (a + 1) * b * (b + 1) / (c * (c + 1) * 2) * z * z
    res = specfun.gauss_2f1(a, b, c, z)
    assert res.value == pytest.approx(poly)
    assert res.terms_used <= 3


def test_gauss_2f1_domain_errors():
    with pytest.raises(DomainError):
        specfun.gauss_2f1(1, 1, 0.0, 0.5)
    with pytest.raises(ConvergenceError):
        specfun.gauss_2f1(0.5, 0.5, 1.5, 1.2)


@given(st.floats(0.3, 4.0, **finite), st.floats(-40, 40, **finite))
def test_hyper_0f1_real(c, x):
    ref = special.hyp0f1(c, x)
    assert specfun.hyper_0f1(c, x) == pytest.approx(ref, rel=1e-9, abs=1e-12)


@given(st.floats(0.0, 5.0, **finite), st.floats(1e-6, 40.0, **finite))
def test_bessel_j_matches_scipy(nu, x):
    ref = special.jv(nu, x)
    assert specfun.bessel_j(nu, x) == pytest.approx(ref, abs=1e-11)


def test_bessel_i_complex_and_k():
    z = 1.3 - 0.7j
    assert specfun.bessel_i(1.5, z) == pytest.approx(special.iv(1.5, z), rel=1e-11)
    for nu, x in ((0.5, 0.7), (1.5, 3.0), (2.25, 10.0)):
        assert specfun.bessel_k(nu, x) == pytest.approx(special.kv(nu, x), rel=1e-9)


def test_hyper_0f1_array_matches_scalar():
    xs = np.array([-3.0 + 1j, 0.0, 2.5, 10 - 4j])
    got = specfun.hyper_0f1_array(2.5, xs)
    for g, x in zip(got, xs):
        assert g == pytest.approx(specfun.hyper_0f1(2.5, complex(x)), rel=1e-13)


def test_bessel_half_integer_closed_form():
    x = 2.7
    assert specfun.bessel_j(0.5, x) == pytest.approx(math.sqrt(2 / (math.pi * x)) * math.sin(x), rel=1e-12)


def test_bessel_j_tiny_argument_leading_term():
    # scipy underflows to zero here; the leading series term is the reference
    nu, x = 0.03125, 1e-300
    lead = math.exp(nu * math.log(0.5 * x) - special.gammaln(nu + 1))
    assert specfun.bessel_j(nu, x) == pytest.approx(lead, rel=1e-12)
