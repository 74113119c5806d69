r"""First and second moments of the invariants and uncertainty diagnostics.

Sandwiches are computed by applying the ladder actions to coefficient
vectors (never forming dense matrices), so states with tens of thousands of
retained coefficients are cheap.  With :math:`\phi_j = I_j\psi`,

    sigma_ij = Re<phi_i|phi_j> - <I_i><I_j>,   C_ij = Im<phi_i|phi_j>,

the latter being :math:`-i\langle[I_i,I_j]\rangle/2`, so that
``C_12 = -<I_3>/2``, ``C_23 = <I_1>/2`` and ``C_13 = -<I_2>/2``.
"""

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, NormalizabilityError, TruncationError
from .states import StateParams, _pair_pieces, build_state

PAIRS = ((0, 1), (0, 2), (1, 2))


def apply_lower(c, kappa):
    n = np.arange(1, len(c))
    out = np.zeros(len(c), dtype=complex)
    out[:-1] = np.sqrt(n * (2 * kappa + n - 1)) * c[1:]
    return out


def apply_raise(c, kappa):
    n = np.arange(len(c) - 1)
    out = np.zeros(len(c), dtype=complex)
    out[1:] = np.sqrt((n + 1) * (2 * kappa + n)) * c[:-1]
    return out


def apply_i3(c, kappa):
    return (kappa + np.arange(len(c))) * c


def cartesian_images(state):
    """(I1 psi, I2 psi, I3 psi) on a basis one longer than the state."""
    c = state.padded(state.size + 1)
    lo, up = apply_lower(c, state.kappa), apply_raise(c, state.kappa)
    return 0.5 * (up + lo), (up - lo) / 2j, apply_i3(c, state.kappa)


@dataclass(frozen=True)
class UncertaintyReport:
    kappa: float
    means: tuple
    sigma: tuple
    commutator_matrix: tuple
    det_sigma: float
    det_C: float
    schrodinger_residuals: tuple
    squeezing: tuple

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _as_tuple(a):
    return tuple(tuple(float(x) for x in row) for row in a)


def report_from_moments(kappa, means, sigma, cmat):
    means = np.asarray(means, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    cmat = np.asarray(cmat, dtype=float)
    sch = tuple(
        float(sigma[i, i] * sigma[j, j] - sigma[i, j] ** 2 - cmat[i, j] ** 2) for i, j in PAIRS
    )
    ref = 0.5 * means[2] if means[2] != 0 else 0.5 * kappa
    return UncertaintyReport(
        float(kappa),
        tuple(float(m) for m in means),
        _as_tuple(sigma),
        _as_tuple(cmat),
        float(np.linalg.det(sigma)),
        float(np.linalg.det(cmat)),
        sch,
        tuple(float(sigma[j, j] / ref) for j in range(3)),
    )


def moments_from_state(state, dim=None, trunc_tol=1e-8):
    """Means, covariance and commutator matrices from ladder sandwiches."""
    if dim is not None and dim < state.size + 1:
        raise ValueError("dim must exceed the state length")
    top = state.size - 1
    # a zero tail bound marks an exactly finite expansion
    edge = abs(state.coeffs[-1]) ** 2 if state.tail_bound > 0 else 0.0
    leak = (state.tail_bound + edge) * (state.kappa + top + 1) ** 2
    phis = cartesian_images(state)
    g = np.array([[np.vdot(a, b) for b in phis] for a in phis])
    means = np.array([np.vdot(state.padded(state.size + 1), p).real for p in phis])
    scale = max(1.0, float(np.max(np.abs(g))))
    if leak > trunc_tol * scale:
        raise TruncationError(f"truncation contributes {leak:.3g} to second moments")
    sigma = g.real - np.outer(means, means)
    sigma = 0.5 * (sigma + sigma.T)
    cmat = g.imag
    return report_from_moments(state.kappa, means, sigma, cmat)


def i3_power_sum(state, m):
    """Coefficient-sum oracle sum (kappa+n)^m |c_n|^2."""
    n = np.arange(state.size)
    return float(np.sum((state.kappa + n) ** m * np.abs(state.coeffs) ** 2))


# ---- truncated power series in delta (jets) --------------------------------


def _mul(a, b):
    return np.convolve(a, b)[: len(a)]


def _inv(a):
    out = np.zeros_like(a)
    out[0] = 1.0 / a[0]
    for k in range(1, len(a)):
        out[k] = -np.dot(a[1 : k + 1], out[k - 1 :: -1][:k]) / a[0]
    return out


def _deriv(a):
    return np.arange(1, len(a)) * a[1:]


def _integ(d, c0):
    out = np.empty(len(d) + 1, dtype=complex)
    out[0] = c0
    out[1:] = d / np.arange(1, len(d) + 1)
    return out


def _log(a):
    if len(a) == 1:
        return np.array([np.log(a[0])], dtype=complex)
    return _integ(_mul(_deriv(a), _inv(a)[:-1]) if len(a) > 1 else np.zeros(0), np.log(a[0]))


def _exp(a):
    out = np.zeros_like(a)
    out[0] = np.exp(a[0])
    da = _deriv(a)
    for k in range(1, len(a)):
        out[k] = np.dot(da[:k], out[k - 1 :: -1][:k]) / k
    return out


def _pow(a, p):
    return _exp(p * _log(a))


def _log1p_scaled(q, zeta):
    """Series of log(1 + q zeta)/zeta, exact at zeta = 0."""
    if abs(zeta * q[0]) > 1e-3:
        one = np.zeros_like(q)
        one[0] = 1.0
        return _log(one + zeta * q) / zeta
    out = np.zeros_like(q)
    power = q.copy()
    for k in range(1, 40):
        out = out + ((-1) ** (k + 1) / k) * zeta ** (k - 1) * power
        power = _mul(power, q)
        if abs(zeta * q[0]) ** k < 1e-18:
            break
    return out


def norm_jet(params, order):
    """Taylor coefficients in delta of N^{-2}(s e^delta) with zeta held fixed."""
    s, z1, z2, a1, a2 = _pair_pieces(params, params)
    kappa = params.kappa
    k = np.arange(order + 1)
    big_s = s / np.array([math.factorial(int(j)) for j in k], dtype=complex)
    one = np.zeros(order + 1, dtype=complex)
    one[0] = 1.0
    d1 = one + (1.0 - z1) * big_s
    d2 = one + (1.0 - z2) * big_s
    q = _mul(-big_s, _inv(one + big_s))
    expo = a1 * _log1p_scaled(q, z1) + a2 * _log1p_scaled(q, z2)
    pref = _mul(_mul(_pow(d1, -kappa), _pow(d2, -kappa)), _exp(-expo))
    y = _mul(-big_s, _inv(_mul(d1, d2)))
    if abs(y[0] * z1 * z2) >= 1.0:
        raise ConvergenceError("hypergeometric argument outside the unit disk")
    h = one.copy()
    # carry y0^j inside the coefficient so neither factor overflows
    y0 = y[0]
    yn = y / y0 if y0 != 0 else y
    power = one.copy()
    coef = 1.0 + 0j
    small = 0
    for j in range(400000):
        coef *= ((kappa + j) * z1 + a1) * ((kappa + j) * z2 + a2) / ((2 * kappa + j) * (j + 1.0))
        if y0 == 0:
            break
        coef *= y0
        power = _mul(power, yn)
        h = h + coef * power
        if abs(coef) * (j + 2.0) ** order <= 1e-17 * abs(h[0]):
            small += 1
            if small >= 2:
                return _mul(pref, h)
        else:
            small = 0
    else:
        raise ConvergenceError("jet series for N^-2 did not converge")
    return _mul(pref, h)


def analytic_I3_powers(params, m):
    """<I_3^m> = N^2 (kappa + s d/ds)^m N^{-2}, evaluated through a jet in log s."""
    if m == 0:
        return 1.0
    if abs(params.s) >= 1.0:
        raise ConvergenceError(f"|s| = {abs(params.s):.6g} >= 1")
    jet = norm_jet(params, m)
    total = 0j
    for j in range(m + 1):
        total += math.comb(m, j) * params.kappa ** (m - j) * math.factorial(j) * jet[j]
    return float((total / jet[0]).real)


def _mean_i3(params):
    try:
        return analytic_I3_powers(params, 1)
    except (ConvergenceError, DomainError):
        return i3_power_sum(build_state(params, max_terms=200000), 1)


def w0_second_moments(params):
    """(var I1, var I2, cov I1I2, cov I1I3, cov I2I3) for w = 0 states.

    The first three follow the closed forms in <I_3>.  The two covariances
    with I_3 are obtained from <I_3 A> = z<I_3> and <A I_3> = <I_3 A> +
    <[A, I_3]> for A = (u+v) I1 + i(v-u) I2; at v = 0 they reduce to
    Re z / 2 and -Im z / 2.
    """
    if params.w != 0:
        raise DomainError("w0_second_moments requires w = 0")
    u, v, z = params.u, params.v, params.z
    den = abs(u) ** 2 - abs(v) ** 2
    if not den > 0:
        raise NormalizabilityError("requires |v| < |u|")
    i3 = _mean_i3(params)
    var1 = 0.5 * abs(u - v) ** 2 / den * i3
    var2 = 0.5 * abs(u + v) ** 2 / den * i3
    cov12 = (u.conjugate() * v).imag / den * i3
    a, b = u + v, 1j * (v - u)
    mat = np.array([[a.real, b.real], [a.imag, b.imag]])
    m1, m2 = np.linalg.solve(mat, [z.real, z.imag])
    rhs = 0.5j * (b * m1 - a * m2)
    cov13, cov23 = np.linalg.solve(mat, [rhs.real, rhs.imag])
    return float(var1), float(var2), float(cov12), float(cov13), float(cov23)


def w0_printed_covariances(params):
    """The I_3 covariances as typeset (valid only at v = 0); kept for reports."""
    return params.z.real / 2.0, -params.z.imag / 2.0


def perelomov_moments(xi, kappa):
    """Closed-form means and sigma for the group-related states."""
    xi = complex(xi)
    d = 1.0 - abs(xi) ** 2
    means = (2 * kappa * xi.real / d, -2 * kappa * xi.imag / d, kappa * (1 + abs(xi) ** 2) / d)
    sig = np.empty((3, 3))
    sig[0, 0] = 0.5 * kappa * abs(1 + xi * xi) ** 2 / d**2
    sig[1, 1] = 0.5 * kappa * abs(1 - xi * xi) ** 2 / d**2
    sig[2, 2] = 2 * kappa * abs(xi) ** 2 / d**2
    sig[0, 1] = sig[1, 0] = -2 * kappa * xi.real * xi.imag / d**2
    sig[0, 2] = sig[2, 0] = kappa * xi.real * (1 + abs(xi) ** 2) / d**2
    sig[1, 2] = sig[2, 1] = -kappa * xi.imag * (1 + abs(xi) ** 2) / d**2
    return means, sig


@dataclass(frozen=True)
class IntelligenceDiagnosis:
    robertson_equality: bool
    schrodinger_equality: tuple
    robertson_gap: float
    schrodinger_gaps: tuple

    @property
    def maximal(self):
        return self.robertson_equality and all(self.schrodinger_equality)


def check_intelligence(report, tol=1e-9):
    kappa = report.kappa
    sigma = np.array(report.sigma)
    cmat = np.array(report.commutator_matrix)
    scale = max(abs(report.det_sigma), abs(report.det_C), kappa**3)
    gap = report.det_sigma - report.det_C
    flags = []
    gaps = []
    for (i, j), r in zip(PAIRS, report.schrodinger_residuals):
        pscale = max(abs(sigma[i, i] * sigma[j, j]), cmat[i, j] ** 2, kappa**2)
        flags.append(bool(abs(r) <= tol * pscale))
        gaps.append(r / pscale)
    return IntelligenceDiagnosis(bool(abs(gap) <= tol * scale), tuple(flags), float(gap / scale), tuple(float(g) for g in gaps))


SWEEP_HEADER = "param,det_sigma,det_C,sch12,sch13,sch23,var1,var2,var3"


def sweep_row(param, report):
    s = report.sigma
    vals = [report.det_sigma, report.det_C, *report.schrodinger_residuals, s[0][0], s[1][1], s[2][2]]
    return [param] + [float(v) for v in vals]
