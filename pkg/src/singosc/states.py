r"""Eigenstates of :math:`uI_- + vI_+ + wI_3` and their position-space forms.

States are held as coefficient vectors on the invariant eigenbasis
:math:`|\kappa,\kappa+n;t\rangle`.  The position-space basis functions are
normalised so that :math:`I_+` raises with positive matrix elements; this
makes :math:`\Psi_n` differ from the Laguerre form by :math:`(-1)^n`, and the
closed forms for :math:`\Psi_z` and :math:`\Psi_\xi` below are written in
the same convention so that series synthesis and closed form agree.
"""

import cmath
import json
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import special as scipy_special

from .envelope import phase_gamma12
from .errors import (
    CausticError,
    ConvergenceError,
    DomainError,
    NormalizabilityError,
    TruncationError,
)
from .specfun import bessel_j, gauss_2f1, hyper_0f1, hyper_0f1_array, log_gamma, pochhammer

L_SMALL = 1e-8
MAX_TERMS = 5000
NORM_SLACK = 1e-10
KAPPA_QUARTER_EDGE = 0.25 + 1e-14


# --------------------------------------------------------------------------
# parameters and coefficients
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StateParams:
    z: complex
    u: complex
    v: complex
    w: complex
    kappa: float

    def __post_init__(self):
        for name in ("z", "u", "v", "w"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        object.__setattr__(self, "kappa", float(self.kappa))

    @property
    def l(self):
        """Root of l^2 = w^2 - 4uv on the branch maximising |w + l|.

        Either root gives the same state; this one keeps w + l away from 0.
        """
        root = cmath.sqrt(self.w * self.w - 4.0 * self.u * self.v)
        return root if abs(self.w + root) >= abs(self.w - root) else -root

    @property
    def scale(self):
        return max(abs(self.u), abs(self.v), abs(self.w), 1.0)

    @property
    def l_is_small(self):
        return abs(self.l) < L_SMALL * self.scale

    @property
    def s(self):
        wl = self.w + self.l
        return -(wl.conjugate() * wl) / (4.0 * abs(self.u) ** 2)

    @property
    def zeta(self):
        if self.l_is_small:
            return 0j
        return 2.0 * self.l / (self.w + self.l)

    @property
    def z_zeta(self):
        """(z/l) * zeta = 2z/(w+l), finite as l -> 0 unless w -> 0 too."""
        wl = self.w + self.l
        if abs(wl) < L_SMALL * self.scale:
            raise DomainError("w + l = 0: the closed forms degenerate (pure lowering eigenstate)")
        return 2.0 * self.z / wl

    @property
    def roots(self):
        """Asymptotic coefficient ratios (-w +- l)/(2u)."""
        if self.u == 0:
            raise DomainError("roots undefined for u = 0")
        return ((-self.w + self.l) / (2.0 * self.u), (-self.w - self.l) / (2.0 * self.u))

    @property
    def growth(self):
        return max(abs(r) for r in self.roots)

    def terminating(self, tol=1e-10):
        """(root, m, argument) when the coefficients are a single geometric mode.

        If z = -l(kappa+m) the hypergeometric factor is a degree-m polynomial
        and only the root -(w+l)/(2u) survives; if z = l(kappa+m) the same
        holds for -(w-l)/(2u) after a Pfaff transformation.
        """
        if self.u == 0 or self.l_is_small:
            return None
        r_plus, r_minus = self.roots
        zeta = self.zeta
        pfaff = zeta / (zeta - 1.0) if zeta != 1.0 else complex("inf")
        for sign, root, arg in ((-1.0, r_minus, zeta), (1.0, r_plus, pfaff)):
            m = sign * self.z / self.l - self.kappa
            mi = round(m.real)
            if mi >= 0 and abs(m - mi) < tol * max(1.0, abs(m)):
                return root, mi, arg
        return None

    def is_normalizable(self):
        if self.u == 0:
            return self.w != 0 and abs(self.v / self.w) < 1.0
        if self.growth < 1.0:
            return True
        term = self.terminating()
        return term is not None and abs(term[0]) < 1.0

    def with_kappa(self, kappa):
        return StateParams(self.z, self.u, self.v, self.w, kappa)


def coeff_a_n(params, n):
    """Unnormalised expansion coefficient a_n of the (z, u, v, w) eigenstate.

    Away from l = 0 this is the hypergeometric closed form.  Near l = 0 the
    same finite sum is reorganised so that no factor 1/l appears; that form
    is exact (not an expansion) and is continuous across the threshold.
    """
    if params.u == 0:
        raise DomainError("coeff_a_n requires u != 0; use build_state_u0")
    kappa, u, w, z = params.kappa, params.u, params.w, params.z
    l = params.l
    if l == 0 and w == 0 and params.v != 0:
        raise DomainError("branch of l undefined")
    r = -(l + w) / (2.0 * u)
    # the terminating 2F1 cancels like (1+|zeta|)^n / |1-zeta|^n, so sum it with extra digits
    digits = 20 + int(n * math.log10(2.0 + abs(params.zeta))) if not params.l_is_small else 20 + n
    with mpmath.workdps(digits):
        pref = mpmath.sqrt(mpmath.rf(2 * kappa, n) / mpmath.factorial(n))
        if not params.l_is_small:
            f = mpmath.hyp2f1(kappa + mpmath.mpc(z) / mpmath.mpc(l), -n, 2 * kappa, 2 * mpmath.mpc(l) / (l + w))
            return complex(mpmath.mpc(r) ** n * pref * f)
        # same finite sum with (z/l)_k (-l/u)^k expanded, so no 1/l appears
        total = mpmath.mpc(0)
        prod = mpmath.mpc(1)
        for k in range(n + 1):
            total += mpmath.mpc(r) ** (n - k) * prod
            prod *= (-(kappa * mpmath.mpc(l) + z) - k * mpmath.mpc(l)) / u * (k - n) / ((2 * kappa + k) * (k + 1))
        return complex(pref * total)


@dataclass(frozen=True)
class FockState:
    kappa: float
    coeffs: np.ndarray
    tail_bound: float
    params: StateParams = None
    family: str = "zuvw"
    eigenvalue: complex = None
    analytic_norm: float = None
    norm_discrepancy: float = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        total = float(np.sum(np.abs(c) ** 2))
        if abs(total - 1.0) > self.tail_bound + NORM_SLACK:
            raise ValueError(f"coefficients not normalised (sum = {total!r})")

    @property
    def size(self):
        return len(self.coeffs)

    def padded(self, dim):
        out = np.zeros(dim, dtype=complex)
        k = min(dim, self.size)
        out[:k] = self.coeffs[:k]
        return out

    def to_dict(self):
        p = self.params
        params = None
        if p is not None:
            params = {k: [getattr(p, k).real, getattr(p, k).imag] for k in ("z", "u", "v", "w")}
        return {
            "kappa": self.kappa,
            "family": self.family,
            "params": params,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
            "tail_bound": self.tail_bound,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def state_from_json(text):
    doc = json.loads(text)
    p = doc.get("params")
    params = None
    if p is not None:
        params = StateParams(*(complex(*p[k]) for k in ("z", "u", "v", "w")), doc["kappa"])
    coeffs = np.array([complex(re, im) for re, im in doc["coeffs"]])
    return FockState(doc["kappa"], coeffs, doc["tail_bound"], params, doc.get("family", "zuvw"))


def _tail_estimate(weights, rho_floor, window=10):
    """Geometric bound on sum_{k>N} |c_k|^2 from the last two windows of weights."""
    n = len(weights)
    if n < 2 * window + 1:
        return math.inf
    last = max(weights[-window:])
    prev = max(weights[-2 * window:-window])
    if last == 0.0:
        return 0.0
    if prev == 0.0:
        return math.inf
    rho = max((last / prev) ** (1.0 / window), rho_floor)
    if rho >= 1.0:
        return math.inf
    return last * rho / (1.0 - rho)


def _finish(raw, tail_rel, **kw):
    raw = np.asarray(raw, dtype=complex)
    total = float(np.sum(np.abs(raw) ** 2))
    coeffs = raw / math.sqrt(total)
    if coeffs[0] != 0:
        coeffs = coeffs * (abs(coeffs[0]) / coeffs[0])
    return FockState(coeffs=coeffs, tail_bound=float(tail_rel), **kw), total


def build_state(params, tail_tol=1e-12, max_terms=MAX_TERMS):
    """Normalised (z, u, v, w) eigenstate from the three-term eigen-recurrence."""
    if params.u == 0:
        m = (params.z / params.w - params.kappa).real if params.w != 0 else -1
        mi = round(m)
        if params.w != 0 and abs(params.z - params.w * (params.kappa + mi)) < 1e-12 * abs(params.w) and mi >= 0:
            return build_state_u0(mi, params.v, params.w, params.kappa, tail_tol)
        raise DomainError("u = 0 requires z = w(kappa + m); use build_state_u0")
    if not params.is_normalizable():
        raise NormalizabilityError(
            f"non-normalizable: coefficient growth {params.growth:.6g} >= 1 (s = {params.s.real:.6g})"
        )
    if params.growth >= 1.0:
        return _build_terminating(params, tail_tol, max_terms)
    kappa, u, v, w, z = params.kappa, params.u, params.v, params.w, params.z
    rho_floor = params.growth**2
    c = [1.0 + 0j]
    weights = [1.0]
    total = 1.0
    n = 0
    tail = math.inf
    while True:
        prev = c[n - 1] if n > 0 else 0j
        nxt = ((z - w * (kappa + n)) * c[n] - v * math.sqrt(n * (2 * kappa + n - 1)) * prev) / (
            u * math.sqrt((n + 1) * (2 * kappa + n))
        )
        c.append(nxt)
        wgt = abs(nxt) ** 2
        weights.append(wgt)
        total += wgt
        n += 1
        if n >= 20:
            tail = _tail_estimate(weights, rho_floor)
            if tail <= tail_tol * total:
                break
        if n >= max_terms:
            raise TruncationError(f"tail not certified by n = {max_terms} (estimate {tail / total:.3g})")
    analytic = None
    discrepancy = None
    try:
        analytic = normalization_analytic(params)
        discrepancy = abs(analytic - 1.0 / math.sqrt(total)) * math.sqrt(total)
    except (ConvergenceError, DomainError, OverflowError):
        pass
    state, _ = _finish(
        c,
        tail / total,
        kappa=kappa,
        params=params,
        family="zuvw",
        eigenvalue=z,
        analytic_norm=analytic,
        norm_discrepancy=discrepancy,
    )
    return state


def _build_terminating(params, tail_tol, max_terms):
    # only the decaying mode is present; summing it directly avoids the
    # instability of running the recurrence towards a minimal solution
    root, m, arg = params.terminating()
    kappa = params.kappa
    if root == 0:
        # v = 0: the recurrence is two-term and stops exactly at n = m
        u, w, z = params.u, params.w, params.z
        c = [1.0 + 0j]
        for n in range(m):
            c.append((z - w * (kappa + n)) / (u * math.sqrt((n + 1) * (2 * kappa + n))) * c[-1])
        state, _ = _finish(c, 0.0, kappa=kappa, params=params, family="zuvw", eigenvalue=z)
        return state
    c = []
    weights = []
    total = 0.0
    n = 0
    tail = math.inf
    log_root = cmath.log(root) if root != 0 else None
    while True:
        poly = gauss_2f1(-m, -n, 2 * kappa, arg).value
        mag = 0.5 * (log_gamma(2 * kappa + n) - log_gamma(2 * kappa) - log_gamma(n + 1.0))
        if n == 0:
            cn = poly
        elif log_root is None:
            cn = 0j
        else:
            cn = cmath.exp(mag + n * log_root) * poly
        c.append(cn)
        weights.append(abs(cn) ** 2)
        total += weights[-1]
        n += 1
        if log_root is None and n > 1:
            tail = 0.0
            break
        if n >= 21:
            tail = _tail_estimate(weights, abs(root) ** 2)
            if tail <= tail_tol * total:
                break
        if n >= max_terms:
            raise TruncationError(f"tail not certified by n = {max_terms}")
    state, _ = _finish(c, tail / total, kappa=kappa, params=params, family="zuvw", eigenvalue=params.z)
    return state


def build_state_u0(m, v, w, kappa, tail_tol=1e-12, max_terms=MAX_TERMS):
    """Eigenstate of v I_+ + w I_3 with eigenvalue w(kappa + m)."""
    if w == 0:
        raise DomainError("w must be nonzero for u = 0")
    q = -complex(v) / complex(w)
    if abs(q) >= 1.0:
        raise NormalizabilityError(f"|v/w| = {abs(q):.6g} >= 1: series diverges")
    raw = [0j] * m
    weights = []
    total = 0.0
    log_q = None if q == 0 else cmath.log(q)
    n = 0
    tail = 0.0
    while True:
        lg = 0.5 * (log_gamma(m + n + 1.0) + log_gamma(2 * kappa + m + n) - log_gamma(2 * kappa)) - log_gamma(n + 1.0)
        if n == 0:
            cn = cmath.exp(lg)
        elif log_q is None:
            cn = 0j
        else:
            cn = cmath.exp(lg + n * log_q)
        raw.append(cn)
        wgt = abs(cn) ** 2
        weights.append(wgt)
        total += wgt
        n += 1
        if log_q is None:
            break
        if n >= 20:
            tail = _tail_estimate(weights, abs(q) ** 2)
            if tail <= tail_tol * total:
                break
        if n >= max_terms:
            raise TruncationError(f"tail not certified by n = {max_terms}")
    raw = np.array(raw)
    scale = math.sqrt(total)
    coeffs = raw / scale
    analytic = c_m_normalization(m, v, w, kappa)
    # raw coefficients were computed without the C_m prefactor
    discrepancy = abs(analytic * scale - 1.0)
    params = StateParams(w * (kappa + m), 0.0, v, w, kappa)
    return FockState(
        kappa,
        coeffs,
        tail / total,
        params,
        "u0",
        complex(w) * (kappa + m),
        analytic,
        discrepancy,
        {"m": m},
    )


def c_m_normalization(m, v, w, kappa):
    x = abs(v / w) ** 2
    f = gauss_2f1(m + 1.0, 2 * kappa + m, 1.0, x).value.real
    return (math.factorial(m) * pochhammer(2 * kappa, m) * f) ** -0.5


def barut_girardello(z, kappa, tail_tol=1e-12, max_terms=MAX_TERMS):
    """Eigenstate of the lowering invariant I_- with eigenvalue z."""
    z = complex(z)
    norm = hyper_0f1(2 * kappa, abs(z) ** 2) ** -0.5
    c = [norm + 0j]
    total = norm**2
    n = 0
    while True:
        c.append(c[-1] * z / math.sqrt((n + 1) * (2 * kappa + n)))
        total += abs(c[-1]) ** 2
        n += 1
        ratio = abs(z) ** 2 / ((n + 1) * (2 * kappa + n))
        if ratio < 0.5:
            tail = abs(c[-1]) ** 2 * ratio / (1 - ratio)
            if tail <= tail_tol:
                break
        if n >= max_terms:
            raise TruncationError("Barut-Girardello tail not certified")
    coeffs = np.array(c)
    coeffs /= math.sqrt(total)
    params = StateParams(z, 1.0, 0.0, 0.0, kappa)
    return FockState(kappa, coeffs, max(tail, abs(total - 1.0)), params, "bg", z, norm)


def perelomov(xi, kappa, tail_tol=1e-12, max_terms=MAX_TERMS):
    """Group-related coherent state (1-|xi|^2)^kappa sum sqrt((2k)_n/n!) xi^n |n>."""
    xi = complex(xi)
    if abs(xi) >= 1.0:
        raise DomainError(f"|xi| = {abs(xi):.6g} must be < 1")
    norm = (1.0 - abs(xi) ** 2) ** kappa
    c = [norm + 0j]
    total = norm**2
    n = 0
    while xi != 0:
        c.append(c[-1] * xi * math.sqrt((2 * kappa + n) / (n + 1)))
        total += abs(c[-1]) ** 2
        n += 1
        ratio = abs(xi) ** 2 * (2 * kappa + n) / (n + 1)
        if ratio < 1.0:
            tail = abs(c[-1]) ** 2 * ratio / (1 - ratio)
            if tail <= tail_tol:
                break
        if n >= max_terms:
            raise TruncationError("Perelomov tail not certified")
    coeffs = np.array(c)
    tail = max(1.0 - total, 0.0)
    coeffs /= math.sqrt(total)
    u, v, w = 1.0, xi * xi, -2.0 * xi
    return FockState(kappa, coeffs, tail, StateParams(0.0, u, v, w, kappa), "perelomov", 0j, norm, None, {"xi": xi})


def perelomov_uvw(r, theta):
    """(u, v, w, xi) for the squeeze-orbit parameter dictionary."""
    u = math.cosh(r) ** 2
    v = math.sinh(r) ** 2 * cmath.exp(2j * theta)
    w = math.sinh(2 * r) * cmath.exp(1j * theta)
    xi = -math.tanh(r) * cmath.exp(1j * theta)
    return u, v, w, xi


# --------------------------------------------------------------------------
# scalar products
# --------------------------------------------------------------------------


def inner_product(s1, s2):
    """Coefficient-sum overlap <s1|s2>."""
    if abs(s1.kappa - s2.kappa) > 1e-14:
        raise DomainError("states carry different kappa")
    n = max(s1.size, s2.size)
    return complex(np.vdot(s1.padded(n), s2.padded(n)))


def _log1p_over(x):
    """log(1+x)/x, stable near 0."""
    if abs(x) < 1e-8:
        return 1.0 - 0.5 * x + x * x / 3.0
    return cmath.log(1.0 + x) / x


def _pair_pieces(p1, p2):
    if p1.u == 0 or p2.u == 0:
        raise DomainError("analytic scalar product requires u != 0")
    if abs(p1.kappa - p2.kappa) > 1e-14:
        raise DomainError("states carry different kappa")
    l1, l2 = p1.l, p2.l
    s = -((p1.w + l1).conjugate() * (p2.w + l2)) / (4.0 * p1.u.conjugate() * p2.u)
    if abs(s) >= 1.0:
        raise ConvergenceError(f"|s| = {abs(s):.6g} >= 1")
    return s, p1.zeta.conjugate(), p2.zeta, p1.z_zeta.conjugate(), p2.z_zeta


def _overlap_raw(kappa, s, zeta1, zeta2, a1, a2):
    """sum_n conj(a_n(1)) a_n(2) expressed through s; a1, a2 are (z/l)*zeta."""
    d1 = 1.0 + s - s * zeta1
    d2 = 1.0 + s - s * zeta2
    q = -s / (1.0 + s)
    # exp(a [log(1+s) - log(1+s-s zeta)]) with a*zeta finite
    expo = a1 * q * _log1p_over(q * zeta1) + a2 * q * _log1p_over(q * zeta2)
    pref = d1 ** (-kappa) * d2 ** (-kappa) * cmath.exp(-expo)
    y = -s / (d1 * d2)
    xarg = y * zeta1 * zeta2
    if abs(xarg) >= 0.9:
        # the term ratio is that of 2F1(kappa + a1/zeta1, kappa + a2/zeta2; 2kappa; y zeta1 zeta2)
        if abs(xarg - 1.0) < 1e-12:
            raise ConvergenceError("scalar-product 2F1 sits on its branch point")
        with mpmath.workdps(30):
            val = mpmath.hyp2f1(kappa + a1 / zeta1, kappa + a2 / zeta2, 2 * kappa, xarg)
        return pref * complex(val)
    total = 1.0 + 0j
    term = 1.0 + 0j
    small = 0
    for k in range(200000):
        term *= ((kappa + k) * zeta1 + a1) * ((kappa + k) * zeta2 + a2) * y / ((2 * kappa + k) * (k + 1.0))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            small += 1
            if small >= 2:
                return pref * total
        else:
            small = 0
    raise ConvergenceError("scalar-product series did not converge")


def normalization_analytic(params):
    """N from the closed form for N^{-2}."""
    s, z1, z2, a1, a2 = _pair_pieces(params, params)
    val = _overlap_raw(params.kappa, s, z1, z2, a1, a2)
    return float(val.real) ** -0.5


def inner_product_analytic(p1, p2):
    s, z1, z2, a1, a2 = _pair_pieces(p1, p2)
    raw = _overlap_raw(p1.kappa, s, z1, z2, a1, a2)
    return normalization_analytic(p1) * normalization_analytic(p2) * raw


# --------------------------------------------------------------------------
# position space
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    x_max: float
    npoints: int = 2048

    @property
    def x(self):
        return np.linspace(0.0, self.x_max, self.npoints)

    @property
    def h(self):
        return self.x_max / (self.npoints - 1)


@dataclass(frozen=True)
class GridWavefunction:
    x_max: float
    npoints: int
    values: np.ndarray
    time: float
    meta: dict = field(default_factory=dict)
    # off only for the kappa = 1/4 override, whose states stay finite at the wall
    dirichlet: bool = True

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.npoints,):
            raise ValueError("values length does not match npoints")
        if self.dirichlet:
            vals[0] = 0.0
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def x(self):
        return np.linspace(0.0, self.x_max, self.npoints)

    @property
    def h(self):
        return self.x_max / (self.npoints - 1)

    @property
    def grid(self):
        return GridSpec(self.x_max, self.npoints)

    def norm(self):
        return float(np.sqrt(np.trapezoid(np.abs(self.values) ** 2, dx=self.h)))

    def to_csv(self, path):
        v = self.values
        rows = np.column_stack([self.x, v.real, v.imag, np.abs(v) ** 2])
        np.savetxt(path, rows, delimiter=",", header="x,re_psi,im_psi,abs2", comments="", fmt="%.17g")


def default_grid(traj, scenario, npoints=2048, factor=12.0):
    """x_max = factor * sqrt(hbar max|eps|^2 / min m) over the trajectory."""
    m_min = float(np.min(scenario.m(traj.times)))
    e2 = float(np.max(np.abs(traj.eps) ** 2))
    return GridSpec(factor * math.sqrt(scenario.hbar * e2 / m_min), npoints)


@dataclass(frozen=True)
class _Frame:
    eps: complex
    eps_dot: complex
    theta: float
    m: float
    dm: float
    b: float
    hbar: float

    @property
    def a(self):
        return self.m / (self.hbar * abs(self.eps) ** 2)

    def quad_phase(self, x, mdot_factor=0.5):
        """exp(-i m/(2 hbar) (2b + f m'/m - Re(eps'/eps)) x^2)."""
        coef = 2 * self.b + mdot_factor * self.dm / self.m - (self.eps_dot / self.eps).real
        return np.exp(-0.5j * self.m / self.hbar * coef * x * x)


def _frame(traj, scenario, t):
    e, v = traj.at(t)
    return _Frame(
        e, v, traj.phase_at(t), float(scenario.m(t)), float(scenario.dm(t)), float(scenario.b(t)), scenario.hbar
    )


def _ypow(y, e):
    """y**e for y >= 0, with 0**0 = 1."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(y > 0, np.exp(e * np.log(np.where(y > 0, y, 1.0))), 1.0 if e == 0 else 0.0)


def laguerre_functions(nmax, alpha, y, extra_power=0.0):
    """Rows n = 0..nmax of sqrt(n!/Gamma(n+alpha+1)) L_n^alpha(y) y^(alpha/2 + extra_power) e^(-y/2)."""
    y = np.asarray(y, dtype=float)
    out = np.zeros((nmax + 1,) + y.shape)
    f0 = _ypow(y, 0.5 * alpha + extra_power) * np.exp(-0.5 * y - 0.5 * log_gamma(alpha + 1.0))
    out[0] = f0
    if nmax >= 1:
        out[1] = (1.0 + alpha - y) * f0 / math.sqrt(1.0 + alpha)
    for n in range(1, nmax):
        out[n + 1] = ((2 * n + 1 + alpha - y) * out[n] - math.sqrt(n * (n + alpha)) * out[n - 1]) / math.sqrt(
            (n + 1) * (n + alpha + 1)
        )
    return out


def _common(fr, kappa, x):
    # the y^(1/4) of the amplitude is folded into the power of y by the callers
    y = fr.a * x * x
    return y, math.sqrt(2.0) * fr.a**0.25


def psi_n_values(traj, scenario, kappa, nmax, t, x, mdot_factor=0.5):
    """Rows Psi_0..Psi_nmax on the points x (basis-consistent sign)."""
    fr = _frame(traj, scenario, t)
    y, amp = _common(fr, kappa, x)
    f = laguerre_functions(nmax, 2 * kappa - 1, y, 0.25)
    n = np.arange(nmax + 1)[:, None]
    phase = ((-1.0) ** n) * np.exp(-2j * (kappa + n) * fr.theta)
    return phase * amp * fr.quad_phase(x, mdot_factor) * f


def _wrap(values, grid, t, kappa, **meta):
    return GridWavefunction(grid.x_max, grid.npoints, values, float(t), meta, kappa > KAPPA_QUARTER_EDGE)


def wavefunction_psi_n(traj, scenario, kappa, n, t, grid):
    vals = psi_n_values(traj, scenario, kappa, n, t, grid.x)[n]
    return _wrap(vals, grid, t, kappa, family="psi_n", n=n)


def psi_z_values(traj, scenario, kappa, z, t, x, mdot_factor=0.5):
    fr = _frame(traj, scenario, t)
    y, amp = _common(fr, kappa, x)
    alpha = 2 * kappa - 1
    zeta = -complex(z) * cmath.exp(-2j * fr.theta)
    n0 = hyper_0f1(2 * kappa, abs(z) ** 2) ** -0.5
    power = _ypow(y, 0.5 * alpha + 0.25) * np.exp(-0.5 * y)
    bessel = hyper_0f1_array(2 * kappa, -y * zeta)
    lead = n0 * cmath.exp(zeta - 2j * kappa * fr.theta - 0.5 * log_gamma(2 * kappa))
    return lead * amp * power * bessel * fr.quad_phase(x, mdot_factor)


def wavefunction_psi_z(traj, scenario, kappa, z, t, grid, phase_convention="half"):
    """Closed-form eigenfunction of I_-; ``phase_convention`` 'full' uses m'/m in the phase."""
    factor = {"half": 0.5, "full": 1.0}[phase_convention]
    vals = psi_z_values(traj, scenario, kappa, z, t, grid.x, factor)
    return _wrap(vals, grid, t, kappa, family="psi_z", z=complex(z), phase_convention=phase_convention)


def psi_xi_values(traj, scenario, kappa, xi, t, x):
    xi = complex(xi)
    if abs(xi) >= 1.0:
        raise DomainError(f"|xi| = {abs(xi):.6g} must be < 1")
    fr = _frame(traj, scenario, t)
    y, amp = _common(fr, kappa, x)
    alpha = 2 * kappa - 1
    eta = -xi * cmath.exp(-2j * fr.theta)
    lead = (
        (1.0 - abs(xi) ** 2) ** kappa
        * cmath.exp(-2j * kappa * fr.theta - 0.5 * log_gamma(2 * kappa))
        * (1.0 - eta) ** (-2 * kappa)
    )
    power = _ypow(y, 0.5 * alpha + 0.25)
    gauss = np.exp(y * (eta / (eta - 1.0) - 0.5))
    return lead * amp * power * gauss * fr.quad_phase(x)


def wavefunction_psi_xi(traj, scenario, kappa, xi, t, grid):
    vals = psi_xi_values(traj, scenario, kappa, xi, t, grid.x)
    return _wrap(vals, grid, t, kappa, family="psi_xi", xi=complex(xi))


def synthesize(state, traj, scenario, t, grid):
    """sum_n c_n Psi_n on the grid (position form of any Fock state)."""
    rows = psi_n_values(traj, scenario, state.kappa, state.size - 1, t, grid.x)
    return _wrap(state.coeffs @ rows, grid, t, state.kappa, family=state.family)


# --------------------------------------------------------------------------
# Green function
# --------------------------------------------------------------------------


def _green_kernel(fr1, fr2, kappa, x1, x2, w):
    """sum_n Psi_n(x2) conj(Psi_n(x1)) w^n for |w| <= 1 (Hille-Hardy closed form)."""
    alpha = 2 * kappa - 1
    y1 = fr1.a * x1 * x1
    y2 = fr2.a * x2 * x2
    big_y = y1 * y2
    one_w = 1.0 - w
    arg = big_y * w / one_w**2
    if abs(arg) < 100.0:
        f = hyper_0f1(alpha + 1.0, complex(arg))
    else:
        # large arguments cancel badly in the plain series
        with mpmath.workdps(30):
            f = complex(mpmath.hyp0f1(alpha + 1.0, arg))
    lead = 2.0 * (fr1.a * fr2.a) ** 0.25 * big_y ** (0.25 + 0.5 * alpha)
    expo = -(y1 + y2) * (0.5 + w / one_w)
    phase = np.exp(2j * kappa * (fr1.theta - fr2.theta)) * fr2.quad_phase(x2) * np.conj(fr1.quad_phase(x1))
    return lead * phase * one_w ** (-alpha - 1) * cmath.exp(expo) * f / math.exp(log_gamma(alpha + 1.0))


def green_function(traj, scenario, kappa, x2, t2, x1, t1, damping=0.0):
    """Propagator G(x2,t2;x1,t1); ``damping`` tau > 0 returns the Abel-regularised kernel."""
    if not t1 < t2:
        raise DomainError("green_function requires t1 < t2")
    if x1 <= 0 or x2 <= 0:
        return 0j
    g12 = phase_gamma12(traj, t1, t2)
    if damping == 0.0 and abs(math.sin(g12)) < 1e-10:
        raise CausticError(f"sin gamma_12 = {math.sin(g12):.3g}")
    fr1, fr2 = _frame(traj, scenario, t1), _frame(traj, scenario, t2)
    # the basis phase exp(-2i kappa theta) carries the accumulated gamma_12; w only its residue
    fr2 = _Frame(fr2.eps, fr2.eps_dot, fr1.theta + g12, fr2.m, fr2.dm, fr2.b, fr2.hbar)
    w = cmath.exp(-2j * g12 - 2.0 * damping)
    return complex(_green_kernel(fr1, fr2, kappa, float(x1), float(x2), w))


def green_matrix(traj, scenario, kappa, x2s, t2, x1s, t1):
    """Undamped G on the outer product of two position arrays, rows indexed by x2.

    On the unit circle the 0F1 argument is real and negative, so the kernel
    reduces to J_{2kappa-1}; the vectorised Bessel comes from scipy.
    """
    if not t1 < t2:
        raise DomainError("green_matrix requires t1 < t2")
    g12 = phase_gamma12(traj, t1, t2)
    sg = math.sin(g12)
    if abs(sg) < 1e-10:
        raise CausticError(f"sin gamma_12 = {sg:.3g}")
    fr1, fr2 = _frame(traj, scenario, t1), _frame(traj, scenario, t2)
    fr2 = _Frame(fr2.eps, fr2.eps_dot, fr1.theta + g12, fr2.m, fr2.dm, fr2.b, fr2.hbar)
    w = cmath.exp(-2j * g12)
    one_w = 1.0 - w
    alpha = 2 * kappa - 1
    x1 = np.clip(np.asarray(x1s, dtype=float), 0.0, None)[None, :]
    x2 = np.clip(np.asarray(x2s, dtype=float), 0.0, None)[:, None]
    y1, y2 = fr1.a * x1 * x1, fr2.a * x2 * x2
    root = np.sqrt(y1 * y2) / (2.0 * abs(sg))
    # Y^(alpha/2) 0F1(;alpha+1;-q) / Gamma(alpha+1) with q = root^2 and Y^(1/2) = 2|sin| root
    bes = (2.0 * abs(sg)) ** alpha * scipy_special.jv(alpha, 2.0 * root)
    lead = 2.0 * (fr1.a * fr2.a) ** 0.25 * (y1 * y2) ** 0.25
    expo = -(y1 + y2) * (0.5 + w / one_w)
    phase = np.exp(2j * kappa * (fr1.theta - fr2.theta)) * fr2.quad_phase(x2) * np.conj(fr1.quad_phase(x1))
    return lead * phase * one_w ** (-alpha - 1) * np.exp(expo) * bes


def green_function_printed(traj, scenario, kappa, x2, t2, x1, t1):
    """The closed form as typeset, with I_nu(-iX) = exp(-i pi nu/2) J_nu(X)."""
    g12 = phase_gamma12(traj, t1, t2)
    sg = math.sin(g12)
    if abs(sg) < 1e-10:
        raise CausticError(f"sin gamma_12 = {sg:.3g}")
    hbar = scenario.hbar
    (e1, v1), (e2, v2) = traj.at(t1), traj.at(t2)
    m1, m2 = float(scenario.m(t1)), float(scenario.m(t2))
    r1, r2 = abs(e1), abs(e2)

    def big_b(t, e, v, m):
        return m * (2 * float(scenario.b(t)) - (v / e).real + float(scenario.dm(t)) / (2 * m))

    b1, b2 = big_b(t1, e1, v1, m1), big_b(t2, e2, v2, m2)
    nu = 2 * kappa - 1
    big_x = x1 * x2 * math.sqrt(m1 * m2) / (hbar * r1 * r2 * sg)
    i_val = cmath.exp(-0.5j * math.pi * nu) * bessel_j(nu, big_x) if big_x > 0 else (
        cmath.exp(0.5j * math.pi * nu) * bessel_j(nu, -big_x)
    )
    pre = -1j * math.sqrt(m1 * m2) / (hbar * r1 * r2 * sg) * math.sqrt(x1 * x2)
    ph = cmath.exp(0.5j / hbar * (b1 * x1 * x1 - b2 * x2 * x2))
    ph *= cmath.exp(0.5j / hbar / math.tan(g12) * (m1 * x1 * x1 / r1**2 + m2 * x2 * x2 / r2**2))
    return pre * ph * i_val


def green_spectral(traj, scenario, kappa, x2, t2, x1, t1, nterms=60, damping=0.0):
    """Truncated sum_n Psi_n(x2,t2) conj(Psi_n(x1,t1)) exp(-2 n damping)."""
    r2 = psi_n_values(traj, scenario, kappa, nterms - 1, t2, np.array([float(x2)]))[:, 0]
    r1 = psi_n_values(traj, scenario, kappa, nterms - 1, t1, np.array([float(x1)]))[:, 0]
    weights = np.exp(-2.0 * damping * np.arange(nterms))
    return complex(np.sum(r2 * np.conj(r1) * weights))


def green_to_csv(path, rows):
    arr = np.array([[x1, x2, g.real, g.imag] for x1, x2, g in rows])
    np.savetxt(path, arr, delimiter=",", header="x1,x2,re_G,im_G", comments="", fmt="%.17g")
