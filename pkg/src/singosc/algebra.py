r"""su(1,1) bookkeeping: Bargman index, invariant elements, ladder matrices.

Elements are stored by their components on :math:`(L_-, L_+, L_3)` (or the
invariant analogues) and converted to Cartesian components
:math:`(k_1, k_2, k_3)` on :math:`(L_1, L_2, L_3)` when needed.  The
commutation relations are fixed as

    [L1, L2] = -i L3,   [L2, L3] = i L1,   [L3, L1] = i L2.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, CollapseError, FrameError, SingOscError

L_FRAME = "L"


class SingularMatrixError(SingOscError, ArithmeticError):
    pass


@dataclass(frozen=True)
class KappaIndex:
    c: float
    kappa: float
    branch: str

    @property
    def casimir(self):
        return self.kappa * (self.kappa - 1.0)


def kappa_from_c(c, branch="principal", allow_kappa_quarter=False):
    """Bargman index kappa from the coupling c via kappa(kappa-1) = -3/16 + c/4."""
    disc = 1.0 + 4.0 * c
    if disc < 0.0:
        raise CollapseError(f"1 + 4c = {disc:.6g} < 0: complex kappa (collapse)")
    root = 0.25 * math.sqrt(disc)
    if branch == "principal":
        kappa = 0.5 + root
    elif branch == "secondary":
        kappa = 0.5 - root
    else:
        raise ValueError(f"unknown branch {branch!r}")
    if kappa <= 0.25:
        if not (allow_kappa_quarter and abs(kappa - 0.25) < 1e-14):
            raise AdmissibilityError(f"kappa = {kappa:.6g} is not > 1/4")
    return KappaIndex(float(c), kappa, branch)


def c_from_kappa(kappa):
    return 4.0 * kappa * (kappa - 1.0) + 0.75


@dataclass(frozen=True)
class SU11Element:
    """coeff_minus * X_- + coeff_plus * X_+ + coeff_3 * X_3 in a tagged frame."""

    coeff_minus: complex
    coeff_plus: complex
    coeff_3: complex
    frame: object = L_FRAME

    @classmethod
    def from_cartesian(cls, k, frame=L_FRAME):
        k1, k2, k3 = (complex(x) for x in k)
        return cls(0.5 * (k1 + 1j * k2), 0.5 * (k1 - 1j * k2), k3, frame)

    @property
    def cartesian(self):
        km, kp = self.coeff_minus, self.coeff_plus
        return np.array([km + kp, -1j * (km - kp), self.coeff_3], dtype=complex)

    def is_hermitian(self, tol=1e-12):
        scale = max(abs(self.coeff_minus), abs(self.coeff_plus), abs(self.coeff_3), 1.0)
        return (
            abs(self.coeff_plus - np.conj(self.coeff_minus)) <= tol * scale
            and abs(complex(self.coeff_3).imag) <= tol * scale
        )

    def _check(self, other):
        if not isinstance(other, SU11Element):
            return NotImplemented
        if other.frame != self.frame:
            raise FrameError(f"cannot combine frame {self.frame!r} with {other.frame!r}")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return SU11Element(
            self.coeff_minus + other.coeff_minus,
            self.coeff_plus + other.coeff_plus,
            self.coeff_3 + other.coeff_3,
            self.frame,
        )

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, scalar):
        return SU11Element(scalar * self.coeff_minus, scalar * self.coeff_plus, scalar * self.coeff_3, self.frame)

    __mul__ = __rmul__

    def commutator(self, other):
        """[self, other] using the su(1,1) structure constants."""
        self._check(other)
        return SU11Element.from_cartesian(lie_bracket(self.cartesian, other.cartesian), self.frame)

    def matrix(self, ladders):
        """Dense matrix on a truncated |kappa, kappa+n> basis."""
        i_minus, i_plus, i_3 = ladders
        return self.coeff_minus * i_minus.entries + self.coeff_plus * i_plus.entries + self.coeff_3 * i_3.entries


def lie_bracket(a, b):
    """Cartesian components of [a.L, b.L]."""
    a1, a2, a3 = a
    b1, b2, b3 = b
    return np.array(
        [1j * (a2 * b3 - a3 * b2), 1j * (a3 * b1 - a1 * b3), -1j * (a1 * b2 - a2 * b1)],
        dtype=complex,
    )


def casimir_form(k):
    """Invariant quadratic form k3^2 - k1^2 - k2^2 of a Cartesian vector."""
    return k[2] * k[2] - k[0] * k[0] - k[1] * k[1]


def hamiltonian_coeffs(scenario, t):
    """H(t) = h1 L1 + h2 L2 + h3 L3 as an L-frame element."""
    hbar, m0, w0 = scenario.hbar, scenario.m0, scenario.omega0
    m = float(scenario.m(t))
    w = float(scenario.omega(t))
    ratio = m * w * w / (m0 * w0 * w0)
    h1 = hbar * w0 * (ratio - m0 / m)
    h2 = -4.0 * hbar * float(scenario.b(t))
    h3 = hbar * w0 * (ratio + m0 / m)
    return SU11Element.from_cartesian((h1, h2, h3))


def lowering_cartesian(qc, scenario):
    """L-frame Cartesian components of the quadratic invariant built from qc.

    alpha p^2 + beta (xp+px) + gamma x^2 + c hbar^2 alpha / x^2 equals this
    combination of L1, L2, L3 (with complex coefficients).
    """
    hbar = scenario.hbar
    mw = scenario.m0 * scenario.omega0
    return 2.0 * hbar * np.array(
        [qc.gamma / mw - mw * qc.alpha, -2.0 * qc.beta, qc.gamma / mw + mw * qc.alpha], dtype=complex
    )


def invariant_elements(qc, scenario):
    """(I1, I2, I3) at time qc.t as Hermitian L-frame elements.

    The quadratic ansatz with the envelope coefficients is I_- = I1 - i I2;
    I3 follows from [I1, I2] = -i I3.
    """
    low = lowering_cartesian(qc, scenario)
    k1 = low.real.astype(complex)
    k2 = -low.imag.astype(complex)
    k3 = 1j * lie_bracket(k1, k2)
    k3 = k3.real.astype(complex)
    return tuple(SU11Element.from_cartesian(k) for k in (k1, k2, k3))


def printed_i3_cartesian(qc, scenario):
    """The I3 coefficient vector exactly as typeset in the source formula (report only)."""
    hbar = scenario.hbar
    mw = scenario.m0 * scenario.omega0
    ab = (qc.alpha * np.conj(qc.beta)).imag
    gb = (qc.gamma * np.conj(qc.beta)).imag
    ag = (qc.alpha * np.conj(qc.gamma)).imag
    return 8.0 * hbar**2 * np.array([-mw * ab + gb / mw, -ag, mw * ab + gb / mw])


def coefficient_matrix(qc, scenario):
    """Real 3x3 matrix M with I_j = M_jk L_k."""
    return np.array([el.cartesian.real for el in invariant_elements(qc, scenario)])


def lambda_matrix(qc, scenario, det_tol=1e-12):
    """Lambda = M^{-1}, so that L_j = Lambda_jk I_k; returns (Lambda, condition number)."""
    m = coefficient_matrix(qc, scenario)
    det = np.linalg.det(m)
    if abs(det) < det_tol:
        raise SingularMatrixError(f"invariant coefficient matrix is singular (det = {det:.3g})")
    return np.linalg.inv(m), float(np.linalg.cond(m))


def printed_lambda(qc, scenario):
    """Transcription of the typeset Lambda matrix, kept for the comparison report."""
    hbar = scenario.hbar
    mw = scenario.m0 * scenario.omega0
    a, b, g = qc.alpha, qc.beta, qc.gamma
    q = 1.0 / (4.0 * hbar)
    rows = [
        [q * (g.real / mw - mw * a.real), q * (g.real / mw - b.real), q * mw * a.real],
        [q * (g.real / mw - mw * a.imag), q * (g.real / mw - b.imag), q * mw * a.imag],
        [
            (b * g).imag / mw - mw * (a * np.conj(b)).imag,
            (b * g).imag / mw - (a * np.conj(g)).imag,
            mw * (a * np.conj(b)).imag,
        ],
    ]
    return 8.0 * hbar**2 * np.array(rows)


def lambda_report(qc, scenario):
    lam, cond = lambda_matrix(qc, scenario)
    paper = printed_lambda(qc, scenario)
    return {
        "t": qc.t,
        "lambda_numeric": lam.tolist(),
        "lambda_paper": paper.tolist(),
        "max_abs_diff": float(np.max(np.abs(lam - paper))),
        "condition_number": cond,
    }


def lambda_report_json(qc, scenario):
    return json.dumps(lambda_report(qc, scenario), sort_keys=True)


def transport_moments(sigma_i, lam):
    """sigma(L) = Lambda sigma(I) Lambda^T."""
    sigma_i = np.asarray(sigma_i, dtype=float)
    return lam @ sigma_i @ lam.T


@dataclass(frozen=True)
class OperatorMatrix:
    kappa: float
    dim: int
    entries: np.ndarray


def ladder_matrices(kappa, dim):
    """Truncated (I_-, I_+, I_3) on |kappa, kappa+n>, n = 0..dim-1."""
    if isinstance(kappa, KappaIndex):
        kappa = kappa.kappa
    if dim < 2:
        raise ValueError("dim must be >= 2")
    n = np.arange(1, dim)
    lower = np.zeros((dim, dim))
    lower[n - 1, n] = np.sqrt(n * (2.0 * kappa + n - 1.0))
    raise_ = lower.T.copy()
    diag = np.diag(kappa + np.arange(dim, dtype=float))
    for arr in (lower, raise_, diag):
        arr.setflags(write=False)
    return tuple(OperatorMatrix(kappa, dim, e) for e in (lower, raise_, diag))


def cartesian_matrices(kappa, dim):
    """(I1, I2, I3) dense matrices from the ladder representation."""
    i_minus, i_plus, i_3 = (op.entries for op in ladder_matrices(kappa, dim))
    return (0.5 * (i_plus + i_minus), (i_plus - i_minus) / 2j, i_3.astype(complex))


def operator_coefficients(element, scenario):
    """Map k.L onto a_p2 p^2 + a_xp (xp+px) + a_x2 x^2 + a_inv / x^2."""
    k1, k2, k3 = element.cartesian
    hbar = scenario.hbar
    mw = scenario.m0 * scenario.omega0
    return {
        "p2": (k3 - k1) / (4.0 * mw * hbar),
        "xp": -k2 / (4.0 * hbar),
        "x2": (k3 + k1) * mw / (4.0 * hbar),
        "inv_x2": (k3 - k1) * scenario.c * hbar / (4.0 * mw),
    }
