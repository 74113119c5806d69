r"""Auxiliary classical oscillator and the quadratic invariant coefficients.

The complex envelope :math:`\varepsilon(t)` solves
:math:`\ddot\varepsilon + \Omega^2(t)\varepsilon = 0` with Wronskian
:math:`\varepsilon^*\dot\varepsilon - \varepsilon\dot\varepsilon^* = 2i`.
Integration is classic RK4 at the scenario's fixed step; values between
samples are obtained by one RK4 sub-step from the preceding sample, so they
carry the same accuracy as the stored ones.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import IntegrationError, OutOfSpanError

WRONSKIAN_FAIL = 1e-6
_SPAN_SLACK = 1e-9


def effective_frequency_sq(scenario, t):
    """Omega^2(t) = w^2 - 2 b m'/m + m'^2/(4 m^2) - m''/(2m) - 4 b^2 - 2 b'."""
    m = scenario.m(t)
    dm = scenario.dm(t)
    ddm = scenario.ddm(t)
    b = scenario.b(t)
    db = scenario.db(t)
    w = scenario.omega(t)
    return w * w - 2.0 * b * dm / m + dm * dm / (4.0 * m * m) - ddm / (2.0 * m) - 4.0 * b * b - 2.0 * db


def initial_envelope(scenario):
    """Initial (eps, eps_dot) with Wronskian 2i.

    The canonical start uses omega0 (the frequency of the static generators),
    which makes I_j(t0) = L_j even when m''(t0) shifts Omega(t0) away from it.
    """
    if scenario.eps0 is not None:
        return scenario.eps0
    if scenario.canonical_start:
        w0 = scenario.omega0
        return 1.0 / math.sqrt(w0) + 0j, 1j * math.sqrt(w0)
    w2 = float(effective_frequency_sq(scenario, scenario.t0))
    if w2 > 0.0:
        w0 = math.sqrt(w2)
        return 1.0 / math.sqrt(w0) + 0j, 1j * math.sqrt(w0)
    return 1.0 + 0j, 1j


def _rk4_step(e, v, h, w_a, w_mid, w_b):
    k1e, k1v = v, -w_a * e
    e2, v2 = e + 0.5 * h * k1e, v + 0.5 * h * k1v
    k2e, k2v = v2, -w_mid * e2
    e3, v3 = e + 0.5 * h * k2e, v + 0.5 * h * k2v
    k3e, k3v = v3, -w_mid * e3
    e4, v4 = e + h * k3e, v + h * k3v
    k4e, k4v = v4, -w_b * e4
    return (
        e + h / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )


def wronskian_residual(eps, eps_dot):
    return np.abs(np.conj(eps) * eps_dot - eps * np.conj(eps_dot) - 2j)


class EnvelopeTrajectory:
    """Sampled envelope on ``times``; immutable after construction."""

    def __init__(self, scenario, times, eps, eps_dot, omega_sq):
        self.scenario = scenario
        self.times = times
        self.eps = eps
        self.eps_dot = eps_dot
        self.omega_sq = omega_sq
        self.wronskian_residual = wronskian_residual(eps, eps_dot)
        self.phase = np.unwrap(np.angle(eps))
        for arr in (self.times, self.eps, self.eps_dot, self.omega_sq, self.wronskian_residual, self.phase):
            arr.setflags(write=False)
        self.dt = times[1] - times[0]

    @property
    def span(self):
        return float(self.times[0]), float(self.times[-1])

    def _locate(self, t):
        t0, t1 = self.span
        if t < t0 - _SPAN_SLACK or t > t1 + _SPAN_SLACK:
            raise OutOfSpanError(f"t = {t} outside trajectory span [{t0}, {t1}]")
        k = int(math.floor((t - t0) / self.dt))
        return min(max(k, 0), len(self.times) - 1)

    def at(self, t):
        """(eps, eps_dot) at arbitrary ``t`` inside the span."""
        t = float(t)
        k = self._locate(t)
        h = t - self.times[k]
        e, v = complex(self.eps[k]), complex(self.eps_dot[k])
        if abs(h) < 1e-15:
            return e, v
        w = effective_frequency_sq(self.scenario, np.array([self.times[k], self.times[k] + 0.5 * h, t]))
        return _rk4_step(e, v, h, float(w[0]), float(w[1]), float(w[2]))

    def phase_at(self, t):
        """Continuous (unwrapped) arg eps(t)."""
        k = self._locate(float(t))
        e, _ = self.at(t)
        return float(self.phase[k] + np.angle(e / self.eps[k]))

    def to_csv(self, path):
        header = "t,re_eps,im_eps,re_eps_dot,im_eps_dot,omega_sq,wronskian_residual"
        rows = np.column_stack(
            [self.times, self.eps.real, self.eps.imag, self.eps_dot.real, self.eps_dot.imag,
             self.omega_sq, self.wronskian_residual]
        )
        np.savetxt(path, rows, delimiter=",", header=header, comments="", fmt="%.17g")


def integrate_envelope(scenario, dt=None, check=True):
    """Integrate the envelope equation over the scenario span with RK4."""
    dt = scenario.dt if dt is None else dt
    t0, t1 = scenario.t_span
    nsteps = int(round((t1 - t0) / dt))
    if nsteps < 1:
        raise IntegrationError("time span shorter than one step")
    h = (t1 - t0) / nsteps
    half = t0 + 0.5 * h * np.arange(2 * nsteps + 1)
    w2 = np.asarray(effective_frequency_sq(scenario, half), dtype=float) * np.ones_like(half)
    if not np.all(np.isfinite(w2)):
        raise IntegrationError("Omega^2(t) is not finite on the span")
    eps = np.empty(nsteps + 1, dtype=complex)
    eps_dot = np.empty(nsteps + 1, dtype=complex)
    e, v = initial_envelope(scenario)
    eps[0], eps_dot[0] = e, v
    w2l = w2.tolist()
    for k in range(nsteps):
        e, v = _rk4_step(e, v, h, w2l[2 * k], w2l[2 * k + 1], w2l[2 * k + 2])
        eps[k + 1], eps_dot[k + 1] = e, v
    traj = EnvelopeTrajectory(scenario, t0 + h * np.arange(nsteps + 1), eps, eps_dot, w2[::2].copy())
    if check:
        worst = float(traj.wronskian_residual.max())
        if not worst <= WRONSKIAN_FAIL:
            raise IntegrationError(f"Wronskian residual {worst:.3g} exceeds {WRONSKIAN_FAIL:g}")
    return traj


def step_halving_error(scenario):
    """Max |eps_h - eps_{h/2}| over the common samples."""
    coarse = integrate_envelope(scenario)
    fine = integrate_envelope(scenario, dt=scenario.dt / 2)
    return float(np.max(np.abs(coarse.eps - fine.eps[::2])))


@dataclass(frozen=True)
class QuadCoeffs:
    """Coefficients of I = alpha p^2 + beta (xp+px) + gamma x^2 + delta / x^2."""

    t: float
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex


def quad_coeffs(traj, scenario, t):
    e, v = traj.at(t)
    hbar = scenario.hbar
    m = float(scenario.m(t))
    dm = float(scenario.dm(t))
    b = float(scenario.b(t))
    bracket = 2.0 * b * e - v + dm / (2.0 * m) * e
    alpha = -e * e / (4.0 * hbar * m)
    beta = -e / (4.0 * hbar) * bracket
    gamma = -m / (4.0 * hbar) * bracket * bracket
    delta = scenario.c * hbar**2 * alpha
    return QuadCoeffs(float(t), alpha, beta, gamma, delta)


def inverse_rho_sq(traj, t):
    e, _ = traj.at(t)
    return 1.0 / abs(e) ** 2


def phase_gamma12(traj, t1, t2):
    """Accumulated phase integral of 1/|eps|^2 from t1 to t2 (Simpson)."""
    t1, t2 = float(t1), float(t2)
    if t2 < t1:
        raise ValueError("phase_gamma12 expects t1 <= t2")
    traj._locate(t1)
    traj._locate(t2)
    if t2 == t1:
        return 0.0
    times = traj.times
    inv = 1.0 / np.abs(traj.eps) ** 2
    i1 = int(np.searchsorted(times, t1 - 1e-12))
    i2 = int(np.searchsorted(times, t2 + 1e-12, side="right")) - 1
    if i2 - i1 < 2:
        mid = 0.5 * (t1 + t2)
        return (t2 - t1) / 6.0 * (inverse_rho_sq(traj, t1) + 4 * inverse_rho_sq(traj, mid) + inverse_rho_sq(traj, t2))

    def piece(a, b):
        if b - a <= 1e-14:
            return 0.0
        return (b - a) / 6.0 * (inverse_rho_sq(traj, a) + 4 * inverse_rho_sq(traj, 0.5 * (a + b)) + inverse_rho_sq(traj, b))

    core = float(simpson(inv[i1:i2 + 1], x=times[i1:i2 + 1]))
    return core + piece(t1, float(times[i1])) + piece(float(times[i2]), t2)
