r"""Independent numerical oracles for the closed forms.

The half-line Hamiltonian

    H = p^2/2m + b (xp+px) + m w^2 x^2/2 + g/x^2,   g = c hbar^2/(2m)

is discretised on the interior nodes of a uniform grid with Dirichlet
conditions at both ends.  The mixed term uses
``(xp+px) psi_k = -i hbar [(x_k+x_{k+1}) psi_{k+1} - (x_k+x_{k-1}) psi_{k-1}] / 2h``
whose matrix is antisymmetric, so ``H`` stays Hermitian and Crank-Nicolson
stays unitary.
"""

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import roots_jacobi, roots_legendre

from .algebra import operator_coefficients
from .errors import DomainError, IntegrationError
from .specfun import bessel_i, bessel_k, hyper_0f1, log_gamma
from .states import GridWavefunction

TIME_STEP = 1e-5
NORM_DRIFT_FAIL = 1e-6


# --------------------------------------------------------------------------
# finite-difference operators on the interior nodes
# --------------------------------------------------------------------------


def _second_derivative(psi, h, order):
    """d^2/dx^2 on interior nodes with psi = 0 outside the grid."""
    p = np.concatenate([[0.0, 0.0], psi, [0.0, 0.0]]) if order == 4 else np.concatenate([[0.0], psi, [0.0]])
    if order == 2:
        return (p[2:] - 2 * p[1:-1] + p[:-2]) / h**2
    if order == 4:
        out = (-p[4:] + 16 * p[3:-1] - 30 * p[2:-2] + 16 * p[1:-3] - p[:-4]) / (12 * h**2)
        # one-sided at the first node: only psi(0) = 0 is known left of it
        out[0] = (-15 * psi[0] - 4 * psi[1] + 14 * psi[2] - 6 * psi[3] + psi[4]) / (12 * h**2)
        return out
    raise ValueError("order must be 2 or 4")


def _first_derivative(psi, h, order):
    p = np.concatenate([[0.0, 0.0], psi, [0.0, 0.0]]) if order == 4 else np.concatenate([[0.0], psi, [0.0]])
    if order == 2:
        return (p[2:] - p[:-2]) / (2 * h)
    out = (-p[4:] + 8 * p[3:-1] - 8 * p[1:-3] + p[:-4]) / (12 * h)
    out[0] = (-10 * psi[0] + 18 * psi[1] - 6 * psi[2] + psi[3]) / (12 * h)
    return out


def _dilation(psi, x, h, order):
    """(2x d/dx + 1) psi; at order 2 this is the antisymmetric form used by the propagator."""
    if order == 2:
        xe = np.concatenate([[x[0] - h], x, [x[-1] + h]])
        p = np.concatenate([[0.0], psi, [0.0]])
        return ((xe[1:-1] + xe[2:]) * p[2:] - (xe[1:-1] + xe[:-2]) * p[:-2]) / (2 * h)
    return 2 * x * _first_derivative(psi, h, order) + psi


def quadratic_form(psi, x, h, coeffs, hbar, order=2):
    """(a_p2 p^2 + a_xp (xp+px) + a_x2 x^2 + a_inv / x^2) psi on interior nodes."""
    return (
        -hbar**2 * coeffs["p2"] * _second_derivative(psi, h, order)
        - 1j * hbar * coeffs["xp"] * _dilation(psi, x, h, order)
        + coeffs["x2"] * x * x * psi
        + coeffs["inv_x2"] * psi / (x * x)
    )


def hamiltonian_coeffs_at(scenario, t):
    m = float(scenario.m(t))
    w = float(scenario.omega(t))
    return {
        "p2": 1.0 / (2 * m),
        "xp": float(scenario.b(t)),
        "x2": 0.5 * m * w * w,
        "inv_x2": scenario.c * scenario.hbar**2 / (2 * m),
    }


def apply_hamiltonian(psi, x, h, scenario, t, order=2):
    return quadratic_form(psi, x, h, hamiltonian_coeffs_at(scenario, t), scenario.hbar, order)


def _hamiltonian_bands(x, h, scenario, t):
    """(lower, diag, upper) of the interior Hamiltonian matrix."""
    k = hamiltonian_coeffs_at(scenario, t)
    hbar = scenario.hbar
    kin = hbar**2 * k["p2"] / h**2
    diag = 2 * kin + k["x2"] * x * x + k["inv_x2"] / (x * x)
    xe = np.concatenate([[x[0] - h], x, [x[-1] + h]])
    up = -kin - 1j * hbar * k["xp"] * (xe[1:-1] + xe[2:])[:-1] / (2 * h)
    lo = -kin + 1j * hbar * k["xp"] * (xe[1:-1] + xe[:-2])[1:] / (2 * h)
    return lo, diag.astype(complex), up


# --------------------------------------------------------------------------
# propagation
# --------------------------------------------------------------------------


@dataclass
class PropagationRun:
    scenario: object
    grid: object
    dt: float
    snapshots: list = field(default_factory=list)
    norm_drift: list = field(default_factory=list)
    invariant_means: list = field(default_factory=list)

    def snapshot_at(self, t):
        for ts, wf in self.snapshots:
            if abs(ts - t) < 0.5 * self.dt:
                return wf
        raise KeyError(t)


def propagate(scenario, psi0, t_final, dt, t_start=None, snapshot_times=(), observer=None):
    """Crank-Nicolson evolution of ``psi0`` with coefficients frozen at mid-step."""
    t = psi0.time if t_start is None else float(t_start)
    x_all = psi0.x
    h = psi0.h
    x = x_all[1:-1]
    psi = np.array(psi0.values[1:-1], dtype=complex)
    nsteps = int(round((t_final - t) / dt))
    if nsteps < 1:
        raise DomainError("t_final must exceed the start time by at least one step")
    dt = (t_final - t) / nsteps
    hbar = scenario.hbar
    v_first = scenario.c * hbar**2 / (2 * float(np.min(scenario.m([t, t_final])))) / x[0] ** 2
    if v_first * dt > 0.5 * hbar * 1e3:
        raise DomainError("grid too coarse near the origin for this time step")

    def wrap(vals, time_):
        return GridWavefunction(psi0.x_max, psi0.npoints, np.concatenate([[0.0], vals, [0.0]]), time_)

    run = PropagationRun(scenario, psi0.grid, dt)
    norm0 = float(np.sum(np.abs(psi) ** 2) * h)
    targets = sorted(float(s) for s in snapshot_times)
    run.snapshots.append((t, wrap(psi, t)))
    if observer is not None:
        run.invariant_means.append(observer(run.snapshots[-1][1]))
    ab = np.zeros((3, len(x)), dtype=complex)
    for step in range(nsteps):
        tm = t + 0.5 * dt
        lo, diag, up = _hamiltonian_bands(x, h, scenario, tm)
        f = 0.5j * dt / hbar
        rhs = psi - f * (diag * psi)
        rhs[:-1] -= f * up * psi[1:]
        rhs[1:] -= f * lo * psi[:-1]
        ab[0, 1:] = f * up
        ab[1] = 1.0 + f * diag
        ab[2, :-1] = f * lo
        psi = solve_banded((1, 1), ab, rhs)
        t = t + dt
        drift = abs(float(np.sum(np.abs(psi) ** 2) * h) - norm0)
        run.norm_drift.append(drift)
        if drift > NORM_DRIFT_FAIL:
            raise IntegrationError(f"norm drift {drift:.3g} at t = {t:.6g}")
        while targets and t >= targets[0] - 0.5 * dt:
            targets.pop(0)
            run.snapshots.append((t, wrap(psi, t)))
            if observer is not None:
                run.invariant_means.append(observer(run.snapshots[-1][1]))
    if run.snapshots[-1][0] != t:
        run.snapshots.append((t, wrap(psi, t)))
        if observer is not None:
            run.invariant_means.append(observer(run.snapshots[-1][1]))
    return run


def l2_distance(a, b):
    if a.npoints != b.npoints or abs(a.x_max - b.x_max) > 1e-12:
        raise ValueError("wavefunctions live on different grids")
    return float(np.sqrt(np.sum(np.abs(a.values - b.values) ** 2) * a.h))


# --------------------------------------------------------------------------
# residuals and sandwiches
# --------------------------------------------------------------------------


def schrodinger_residual(psi_closed, scenario, t, grid, order=2, time_step=TIME_STEP):
    """L2 norm of i hbar d_t psi - H psi on the interior (two boundary cells dropped).

    ``psi_closed(t, x)`` returns complex samples.  The time derivative is a
    central difference; the spatial stencil order is selectable.
    """
    x_all = grid.x
    h = grid.h
    x = x_all[1:-1]
    now = psi_closed(t, x_all)[1:-1]
    dpsi = (psi_closed(t + time_step, x_all)[1:-1] - psi_closed(t - time_step, x_all)[1:-1]) / (2 * time_step)
    res = 1j * scenario.hbar * dpsi - apply_hamiltonian(now, x, h, scenario, t, order)
    core = res[2:-2]
    return float(np.sqrt(np.sum(np.abs(core) ** 2) * h))


def convergence_ratios(psi_closed, scenario, t, x_max, npoints=(513, 1025, 2049), order=2):
    """Residuals on successively halved grids and their ratios."""
    from .states import GridSpec

    res = [schrodinger_residual(psi_closed, scenario, t, GridSpec(x_max, n), order) for n in npoints]
    return res, [res[i] / res[i + 1] for i in range(len(res) - 1)]


def sandwich(psi, coeffs, hbar, order=4):
    """<psi| Q |psi> for a quadratic form given by operator coefficients."""
    x = psi.x[1:-1]
    vals = np.asarray(psi.values[1:-1])
    q = quadratic_form(vals, x, psi.h, coeffs, hbar, order)
    return complex(np.sum(np.conj(vals) * q) * psi.h)


def invariant_mean_on_grid(psi, element, qc, scenario, order=4, warn_tol=1e-10):
    """<psi|k.L|psi> for an L-frame element (its I-frame meaning fixed by qc's time)."""
    dens = np.abs(np.asarray(psi.values)) ** 2
    if float(np.sum(dens[-5:]) * psi.h) > warn_tol:
        import warnings

        warnings.warn("wavefunction density reaches the far boundary", RuntimeWarning, stacklevel=2)
    coeffs = operator_coefficients(element, scenario)
    return sandwich(psi, coeffs, scenario.hbar, order).real


def energy_on_grid(psi, scenario, t, order=4):
    return sandwich(psi, hamiltonian_coeffs_at(scenario, t), scenario.hbar, order).real


# --------------------------------------------------------------------------
# resolution of unity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class UnityReport:
    family: str
    kappa: float
    nmax: int
    radial_nodes: int
    angular_nodes: int
    cutoff: float
    matrix: np.ndarray
    max_deviation: float
    max_offdiag: float


def _unity_matrix(radii, rweights, coeff_fn, nmax, angular_nodes):
    theta = 2 * np.pi * np.arange(angular_nodes) / angular_nodes
    acc = np.zeros((nmax + 1, nmax + 1), dtype=complex)
    phases = np.exp(1j * np.outer(np.arange(nmax + 1), theta))
    for r, wr in zip(radii, rweights):
        c = coeff_fn(r)
        vec = c[:, None] * phases
        acc += wr * (vec @ vec.conj().T) * (2 * np.pi / angular_nodes)
    return acc


def resolution_of_unity_check(family, kappa, nmax=6, radial_nodes=200, angular_nodes=64, cutoff=24.0):
    """Matrix elements of the weighted coherent-state integral against the identity.

    The Perelomov weight (2k-1)/pi (1-|xi|^2)^-2 is integrated over rho = |xi|^2
    with Gauss-Jacobi nodes for (1-rho)^(2k-2); the Barut-Girardello weight
    (2/pi) K_{2k-1}(2r) I_{2k-1}(2r) with Gauss-Legendre nodes on [0, cutoff].
    """
    n = np.arange(nmax + 1)
    if family in ("perelomov", "Perelomov"):
        if not kappa > 0.5:
            raise DomainError("Perelomov resolution of unity needs kappa > 1/2")
        # rho in [0,1]; map Jacobi nodes on [-1,1] with weight (1-u)^(2k-2)
        u, wu = roots_jacobi(radial_nodes, 2 * kappa - 2, 0.0)
        rho = 0.5 * (u + 1.0)
        w_rho = wu * 0.5 ** (2 * kappa - 1)
        logc = 0.5 * np.array([log_gamma(2 * kappa + k) - log_gamma(2 * kappa) - log_gamma(k + 1.0) for k in n])

        def coeff_fn(r):
            return (1 - r) ** kappa * np.exp(logc) * r ** (n / 2.0)

        # d^2 xi = pi d(rho) dtheta/(2pi); f2 (1-rho)^{-2} times (1-rho)^{2k} from |c|^2
        radii = rho
        rweights = w_rho * (2 * kappa - 1) / np.pi * 0.5 / (1 - rho) ** (2 * kappa)
        mat = _unity_matrix(radii, rweights, coeff_fn, nmax, angular_nodes)
        cut = 1.0
    elif family in ("bg", "BG", "barut_girardello"):
        xr, wr = roots_legendre(radial_nodes)
        r = 0.5 * cutoff * (xr + 1.0)
        wr = 0.5 * cutoff * wr
        nu = 2 * kappa - 1
        logc = -0.5 * np.array([log_gamma(k + 1.0) + log_gamma(2 * kappa + k) - log_gamma(2 * kappa) for k in n])
        f1 = np.array([2.0 / np.pi * bessel_k(nu, 2 * ri) * bessel_i(nu, 2 * ri).real for ri in r])

        def coeff_fn(rr):
            return hyper_0f1(2 * kappa, rr * rr) ** -0.5 * np.exp(logc + n * np.log(rr))

        mat = _unity_matrix(r, wr * r * f1, coeff_fn, nmax, angular_nodes)
        cut = cutoff
    else:
        raise ValueError(f"unknown family {family!r}")
    dev = np.abs(mat - np.eye(nmax + 1))
    off = dev - np.diag(np.diag(dev))
    return UnityReport(family, kappa, nmax, radial_nodes, angular_nodes, cut, mat, float(dev.max()), float(off.max()))


# --------------------------------------------------------------------------
# run manifest
# --------------------------------------------------------------------------


@dataclass
class RunManifest:
    command: str
    scenario_hash: str
    parameters: dict
    outputs: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def record(self, name, passed, value=None, tol=None, seconds=None):
        self.checks[name] = {"pass": bool(passed), "value": value, "tol": tol}
        if seconds is not None:
            self.timings[name] = round(seconds, 3)

    @property
    def passed(self):
        return all(c["pass"] for c in self.checks.values())

    def to_json(self, include_timings=False):
        doc = {
            "command": self.command,
            "scenario_hash": self.scenario_hash,
            "parameters": self.parameters,
            "outputs": sorted(self.outputs),
            "checks": self.checks,
            "passed": self.passed,
        }
        if include_timings:
            doc["timings"] = self.timings
        return json.dumps(doc, sort_keys=True, indent=2, default=_json_default)


def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(type(obj))


class Stopwatch:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start
        return False
