import json
import math

import numpy as np
import pytest

from singosc import algebra, states, verify
from singosc.config import load_scenario, stationary
from singosc.envelope import integrate_envelope, quad_coeffs
from singosc.errors import DomainError

MODULATED = {"m": "1 + 0.3*sin(t)*sin(t)", "omega": "1 + 0.2*sin(2*t)", "b": "0.1*sin(t)*sin(t)", "c": 2.0,
             "t1": 1.0}


@pytest.fixture(scope="module")
def modulated():
    sc = load_scenario(MODULATED)
    return sc, integrate_envelope(sc)


@pytest.mark.parametrize("order, expected", [(2, 4.0), (4, 16.0)])
def test_stencil_orders(order, expected):
    # odd and decaying, so psi = 0 at the wall and beyond the far edge
    errs = []
    for n in (201, 401):
        x = np.linspace(0, 8.0, n)
        h = x[1] - x[0]
        xi = x[1:-1]
        psi = xi * np.exp(-xi * xi)
        exact = (4 * xi**3 - 6 * xi) * np.exp(-xi * xi)
        errs.append(np.max(np.abs(verify._second_derivative(psi, h, order) - exact)))
    # at least the nominal order; the wall node converges faster for odd psi
    assert errs[0] / errs[1] >= 0.8 * expected


def test_stationary_energies():
    sc = stationary(c=2.0, omega=1.0, t1=1.0)
    traj = integrate_envelope(sc)
    grid = states.GridSpec(12.0, 4096)
    for n in range(3):
        wf = states.wavefunction_psi_n(traj, sc, 1.25, n, 0.2, grid)
        assert verify.energy_on_grid(wf, sc, 0.2) == pytest.approx(2 * (1.25 + n), rel=1e-8)


def test_residual_convergence(modulated):
    sc, traj = modulated
    x_max = states.default_grid(traj, sc).x_max
    _, ratios = verify.convergence_ratios(
        lambda t, x: states.psi_n_values(traj, sc, 1.25, 1, t, x)[1], sc, 0.6, x_max
    )
    assert all(3.4 < r < 4.6 for r in ratios)


def test_invariant_means_on_grid(modulated):
    sc, traj = modulated
    grid = states.default_grid(traj, sc, 4096)
    kappa = 1.25
    xi = 0.3 - 0.1j
    wf = states.wavefunction_psi_xi(traj, sc, kappa, xi, 0.7, grid)
    qc = quad_coeffs(traj, sc, 0.7)
    got = [verify.invariant_mean_on_grid(wf, el, qc, sc) for el in algebra.invariant_elements(qc, sc)]
    d = 1 - abs(xi) ** 2
    expected = [2 * kappa * xi.real / d, -2 * kappa * xi.imag / d, kappa * (1 + abs(xi) ** 2) / d]
    np.testing.assert_allclose(got, expected, atol=1e-7)


def test_short_propagation_tracks_closed_form(modulated):
    sc, traj = modulated
    grid = states.default_grid(traj, sc, 1024)
    psi0 = states.wavefunction_psi_n(traj, sc, 1.25, 1, 0.0, grid)
    run = verify.propagate(sc, psi0, 0.2, 1e-3, snapshot_times=(0.1,))
    assert max(run.norm_drift) < 1e-12
    exact = states.wavefunction_psi_n(traj, sc, 1.25, 1, run.snapshots[-1][0], grid)
    assert verify.l2_distance(run.snapshots[-1][1], exact) < 1e-3
    assert run.snapshot_at(0.1).time == pytest.approx(0.1)


def test_propagate_rejects_empty_span(modulated):
    sc, traj = modulated
    psi0 = states.wavefunction_psi_n(traj, sc, 1.25, 0, 0.0, states.GridSpec(10.0, 128))
    with pytest.raises(DomainError):
        verify.propagate(sc, psi0, 0.0, 1e-3)


@pytest.mark.parametrize("family, kappa", [("perelomov", 1.0), ("bg", 1.25)])
def test_resolution_of_unity(family, kappa):
    rep = verify.resolution_of_unity_check(family, kappa, nmax=4)
    assert rep.max_deviation < 1e-6


def test_manifest_round_trip():
    man = verify.RunManifest("verify", "abc", {"kappa": 1.0})
    man.record("x", True, 1e-12, 1e-9, 0.1)
    man.record("y", False, 2.0, 1.0)
    assert not man.passed
    doc = json.loads(man.to_json())
    assert doc["checks"]["x"]["pass"] is True
    assert "timings" not in doc or doc["timings"] in ({}, None)
