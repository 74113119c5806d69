"""The propagator in closed form, as a damped spectral sum and as a kernel.

The plain eigenfunction sum does not converge pointwise, so the comparison
uses Abel damping exp(-2 tau n) on both sides.
"""

from pathlib import Path

import numpy as np

from singosc import load_scenario, states
from singosc.envelope import integrate_envelope, phase_gamma12

HERE = Path(__file__).parent
sc = load_scenario(HERE / "scenarios" / "omega_sinusoidal.json")
traj = integrate_envelope(sc)
kappa = 1.25
t1, t2 = 0.1, 0.8
print(f"gamma_12 = {phase_gamma12(traj, t1, t2):.4f}")

print("\n x1    x2    closed (tau=0.2)                spectral N=60")
for x1, x2 in ((0.5, 0.9), (1.0, 1.4), (1.6, 0.7)):
    a = states.green_function(traj, sc, kappa, x2, t2, x1, t1, damping=0.2)
    b = states.green_spectral(traj, sc, kappa, x2, t2, x1, t1, 60, 0.2)
    print(f"{x1:4.1f}  {x2:4.1f}  {a:.10f}  {b:.10f}")

# The undamped kernel carries eigenfunctions forward in time.
grid = states.default_grid(traj, sc, 1500)
x2 = np.linspace(0.0, grid.x_max, 301)
kernel = states.green_matrix(traj, sc, kappa, x2, t2, grid.x, t1)
for n in range(3):
    moved = kernel @ states.psi_n_values(traj, sc, kappa, n, t1, grid.x)[n] * grid.h
    exact = states.psi_n_values(traj, sc, kappa, n, t2, x2)[n]
    err = np.sqrt(np.sum(np.abs(moved - exact) ** 2) * (x2[1] - x2[0]))
    print(f"n = {n}: L2 error of G * Psi_n  {err:.1e}")
