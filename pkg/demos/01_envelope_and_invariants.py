"""Envelope, invariants and the Lambda matrix for a modulated oscillator.

Run from the repository root:  python3 demos/01_envelope_and_invariants.py
"""

from pathlib import Path

import numpy as np

from singosc import algebra, load_scenario
from singosc.envelope import integrate_envelope, quad_coeffs, step_halving_error

HERE = Path(__file__).parent
sc = load_scenario(HERE / "scenarios" / "modulated.json")

# The envelope obeys a classical oscillator equation with effective frequency
# Omega(t); the Wronskian 2i is the quantity RK4 must keep.
traj = integrate_envelope(sc)
print(f"max Wronskian residual     {traj.wronskian_residual.max():.2e}")
print(f"step-halving difference    {step_halving_error(sc):.2e}")

# At the canonical start the invariants are the static generators.
for t in (0.0, 1.0, 2.5):
    qc = quad_coeffs(traj, sc, t)
    lam, cond = algebra.lambda_matrix(qc, sc)
    print(f"\nt = {t}: Lambda (L_j = Lambda_jk I_k), condition number {cond:.3f}")
    print(np.array2string(lam, precision=5, suppress_small=True))

# The invariants close the su(1,1) algebra and carry Casimir one in the
# coefficient space at every time.
k1, k2, k3 = (e.cartesian for e in algebra.invariant_elements(quad_coeffs(traj, sc, 2.0), sc))
print("\n[I1, I2] + i I3 =", np.abs(algebra.lie_bracket(k1, k2) + 1j * k3).max())
print("k3 form          =", algebra.casimir_form(k3).real)
