"""The eigenstate families side by side: Fock coefficients and uncertainties.

A generic (z, u, v, w) state, a Barut-Girardello state, a group-related
(Perelomov) state and a u = 0 state, each reduced to its covariance matrix.
"""

import numpy as np

from singosc import moments, states

KAPPA = 1.25

cases = {
    "generic z,u,v,w": states.build_state(states.StateParams(0.6 + 0.3j, 1.0, 0.3, 0.2, KAPPA), 1e-16),
    "lowering eigenstate": states.barut_girardello(0.8 - 0.5j, KAPPA, 1e-16),
    "group-related": states.perelomov(0.4 + 0.3j, KAPPA, 1e-16),
    "u = 0, m = 2": states.build_state_u0(2, 0.3, 1.0, KAPPA, 1e-16),
}

for name, st in cases.items():
    rep = moments.moments_from_state(st)
    diag = moments.check_intelligence(rep)
    print(f"\n{name}: {st.size} coefficients, tail <= {st.tail_bound:.1e}")
    print("  means      ", np.round(rep.means, 6))
    print("  variances  ", np.round(np.diag(rep.sigma), 6))
    print(f"  det sigma  {rep.det_sigma:.3e}   Schrodinger residuals {np.round(rep.schrodinger_residuals, 9)}")
    print(f"  Robertson equality {diag.robertson_equality}, pairwise equalities {diag.schrodinger_equality}")

# Group-related states saturate every relation at once; the closed forms agree.
xi = 0.4 + 0.3j
means, sig = moments.perelomov_moments(xi, KAPPA)
rep = moments.moments_from_state(cases["group-related"])
print("\nclosed-form sigma deviation:", np.abs(np.array(rep.sigma) - sig).max())

# Scalar product of two members, closed form against the coefficient sum.
p1 = states.StateParams(0.3 + 0.1j, 1.0, 0.2, 0.4j, KAPPA)
p2 = states.StateParams(-0.2, 0.9 + 0.2j, 0.1 - 0.3j, 0.3, KAPPA)
a = states.inner_product_analytic(p1, p2)
o = states.inner_product(states.build_state(p1, 1e-16), states.build_state(p2, 1e-16))
print(f"<1|2> closed form {a:.12f}\n<1|2> summed      {o:.12f}")
