"""Ideal I1 squeezing: the variance of I1 shrinks as v approaches u.

The same scan is available as
    singosc sweep --vary v=0.5,0.9,0.99,0.999 --u 1 --w 0 --kappa 1 --observable var_I1
"""

from singosc import moments, states

KAPPA = 1.0
print(f"{'v':>7} {'terms':>7} {'var I1':>12} {'var I2':>14} {'<I3>':>12} {'var I1 / (<I3>/2)':>18}")
for v in (0.5, 0.9, 0.99, 0.999):
    p = states.StateParams(0.0, 1.0, v, 0.0, KAPPA)
    st = states.build_state(p, 1e-14, 200000)
    rep = moments.moments_from_state(st)
    var1, var2 = rep.sigma[0][0], rep.sigma[1][1]
    print(f"{v:7.3f} {st.size:7d} {var1:12.5f} {var2:14.3f} {rep.means[2]:12.3f} {rep.squeezing[0]:18.6f}")

# For w = 0 the second moments follow from <I3> alone.
p = states.StateParams(0.3 + 0.2j, 1.0, 0.5, 0.0, KAPPA)
print("\nclosed-form (var1, var2, cov12, cov13, cov23):")
print(" ", [round(x, 10) for x in moments.w0_second_moments(p)])
