"""Acceptance criteria, one test per criterion.

Each test appends a single PASS/FAIL line to ``CRITERIA``; the conftest hook
prints them at the end of the run.  ``python3 tests/test_acceptance.py``
runs the same checks without pytest.
"""

import math
import time

import numpy as np
import pytest
from scipy.special import eval_hermite

from singosc import algebra, moments, states, verify
from singosc.config import load_scenario, stationary
from singosc.envelope import integrate_envelope, phase_gamma12, quad_coeffs

CRITERIA = {}

SINUSOIDAL = {"m": "1", "omega": "1 + 0.2*sin(2*t)", "b": "0", "c": 2.0, "t1": 10.0, "dt": 1e-3}
MODULATED = {
    "m": "1 + 0.3*sin(t)*sin(t)",
    "omega": "1 + 0.2*sin(2*t)",
    "b": "0.1*sin(t)*sin(t)",
    "c": 2.0,
    "t1": 3.0,
    "dt": 1e-3,
}


def record(number, title, ok, detail):
    line = f"C{number:<2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    CRITERIA[number] = line
    print(line)
    assert ok, line


def admissible_draws(count, seed, s_max=0.7, growth_max=0.95):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        kappa = rng.uniform(0.3, 3.0)
        z, u, v, w = (complex(*rng.normal(size=2)) for _ in range(4))
        p = states.StateParams(z, u, v, w, kappa)
        if abs(p.s) > s_max or not p.is_normalizable() or p.growth > growth_max:
            continue
        out.append(p)
    return out


def reference_scenarios():
    tab_t = np.linspace(0.0, 10.0, 201)
    tab_m = 1.0 + 0.3 * np.sin(tab_t) ** 2
    return {
        "stationary": stationary(c=2.0),
        "omega ramp": load_scenario({"m": "1", "omega": "1 + 0.05*t", "c": 2.0, "t1": 10.0}),
        "omega sinusoidal": load_scenario(SINUSOIDAL),
        "b pulse": load_scenario(
            {"m": "1", "omega": "1", "b": "0.3*sin(t)^2*exp(-(t-3)^2)", "c": 2.0, "t1": 10.0}
        ),
        "m tabulated": load_scenario(
            {"m_table": {"t": list(tab_t), "m": list(tab_m)}, "omega": "1", "c": 2.0, "t1": 10.0,
             "canonical_start": False}
        ),
    }


def test_c1_wronskian():
    worst, slowest = 0.0, 0.0
    for name, sc in reference_scenarios().items():
        t0 = time.perf_counter()
        traj = integrate_envelope(sc, check=False)
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, float(traj.wronskian_residual.max()))
    record(1, "Wronskian conservation", worst <= 1e-9 and slowest < 1.0,
           f"max residual {worst:.2e} (tol 1e-9), slowest {slowest:.2f} s (< 1 s)")


def _invariant_drift(sc, traj, psi0):
    def obs(wf):
        qc = quad_coeffs(traj, sc, wf.time)
        return [verify.invariant_mean_on_grid(wf, el, qc, sc) for el in algebra.invariant_elements(qc, sc)]

    run = verify.propagate(sc, psi0, 2.0, 1e-4, snapshot_times=(0.5, 1.0, 1.5), observer=obs)
    means = np.array(run.invariant_means)
    return float(np.max(np.abs(means - means[0])) / np.linalg.norm(means[0]))


@pytest.mark.slow
def test_c2_invariant_means_conserved():
    # the box is sized from the envelope on the propagation window only
    sc = load_scenario(dict(SINUSOIDAL, t1=2.0))
    traj = integrate_envelope(sc)
    kappa = 1.25
    grid = states.default_grid(traj, sc, 2048)
    t0 = time.perf_counter()
    psi0 = states.wavefunction_psi_n(traj, sc, kappa, 0, 0.0, grid)
    member = states.build_state(states.StateParams(0.6 + 0.3j, 1.0, 0.3, 0.2, kappa), 1e-16)
    psi1 = states.synthesize(member, traj, sc, 0.0, grid)
    drifts = [_invariant_drift(sc, traj, psi0), _invariant_drift(sc, traj, psi1)]
    elapsed = time.perf_counter() - t0
    record(2, "invariant means under Crank-Nicolson", max(drifts) <= 1e-4 and elapsed < 60,
           f"relative drift Psi_0 {drifts[0]:.2e}, |z,u,v,w> {drifts[1]:.2e} (tol 1e-4), {elapsed:.1f} s")


def test_c3_residual_convergence():
    sc = load_scenario(MODULATED)
    traj = integrate_envelope(sc)
    kappa, t = 1.25, 1.3
    x_max = states.default_grid(traj, sc).x_max
    cases = {f"Psi_{n}": (lambda n: lambda tt, x: states.psi_n_values(traj, sc, kappa, n, tt, x)[n])(n)
             for n in range(4)}
    cases["Psi_z"] = lambda tt, x: states.psi_z_values(traj, sc, kappa, 0.5 + 0.3j, tt, x, 0.5)
    cases["Psi_xi"] = lambda tt, x: states.psi_xi_values(traj, sc, kappa, 0.3 - 0.2j, tt, x)
    ratios = {k: verify.convergence_ratios(f, sc, t, x_max)[1] for k, f in cases.items()}
    in_band = lambda r: all(3.4 <= q <= 4.6 for q in r)
    ok = all(in_band(r) for r in ratios.values())
    conventions = {
        mf: in_band(verify.convergence_ratios(
            lambda tt, x, mf=mf: states.psi_z_values(traj, sc, kappa, 0.5 + 0.3j, tt, x, mf), sc, t, x_max)[1])
        for mf in (0.5, 1.0)
    }
    selected = [mf for mf, good in conventions.items() if good]
    worst = min((min(r), max(r)) for r in ratios.values())
    record(3, "closed-form residual convergence", ok and selected == [0.5],
           f"ratios in [{min(min(r) for r in ratios.values()):.2f}, {max(max(r) for r in ratios.values()):.2f}]"
           f" (band 4 +/- 15%), Psi_z convention selected: mdot/m factor {selected}")
    del worst


def test_c4_eigenstate_property():
    worst = 0.0
    for p in admissible_draws(100, seed=11):
        st = states.build_state(p, 1e-16)
        c = st.padded(st.size + 1)
        r = (p.u * moments.apply_lower(c, p.kappa) + p.v * moments.apply_raise(c, p.kappa)
             + p.w * moments.apply_i3(c, p.kappa) - p.z * c)
        worst = max(worst, float(np.linalg.norm(r[: st.size - 1])))
    rng = np.random.default_rng(12)
    worst_u0 = 0.0
    structure = True
    for _ in range(20):
        kappa = rng.uniform(0.3, 3.0)
        m = int(rng.integers(0, 6))
        w = complex(*rng.normal(size=2)) + 1.0
        v = complex(*rng.normal(size=2))
        v *= rng.uniform(0.05, 0.8) * abs(w) / abs(v)
        st = states.build_state_u0(m, v, w, kappa, 1e-16)
        structure &= st.eigenvalue == w * (kappa + m) and np.all(st.coeffs[:m] == 0)
        c = st.padded(st.size + 1)
        r = v * moments.apply_raise(c, kappa) + w * moments.apply_i3(c, kappa) - st.eigenvalue * c
        worst_u0 = max(worst_u0, float(np.linalg.norm(r[: st.size - 1])))
    record(4, "eigenstate property", worst <= 1e-8 and worst_u0 <= 1e-8 and structure,
           f"100 draws residual {worst:.2e}, 20 u=0 draws residual {worst_u0:.2e} (tol 1e-8),"
           f" eigenvalue w(kappa+m) exact: {bool(structure)}")


def test_c5_analytic_vs_oracle():
    draws = admissible_draws(100, seed=21)
    worst_n = worst_i3 = worst_ov = 0.0
    built = [states.build_state(p, 1e-16) for p in draws]
    for p, st in zip(draws, built):
        worst_n = max(worst_n, st.norm_discrepancy)
        o = moments.i3_power_sum(st, 1)
        worst_i3 = max(worst_i3, abs(moments.analytic_I3_powers(p, 1) - o) / abs(o))
    # overlaps between members sharing kappa
    rng = np.random.default_rng(22)
    pairs = 0
    while pairs < 100:
        kappa = rng.uniform(0.3, 3.0)
        ps = []
        while len(ps) < 2:
            z, u, v, w = (complex(*rng.normal(size=2)) for _ in range(4))
            p = states.StateParams(z, u, v, w, kappa)
            if abs(p.s) <= 0.7 and p.is_normalizable() and p.growth <= 0.95:
                ps.append(p)
        s, *_ = states._pair_pieces(*ps)
        if abs(s) > 0.7:
            continue
        pairs += 1
        a = states.inner_product_analytic(*ps)
        o = states.inner_product(*(states.build_state(q, 1e-16) for q in ps))
        worst_ov = max(worst_ov, abs(a - o) / max(abs(o), 1e-300))
    ok = max(worst_n, worst_i3, worst_ov) <= 1e-7
    record(5, "analytic vs coefficient-sum oracles", ok,
           f"N {worst_n:.1e}, overlap {worst_ov:.1e}, <I3> {worst_i3:.1e} (relative tol 1e-7, 100 draws each)")


def test_c6_intelligence():
    kappa = 1.25
    worst_det = worst_sch = 0.0
    for r in np.linspace(0.0, 0.85, 10):
        for th in np.linspace(0.0, 2 * np.pi, 10, endpoint=False):
            rep = moments.moments_from_state(states.perelomov(r * np.exp(1j * th), kappa, 1e-16))
            worst_det = max(worst_det, abs(rep.det_sigma))
            worst_sch = max(worst_sch, max(abs(x) for x in rep.schrodinger_residuals))
    perelomov_ok = worst_det <= 1e-9 * kappa**3 and worst_sch <= 1e-9
    herm = states.StateParams(0.0, 0.3 + 0.2j, 0.3 - 0.2j, 1.5, 1.1)
    herm = next(q for q in (states.StateParams(sg * herm.l * (1.1 + 2), herm.u, herm.v, herm.w, 1.1) for sg in (1, -1))
                if q.is_normalizable())
    hrep = moments.moments_from_state(states.build_state(herm, 1e-16))
    herm_ok = moments.check_intelligence(hrep).robertson_equality
    worst_w0 = 0.0
    w0_sch = True
    for z, u, v in ((0.3 + 0.2j, 1, 0.5), (1j, 1, 0.9), (0.5, 1 + 0.5j, 0.3 - 0.4j), (-0.7 + 0.1j, 0.8, 0.2j)):
        p = states.StateParams(z, u, v, 0, 1.1)
        rep = moments.moments_from_state(states.build_state(p, 1e-16))
        s = np.array(rep.sigma)
        got = np.array([s[0, 0], s[1, 1], s[0, 1], s[0, 2], s[1, 2]])
        worst_w0 = max(worst_w0, float(np.max(np.abs(got - np.array(moments.w0_second_moments(p))))))
        w0_sch &= moments.check_intelligence(rep).schrodinger_equality[0]
    ok = perelomov_ok and herm_ok and w0_sch and worst_w0 <= 1e-10
    record(6, "intelligence", ok,
           f"Perelomov det sigma {worst_det:.1e} (tol {1e-9 * kappa**3:.1e}), Schrodinger {worst_sch:.1e};"
           f" Hermitian Robertson equality {herm_ok}; w=0 pair-12 equality {bool(w0_sch)},"
           f" second moments {worst_w0:.1e} (tol 1e-10)")


def test_c7_green_function():
    sc = load_scenario(SINUSOIDAL)
    traj = integrate_envelope(sc)
    kappa = 1.25
    t0 = time.perf_counter()
    worst_pt = worst_l2 = 0.0
    gammas = []
    x_pts = np.linspace(0.3, 3.0, 6)
    grid = states.default_grid(traj, sc, 1500)
    x2 = np.linspace(0.0, grid.x_max, 301)
    for t1, t2 in ((0.1, 0.4), (0.1, 0.8), (0.2, 1.2)):
        gammas.append(phase_gamma12(traj, t1, t2))
        for a in x_pts:
            for b in x_pts:
                closed = states.green_function(traj, sc, kappa, b, t2, a, t1, damping=0.2)
                spec = states.green_spectral(traj, sc, kappa, b, t2, a, t1, 60, 0.2)
                worst_pt = max(worst_pt, abs(closed - spec))
        kernel = states.green_matrix(traj, sc, kappa, x2, t2, grid.x, t1)
        for n in range(4):
            before = states.psi_n_values(traj, sc, kappa, n, t1, grid.x)[n]
            after = states.psi_n_values(traj, sc, kappa, n, t2, x2)[n]
            diff = kernel @ before * grid.h - after
            worst_l2 = max(worst_l2, float(np.sqrt(np.sum(np.abs(diff) ** 2) * (x2[1] - x2[0]))))
    elapsed = time.perf_counter() - t0
    ok = worst_pt <= 1e-6 and worst_l2 <= 1e-4 and elapsed < 30 and all(0.2 <= g <= 1.2 for g in gammas)
    record(7, "Green function", ok,
           f"gamma_12 {[round(g, 3) for g in gammas]}, spectral N=60 (Abel tau=0.2) {worst_pt:.1e} (tol 1e-6),"
           f" propagation identity L2 {worst_l2:.1e} (tol 1e-4), {elapsed:.1f} s")


def test_c8_orthonormality_and_unity():
    sc = load_scenario(MODULATED)
    traj = integrate_envelope(sc)
    kappa = 1.25
    grid = states.default_grid(traj, sc, 4096)
    rows = states.psi_n_values(traj, sc, kappa, 6, 1.7, grid.x)
    gram = rows.conj() @ rows.T * grid.h
    orth = float(np.max(np.abs(gram - np.eye(7))))
    per = verify.resolution_of_unity_check("perelomov", kappa)
    bg = verify.resolution_of_unity_check("bg", kappa)
    ok = orth <= 1e-8 and per.max_deviation <= 1e-3 and bg.max_deviation <= 1e-3
    record(8, "orthonormality and resolution of unity", ok,
           f"Gram deviation {orth:.1e} (tol 1e-8); unity Perelomov {per.max_deviation:.1e}"
           f" ({per.radial_nodes}x{per.angular_nodes} nodes), BG {bg.max_deviation:.1e}"
           f" ({bg.radial_nodes}x{bg.angular_nodes} nodes, cutoff {bg.cutoff}) (tol 1e-3)")


def _odd_oscillator(n, x, m=1.0, omega=1.0, hbar=1.0):
    k = 2 * n + 1
    xi = x * math.sqrt(m * omega / hbar)
    norm = (m * omega / (math.pi * hbar)) ** 0.25 / math.sqrt(2.0**k * math.factorial(k))
    return math.sqrt(2.0) * norm * eval_hermite(k, xi) * np.exp(-0.5 * xi * xi)


def test_c9_reductions():
    sc = stationary(c=0.0, omega=1.3)
    kappa = algebra.kappa_from_c(0.0).kappa
    traj = integrate_envelope(sc)
    grid = states.GridSpec(12.0, 4096)
    worst_ho = 0.0
    for n in range(5):
        psi = states.wavefunction_psi_n(traj, sc, kappa, n, 0.9, grid).values
        ref = _odd_oscillator(n, grid.x, omega=1.3)
        ph = np.vdot(ref, psi)
        ph /= abs(ph)
        worst_ho = max(worst_ho, float(np.sqrt(np.sum(np.abs(psi - ph * ref) ** 2) * grid.h)))
    worst_e = 0.0
    for c in (0.0, 2.0):
        sc = stationary(c=c, omega=1.3)
        k = algebra.kappa_from_c(c).kappa
        traj = integrate_envelope(sc)
        for n in range(4):
            wf = states.wavefunction_psi_n(traj, sc, k, n, 0.4, grid)
            e = verify.energy_on_grid(wf, sc, 0.4)
            target = 2 * sc.hbar * sc.omega0 * (k + n)
            worst_e = max(worst_e, abs(e - target) / target)
    record(9, "reductions", worst_ho <= 1e-8 and worst_e <= 1e-5,
           f"kappa={kappa} vs odd oscillator L2 {worst_ho:.1e} (tol 1e-8), energy ladder 2 hbar w0 (kappa+n)"
           f" relative {worst_e:.1e} (tol 1e-5)")


def test_c10_squeezing_scan():
    kappa = 1.0
    var1, i3 = [], []
    for v in (0.5, 0.9, 0.99, 0.999):
        st = states.build_state(states.StateParams(0.0, 1.0, v, 0.0, kappa), 1e-14, 200000)
        rep = moments.moments_from_state(st)
        var1.append(rep.sigma[0][0])
        i3.append(rep.means[2])
    decreasing = all(a > b for a, b in zip(var1, var1[1:]))
    bound = 0.01 * (kappa / 2) * (i3[-1] / kappa)
    record(10, "squeezing scan", decreasing and var1[-1] <= bound,
           f"var I1 {['%.3g' % x for x in var1]} strictly decreasing {decreasing}, final {var1[-1]:.3g}"
           f" <= {bound:.3g}")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c") and callable(fn):
            try:
                fn()
            except AssertionError:
                pass
