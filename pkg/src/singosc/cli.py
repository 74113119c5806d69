"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 validation failure (bad scenario,
inadmissible parameters, failed invariant), 3 numerical failure.
"""

import argparse
import cmath
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import algebra, envelope, moments, states, verify
from .config import load_scenario, stationary
from .errors import ConvergenceError, DomainError, IntegrationError, ScenarioError, SingOscError, TruncationError

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---- deterministic 17-digit serialisation ----------------------------------


def _fmt(x):
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return json.dumps(str(x))
        return format(x, ".17g") if x != int(x) or abs(x) >= 1e16 else repr(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, complex):
        return _fmt([x.real, x.imag])
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in sorted(x.items())) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialise {type(x)}")


def dumps17(obj):
    return _fmt(obj) + "\n"


def _write(out_dir, name, text, manifest):
    path = Path(out_dir) / name
    path.write_text(text)
    manifest.outputs.append(str(path))
    return path


# ---- argument helpers -------------------------------------------------------


def parse_complex(text):
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise UsageError(f"not a complex number: {text!r}") from exc


def _scenario(args):
    if args.scenario:
        return load_scenario(args.scenario)
    return stationary(c=2.0)


def _kappa(args, scenario):
    if getattr(args, "kappa", None) is not None:
        kappa = float(args.kappa)
        if kappa <= 0.25 and not (args.allow_kappa_quarter and abs(kappa - 0.25) < 1e-14):
            raise DomainError(f"kappa = {kappa} is not > 1/4")
        return kappa
    branch = "secondary" if args.allow_kappa_quarter else "principal"
    return algebra.kappa_from_c(scenario.c, branch, args.allow_kappa_quarter).kappa


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(command, scenario, params):
    return verify.RunManifest(command, scenario.digest(), params)


def build_from_args(args, kappa):
    """Construct the requested family member from CLI options."""
    tol = args.tol_tail
    if args.xi is not None:
        return states.perelomov(parse_complex(args.xi), kappa, tol)
    if args.bg_z is not None:
        return states.barut_girardello(parse_complex(args.bg_z), kappa, tol)
    if args.u0:
        if args.m is None or args.v is None or args.w is None:
            raise UsageError("--u0 needs -m, --v and --w")
        return states.build_state_u0(args.m, parse_complex(args.v), parse_complex(args.w), kappa, tol)
    if args.u is None:
        raise UsageError("choose a family: --xi, --bg-z, --u0 or --z/--u/--v/--w")
    p = states.StateParams(
        parse_complex(args.z or 0), parse_complex(args.u), parse_complex(args.v or 0), parse_complex(args.w or 0), kappa
    )
    return states.build_state(p, tol)


# ---- commands -----------------------------------------------------------------


def cmd_envelope(args):
    sc = _scenario(args)
    out = _out_dir(args)
    man = _manifest("envelope", sc, {"dt": sc.dt, "t_span": list(sc.t_span)})
    with verify.Stopwatch() as sw:
        traj = envelope.integrate_envelope(sc, check=False)
    path = Path(out) / "envelope.csv"
    traj.to_csv(path)
    man.outputs.append(str(path))
    worst = float(traj.wronskian_residual.max())
    man.record("wronskian", worst <= args.tol_wronskian, worst, args.tol_wronskian, sw.seconds)
    summary = {"max_wronskian_residual": worst, "samples": len(traj.times), "mean_abs_eps": float(np.mean(np.abs(traj.eps)))}
    _write(out, "wronskian.json", dumps17(summary), man)
    return man


def cmd_state(args):
    sc = _scenario(args)
    kappa = _kappa(args, sc)
    out = _out_dir(args)
    state = build_from_args(args, kappa)
    man = _manifest("state", sc, {"kappa": kappa, "family": state.family, "time": args.time})
    _write(out, "state.json", dumps17(state.to_dict()), man)
    report = moments.moments_from_state(state)
    _write(out, "moments.json", dumps17(report.to_dict()), man)
    traj = envelope.integrate_envelope(sc)
    # widen the box for states spread far up the ladder
    spread = max(1.0, float(report.means[2] + 3.0 * math.sqrt(max(float(np.asarray(report.sigma)[2, 2]), 0.0))) / kappa)
    grid = states.default_grid(traj, sc, int(args.npoints * math.sqrt(spread)), 12.0 * math.sqrt(spread))
    wf = states.synthesize(state, traj, sc, args.time, grid)
    path = Path(out) / "wavefunction.csv"
    wf.to_csv(path)
    man.outputs.append(str(path))
    norm = wf.norm()
    man.record("grid_norm", abs(norm - 1.0) <= 1e-6, norm, 1e-6)
    return man


def cmd_moments(args):
    sc = _scenario(args)
    kappa = _kappa(args, sc)
    out = _out_dir(args)
    state = build_from_args(args, kappa)
    report = moments.moments_from_state(state)
    diag = moments.check_intelligence(report)
    man = _manifest("moments", sc, {"kappa": kappa, "family": state.family})
    doc = report.to_dict()
    doc["robertson_equality"] = diag.robertson_equality
    doc["schrodinger_equality"] = list(diag.schrodinger_equality)
    _write(out, "moments.json", dumps17(doc), man)
    man.record("robertson_inequality", report.det_sigma >= report.det_C - 1e-9, report.det_sigma, 1e-9)
    return man


def cmd_green(args):
    sc = _scenario(args)
    kappa = _kappa(args, sc)
    out = _out_dir(args)
    traj = envelope.integrate_envelope(sc)
    xs = np.linspace(args.x_min, args.x_max, args.nx)
    rows = []
    for x1 in xs:
        for x2 in xs:
            rows.append((x1, x2, states.green_function(traj, sc, kappa, x2, args.t2, x1, args.t1)))
    man = _manifest("green", sc, {"kappa": kappa, "t1": args.t1, "t2": args.t2})
    path = Path(out) / "green.csv"
    states.green_to_csv(path, rows)
    man.outputs.append(str(path))
    return man


def _parse_range(text):
    if "=" not in text:
        raise UsageError("--vary expects key=values")
    key, spec = text.split("=", 1)
    if not spec:
        raise UsageError("empty range")
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError("range form is start:stop:num")
        values = list(np.linspace(float(parts[0]), float(parts[1]), int(parts[2])))
    else:
        values = [parse_complex(v) for v in spec.split(",") if v.strip()]
    if not values:
        raise UsageError("empty range")
    return key.strip(), values


OBSERVABLES = ("det_sigma", "det_C", "sch12", "sch13", "sch23", "var1", "var2", "var3")


def cmd_sweep(args):
    sc = _scenario(args)
    kappa = _kappa(args, sc)
    key, values = _parse_range(args.vary)
    observable = args.observable.replace("var_I", "var")
    if observable not in OBSERVABLES:
        raise UsageError(f"unknown observable {args.observable!r}")
    base = {"z": parse_complex(args.z or 0), "u": parse_complex(args.u or 1), "v": parse_complex(args.v or 0),
            "w": parse_complex(args.w or 0)}
    if key not in ("z", "u", "v", "w", "xi", "xi_disk"):
        raise UsageError(f"cannot vary {key!r}")
    if key == "xi_disk":
        n = int(abs(values[0]))
        r = np.linspace(0.0, 0.9, n)
        th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        values = [complex(ri * np.cos(t), ri * np.sin(t)) for ri in r for t in th]

    def point(val):
        if key in ("xi", "xi_disk"):
            st = states.perelomov(complex(val), kappa, args.tol_tail)
        else:
            p = dict(base)
            p[key] = complex(val)
            st = states.build_state(states.StateParams(p["z"], p["u"], p["v"], p["w"], kappa), args.tol_tail, 200000)
        return moments.sweep_row(complex(val), moments.moments_from_state(st))

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        rows = list(pool.map(point, values))
    out = _out_dir(args)
    man = _manifest("sweep", sc, {"kappa": kappa, "vary": key, "observable": observable})
    lines = [moments.SWEEP_HEADER]
    for row in rows:
        p = row[0]
        ptxt = format(p.real, ".17g") if p.imag == 0 else f"{p.real:.17g}{p.imag:+.17g}j"
        lines.append(",".join([ptxt] + [format(v, ".17g") for v in row[1:]]))
    _write(out, "sweep.csv", "\n".join(lines) + "\n", man)
    col = OBSERVABLES.index(observable) + 1
    man.parameters["values"] = [row[col] for row in rows]
    return man


def cmd_verify(args):
    sc = _scenario(args)
    kappa = _kappa(args, sc)
    out = _out_dir(args)
    man = _manifest("verify", sc, {"suite": args.suite, "kappa": kappa})
    suites = ("envelope", "states", "moments", "propagation", "green", "unity") if args.suite == "all" else (args.suite,)
    for suite in suites:
        SUITES[suite](sc, kappa, args, man)
    return man


def _suite_envelope(sc, kappa, args, man):
    with verify.Stopwatch() as sw:
        traj = envelope.integrate_envelope(sc, check=False)
    worst = float(traj.wronskian_residual.max())
    man.record("envelope.wronskian", worst <= args.tol_wronskian, worst, args.tol_wronskian, sw.seconds)


def _suite_states(sc, kappa, args, man):
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    count = 0
    while count < 50:
        p = states.StateParams(*(complex(*rng.normal(size=2)) for _ in range(4)), kappa)
        if abs(p.s) > 0.7 or p.growth >= 0.95:
            continue
        count += 1
        st = states.build_state(p, 1e-16)
        c = st.padded(st.size + 1)
        r = p.u * moments.apply_lower(c, kappa) + p.v * moments.apply_raise(c, kappa) + p.w * moments.apply_i3(c, kappa) - p.z * c
        worst = max(worst, float(np.linalg.norm(r[: st.size - 1])))
    man.record("states.eigen_residual", worst <= 1e-8, worst, 1e-8)


def _suite_moments(sc, kappa, args, man):
    rng = np.random.default_rng(args.seed)
    worst_rob = math.inf
    worst_sch = math.inf
    count = 0
    while count < 200:
        p = states.StateParams(*(complex(*rng.normal(size=2)) for _ in range(4)), kappa)
        if p.growth >= 0.95:
            continue
        count += 1
        rep = moments.moments_from_state(states.build_state(p, 1e-16))
        worst_rob = min(worst_rob, rep.det_sigma - rep.det_C)
        worst_sch = min(worst_sch, min(rep.schrodinger_residuals))
    man.record("moments.robertson", worst_rob >= -1e-9, worst_rob, 1e-9)
    man.record("moments.schrodinger", worst_sch >= -1e-9, worst_sch, 1e-9)


def _suite_propagation(sc, kappa, args, man):
    traj = envelope.integrate_envelope(sc)
    grid = states.default_grid(traj, sc, args.npoints)
    psi0 = states.wavefunction_psi_n(traj, sc, kappa, 0, sc.t0, grid)

    def obs(wf):
        qc = envelope.quad_coeffs(traj, sc, wf.time)
        return [verify.invariant_mean_on_grid(wf, el, qc, sc) for el in algebra.invariant_elements(qc, sc)]

    t_final = min(sc.t0 + 2.0, sc.t1)
    with verify.Stopwatch() as sw:
        run = verify.propagate(sc, psi0, t_final, args.dt_prop, snapshot_times=(sc.t0 + 0.5 * (t_final - sc.t0),), observer=obs)
    means = np.array(run.invariant_means)
    drift = float(np.max(np.abs(means - means[0])) / max(abs(means[0]).max(), 1e-300))
    man.record("propagation.invariants", drift <= 1e-4, drift, 1e-4, sw.seconds)
    final = states.wavefunction_psi_n(traj, sc, kappa, 0, run.snapshots[-1][0], grid)
    dist = verify.l2_distance(run.snapshots[-1][1], final)
    man.record("propagation.closed_form", dist <= 1e-4, dist, 1e-4)


def _suite_green(sc, kappa, args, man):
    traj = envelope.integrate_envelope(sc)
    worst = 0.0
    for x1, x2 in ((0.6, 0.9), (1.0, 1.4), (1.3, 0.5)):
        t1, t2 = sc.t0 + 0.1, sc.t0 + 0.8
        a = states.green_function(traj, sc, kappa, x2, t2, x1, t1, damping=0.2)
        b = states.green_spectral(traj, sc, kappa, x2, t2, x1, t1, 60, 0.2)
        worst = max(worst, abs(a - b))
    man.record("green.spectral", worst <= 1e-6, worst, 1e-6)


def _suite_unity(sc, kappa, args, man):
    if kappa > 0.5:
        rep = verify.resolution_of_unity_check("perelomov", kappa)
        man.record("unity.perelomov", rep.max_deviation <= args.tol_unity, rep.max_deviation, args.tol_unity)
    rep = verify.resolution_of_unity_check("bg", kappa)
    man.record("unity.bg", rep.max_deviation <= args.tol_unity, rep.max_deviation, args.tol_unity)


SUITES = {
    "envelope": _suite_envelope,
    "states": _suite_states,
    "moments": _suite_moments,
    "propagation": _suite_propagation,
    "green": _suite_green,
    "unity": _suite_unity,
}


# ---- parser -------------------------------------------------------------------


def _family_args(p):
    p.add_argument("--z")
    p.add_argument("--u")
    p.add_argument("--v")
    p.add_argument("--w")
    p.add_argument("--xi")
    p.add_argument("--bg-z", dest="bg_z")
    p.add_argument("--u0", action="store_true")
    p.add_argument("-m", type=int)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--scenario")
    common.add_argument("--out", default=".")
    common.add_argument("--kappa", type=float)
    common.add_argument("--tol-wronskian", type=float, default=1e-9)
    common.add_argument("--tol-tail", type=float, default=1e-16)
    common.add_argument("--tol-unity", type=float, default=1e-3)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--allow-kappa-quarter", action="store_true")
    common.add_argument("--npoints", type=int, default=2048)
    common.add_argument("--seed", type=int, default=0)

    parser = _Parser(prog="singosc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("envelope", parents=[common])
    p = sub.add_parser("state", parents=[common])
    _family_args(p)
    p.add_argument("--time", type=float, default=0.0)
    p = sub.add_parser("moments", parents=[common])
    _family_args(p)
    p = sub.add_parser("verify", parents=[common])
    p.add_argument("--suite", default="all", choices=["envelope", "states", "moments", "propagation", "green", "unity", "all"])
    p.add_argument("--dt-prop", type=float, default=1e-4)
    p = sub.add_parser("green", parents=[common])
    p.add_argument("--t1", type=float, required=True)
    p.add_argument("--t2", type=float, required=True)
    p.add_argument("--x-min", type=float, default=0.1)
    p.add_argument("--x-max", type=float, default=3.0)
    p.add_argument("--nx", type=int, default=30)
    p = sub.add_parser("sweep", parents=[common])
    _family_args(p)
    p.add_argument("--vary", required=True)
    p.add_argument("--observable", default="var1")
    return parser


COMMANDS = {
    "envelope": cmd_envelope,
    "state": cmd_state,
    "moments": cmd_moments,
    "verify": cmd_verify,
    "green": cmd_green,
    "sweep": cmd_sweep,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        start = time.perf_counter()
        man = COMMANDS[args.command](args)
        elapsed = time.perf_counter() - start
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ScenarioError, DomainError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (IntegrationError, ConvergenceError, TruncationError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SingOscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    path = Path(args.out) / "manifest.json"
    man.outputs.append(str(path))
    path.write_text(man.to_json())
    # wall time stays out of manifest.json so reruns are byte-identical
    summary = {"command": args.command, "passed": man.passed, "checks": man.checks, "seconds": round(elapsed, 3)}
    print(json.dumps(summary, sort_keys=True, default=str))
    return EXIT_OK if man.passed else EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
