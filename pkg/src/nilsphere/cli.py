"""Command-line front end: ``nilsphere <command> [options]``.

Points are given in exponential coordinates: the p coordinates of X, then
the coefficients of A on X_{i,j} for i < j in lexicographic order, all
comma-separated. Monte Carlo commands need ``--seed``.

Exit codes: 0 pass, 1 usage error, 2 verification FAIL, 3 budget or
accuracy error.
"""
import argparse
import csv
import io
import json
import math
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy

from . import __version__, kernels
from .errors import BudgetError
from .haar import MonteCarloIntegrator, Welford, make_integrator, n_workers, sample_haar
from .lie import GroupPoint, k_action_arrays
from .representation import enumerate_El, matrix_element_arrays, sublap_eigenvalue
from .skew import canonical_form, d2_matrix
from .special import SeriesError, bessel_reduced
from .spherical import SphericalIndex, functional_equation_residual, phi, phi_values, theta_on_orbit
from .sublaplacian import observed_order, second_derivative, sublap_apply
from . import plancherel as pl

SCHEMA = 1
EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_BUDGET = 0, 1, 2, 3
MAX_SAMPLES = 10 ** 8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _seed(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=2, help="number of generators (dimension of V)")
    common.add_argument("--r", type=float, default=0.0, help="the parameter r >= 0")
    common.add_argument("--lambda", dest="lam", type=_floats, default=None,
                        help="Lambda as comma-separated values, nonincreasing (default all zero)")
    common.add_argument("--l", type=_ints, default=None, help="one Laguerre index per distinct nonzero lambda")
    common.add_argument("--epsilon", type=int, choices=(-1, 1), default=None, help="orientation sign (SO only)")
    common.add_argument("--group", choices=("O", "SO"), default="O", help="the compact group K")
    common.add_argument("--samples", type=int, default=None, help="Monte Carlo sample count")
    common.add_argument("--seed", type=_seed, default=None, help="RNG seed (required for Monte Carlo)")
    common.add_argument("--output", choices=("json", "csv"), default=None, help="report format")
    common.add_argument("--reproducible", action="store_true", help="omit the timestamp from the report")
    common.add_argument("--nodes", type=int, default=64, help="Gauss-Hermite nodes per axis")

    parser = _Parser(prog="nilsphere", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"nilsphere {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("eval", parents=[common], help="phi at given points")
    c.add_argument("--point", action="append", type=_floats, required=True,
                   help="X coordinates then Z coordinates (X_{i,j}, i<j, lexicographic); repeatable")

    c = sub.add_parser("tabulate", parents=[common], help="phi along a line, as CSV")
    c.add_argument("--axis", type=int, default=0, help="coordinate index that varies (X first, then Z)")
    c.add_argument("--start", type=float, default=0.0)
    c.add_argument("--stop", type=float, default=5.0)
    c.add_argument("--num", type=int, default=51)
    c.add_argument("--base", type=_floats, default=None, help="base point (default identity)")

    c = sub.add_parser("canonical", parents=[common], help="Lambda and k for a skew matrix")
    c.add_argument("--matrix", required=True, help="JSON nested list, e.g. [[0,3],[-3,0]]")

    c = sub.add_parser("verify-eigen", parents=[common], help="sub-Laplacian eigenvalue check")
    c.add_argument("--point", type=_floats, default=None, help="evaluation point (default random from seed)")
    c.add_argument("--step", type=float, default=0.05, help="finite-difference step")

    c = sub.add_parser("verify-bessel", parents=[common], help="K-average of a character vs reduced Bessel")
    c.add_argument("--points", type=int, default=20)
    c.add_argument("--radius", type=float, default=5.0)

    c = sub.add_parser("verify-functional", parents=[common], help="functional equation (p <= 2)")
    c.add_argument("--pairs", type=int, default=20)

    c = sub.add_parser("verify-oracle", parents=[common], help="Theta route vs representation route")
    c.add_argument("--points", type=int, default=50)

    sub.add_parser("calibrate-c", parents=[common], help="fit the polar constant c")

    c = sub.add_parser("plancherel", parents=[common], help="radial Plancherel check at p = 2")
    c.add_argument("--widths", type=_floats, default=[1.0, 0.8, 1.3],
                   help="x-widths of the test Gaussians")
    c.add_argument("--a-widths", type=_floats, default=[1.0, 1.3, 0.7],
                   help="central widths of the test Gaussians")
    c.add_argument("--dilation", type=float, default=1.5)
    return parser


# ----------------------------------------------------------------------------
# helpers

def _index(args):
    lam = args.lam if args.lam is not None else [0.0] * (args.p // 2)
    try:
        return SphericalIndex(args.p, args.r, tuple(lam), tuple(args.l or ()), args.epsilon, args.group)
    except ValueError as exc:
        raise UsageError(str(exc))


def _rng(args):
    if args.seed is None:
        raise UsageError(f"{args.command} uses Monte Carlo and needs --seed")
    return np.random.default_rng(args.seed)


def _samples(args, default):
    n = default if args.samples is None else args.samples
    if n < 2:
        raise UsageError("--samples must be at least 2")
    if n > MAX_SAMPLES:
        raise BudgetError(f"--samples above the cap {MAX_SAMPLES}")
    return n


def _integrator(args, idx, default=20000):
    if idx.is_bessel:
        return None
    if args.p <= 2:
        return make_integrator(args.group, args.p)
    return MonteCarloIntegrator(args.group, args.p, _samples(args, default), rng=_rng(args))


def _point(coords, p):
    d = p + p * (p - 1) // 2
    if len(coords) != d:
        raise UsageError(f"a point in N_{p} has {d} coordinates, got {len(coords)}")
    return GroupPoint.from_coords(np.array(coords, dtype=float), p)


def _random_point(rng, p, scale=1.0):
    d = p + p * (p - 1) // 2
    return GroupPoint.from_coords(rng.uniform(-scale, scale, d), p)


def _cplx(z):
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _quantity(name, value, se=0.0, **extra):
    out = {"name": name, "value": _cplx(value) if isinstance(value, complex) else value, "std_error": float(se)}
    out.update(extra)
    return out


def _map_ordered(fn, items):
    workers = min(n_workers(), len(items))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


# ----------------------------------------------------------------------------
# commands; each returns (quantities, rows, status)

def cmd_eval(args):
    idx = _index(args)
    integ = _integrator(args, idx)
    pts = [_point(c, args.p) for c in args.point]
    ests = _map_ordered(lambda n: phi(idx, n, integ), pts)
    rows = [dict(coords=list(map(float, n.coords())), value=e.value, std_error=e.std_error) for n, e in zip(pts, ests)]
    return [], rows, None


def cmd_tabulate(args):
    idx = _index(args)
    d = args.p + args.p * (args.p - 1) // 2
    if not 0 <= args.axis < d:
        raise UsageError(f"--axis must be in [0, {d})")
    if args.num < 1:
        raise UsageError("--num must be positive")
    base = np.zeros(d) if args.base is None else np.array(_point(args.base, args.p).coords())
    integ = _integrator(args, idx)
    pts = []
    for t in np.linspace(args.start, args.stop, args.num):
        c = base.copy()
        c[args.axis] += t
        pts.append(GroupPoint.from_coords(c, args.p))
    ests = _map_ordered(lambda n: phi(idx, n, integ), pts)
    rows = [dict(coords=list(map(float, n.coords())), value=e.value, std_error=e.std_error) for n, e in zip(pts, ests)]
    return [], rows, None


def cmd_canonical(args):
    try:
        mat = np.array(json.loads(args.matrix), dtype=float)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"--matrix is not a JSON matrix: {exc}")
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise UsageError("--matrix must be square")
    try:
        k, lam = canonical_form(mat)
    except ValueError as exc:
        raise UsageError(str(exc))
    resid = float(np.linalg.norm(k @ mat @ k.T - d2_matrix(lam.lambdas, mat.shape[0])))
    ortho = float(np.linalg.norm(k.T @ k - np.eye(mat.shape[0])))
    q = [_quantity("Lambda", list(lam.lambdas)), _quantity("k", k.tolist()),
         _quantity("conjugation_residual", resid), _quantity("orthogonality_residual", ortho)]
    return q, [], None


def cmd_verify_eigen(args):
    idx = _index(args)
    eig = sublap_eigenvalue(idx)
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    if idx.is_bessel or args.p <= 2:
        integ = None if idx.is_bessel else make_integrator(args.group, args.p)
        n = _point(args.point, args.p) if args.point else _random_point(rng, args.p)

        def f(x, a):
            return phi_values(idx, x, a, integ)[0]

        val = complex(f(n.x[None], n.a[None])[0])
        lf = sublap_apply(f, n, args.step)
        scale = max(eig, 1.0) * max(abs(val), 1e-2)
        resid = abs(lf - eig * val) / scale
        steps = [4 * args.step, 2 * args.step, args.step]
        errs = []
        for h in steps:
            lh = -sum(second_derivative(f, n, i, h, richardson=False) for i in range(args.p))
            errs.append(abs(lh - eig * val) / scale)
        order = observed_order(errs, steps) if min(errs) > 0 else float("nan")
        # below ~1e-11 the raw errors are rounding noise and carry no order
        order_ok = min(errs) < 1e-11 or abs(order - 4.0) <= 0.5
        ok = resid <= 1e-4 and order_ok
        q = [_quantity("eigenvalue", eig), _quantity("phi", val), _quantity("L_phi", complex(lf)),
             _quantity("relative_residual", resid), _quantity("observed_order", order),
             _quantity("route", "finite differences on phi")]
        return q, [], ok
    if args.group != "O":
        raise UsageError("the representation route needs --group O")
    alpha = enumerate_El(idx.l, idx.profile)[0]

    def m(x, a):
        return matrix_element_arrays(idx.r, idx.lam, alpha, x, a, args.nodes)

    n = GroupPoint.identity(args.p)
    lm = complex(sublap_apply(m, n, args.step))
    resid = abs(lm - eig) / max(eig, 1.0)
    ok = resid <= 1e-4
    q = [_quantity("eigenvalue", eig), _quantity("L_matrix_element", lm),
         _quantity("relative_residual", resid), _quantity("alpha", list(alpha)),
         _quantity("route", "representation matrix element at the identity")]
    return q, [], ok


def bessel_check(p, n_points, radius, n_samples, rng, group="O"):
    """Rows of (|X|, MC average of exp(i <k X, e_p>), SE, reduced Bessel)."""
    ks = sample_haar(group, p, rng, size=n_samples) if p > 1 else rng.choice([-1.0, 1.0], (n_samples, 1, 1))
    rows = []
    for _ in range(n_points):
        v = rng.standard_normal(p)
        v *= radius * rng.uniform() ** (1.0 / p) / np.linalg.norm(v)
        acc = Welford().add_batch(np.exp(1j * (ks[:, p - 1, :] @ v)))
        est = acc.estimate()
        ref = float(bessel_reduced((p - 2) / 2, float(np.linalg.norm(v))))
        rows.append((float(np.linalg.norm(v)), est.value, est.std_error, ref))
    return rows


def cmd_verify_bessel(args):
    rng = _rng(args)
    n = _samples(args, 200000)
    rows = []
    ok = True
    for norm, val, se, ref in bessel_check(args.p, args.points, args.radius, n, rng, args.group):
        err = abs(val - ref)
        tol = max(5 * se, 5e-3)
        ok &= err <= tol
        rows.append(dict(coords=[norm], value=val, std_error=se, reference=ref, error=err, tolerance=tol))
    return [_quantity("samples", n)], rows, bool(ok)


def cmd_verify_functional(args):
    if args.p > 2:
        raise UsageError("verify-functional runs with the deterministic integrator, p <= 2")
    idx = _index(args)
    integ = make_integrator(args.group, args.p)
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    rows = []
    worst = 0.0
    for _ in range(args.pairs):
        n1, n2 = _random_point(rng, args.p), _random_point(rng, args.p)
        res = functional_equation_residual(idx, n1, n2, integ)
        worst = max(worst, res)
        rows.append(dict(coords=list(n1.coords()) + list(n2.coords()), value=res, std_error=0.0))
    return [_quantity("max_residual", worst), _quantity("tolerance", 1e-8)], rows, worst <= 1e-8


def oracle_differences(idx, points, integ, n_nodes=64):
    """Per point: (Theta-route phi, rep-route phi, paired SE of the difference)."""
    alpha = enumerate_El(idx.l, idx.profile)[0]
    out = []
    for n in points:
        a = integ.values(lambda ks: theta_on_orbit(idx, n, ks))

        def rep(ks):
            kx, ka = k_action_arrays(ks, n.x[None, :], n.a[None, :, :])
            return matrix_element_arrays(idx.r, idx.lam, alpha, kx, ka, n_nodes)

        b = integ.values(rep)
        d = Welford().add_batch(a - b).estimate()
        se = 0.0 if integ.deterministic else d.std_error
        out.append((complex(a.mean()), complex(b.mean()), se))
    return out


def cmd_verify_oracle(args):
    idx = _index(args)
    if idx.is_bessel:
        raise UsageError("the representation route needs Lambda != 0")
    if args.group != "O":
        raise UsageError("the representation route is implemented for --group O")
    integ = _integrator(args, idx, default=50000)
    rng = np.random.default_rng((args.seed or 0) + 1)
    pts = [_random_point(rng, args.p) for _ in range(args.points)]
    ok = True
    rows = []
    for n, (a, b, se) in zip(pts, oracle_differences(idx, pts, integ, args.nodes)):
        tol = 1e-8 if integ.deterministic else max(1e-6, 3 * se)
        ok &= abs(a - b) <= tol
        rows.append(dict(coords=list(n.coords()), value=a, std_error=se, reference=b,
                         error=abs(a - b), tolerance=tol))
    return [_quantity("samples", integ.n_samples)], rows, bool(ok)


def cmd_calibrate_c(args):
    if args.p < 2:
        raise UsageError("calibrate-c needs p >= 2")
    z = args.p * (args.p - 1) // 2
    ref = pl.reference_c(args.p)
    if z <= 1:
        cal = pl.calibrate_c(args.p)
        ok = abs(cal.c - ref) <= 1e-8
    else:
        cal = pl.calibrate_c(args.p, _rng(args), _samples(args, 1000000))
        ok = abs(cal.c - ref) <= 0.01 * ref
    q = [_quantity("c", cal.c, cal.std_error), _quantity("reference_c", ref),
         _quantity("relative_error", abs(cal.c - ref) / ref)]
    rows = [dict(coords=[w["width"]], value=w["c"], std_error=w["std_error"]) for w in cal.per_width]
    return q, rows, bool(ok)


def cmd_plancherel(args):
    if args.p != 2:
        raise UsageError("plancherel runs at p = 2")
    if len(args.widths) != len(args.a_widths):
        raise UsageError("--widths and --a-widths must have the same length")
    cal = pl.calibrate_c(2)
    rows = []
    ratios = []
    for sx, sa in zip(args.widths, args.a_widths):
        measure = pl.RadialMeasure(2, cal.c, pl.c_stated(2), lambda_max=7.0 / sa)
        res = pl.radial_plancherel_check(pl.radial_gaussian(sx, sa), measure, pl.PolarGrid(sx, sa))
        ratios.append(res.ratio)
        rows.append(dict(coords=[sx, sa], value=res.ratio, std_error=0.0, lhs=res.lhs, rhs=res.rhs))
    spread = (max(ratios) - min(ratios)) / abs(np.mean(ratios))
    constant = float(np.mean(ratios))
    lhs_r, rhs_r, expected = pl.dilation_check(pl.radial_gaussian(), args.dilation,
                                               pl.RadialMeasure(2, cal.c, pl.c_stated(2)))
    dil_ok = abs(lhs_r / expected - 1) <= 0.01 and abs(rhs_r / expected - 1) <= 0.01
    q = [_quantity("ratio_constant", constant), _quantity("ratio_spread", spread),
         _quantity("c_p_stated", pl.c_stated(2)), _quantity("c_p_measured", pl.c_stated(2) / constant),
         _quantity("matches_stated_c_p", bool(abs(constant - 1) <= 0.01)),
         _quantity("dilation_lhs_ratio", lhs_r), _quantity("dilation_rhs_ratio", rhs_r),
         _quantity("dilation_expected", expected)]
    return q, rows, bool(spread <= 0.01 and dil_ok)


COMMANDS = {
    "eval": cmd_eval,
    "tabulate": cmd_tabulate,
    "canonical": cmd_canonical,
    "verify-eigen": cmd_verify_eigen,
    "verify-bessel": cmd_verify_bessel,
    "verify-functional": cmd_verify_functional,
    "verify-oracle": cmd_verify_oracle,
    "calibrate-c": cmd_calibrate_c,
    "plancherel": cmd_plancherel,
}


# ----------------------------------------------------------------------------
# output

def _config(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("reproducible", "output")}
    cfg["lambda"] = cfg.pop("lam")
    return cfg


def _versions():
    return {"nilsphere": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(), "backend": kernels.BACKEND}


def _row_json(row):
    out = {}
    for k, v in row.items():
        out[k] = _cplx(v) if isinstance(v, complex) else v
    return out


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def make_report(args, quantities, rows, status):
    rep = {"schema": SCHEMA, "command": args.command, "config": _config(args), "seed": args.seed,
           "versions": _versions(), "quantities": quantities, "points": [_row_json(r) for r in rows]}
    if status is not None:
        rep["status"] = "PASS" if status else "FAIL"
    if not args.reproducible:
        rep["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    return _clean(rep)


def render(rep, fmt):
    if fmt == "json":
        return json.dumps(rep, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    for key in ("schema", "command", "seed", "status", "timestamp"):
        if key in rep:
            buf.write(f"# {key}: {rep[key]}\n")
    buf.write(f"# config: {json.dumps(rep['config'], sort_keys=True)}\n")
    buf.write(f"# versions: {json.dumps(rep['versions'], sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    if rep["points"]:
        ncoord = max(len(r["coords"]) for r in rep["points"])
        w.writerow([f"c{i}" for i in range(ncoord)] + ["value_re", "value_im", "std_error"])
        for r in rep["points"]:
            v = r["value"]
            re, im = (v["re"], v["im"]) if isinstance(v, dict) else (v, 0.0)
            w.writerow([repr(c) for c in r["coords"]] + [repr(re), repr(im), repr(r["std_error"])])
    else:
        w.writerow(["name", "value", "std_error"])
        for q in rep["quantities"]:
            w.writerow([q["name"], json.dumps(q["value"]), repr(q["std_error"])])
    return buf.getvalue()


def _diagnostic(kind, message, code):
    sys.stderr.write(json.dumps({"schema": SCHEMA, "error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.output is None:
            args.output = "csv" if args.command == "tabulate" else "json"
        quantities, rows, status = COMMANDS[args.command](args)
    except UsageError as exc:
        return _diagnostic("usage", str(exc), EXIT_USAGE)
    except (BudgetError, SeriesError) as exc:
        return _diagnostic("budget", str(exc), EXIT_BUDGET)
    sys.stdout.write(render(make_report(args, quantities, rows, status), args.output))
    if status is not None and not status:
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
