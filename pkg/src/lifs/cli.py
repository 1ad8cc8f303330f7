"""Command-line front end.  Every run writes its artifacts plus ``manifest.json``."""

import argparse
from fractions import Fraction
import os
import sys

import numpy as np

from lifs import __version__, collage, interp, local_ifs, polyjet, qtt, rb, srgrid, subdiv
from lifs.errors import LifsError, NumericalError, ValidationError
from lifs.expr import parse, parse_floats
from lifs.io import write_csv, write_json

COMMANDS = ("attractor", "random-fractal", "interpolate", "hermite", "order-study", "polyjet",
            "poly-ifs", "collage-fit", "srgrid", "subdivide", "qtt")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--grid", type=int, default=None, help="grid size N_g")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--out", default=".")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="lifs", description="Local IFS and fractal-function toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("attractor", parents=[common], help="set attractor of the two-map 2D example")
    p.add_argument("--mode", choices=("local", "global"), default="local")
    for name, val in (("x1", 0.8), ("y1", 0.8), ("x2", 0.4), ("y2", 0.4), ("s1", 0.5), ("s2", 0.5)):
        p.add_argument(f"--{name}", type=float, default=val)
    p.add_argument("--pitch", type=float, default=local_ifs.DEFAULT_PITCH)
    p.add_argument("--samples", type=int, default=64)

    p = sub.add_parser("random-fractal", parents=[common], help="random constant-coefficient fractal")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--s-bound", type=float, default=0.9)

    p = sub.add_parser("interpolate", parents=[common], help="endpoint-interpolating fractal")
    p.add_argument("--target", required=True)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--s-odd", default=None, help="comma list; random in [0.2, 0.8] if omitted")
    p.add_argument("--mode", choices=("endpoint", "endpoint-continuous"), default="endpoint")

    p = sub.add_parser("hermite", parents=[common], help="Hermite fractal interpolant and its order")
    p.add_argument("--target", required=True)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--s", type=float, default=0.25)
    p.add_argument("--h-list", default="0.25,0.125,0.0625,0.03125")

    p = sub.add_parser("order-study", parents=[common], help="convergence order over a list of h")
    p.add_argument("--target", required=True)
    p.add_argument("--builder", choices=("linear", "hermite"), default="hermite")
    p.add_argument("--h-list", default="0.25,0.125,0.0625,0.03125")

    p = sub.add_parser("polyjet", parents=[common], help="jets and fractel matrices of a polynomial")
    p.add_argument("--coeffs", required=True, help="derivatives at 0, constant first")
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--points", type=int, default=17)

    p = sub.add_parser("poly-ifs", parents=[common], help="rebuild jets through the two-map IFS")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--digits", type=int, default=12)
    p.add_argument("--points", type=int, default=100)

    p = sub.add_parser("collage-fit", parents=[common], help="collage fit of a target")
    p.add_argument("--target", required=True)
    p.add_argument("--problem", choices=("l2", "poisson"), default="l2")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--s-odd", default=None)

    p = sub.add_parser("srgrid", parents=[common], help="self-referential grid closure")
    p.add_argument("--points", required=True, help="comma list of dyadic values, e.g. 11/16,0.75")
    p.add_argument("--coeffs", default=None, help="also evaluate this polynomial on the grid")
    p.add_argument("--theta", type=float, default=0.5)

    p = sub.add_parser("subdivide", parents=[common], help="binary subdivision levels")
    p.add_argument("--levels", type=int, default=12)
    p.add_argument("--target", default=None, help="use the S = 1/2 interpolating rule of this target")

    p = sub.add_parser("qtt", parents=[common], help="rank-2 matrix-product evaluation")
    p.add_argument("--lambda1", type=float, required=True)
    p.add_argument("--lambda2", type=float, required=True)
    p.add_argument("--s1", type=float, required=True)
    p.add_argument("--s2", type=float, required=True)
    p.add_argument("--depth", type=int, default=10)
    return parser


class Run:
    def __init__(self, args):
        self.args = args
        self.files = []
        self.info = {}
        os.makedirs(args.out, exist_ok=True)

    def path(self, name):
        self.files.append(name)
        return os.path.join(self.args.out, name)

    def table(self, stem, header, columns):
        if self.args.format == "csv":
            write_csv(self.path(stem + ".csv"), header, columns)
        else:
            cols = [np.asarray(c).tolist() for c in columns]
            write_json(self.path(stem + ".json"), {h: c for h, c in zip(header, cols)})

    def manifest(self):
        params = {k: v for k, v in vars(self.args).items() if k not in ("out", "func")}
        doc = {
            "manifest_version": 1,
            "command": self.args.command,
            "params": params,
            "seed": self.args.seed,
            "version": __version__,
            "tol": self.args.tol,
            "max_iter": self.args.max_iter,
            "outputs": self.files,
        }
        doc.update(self.info)
        write_json(os.path.join(self.args.out, "manifest.json"), doc)


def _s_odd(text, n, seed):
    if text is None:
        return interp.make_rng(seed).uniform(0.2, 0.8, n // 2)
    vals = parse_floats(text)
    if len(vals) not in (1, n // 2):
        raise ValidationError(f"--s-odd needs 1 or {n // 2} values")
    return vals


def _solve(run, spec, n_g):
    grid = rb.make_admissible_grid(spec.ifs, n_g)
    res = rb.solve(spec, grid, tol=run.args.tol, max_iter=run.args.max_iter)
    if not res.converged:
        raise NumericalError(f"fixed-point iteration did not converge (residual {res.residual:.3e})")
    run.info.update(iterations=res.iters, residual=res.residual)
    return res


def cmd_attractor(run):
    a = run.args
    maps = local_ifs.two_homothety_example(a.x1, a.y1, a.x2, a.y2, a.s1, a.s2, local=a.mode == "local")
    res = local_ifs.iterate_attractor(maps, samples=a.samples, pitch=a.pitch, max_iter=a.max_iter)
    if not res.converged:
        raise NumericalError("attractor iteration did not settle")
    pts = res.points.points
    run.table("attractor", ["x", "y"], [pts[:, 0], pts[:, 1]] if len(pts) else [[], []])
    run.info.update(iterations=res.iterations, points=len(res.points), residual=res.last_step)


def cmd_random_fractal(run):
    a = run.args
    spec = interp.build_random_spec(a.n, a.seed, a.s_bound)
    res = _solve(run, spec, a.grid or 1024)
    run.table("fstar", ["x", "value"], [res.f_star.grid.points, res.f_star.values])


def cmd_interpolate(run):
    a = run.args
    target = parse(a.target)
    p = interp.InterpolationProblem(target, a.n, _s_odd(a.s_odd, a.n, a.seed), a.mode)
    spec = interp.build_endpoint_interpolant(p)
    res = _solve(run, spec, a.grid or 64 * a.n)
    x = res.f_star.grid.points
    t = target(x)
    err = np.abs(res.f_star.values - t)
    run.table("interpolant", ["x", "f_star", "target", "error"], [x, res.f_star.values, t, err])
    summary = {"max_error": float(err.max()), "order": None, "iters": res.iters}
    write_json(run.path("summary.json"), summary)
    run.info.update(summary=summary, s_odd=list(p.s_odd))


def _h_list(text):
    return parse_floats(text)


def cmd_hermite(run):
    a = run.args
    target = parse(a.target)
    spec = interp.build_hermite_interpolant(target, target.derivative, a.n, a.s)
    res = _solve(run, spec, a.grid or 16 * a.n)
    x = res.f_star.grid.points
    t = target(x)
    err = res.f_star.values - t
    run.table("hermite", ["x", "f_star", "target", "error"], [x, res.f_star.values, t, err])
    hs = _h_list(a.h_list)
    errors = interp.error_sweep(interp.hermite_builder(target, target.derivative, a.s), target, hs,
                                threads=a.threads)
    order = interp.fit_order(hs, errors, float(np.max(np.abs(t))))
    summary = {"max_error": float(np.abs(err).max()), "order": order, "iters": res.iters}
    write_json(run.path("summary.json"), summary)
    run.info.update(summary=summary, h=hs, errors=errors)


def cmd_order_study(run):
    a = run.args
    target = parse(a.target)
    hs = _h_list(a.h_list)
    if a.builder == "hermite":
        builder = interp.hermite_builder(target, target.derivative)
    else:
        builder = interp.linear_builder(target)
    errors = interp.error_sweep(builder, target, hs, threads=a.threads)
    order = interp.fit_order(hs, errors, float(np.max(np.abs(target(np.linspace(0, 1, 33))))))
    run.table("order", ["h", "error"], [hs, errors])
    summary = {"max_error": float(max(errors)), "order": order, "iters": None}
    write_json(run.path("summary.json"), summary)
    run.info.update(summary=summary)


def cmd_polyjet(run):
    a = run.args
    coeffs = parse_floats(a.coeffs)
    xs = np.linspace(0.0, 1.0, a.points)
    jets = [polyjet.jet_at(coeffs, x) for x in xs]
    m = len(coeffs) - 1
    cols = [xs] + [[j.values[k] for j in jets] for k in range(m + 1)]
    run.table("jets", ["x"] + [f"f{k}" for k in range(m + 1)], cols)
    j = polyjet.jet_at(coeffs, a.x)
    A = polyjet.hankel(j)
    w = polyjet.fractel_linear(j, a.s)
    write_json(run.path("matrices.json"), {
        "x": a.x, "s": a.s, "jet": j.values.tolist(), "A": A.tolist(),
        "A_pinv": polyjet.hankel_pseudoinverse(A).tolist(), "W": w.tolist(),
        "eigenvalues": polyjet.fractel_eigenvalues(w).tolist(),
    })


def cmd_poly_ifs(run):
    a = run.args
    coeffs = parse_floats(a.coeffs)
    rng = interp.make_rng(a.seed)
    xs = np.sort(rng.integers(0, 2 ** a.digits, a.points)) / 2.0 ** a.digits
    jets = [polyjet.poly_ifs_reconstruct(coeffs, x, a.digits, a.theta) for x in xs]
    err = max(float(np.max(np.abs(j.values - polyjet.jet_at(coeffs, x).values)))
              for j, x in zip(jets, xs))
    m = len(coeffs) - 1
    cols = [xs] + [[j.values[k] if k < len(j) else 0.0 for j in jets] for k in range(m + 1)]
    run.table("reconstruction", ["x"] + [f"f{k}" for k in range(m + 1)], cols)
    run.info.update(max_jet_error=err, iterations=a.digits)


def cmd_collage_fit(run):
    a = run.args
    target = parse(a.target)
    n_g = a.grid or 256
    if a.problem == "l2":
        base, basis = collage.interpolating_family(a.n, _s_odd(a.s_odd, a.n, a.seed), n_g)
        x = base.grid.points
        reference = target(x)
        form = collage.l2_form(reference)
    else:
        s_odd = _s_odd(a.s_odd, a.n, a.seed) if a.s_odd else [0.1]
        base, basis = collage.interpolating_family(a.n, s_odd, n_g, mode="endpoint")
        x = base.grid.points
        form = collage.poisson_form(target(x))
        reference = form.minimizer()
    prb = collage.ParametricRB(base, basis, form.norm)
    res = collage.collage_fit(prb, form, tol=a.tol, max_iter=a.max_iter)
    _, _, best = collage.best_approximation(prb, form, reference)
    err = form.h_norm(res.u.values - reference)
    report = collage.fit_report(prb, form, res, best, err)
    write_json(run.path("fit.json"), report)
    run.table("collage", ["x", "u", "reference"], [x, res.u.values, reference])
    run.info.update(iterations=res.iters, residual=res.residual)


def _dyadic(text):
    try:
        return srgrid.DyadicPoint.from_value(Fraction(text.strip()))
    except ValueError as exc:
        raise ValidationError(f"not a number: {text!r}") from exc


def cmd_srgrid(run):
    a = run.args
    grid = srgrid.close_grid([_dyadic(t) for t in a.points.split(",") if t.strip()])
    grid.to_csv(run.path("grid.csv"))
    run.info.update(size=len(grid))
    if a.coeffs:
        coeffs = parse_floats(a.coeffs)
        pair = polyjet.poly_ifs_pair(coeffs, a.theta)
        vals, ops = srgrid.evaluate_grid(pair, polyjet.jet_at(coeffs, 0.0), grid,
                                         target_jet=lambda t: polyjet.jet_at(coeffs, t).values)
        srgrid.write_evaluation(run.path("evaluation.csv"), vals)
        run.info.update(affine_ops=ops)


def cmd_subdivide(run):
    a = run.args
    if a.target:
        target = parse(a.target)
        f0, f1 = float(target(0.0)), float(target(1.0))
        spec = rb.constant_spec(local_ifs.binary_ifs(), [0.5 * f0, 0.5 * f1], [0.5, 0.5])
    else:
        spec = subdiv.random_compatible_spec(a.seed)
    v1, v2 = subdiv.v_maps(spec)
    hist = subdiv.subdivide(v1, v2, levels=a.levels)
    subdiv.write_levels(run.path("levels.csv"), hist)
    run.info.update(iterations=a.levels,
                    cauchy=subdiv.cauchy_differences(hist).tolist(), spec=spec.to_dict())


def cmd_qtt(run):
    a = run.args
    core = qtt.build_qtt(a.lambda1, a.lambda2, a.s1, a.s2)
    qtt.write_core(run.path("core.json"), core)
    x = np.arange(2 ** a.depth) / 2 ** a.depth
    run.table("qtt", ["x", "value"], [x, qtt.qtt_eval_grid(core, a.depth)])
    run.info.update(rank=qtt.qtt_rank_report(core))


HANDLERS = {name: globals()["cmd_" + name.replace("-", "_")] for name in COMMANDS}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        run = Run(args)
        HANDLERS[args.command](run)
        run.manifest()
    except ValidationError as exc:
        print(f"error: {exc}".splitlines()[0], file=sys.stderr)
        return 1
    except (NumericalError, LifsError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}".splitlines()[0], file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
