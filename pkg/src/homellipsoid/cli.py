"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 infeasible design, 3 divergent
simulation, 4 failed verification.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as hio
from . import pipeline
from .errors import (
    DegenerateSolutionError,
    DimensionError,
    DivergenceError,
    HomEllipsoidError,
    InconsistentGeneratorError,
    InfeasibleError,
    NoSolutionError,
    NotMonotoneError,
)
from .simulate import compare, metrics, simulate

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_DIVERGED, EXIT_VERIFY = 0, 1, 2, 3, 4

log = logging.getLogger("homellipsoid")


def _tolerances(problem=None):
    out = {"lmi_margin": pipeline.MARGIN_TOL, "hom_norm_root": 1e-12}
    if problem is not None:
        out.update({"cone_eps": problem.solver.eps, "beta_min": problem.solver.beta_min,
                    "beta_max": problem.solver.beta_max, "budget": problem.solver.budget,
                    "refine_steps": problem.solver.refine_steps})
    return out


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _attach_log(out, name):
    handler = logging.FileHandler(out / name, mode="w")
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("homellipsoid")
    root.addHandler(handler)
    root.setLevel(logging.DEBUG)
    return handler


def _detach_log(handler):
    logging.getLogger("homellipsoid").removeHandler(handler)
    handler.close()


def _disturbance_seed(problem):
    return problem.simulation.disturbance.get("seed")


# -- subcommands -----------------------------------------------------------------------
def cmd_design(args):
    problem = hio.load_problem(args.problem)
    out = _out_dir(args.out)
    handler = _attach_log(out, "design.log")
    try:
        res = pipeline.design(problem, args.mode)
    finally:
        _detach_log(handler)
    hio.write_json(out / "controller.json", hio.controller_to_dict(res.controller))
    hio.write_json(out / "certificate.json", hio.certificate_to_dict(res.certificate, problem.plant))
    hio.write_json(out / "manifest.json", hio.manifest(
        f"design --mode {args.mode}", {"problem": args.problem},
        {"generator": 0, "disturbance": _disturbance_seed(problem)}, _tolerances(problem),
        ["controller.json", "certificate.json", "design.log"],
    ))
    cert = res.certificate
    print(f"mode={args.mode} beta={cert.beta:.6g} trace={cert.trace:.6g}")
    for k, v in cert.margins.items():
        print(f"margin.{k}={v:.3e}")
    return EXIT_OK


def _run_simulation(problem, controller):
    sim = problem.simulation
    x0 = np.zeros(problem.plant.n) if sim.x0 is None else np.asarray(sim.x0, dtype=float)
    dist = hio.make_disturbance(sim.disturbance, problem.plant)
    return simulate(problem.plant, controller, dist, sim.T, sim.dt, x0)


def cmd_simulate(args):
    problem = hio.load_problem(args.problem)
    controller = hio.controller_from_dict(hio.read_json(args.controller))
    if controller.K.shape != (problem.plant.m, problem.plant.n):
        raise DimensionError("controller gain does not match the plant dimensions")
    out = _out_dir(args.out)
    tr = _run_simulation(problem, controller)
    hio.write_trajectory(out / "trajectory.csv", tr)
    m = metrics(tr, problem.simulation.window)
    hio.write_keyvalue(out / "metrics.txt", m)
    hio.write_json(out / "manifest.json", hio.manifest(
        "simulate", {"problem": args.problem, "controller": args.controller},
        {"disturbance": _disturbance_seed(problem)}, _tolerances(problem),
        ["trajectory.csv", "metrics.txt"],
    ))
    print(f"steps={len(tr.t) - 1} x1_linf={m['x1_linf']:.6g}")
    return EXIT_OK


def cmd_verify(args):
    if args.samples <= 0:
        print("error: --samples must be positive", file=sys.stderr)
        return EXIT_INPUT
    controller = hio.controller_from_dict(hio.read_json(args.controller))
    cert, plant = hio.certificate_from_dict(hio.read_json(args.certificate))
    rep = pipeline.verify(controller, cert, plant, samples=args.samples, seed=args.seed)
    for k, v in rep.margins.items():
        print(f"margin.{k}={v:.3e}")
    print(f"gain_mismatch={rep.gain_error:.3e}")
    print(f"boundary.worst={rep.boundary.worst:.3e} violations={rep.boundary.violations}/{rep.boundary.samples}")
    if rep.boundary.counterexample is not None:
        x, w = rep.boundary.counterexample
        print("counterexample.x=" + ",".join(f"{v:.17g}" for v in x))
        print("counterexample.w=" + ",".join(f"{v:.17g}" for v in w))
    if args.out:
        out = _out_dir(args.out)
        hio.write_json(out / "manifest.json", hio.manifest(
            "verify", {"controller": args.controller, "certificate": args.certificate},
            {"verify": args.seed}, _tolerances(), [],
        ))
    print("verification " + ("passed" if rep.ok else "FAILED"))
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_norm(args):
    controller = hio.controller_from_dict(hio.read_json(args.controller))
    x = np.array([float(v) for v in args.x.split(",")])
    if x.shape != (controller.P.shape[0],):
        print(f"error: x must have {controller.P.shape[0]} entries", file=sys.stderr)
        return EXIT_INPUT
    print(f"{controller.ctx.norm(x):.17g}")
    return EXIT_OK


def cmd_report(args):
    """Linear-vs-homogeneous comparison with metrics, trajectories and figures."""
    from . import plotting

    problem = hio.load_problem(args.problem)
    out = _out_dir(args.out)
    handler = _attach_log(out, "design.log")
    try:
        problem.gain = None
        lin = pipeline.design(problem, "linear")
        hom = pipeline.design(problem, args.mode)
    finally:
        _detach_log(handler)
    sim = problem.simulation
    x0 = np.zeros(problem.plant.n) if sim.x0 is None else np.asarray(sim.x0, dtype=float)
    dist = hio.make_disturbance(sim.disturbance, problem.plant)
    rep = compare(problem.plant, lin.controller, hom.controller, dist, sim.T, sim.dt, x0,
                  window=sim.window, norm_ctx=hom.controller.ctx)
    tl, th = rep.trajectories
    window = (rep.linear["window_start"], rep.linear["window_end"])
    hio.write_json(out / "controller_linear.json", hio.controller_to_dict(lin.controller))
    hio.write_json(out / "controller.json", hio.controller_to_dict(hom.controller))
    hio.write_json(out / "certificate.json", hio.certificate_to_dict(hom.certificate, problem.plant))
    hio.write_trajectory(out / "trajectory_linear.csv", tl)
    hio.write_trajectory(out / "trajectory.csv", th)
    Path(out / "report.txt").write_text("\n".join(rep.lines()) + "\n")
    labels = ("linear", f"homogeneous (mu={problem.mu:g})")
    plotting.plot_states((tl, th), labels, out / "states.png", window=window)
    plotting.plot_phase((tl, th), labels, out / "phase.png")
    plotting.plot_control((tl, th), labels, out / "control.png")
    plotting.plot_hom_norm((tl, th), labels, out / "homnorm.png")
    outputs = ["controller_linear.json", "controller.json", "certificate.json", "trajectory_linear.csv",
               "trajectory.csv", "report.txt", "states.png", "phase.png", "control.png", "homnorm.png",
               "design.log"]
    hio.write_json(out / "manifest.json", hio.manifest(
        f"report --mode {args.mode}", {"problem": args.problem},
        {"generator": 0, "disturbance": _disturbance_seed(problem)}, _tolerances(problem), outputs,
    ))
    print("---- report ----")
    for line in rep.lines():
        if "x1_linf" in line or "u1_linf" in line:
            print(line)
    print("---- end report ----")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="homellipsoid", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="synthesize a controller and its ellipsoid certificate")
    d.add_argument("problem", help="problem file (JSON)")
    d.add_argument("--mode", choices=pipeline.MODES, default="refit")
    d.add_argument("--out", default="out", help="output directory")
    d.set_defaults(func=cmd_design)

    s = sub.add_parser("simulate", help="simulate the closed loop and write trajectory + metrics")
    s.add_argument("problem")
    s.add_argument("controller", help="controller.json")
    s.add_argument("--out", default="out")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="re-check LMI margins and run the boundary Monte-Carlo")
    v.add_argument("controller")
    v.add_argument("certificate")
    v.add_argument("--samples", type=int, default=10_000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify)

    n = sub.add_parser("norm", help="evaluate the homogeneous norm of one vector")
    n.add_argument("controller")
    n.add_argument("x", help="comma-separated vector")
    n.set_defaults(func=cmd_norm)

    r = sub.add_parser("report", help="linear vs homogeneous comparison with figures")
    r.add_argument("problem")
    r.add_argument("--mode", choices=("homogeneous", "upgrade", "refit"), default="refit")
    r.add_argument("--out", default="report")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (InfeasibleError, NoSolutionError, DegenerateSolutionError, NotMonotoneError,
            InconsistentGeneratorError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (HomEllipsoidError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
