"""Command-line entry point: ``driftfk <command> [options]``.

Each command prints (or writes with ``--out``) a report table and exits 0
only when every row passes.  Summaries and timings go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import harness
from .eigensolve import principal_eigenpair
from .errors import DriftFKError
from .geometry import domain_from_dict, equal_measure_radius, rasterize
from .harness import Report, write_atomic
from .operator import DriftSpec, assemble, save_operator
from .optimal_drift import lambda_max, lambda_min
from .radial import radial_eigen


def load_domain(text: str):
    """Domain from a preset name, a JSON file path or an inline JSON object."""
    if text in harness.PRESETS:
        return harness.PRESETS[text]
    if text.lstrip().startswith("{"):
        return domain_from_dict(json.loads(text))
    return domain_from_dict(json.loads(Path(text).read_text()))


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _cmd_eig(args) -> Report:
    spec = load_domain(args.domain)
    mask = rasterize(spec, args.h)
    kind = args.drift if args.tau > 0 else "zero"
    drift = DriftSpec(kind, args.tau, direction=tuple(args.direction),
                      center=harness.domain_center(spec), sign=args.sign, seed=args.seed)
    A = assemble(mask, drift.sample(mask), scheme=args.scheme)
    if args.save_operator:
        save_operator(A, args.save_operator)
    res = principal_eigenpair(A, tol=args.tol)
    cols = ["drift", "tau", "h", "nodes", "lambda", "bracket_low", "bracket_high",
            "residual", "iterations", "pass"]
    rep = Report("eig", cols, config={"domain": spec.to_dict(), "drift": drift.to_dict(),
                                      "h": args.h, "scheme": args.scheme})
    rep.rows.append({"drift": kind, "tau": args.tau, "h": args.h, "nodes": mask.n_interior,
                     "lambda": res.lam, "bracket_low": res.bracket[0],
                     "bracket_high": res.bracket[1], "residual": res.residual,
                     "iterations": res.iterations, "pass": True})
    return rep


def _cmd_optimal(args) -> Report:
    spec = load_domain(args.domain)
    mask = rasterize(spec, args.h)
    cols = ["mode", "tau", "h", "lambda", "iterations", "residual", "full_speed_fraction",
            "max_relative_misalignment", "pass"]
    rep = Report("optimal", cols, config={"domain": spec.to_dict(), "tau": args.tau,
                                          "h": args.h, "tol": args.tol})
    modes = ("min", "max") if args.mode == "both" else (args.mode,)
    fields = {}
    for mode in modes:
        solver = lambda_min if mode == "min" else lambda_max
        res = solver(mask, args.tau, tol=args.tol)
        stats = res.alignment_stats(mask)
        rep.rows.append({
            "mode": mode, "tau": args.tau, "h": args.h, "lambda": res.lam,
            "iterations": res.iterations, "residual": res.residual,
            "full_speed_fraction": stats["full_speed_fraction"],
            "max_relative_misalignment": stats["max_relative_misalignment"],
            "pass": res.residual <= 5 * args.tol * res.lam,
        })
        fields[mode] = res
    if args.fields:
        names = ["x", "y"][: mask.ndim] + ["phi"] + ["vx", "vy"][: mask.ndim]
        lines = [",".join(["mode"] + names)]
        for mode, res in fields.items():
            for xi, p, v in zip(mask.coords(), res.phi, res.drift):
                lines.append(",".join([mode] + [repr(float(t)) for t in (*xi, p, *v)]))
        write_atomic(args.fields, "\n".join(lines) + "\n")
    return rep


def _cmd_radial(args) -> Report:
    R = args.radius if args.radius is not None else equal_measure_radius(args.m, args.n)
    prof = radial_eigen(args.n, R, args.tau, args.sign)
    rep = Report("radial", ["n", "radius", "tau", "sign", "lambda", "pass"],
                 config={"n": args.n, "radius": R, "tau": args.tau, "sign": args.sign})
    rep.rows.append({"n": args.n, "radius": R, "tau": args.tau, "sign": args.sign,
                     "lambda": prof.lam, "pass": True})
    return rep


def _cmd_rearrange(args) -> Report:
    rep, _ = harness.rearrange_report(load_domain(args.domain), args.tau, args.h,
                                      args.levels, profile_path=args.profile)
    return rep


def _cmd_verify_fk(args) -> Report:
    return harness.verify_fk(args.trials, args.tau, args.m, args.h, args.seed,
                             args.modes, args.amplitude)


def _cmd_verify_shift(args) -> Report:
    return harness.verify_shift(load_domain(args.domain), _floats(args.taus), args.h)


def _cmd_verify_divfree(args) -> Report:
    return harness.verify_divfree(load_domain(args.domain), args.tau, args.h)


def _cmd_sweep_tau(args) -> Report:
    return harness.sweep_tau(load_domain(args.domain), _floats(args.taus), args.h)


def _cmd_slab_bound(args) -> Report:
    return harness.slab_bound(_floats(args.epsilons), args.tau, args.m, args.cells)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="driftfk",
        description="Principal eigenvalues of -Delta + v.grad on planar domains "
                    "and checks of the drift Faber-Krahn inequality.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        return sp

    def domain(sp):
        sp.add_argument("--domain", default="disk",
                        help="preset (disk, square, ellipse), JSON file or inline JSON")

    sp = command("eig", _cmd_eig, "principal eigenvalue for one drift")
    domain(sp)
    sp.add_argument("--tau", type=float, default=0.0)
    sp.add_argument("--h", type=float, default=1 / 128)
    sp.add_argument("--drift", default="constant",
                    choices=("constant", "radial", "rotational", "random"))
    sp.add_argument("--direction", type=float, nargs=2, default=(1.0, 0.0))
    sp.add_argument("--sign", type=int, choices=(1, -1), default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--scheme", choices=("hybrid", "upwind"), default="hybrid")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--save-operator", help="binary CSR dump of the assembled matrix")

    sp = command("optimal", _cmd_optimal, "extremal eigenvalues over |v| <= tau")
    domain(sp)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--h", type=float, default=1 / 128)
    sp.add_argument("--mode", choices=("min", "max", "both"), default="both")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--fields", help="CSV dump of phi and the optimal drift per node")

    sp = command("radial", _cmd_radial, "radial shooting on a ball")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--m", type=float, default=math.pi, help="ball measure")
    sp.add_argument("--radius", type=float, help="ball radius (overrides --m)")
    sp.add_argument("--tau", type=float, default=0.0)
    sp.add_argument("--sign", type=int, choices=(1, -1), default=1)

    sp = command("rearrange", _cmd_rearrange, "level-set rearrangement bound")
    domain(sp)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--h", type=float, default=1 / 128)
    sp.add_argument("--levels", type=int, default=128)
    sp.add_argument("--profile", help="write the rearrangement profile CSV here")

    sp = command("verify-fk", _cmd_verify_fk, "random-domain inequality campaign")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--m", type=float, default=math.pi)
    sp.add_argument("--h", type=float, default=1 / 128)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--modes", type=int, default=4)
    sp.add_argument("--amplitude", type=float, default=0.15)

    sp = command("verify-shift", _cmd_verify_shift, "constant-drift shift identity")
    domain(sp)
    sp.add_argument("--taus", default="0,0.5,1,2,4", help="comma-separated list")
    sp.add_argument("--h", type=float, default=1 / 128)

    sp = command("verify-divfree", _cmd_verify_divfree, "rotational drift check")
    domain(sp)
    sp.add_argument("--tau", type=float, default=2.0)
    sp.add_argument("--h", type=float, default=1 / 128)

    sp = command("sweep-tau", _cmd_sweep_tau, "extremal eigenvalues over tau")
    domain(sp)
    sp.add_argument("--taus", default="0,0.5,1,2,4", help="comma-separated list")
    sp.add_argument("--h", type=float, default=1 / 128)

    sp = command("slab-bound", _cmd_slab_bound, "thin-slab lower bound")
    sp.add_argument("--epsilons", default="0.1,0.05", help="comma-separated list")
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--m", type=float, default=1.0)
    sp.add_argument("--cells", type=int, default=16, help="grid cells across the slab")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    start = time.perf_counter()
    try:
        report = args.func(args)
    except (DriftFKError, ValueError, OSError) as exc:
        print(f"driftfk: error: {exc}", file=sys.stderr)
        return 2
    report.runtime = report.runtime or time.perf_counter() - start
    text = report.to_json() if args.format == "json" else report.to_csv()
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    summary = report.summary
    print(f"{report.command}: {summary['passed']}/{summary['rows']} passed, "
          f"min margin {summary['min_margin']}, {report.runtime:.2f} s", file=sys.stderr)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
