"""Command-line front end.

Subcommands: ``run`` (one solver configuration), ``reference`` (compute and
cache the long fixed-step baseline), ``sweep`` (delta-times-metric grid),
``bench`` (kernel backend comparison).  Exit codes: 0 success, 1 runtime
failure, 2 configuration problems.
"""

import argparse
import sys

from . import _kernels
from .config import load_config
from .harness import (build_problem, compute_reference, run_experiment)
from .problems import lf_estimate


def _load(path):
    try:
        return load_config(path)
    except (OSError, ValueError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return None


def _cmd_run(args):
    cfg = _load(args.config)
    if cfg is None:
        return 2
    s = cfg.solver
    manifest = run_experiment(cfg, points=((s.delta, s.s1, s.s2),))
    return _report(manifest)


def _cmd_sweep(args):
    cfg = _load(args.config)
    if cfg is None:
        return 2
    return _report(run_experiment(cfg))


def _report(manifest):
    failed = 0
    for key in sorted(manifest):
        if key.endswith(".status"):
            print("%s: %s" % (key[len("runs."):-len(".status")],
                              manifest[key]))
            if manifest[key] != "ok":
                failed += 1
        if key.endswith(".final_rel_error"):
            print("  final rel_error = %s" % manifest[key])
    return 1 if failed else 0


def _cmd_reference(args):
    cfg = _load(args.config)
    if cfg is None:
        return 2
    bundle = build_problem(cfg.problem)
    x_star, f_star = compute_reference(
        bundle.problem, bundle.x0, cfg.reference.iterations,
        cache_dir=cfg.reference.cache_dir or None)
    print("curvature bound = %r" % lf_estimate(bundle.problem))
    print("reference objective = %r (over %d iterations)"
          % (f_star, cfg.reference.iterations))
    return 0


def _cmd_bench(args):
    from .bench import run_bench
    return run_bench(rows=args.rows, cols=args.cols, iters=args.iters,
                     seed=args.seed)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sfista",
        description="scaled inexact adaptive FISTA for TV-regularized "
                    "Poisson deblurring (kernel backend: %s)"
                    % _kernels.BACKEND)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one solver run from a config file")
    p.add_argument("config")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("reference",
                       help="compute and cache the fixed-step baseline")
    p.add_argument("config")
    p.set_defaults(func=_cmd_reference)

    p = sub.add_parser("sweep", help="delta x metric grid from a config file")
    p.add_argument("config")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("bench", help="compare kernel backends")
    p.add_argument("--rows", type=int, default=64)
    p.add_argument("--cols", type=int, default=64)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_bench)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
