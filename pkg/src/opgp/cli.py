"""Command line entry point: ``opgp run|verify|sample-prior|spectrum <config>``.

Exit codes: 0 success, 1 a check failed, 2 bad config, 3 singular Gram.
"""
import argparse
import os
import sys

from . import experiment
from .config import load_config
from .errors import ConfigError, SingularGram

OUT_DIR_ENV = "OPGP_OUT_DIR"


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="experiment config (.toml or .json)")
    common.add_argument("--out-dir", default=os.environ.get(OUT_DIR_ENV, "opgp_out"))
    common.add_argument("--quad-order", type=int, default=None,
                        help="Gauss-Legendre nodes per integral functional")
    common.add_argument("--oracle-n", type=int, default=None, help="oracle grid size")
    common.add_argument("--tolerance", type=float, default=None,
                        help="fiber / equivalence tolerance")

    parser = argparse.ArgumentParser(prog="opgp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="assimilate batches and write checkpoints")
    sub.add_parser("verify", parents=[common], help="run all cross-checks")
    sp = sub.add_parser("sample-prior", parents=[common], help="write prior sample paths")
    sp.add_argument("--count", type=int, default=5)
    sp.add_argument("--seed", type=int, default=None)
    sp = sub.add_parser("spectrum", parents=[common], help="Mercer spectrum diagnostic")
    sp.add_argument("--theta", type=float, default=0.5)
    sp.add_argument("--n", type=int, default=None, help="Nystrom grid size")
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config, quad_order=args.quad_order, oracle_n=args.oracle_n,
                          tolerance=args.tolerance)
        if args.command == "run":
            report = experiment.run(cfg, args.out_dir)
            for cp in report.checkpoints:
                print(f"{cp['csv']}: p={cp['p']} fiber={cp['max_fiber']:.2e} "
                      f"batch-vs-seq={cp['batch_vs_sequential']:.2e}")
            for msg in report.failures:
                print(f"FAILED: {msg}", file=sys.stderr)
            print(f"status: {report.status}")
            return 0 if report.status == "PASSED" else 1
        if args.command == "verify":
            results = experiment.verify(cfg)
            for r in results:
                print(r.line())
            ok = all(r.passed for r in results)
            print(f"status: {'PASSED' if ok else 'FAILED'}")
            return 0 if ok else 1
        if args.command == "sample-prior":
            seed = cfg.seed if args.seed is None else args.seed
            path = experiment.sample_prior(cfg, args.count, seed, args.out_dir)
            print(path)
            return 0
        mercer, check = experiment.spectrum(cfg, args.theta, args.out_dir, args.n)
        print(f"lambda_1={mercer.eigenvalues[0]:.4e} sum={check.partial_sums[-1]:.4e} "
              f"tail_ratio={check.tail_ratio:.3f} verdict={check.verdict} (measure: {mercer.measure})")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SingularGram as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
