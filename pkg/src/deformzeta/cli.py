"""
Command line front end.

    deformzeta zeta JOB.json [--method both] [--plot DIR]
    deformzeta zeta --p 7 --poly "x^3 + y^3 + z^3 + 2*x*y*z"
    deformzeta oracle JOB.json
    deformzeta bench-bgs [--lengths 16384,65536,...] [--plot DIR]
    deformzeta bench-fact [--primes 6257,25013,100003] [--plot DIR]

Every subcommand writes one JSON document (stdout or --output).  With
--plot DIR the figures are written to DIR and their paths are listed in the
document under "figures".  Exit codes: 0 success, 2 invalid input,
3 genericity failure, 4 precision or consistency failure.
"""
import argparse
import json
import os
import sys

from .errors import DeformZetaError, ValidationError


def _verbose(enabled):
    if not enabled:
        return None

    def log(msg):
        print(msg, file=sys.stderr, flush=True)
    return log


def _set_threads(k):
    if k and k > 1:
        import flint
        flint.ctx.threads = k


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _load_job(args, method=None):
    from .pipeline import JobSpec
    if args.job:
        text = sys.stdin.read() if args.job == "-" else open(args.job).read()
        D = json.loads(text)
    else:
        if args.poly is None or args.p is None:
            raise ValidationError("give a job file or both --p and --poly")
        D = {"p": args.p, "polynomial": args.poly}
    if args.p is not None:
        D["p"] = args.p
    if args.a is not None:
        D["a"] = args.a
    if args.f is not None:
        D["f"] = _int_list(args.f)
    if args.diagonal is not None:
        D["diagonal"] = _int_list(args.diagonal)
    if args.precision is not None:
        D["N_target"] = args.precision
    if args.seed is not None:
        D["seed"] = args.seed
    if args.max_oracle_size is not None:
        D["max_oracle_size"] = args.max_oracle_size
    if getattr(args, "giant", None):
        D["giant"] = args.giant
    if getattr(args, "check_oracle", False):
        D["check_oracle"] = True
    if method is not None:
        D["method"] = method
    elif getattr(args, "method", None):
        D["method"] = args.method
    return JobSpec.from_dict(D)


def _emit(doc, args):
    from .pipeline import dumps
    text = dumps(doc)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_zeta(args, method=None):
    from .pipeline import run, RunState
    job = _load_job(args, method)
    state = RunState(job)
    doc = run(job, verbose=_verbose(args.verbose), state=state)
    if args.verbose:
        for k, v in state.timings.items():
            print("time %s: %.3f s" % (k, v), file=sys.stderr)
    if args.plot:
        from .plotting import plot_roots
        doc["figures"] = [plot_roots(state.zeta, os.path.join(args.plot, "roots.png"))]
    _emit(doc, args)
    return 0


def cmd_oracle(args):
    return cmd_zeta(args, method="oracle")


def cmd_bench_bgs(args):
    from .bench import bench_interval_product, summarize
    rows = bench_interval_product(_int_list(args.lengths), p=args.p, N=args.N, m=args.m,
                                  repeat=args.repeat, seed=args.seed or 0, naive=not args.no_naive)
    doc = summarize(rows, "L")
    doc["parameters"] = {"p": args.p, "N": args.N, "m": args.m, "repeat": args.repeat}
    if args.plot:
        from .plotting import plot_scaling
        doc["figures"] = [plot_scaling(rows, "L", os.path.join(args.plot, "bench_bgs.png"), "L",
                                       "interval product, m = %d, p = %d" % (args.m, args.p))]
    _emit(doc, args)
    return 0


def cmd_bench_fact(args):
    from .bench import bench_factorial_table, summarize
    rows = bench_factorial_table(_int_list(args.primes), R=args.R, N=args.N, repeat=args.repeat,
                                 naive=not args.no_naive)
    doc = summarize(rows, "p")
    doc["parameters"] = {"R": args.R, "N": args.N, "repeat": args.repeat}
    if args.plot:
        from .plotting import plot_scaling
        doc["figures"] = [plot_scaling(rows, "p", os.path.join(args.plot, "bench_fact.png"), "p",
                                       "factorial table, R = %d" % args.R)]
    _emit(doc, args)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="deformzeta",
                                 description="Zeta functions of smooth projective hypersurfaces over finite fields.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="flint threads (default 1)")
    common.add_argument("--seed", type=int, default=None, help="seed for re-drawing the diagonal coefficients")
    common.add_argument("--verbose", "-v", action="store_true", help="progress and timings on stderr")
    common.add_argument("--output", "-o", default=None, help="write the JSON document here")
    common.add_argument("--plot", default=None, metavar="DIR", help="write figures into DIR")
    sub = ap.add_subparsers(dest="command", required=True)

    def job_args(p):
        p.add_argument("job", nargs="?", help="job JSON file, or - for stdin")
        p.add_argument("--p", type=int, default=None)
        p.add_argument("--a", type=int, default=None)
        p.add_argument("--f", default=None, help="modulus of F_q, coefficients low to high, comma separated")
        p.add_argument("--poly", default=None, help='polynomial, e.g. "x^3 + y^3 + z^3 + 2*x*y*z"')
        p.add_argument("--diagonal", default=None, help="a_0,...,a_n of the diagonal fibre")
        p.add_argument("--precision", type=int, default=None, help="p-adic precision of the Frobenius matrix")
        p.add_argument("--max-oracle-size", type=int, default=None)

    z = sub.add_parser("zeta", parents=[common], help="zeta function by the deformation method")
    job_args(z)
    z.add_argument("--method", choices=["sqrt-p", "linear", "both", "oracle"], default=None)
    z.add_argument("--giant", choices=["auto", "naive", "giant-step"], default=None)
    z.add_argument("--check-oracle", action="store_true", help="compare counts with enumeration")
    z.set_defaults(fn=cmd_zeta)

    o = sub.add_parser("oracle", parents=[common], help="zeta function by point enumeration")
    job_args(o)
    o.set_defaults(fn=cmd_oracle)

    b = sub.add_parser("bench-bgs", parents=[common], help="interval product scaling")
    b.add_argument("--lengths", default="16384,65536,262144,1048576")
    b.add_argument("--p", type=int, default=10007)
    b.add_argument("--N", type=int, default=4)
    b.add_argument("--m", type=int, default=2)
    b.add_argument("--repeat", type=int, default=3)
    b.add_argument("--no-naive", action="store_true")
    b.set_defaults(fn=cmd_bench_bgs)

    f = sub.add_parser("bench-fact", parents=[common], help="factorial table scaling")
    f.add_argument("--primes", default="6257,25013,100003")
    f.add_argument("--R", type=int, default=8, help="number of blocks of length p")
    f.add_argument("--N", type=int, default=3)
    f.add_argument("--repeat", type=int, default=3)
    f.add_argument("--no-naive", action="store_true")
    f.set_defaults(fn=cmd_bench_fact)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    _set_threads(args.threads)
    try:
        return args.fn(args)
    except DeformZetaError as ex:
        step = getattr(ex, "step", None)
        err = {"status": "error", "error": type(ex).__name__, "message": str(ex),
               "step": step, "exit_code": ex.exit_code}
        print("error%s: %s: %s" % (" in " + step if step else "", type(ex).__name__, ex), file=sys.stderr)
        _emit(err, args)
        return ex.exit_code
    except (ValueError, KeyError, json.JSONDecodeError, OSError) as ex:
        err = {"status": "error", "error": type(ex).__name__, "message": str(ex),
               "step": "input", "exit_code": 2}
        print("error: %s: %s" % (type(ex).__name__, ex), file=sys.stderr)
        _emit(err, args)
        return 2


if __name__ == "__main__":
    sys.exit(main())
