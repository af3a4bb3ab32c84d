"""Command line front end for the experiment harness."""

import argparse
import sys

from .distribution import DEFAULT_RHO, RhoParams
from .harness import METHODS, ExperimentConfig, emit_reports, run_experiment

RHO_DEFAULT_TEXT = f"{DEFAULT_RHO.a},{DEFAULT_RHO.b},{DEFAULT_RHO.c},{DEFAULT_RHO.d}"


def parse_rho(text):
    """'a,b,c,d' -> RhoParams; the literal 'flat' selects the uniform rule."""
    if text.strip().lower() == "flat":
        return None
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected 'a,b,c,d' or 'flat'")
    return RhoParams(a=parts[0], b=parts[1], c=parts[2], d=parts[3])


def build_parser():
    parser = argparse.ArgumentParser(
        prog="adba",
        description="Hard-label adversarial attack experiments with approximate "
                    "decision boundaries.")
    parser.add_argument("--method", choices=METHODS, required=True)
    parser.add_argument("--epsilon", type=float, default=0.05,
                        help="maximum perturbation strength (default 0.05)")
    parser.add_argument("--budget", type=int, default=10000,
                        help="query budget per image (default 10000)")
    parser.add_argument("--tau", type=float, default=0.002,
                        help="bracket width below which directions tie (default 0.002)")
    parser.add_argument("--rho", type=parse_rho, default=RHO_DEFAULT_TEXT,
                        help=f"boundary-density parameters a,b,c,d or 'flat' "
                             f"(default {RHO_DEFAULT_TEXT})")
    parser.add_argument("--oracle", default="builtin:mean-threshold",
                        help="builtin:mean-threshold[:t] | builtin:linear | remote:host:port")
    parser.add_argument("--images", required=True, help="dataset container path")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--parallelism", type=int, default=1)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--aggregate-over", choices=("successes", "all"),
                        default="successes")
    parser.add_argument("--count-verification-query", action="store_true",
                        help="charge the initial correctness check to the budget")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    rho = args.rho if isinstance(args.rho, (RhoParams, type(None))) else parse_rho(args.rho)
    config = ExperimentConfig(
        method=args.method,
        images_path=args.images,
        oracle_spec=args.oracle,
        epsilon=args.epsilon,
        budget=args.budget,
        tau=args.tau,
        rho=rho,
        seed=args.seed,
        parallelism=args.parallelism,
        out_dir=args.out,
        aggregate_over=args.aggregate_over,
        count_verification_query=args.count_verification_query,
    )
    report = run_experiment(config)
    emit_reports(report, args.out, config=config)
    print(f"images attacked : {report.n_images}")
    print(f"success rate    : {report.success_rate:.3f}")
    print(f"mean queries    : {report.mean_queries}")
    print(f"median queries  : {report.median_queries}")
    print(f"outputs written : {args.out}")
    return 0 if report.status == "ok" else 1


if __name__ == "__main__":
    sys.exit(main())
