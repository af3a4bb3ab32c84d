"""bridge --model <id> --port <p> --device <cpu|accelerator>"""

import argparse
import sys

from .models import TORCHVISION_MODELS, load_model, spec_for
from .server import serve


def build_parser():
    known = ", ".join(sorted(TORCHVISION_MODELS)) + ", tiny:<W>x<H>"
    parser = argparse.ArgumentParser(
        prog="bridge",
        description="Serve a hard-label image classifier over the attack wire protocol.")
    parser.add_argument("--model", required=True, help=f"one of: {known}")
    parser.add_argument("--port", type=int, default=9007)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--device", choices=("cpu", "accelerator"), default="cpu")
    parser.add_argument("--weights", default="default",
                        help="'default' (published checkpoint), 'none' (seeded "
                             "random init, testing only), or a state-dict path")
    parser.add_argument("--seed", type=int, default=0,
                        help="initialization seed when --weights none")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = spec_for(args.model)
    print(f"loading {args.model} (N={spec.n}, K={spec.class_count}, "
          f"weights={args.weights})", flush=True)
    model = load_model(args.model, weights=args.weights, device=args.device,
                       seed=args.seed)
    print(f"serving on {args.host}:{args.port}", flush=True)
    try:
        serve(model, host=args.host, port=args.port)
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    sys.exit(main())
