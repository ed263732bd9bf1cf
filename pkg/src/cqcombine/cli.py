"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 proven-bound violation in a
sweep (a numerical fault), 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import CqError
from .experiments import DEFAULT_SAMPLES, FULL_SCALE_SAMPLES, RUNNERS, ExperimentConfig
from .linalg import LOG2

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_PROVEN_VIOLATION = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--samples", type=int, default=None, help=f"sample count (default {DEFAULT_SAMPLES} for sweep, 200 for duality)")
    common.add_argument("--full-scale", action="store_true", help=f"use {FULL_SCALE_SAMPLES} samples")
    common.add_argument("--dim", type=int, nargs="+", default=[2], help="output dimension(s), cycled over samples")
    common.add_argument("--prior", choices=("half", "uniform"), default="half")
    common.add_argument("--pairing", choices=("identical", "distinct"), default="distinct")
    common.add_argument("--grid", type=int, default=101, help="grid points per axis")
    common.add_argument("--a", type=float, default=0.05 * LOG2, help="lower polarization threshold, nats")
    common.add_argument("--b", type=float, default=0.95 * LOG2, help="upper polarization threshold, nats")
    common.add_argument("--base", choices=("nat", "bits"), default="nat", help="log base of entropic outputs")
    common.add_argument("--out", default=None, help="output path (CSV, or JSON for duality)")

    chan = argparse.ArgumentParser(add_help=False)
    chan.add_argument(
        "--channel",
        choices=("bec", "bsc", "bec-embed", "bsc-embed", "pure", "random", "bec-mixed"),
        default="bec",
        help="bec/bsc use scalar recursions; *-embed, pure and random the exact cq backend",
    )
    chan.add_argument("--param", type=float, default=0.5, help="erasure/crossover probability or pure-state angle")
    chan.add_argument("--levels", type=int, default=10, help="number of polar levels n")

    p = argparse.ArgumentParser(prog="cqcombine", description="Entropy bounds and polarization for binary-input cq channels.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="random pairs against every bound")
    sub.add_parser("curves", parents=[common], help="bound curves on an entropy grid")
    sub.add_parser("duality", parents=[common], help="duality identity residuals")
    sub.add_parser("polarize", parents=[common, chan], help="per-level polarization statistics")
    sub.add_parser("speed", parents=[common, chan], help="E[T] decay with fits")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    samples = args.samples
    if args.full_scale:
        samples = FULL_SCALE_SAMPLES
    if samples is None:
        samples = 200 if args.command == "duality" else DEFAULT_SAMPLES
    return ExperimentConfig(
        command=args.command,
        seed=args.seed,
        samples=samples,
        dims=list(args.dim),
        prior=args.prior,
        pairing=args.pairing,
        grid=args.grid,
        a=args.a,
        b=args.b,
        log_base=args.base,
        out_path=args.out,
        channel=getattr(args, "channel", "bec"),
        param=getattr(args, "param", 0.5),
        levels=getattr(args, "levels", 10),
    )


def _summarize(command: str, result) -> dict:
    if command == "sweep":
        return result.summary
    if command == "duality":
        return {"max_residual": result["max_residual"], "max_bec_residual": result["max_bec_residual"]}
    if command == "curves":
        return {"rows": int(len(result.grid["H1"]))}
    if command == "polarize":
        last = result[-1]
        return {"n": last.n, "alpha": last.alpha, "theta": last.theta, "beta": last.beta, "mu": last.mu, "nu": last.nu}
    return {"expected_T": [float(x) for x in result.expected_T]}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        result = RUNNERS[cfg.command](cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(json.dumps(_summarize(cfg.command, result), sort_keys=True, default=str))
    if cfg.command == "sweep" and result.summary["proven_violations"]:
        return EXIT_PROVEN_VIOLATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
