"""Command-line entry points: train, eval, sweep-p, macs, viz-attention.

Exit codes: 0 success, 1 usage or config error, 2 data error,
3 checkpoint incompatibility.
"""

from __future__ import annotations

import argparse
import sys

from .checkpoint import CheckpointError, IncompatibleCheckpointError
from .config import load_config, parse_overrides
from .data import ConfigError, ParseError
from . import harness

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INCOMPATIBLE = 3


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="path to a key = value config file")
    sub.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override one config key (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trajpred")
    subs = parser.add_subparsers(dest="command", required=True)

    train = subs.add_parser("train", help="train a model and write checkpoint + loss curve")
    _add_common(train)

    evl = subs.add_parser("eval", help="evaluate a checkpoint (or the baseline)")
    _add_common(evl)
    evl.add_argument("--checkpoint", help="checkpoint file to evaluate")

    sweep = subs.add_parser("sweep-p", help="evaluate across top-p thresholds")
    _add_common(sweep)
    sweep.add_argument("--checkpoint", help="checkpoint to reuse at every p")
    sweep.add_argument("--p-values", help="comma-separated thresholds (overrides config)")

    macs = subs.add_parser("macs", help="analytic multiply-accumulate report")
    _add_common(macs)
    macs.add_argument("--m", type=int, help="agent count (default data.m)")

    viz = subs.add_parser("viz-attention", help="dump pairwise attention over time")
    _add_common(viz)
    viz.add_argument("--checkpoint", help="checkpoint to visualize (default: fresh init)")
    viz.add_argument("--scene", type=int, default=0, help="validation scene index")
    viz.add_argument("--pair", default="0,1", metavar="I,J", help="agent pair")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_overrides(load_config(args.config), args.set)
        if args.command == "train":
            result = harness.run_train(cfg)
            if result["history"]:
                _, loss, ade, fde = result["history"][-1]
                print(f"final: train_loss={loss:.4f} val_minADE={ade:.4f} "
                      f"val_minFDE={fde:.4f}")
            print(f"checkpoint: {result['checkpoint']}")
            print(f"loss curve: {result['loss_csv']}")
        elif args.command == "eval":
            result = harness.run_eval(cfg, args.checkpoint)
            print(f"minADE={result['min_ade']:.4f} minFDE={result['min_fde']:.4f}")
            print(f"report: {result['csv']}")
        elif args.command == "sweep-p":
            if args.p_values:
                p_values = [float(v) for v in args.p_values.split(",") if v.strip()]
            else:
                p_values = [float(v) for v in cfg["sweep.p_values"].split(",") if v.strip()]
            result = harness.run_sweep(cfg, p_values, args.checkpoint)
            for p, ade, fde, mean_k in result["rows"]:
                print(f"p={p:g}: minADE={ade:.4f} minFDE={fde:.4f} mean_k*={mean_k:.2f}")
            print(f"report: {result['csv']}  chart: {result['svg']}")
        elif args.command == "macs":
            result = harness.run_macs(cfg, args.m)
            for line in result["report"].lines():
                print(line)
            print(f"parameters: {result['params']:,d}")
        elif args.command == "viz-attention":
            try:
                i, j = (int(v) for v in args.pair.split(","))
            except ValueError:
                raise ConfigError(f"--pair expects I,J integers, got {args.pair!r}") from None
            result = harness.run_viz_attention(cfg, args.checkpoint, args.scene, (i, j))
            print(f"attention dump: {result['csv']}  chart: {result['svg']}")
    except (ConfigError, ValueError) as exc:
        if isinstance(exc, IncompatibleCheckpointError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INCOMPATIBLE
        if isinstance(exc, (ParseError, CheckpointError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DATA
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IndexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
