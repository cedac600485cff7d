"""``simulate`` command: run a figure preset or a YAML configuration."""

from __future__ import annotations

import argparse
import logging
import sys

from .runner import (EXIT_OK, EXIT_VALIDATION, METHODS, ParseError,
                     ValidationError, aggregate_status, parse_config, run, sweep)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="simulate",
        description="Two-qubit non-Markovian dynamics: write CSV time series "
                    "and JSON metadata.")
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=["fig1", "fig2", "fig3", "fig4", "fig5"])
    src.add_argument("--config", metavar="FILE", help="YAML run configuration")
    ap.add_argument("--method", choices=METHODS)
    ap.add_argument("--traj", type=int, metavar="N", help="QSD trajectories")
    ap.add_argument("--seed", type=int, metavar="S", help="QSD seed")
    ap.add_argument("--t-final", type=float, metavar="T")
    ap.add_argument("--dt-out", type=float, metavar="D")
    ap.add_argument("--out", metavar="DIR", help="output directory")
    ap.add_argument("--sweep", metavar="AXIS=V1,V2,...",
                    help="run once per value of a parameter (single-run configs)")
    ap.add_argument("--workers", type=int, default=1, help="sweep worker processes")
    ap.add_argument("--dump-coefficients", action="store_true",
                    help="also write the ten bath coefficients")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _overrides(args) -> dict:
    ov = {"method": args.method, "t_final": args.t_final, "dt_out": args.dt_out,
          "output_dir": args.out}
    if args.dump_coefficients:
        ov["dump_coefficients"] = True
    ens = {k: v for k, v in (("n_traj", args.traj), ("seed", args.seed)) if v is not None}
    if ens:
        ov["ensemble"] = ens
    return ov


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        configs = parse_config(args.config, overrides=_overrides(args),
                               preset=args.preset)
        if args.sweep:
            axis, _, raw = args.sweep.partition("=")
            values = [float(v) for v in raw.split(",") if v.strip()]
            if len(configs) != 1:
                raise ValidationError("--sweep needs a single-run configuration")
    except (ParseError, ValidationError, ValueError) as exc:
        print(f"simulate: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.sweep:
        try:
            outcomes = sweep(configs[0], axis.strip(), values, workers=args.workers)
        except ValidationError as exc:
            print(f"simulate: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        statuses = [o.status for o in outcomes]
    else:
        statuses = [run(cfg) for cfg in configs]
    return aggregate_status(statuses) if statuses else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
