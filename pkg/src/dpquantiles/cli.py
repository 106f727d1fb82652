"""Command-line interface.

Subcommands:
  estimate  one mechanism run, prints the quantile estimates
  sweep     noise-sweep experiment, writes the fixed-schema CSV
  audit     empirical privacy-loss estimation, writes a report CSV
  verify    oracle suites; exits 1 on any failure
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .audit import AuditConfig, epsilon_eff
from .core import Bounds
from .datasets import PRESETS, SyntheticSpec, generate, load_csv
from .mechanisms import (
    NoiseConfig,
    composed_single_quantiles,
    hs_joint_exp,
    inverse_sensitivity_mechanism,
    joint_exp,
    recommended_sigma,
)
from .sampler import MechanismFlavor
from .sweep import SweepConfig, default_probability_vector, rows_to_csv, run_sweep
from . import verify as verify_mod

AUDIT_HEADER = ["mechanism", "eps", "noise_family", "noise_ratio", "epsilon_eff", "std_error"]


def _add_data_args(sub):
    sub.add_argument("--input", help="CSV file with a numeric column")
    sub.add_argument("--col", default=None, help="column name (default: first column)")
    sub.add_argument("--preset", choices=sorted(PRESETS), help="synthetic stand-in dataset")
    sub.add_argument("--n", type=int, default=1000, help="sample size (subsample or synthetic)")
    sub.add_argument("--bounds", nargs=2, type=float, required=True, metavar=("A", "B"))
    sub.add_argument("--seed", type=int, default=0)


def _load_data(args) -> tuple[np.ndarray, Bounds]:
    bounds = Bounds(*args.bounds)
    if args.input:
        report = load_csv(args.input, args.col, bounds, args.n, args.seed)
        if report.clamped or report.skipped:
            print(
                f"# clamped {report.clamped} values, skipped {report.skipped} rows",
                file=sys.stderr,
            )
        return report.values, bounds
    if args.preset:
        spec = SyntheticSpec("dirac_mixture", args.n, args.seed, PRESETS[args.preset])
        return generate(spec, bounds), bounds
    raise SystemExit2("one of --input or --preset is required")


class SystemExit2(SystemExit):
    def __init__(self, msg):
        print(f"error: {msg}", file=sys.stderr)
        super().__init__(2)


def _cmd_estimate(args) -> int:
    data, bounds = _load_data(args)
    p = default_probability_vector(args.m)
    rng = np.random.default_rng(args.seed)
    if args.mech == "hsjointexp":
        sigma = (
            recommended_sigma(data.size, args.eps, args.m, bounds)
            if args.sigma == "auto"
            else float(args.sigma)
        )
        cfg = NoiseConfig.from_std(args.noise_family, sigma)
        q = hs_joint_exp(data, bounds, p, args.eps, cfg, rng)
    elif args.mech == "jointexp":
        q = joint_exp(data, bounds, p, args.eps, rng)
    elif args.mech == "invsens":
        q = inverse_sensitivity_mechanism(data, bounds, p, args.eps, rng)
    else:
        q = composed_single_quantiles(data, bounds, p, args.eps, rng)
    for v in q:
        print(repr(float(v)))
    return 0


def _cmd_sweep(args) -> int:
    data, bounds = _load_data(args)
    ratios = tuple("auto" if r == "auto" else float(r) for r in args.ratios)
    cfg = SweepConfig(
        mechanisms=tuple(args.mechanisms),
        noise_families=tuple(args.noise_families),
        noise_ratios=ratios,
        m_values=tuple(args.m_values),
        eps_values=tuple(args.eps_values),
        replications=args.replications,
        seed=args.seed,
        dataset_id=args.dataset_id,
        measure_runtime=args.timing,
    )
    rows = run_sweep(data, bounds, cfg)
    out = Path(args.output)
    out.write_text(rows_to_csv(rows))
    if args.plot:
        from .plotting import plot_sweep

        plot_sweep(rows, out.with_suffix(".png"))
    return 0


def _cmd_audit(args) -> int:
    data, bounds = _load_data(args)
    p = default_probability_vector(args.m)
    records = []
    for ratio in args.ratios:
        ratio = float(ratio)
        if args.mech == "hsjointexp":
            noise = NoiseConfig.from_std(args.noise_family, ratio * bounds.width)
            cfg = AuditConfig(args.grid, args.grid, args.mc_samples, noise=noise, seed=args.seed)
            report = epsilon_eff(data, "hs", args.eps, p, bounds, cfg)
            family = args.noise_family
        else:
            flavor = (
                MechanismFlavor.JOINT_EXP
                if args.mech == "jointexp"
                else MechanismFlavor.INVERSE_SENSITIVITY
            )
            cfg = AuditConfig(args.grid, args.grid, 1, seed=args.seed)
            report = epsilon_eff(data, flavor, args.eps, p, bounds, cfg)
            family, ratio = "none", 0.0
        records.append(
            {
                "mechanism": args.mech,
                "eps": args.eps,
                "noise_family": family,
                "noise_ratio": ratio,
                "epsilon_eff": report.epsilon_eff,
                "std_error": report.std_error,
            }
        )
    with open(args.output, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=AUDIT_HEADER, lineterminator="\n")
        writer.writeheader()
        writer.writerows(records)
    if args.plot:
        from .plotting import plot_audit

        plot_audit(records, Path(args.output).with_suffix(".png"))
    return 0


def _cmd_verify(args) -> int:
    results = verify_mod.run_all(max_n=args.max_n, max_m=args.max_m, seed=args.seed)
    failed = False
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        failed = failed or not ok
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpquantiles")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="run one mechanism and print the quantiles")
    _add_data_args(est)
    est.add_argument("--m", type=int, default=5)
    est.add_argument("--eps", type=float, default=1.0)
    est.add_argument(
        "--mech", choices=("jointexp", "invsens", "hsjointexp", "composed"), default="jointexp"
    )
    est.add_argument("--sigma", default="auto", help="noise std or 'auto' (hsjointexp)")
    est.add_argument("--noise-family", choices=("uniform", "laplace", "gaussian"), default="uniform")
    est.set_defaults(func=_cmd_estimate)

    sw = sub.add_parser("sweep", help="noise sweep, writes SweepRow CSV")
    _add_data_args(sw)
    sw.add_argument("--output", required=True)
    sw.add_argument("--dataset-id", default="data")
    sw.add_argument(
        "--mechanisms",
        nargs="+",
        default=["joint_exp", "inverse_sensitivity", "hs_joint_exp"],
    )
    sw.add_argument("--noise-families", nargs="+", default=["uniform"])
    sw.add_argument("--ratios", nargs="+", default=[repr(float(r)) for r in np.logspace(-8, 0, 17)])
    sw.add_argument("--m-values", nargs="+", type=int, default=[5])
    sw.add_argument("--eps-values", nargs="+", type=float, default=[1.0])
    sw.add_argument("--replications", type=int, default=100)
    sw.add_argument("--timing", action="store_true", help="record wall times (breaks byte determinism)")
    sw.add_argument("--plot", action="store_true", help="render a figure next to the CSV")
    sw.set_defaults(func=_cmd_sweep)

    au = sub.add_parser("audit", help="empirical privacy loss, writes report CSV")
    _add_data_args(au)
    au.add_argument("--output", required=True)
    au.add_argument("--m", type=int, default=1)
    au.add_argument("--eps", type=float, default=1.0)
    au.add_argument("--mech", choices=("jointexp", "invsens", "hsjointexp"), default="hsjointexp")
    au.add_argument("--noise-family", choices=("uniform", "laplace", "gaussian"), default="laplace")
    au.add_argument("--ratios", nargs="+", default=["1e-3"])
    au.add_argument("--grid", type=int, default=64)
    au.add_argument("--mc-samples", type=int, default=2000)
    au.add_argument("--plot", action="store_true")
    au.set_defaults(func=_cmd_audit)

    ver = sub.add_parser("verify", help="run the oracle suites")
    ver.add_argument("--max-n", type=int, default=5)
    ver.add_argument("--max-m", type=int, default=2)
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except SystemExit2 as exc:
        return exc.code
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
