"""Command line front end.

Subcommands: design-codebook, train, sweep, gainmap, verify.  Exit codes:
0 on success, 1 on configuration/validation errors, 2 on numerical failure.
The output directory comes from the config file unless OMNIBEAM_OUT_DIR is
set.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np
import yaml

from . import harness
from .codebook import export_codebook_csv
from .geometry import Side
from .training import format_report, run_training


def _load(path):
    return harness.load_config(path)


def _open_out(config):
    out = harness.resolve_out_dir(config)
    os.makedirs(out, exist_ok=True)
    return out


def cmd_design_codebook(args) -> int:
    config = _load(args.config)
    ctx = harness.static_context(config)
    realization = harness._ios_realization(ctx, config.rings_proposed)
    out = _open_out(config)
    path = os.path.join(out, "codebook.csv")
    export_codebook_csv(realization.codebook, path)
    print(f"wrote {path} ({realization.leaf_count} leaves, "
          f"depth {realization.depth})")
    return 0


def cmd_train(args) -> int:
    config = _load(args.config)
    ctx = harness.static_context(config)
    seed = args.seed if args.seed is not None else config.seeds[0]
    drops = harness.drop_users(config, ctx.rayleigh,
                               np.random.default_rng(seed))
    users = harness.make_sim_users(drops, ctx)
    realization = harness._ios_realization(ctx, config.rings_proposed)
    report = run_training(realization, users, config.training_config)
    text = format_report(report)
    out = _open_out(config)
    path = os.path.join(out, "training_report.txt")
    with open(path, "w") as fh:
        fh.write(text)
    print(text, end="")
    print(f"wrote {path}")
    return 0


def cmd_sweep(args) -> int:
    config = _load(args.config)
    result = harness.snr_sweep(config)
    paths = harness.emit_results(result)
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_gainmap(args) -> int:
    config = _load(args.config)
    ctx = harness.static_context(config)
    realization = harness._ios_realization(ctx, config.rings_proposed)
    realized = realization.leaf(config.gainmap_leaf)
    xs, ys = harness.default_gainmap_axes(ctx)
    gains = harness.beam_gain_map(realized.beam_reflect, realized.beam_refract,
                                  ctx.ios, config.wavelength, xs, ys)
    out = _open_out(config)
    path = os.path.join(out, "gainmap.csv")
    harness.emit_gain_map(gains, xs, ys, path)
    check = harness.mirror_peak_check(gains, xs, ys)
    print(f"wrote {path}")
    print(f"reflective peak {check['reflective_peak']} "
          f"gain {check['reflective_gain']:.4g}")
    print(f"refractive peak {check['refractive_peak']} "
          f"gain {check['refractive_gain']:.4g}")
    print(f"gain ratio {check['ratio']:.6f} "
          f"mirror offset {check['mirror_offset']:.4g} m")
    return 0


def cmd_verify(args) -> int:
    config = _load(args.config) if args.config else None
    ok, lines = harness.verify_suite(config)
    for line in lines:
        print(line)
    return 0 if ok else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omnibeam",
        description="Omni-surface codebook design, beam training and sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design-codebook", help="synthesize and export the tree")
    p.add_argument("config")
    p.set_defaults(func=cmd_design_codebook)

    p = sub.add_parser("train", help="run one training drop and report it")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="full scheme-by-SNR sweep to CSV")
    p.add_argument("config")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gainmap", help="sample a leaf beam over the x-y plane")
    p.add_argument("config")
    p.set_defaults(func=cmd_gainmap)

    p = sub.add_parser("verify", help="run the built-in numerical checks")
    p.add_argument("config", nargs="?", default=None)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
