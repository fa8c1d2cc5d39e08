"""Command-line entry points for the experiment pipeline."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, datagen, pipeline


def _parse_seeds(args):
    if getattr(args, "seeds", None):
        try:
            return [int(s) for s in args.seeds.split(",") if s.strip() != ""]
        except ValueError:
            raise pipeline.ConfigError(f"--seeds must be comma-separated integers, got {args.seeds!r}")
    if getattr(args, "seed", None) is not None:
        return [args.seed]
    return None


def _load_config(args):
    if args.config:
        cfg = pipeline.load_config(args.config)
    else:
        cfg = pipeline.resolve_config({"version": pipeline.CONFIG_VERSION})
    if getattr(args, "variant", None):
        if args.variant not in pipeline.VALID_VARIANTS:
            raise pipeline.ConfigError(
                f"unknown variant {args.variant!r}; valid variants: "
                f"{', '.join(pipeline.VALID_VARIANTS)}")
        cfg["variant"] = args.variant
    return cfg


def _out_dir(args, cfg):
    if args.out:
        return Path(args.out)
    if cfg.get("out"):
        return Path(cfg["out"])
    return Path("runs") / cfg["name"]


def _add_common(sub, config_required=False):
    sub.add_argument("--config", required=config_required,
                     help="experiment config (JSON)")
    sub.add_argument("--out", help="run directory (default: runs/<name>)")
    sub.add_argument("--seed", type=int, help="override the config seed")
    sub.add_argument("--seeds", help="comma-separated seeds; writes seed-<k>/ subdirectories")
    sub.add_argument("--variant", help="override the model variant")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="faultdiag",
        description="Fault diagnostics experiments: dataset generation, "
                    "representation learning, detection, segmentation, reports.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate a dataset CSV")
    gen.add_argument("--out", required=True, help="directory for dataset.csv")
    gen.add_argument("--spec", help="generation spec (JSON); default matches the benchmark layout")
    gen.add_argument("--seed", type=int, default=0, help="dataset seed")

    for name in ("train", "detect", "segment", "metrics", "project"):
        _add_common(subs.add_parser(name, help=f"run the {name} stage"))

    sweep = subs.add_parser("sweep", help="sweep a loss weight across values")
    _add_common(sweep)
    sweep.add_argument("--param", required=True, choices=("beta", "gamma"))
    sweep.add_argument("--values", required=True,
                       help="comma-separated numeric values, e.g. 1,3,5,9")

    rep = subs.add_parser("report", help="consolidate a run directory into report.md")
    rep.add_argument("--run", required=True, help="run directory to consolidate")
    return parser


def _cmd_gen(args):
    if args.spec:
        with open(args.spec) as fh:
            spec_payload = json.load(fh)
        spec = datagen.GenerationSpec.from_dict(spec_payload)
    else:
        spec = datagen.default_generation_spec()
    cfg = pipeline.resolve_config({
        "version": pipeline.CONFIG_VERSION,
        "dataset": {"seed": args.seed, "spec": spec.to_dict()},
    })
    ds = pipeline.stage_generate(cfg, Path(args.out))
    print(f"wrote {Path(args.out) / 'dataset.csv'} ({ds.X.shape[0]} rows)")
    return 0


def _cmd_stage(args):
    cfg = _load_config(args)
    if args.seed is not None and not args.seeds:
        cfg["seed"] = args.seed
    out = _out_dir(args, cfg)
    pipeline.run_stage(cfg, args.command, out, _parse_seeds(args))
    print(f"{args.command}: done -> {out}")
    return 0


def _cmd_sweep(args):
    cfg = _load_config(args)
    if args.seed is not None:
        cfg["seed"] = args.seed
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError:
        raise pipeline.ConfigError(f"--values must be comma-separated numbers, got {args.values!r}")
    if not values:
        raise pipeline.ConfigError("--values is empty")
    out = _out_dir(args, cfg)
    pipeline.run_sweep(cfg, args.param, values, out, variant=args.variant)
    print(f"sweep: done -> {out / 'sweep.md'}")
    return 0


def _cmd_report(args):
    path = pipeline.run_report(Path(args.run))
    print(f"report: done -> {path}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "report":
            return _cmd_report(args)
        return _cmd_stage(args)
    except pipeline.StageError as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1
    except (pipeline.ConfigError, datagen.CsvParseError,
            datagen.DetectabilityError, ValueError, OSError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
