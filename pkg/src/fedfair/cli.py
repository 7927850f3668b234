"""Command-line interface.

Subcommands: prepare-data, run, baseline, plot-data, synth-data. On failure a
machine-readable error record is printed to stderr and the exit code is 1.
"""

import argparse
import json
import sys
from pathlib import Path

from . import data, harness, synth


def _cmd_prepare_data(args):
    loader = data.load_adult if args.dataset == "adult" else data.load_compas
    d = loader(args.infile)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    data.save_dataset(d, args.out)
    print(f"wrote {d.n_samples} samples x {d.n_features} features to {args.out}")


def _cmd_run(args):
    cfg = harness.ExperimentConfig.from_yaml(args.config)
    result = harness.run_experiment(cfg, out_dir=args.out)
    print(json.dumps(result.aggregates, indent=2))


def _cmd_baseline(args):
    cfg = harness.ExperimentConfig.from_yaml(args.config)
    result = harness.run_baseline(cfg, out_dir=args.out)
    print(json.dumps(result.aggregates, indent=2))


def _cmd_plot_data(args):
    results = []
    for path in args.infiles:
        with open(path) as fh:
            raw = json.load(fh)
        results.append(
            harness.ExperimentResult(
                config=raw["config"],
                replications=raw["replications"],
                aggregates=raw["aggregates"],
            )
        )
    harness.emit_plot_data(results, args.layout, args.out)
    print(f"wrote plot data to {args.out}")


def _cmd_synth_data(args):
    maker = synth.make_adult_csv if args.dataset == "adult" else synth.make_compas_csv
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    kwargs = {"seed": args.seed}
    if args.samples:
        kwargs["n"] = args.samples
    maker(args.out, **kwargs)
    print(f"wrote synthetic {args.dataset} file to {args.out}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedfair",
        description="Federated-learning bias-mitigation simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare-data", help="preprocess a raw CSV into canonical form")
    p.add_argument("dataset", choices=["adult", "compas"])
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_prepare_data)

    p = sub.add_parser("run", help="run one experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("baseline", help="run the centralized baseline for a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("plot-data", help="flatten result JSONs into plot-ready CSV")
    p.add_argument("--layout", required=True,
                   choices=sorted(harness.LAYOUT_FIELDS))
    p.add_argument("--in", dest="infiles", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plot_data)

    p = sub.add_parser("synth-data", help="generate a synthetic raw CSV (no real data needed)")
    p.add_argument("dataset", choices=["adult", "compas"])
    p.add_argument("--out", required=True)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth_data)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except Exception as e:  # noqa: BLE001 - CLI boundary
        record = {"error": str(e), "type": type(e).__name__}
        print(json.dumps(record), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
