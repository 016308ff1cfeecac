"""Command line entry point: ``rrcml run|stats|datastats``."""
import argparse
import logging
import sys
from pathlib import Path

from . import datamodel, harness


def _cmd_run(args):
    cfg = harness.ExperimentConfig.from_file(args.config, seed=args.seed, jobs=args.jobs,
                                             output=args.out)
    records = harness.run_experiment(cfg)
    failed = sum(1 for r in records if r.error)
    print(f"{len(records)} runs written to {cfg.output} ({failed} failed)")
    return 0


def _cmd_stats(args):
    records = harness.read_runs(args.runs)
    out = args.out or str(Path(args.runs).parent)
    for path in harness.emit_reports(records, out):
        print(path)
    return 0


def _cmd_datastats(args):
    ds = datamodel.load_dataset(args.dataset, args.format, args.labels)
    stats = datamodel.compute_stats(ds)
    if args.out:
        datamodel.write_stats_report([stats], args.out)
    print("name,|S|,d,L,LC,UC,IR")
    print(f"{stats.name},{stats.n_instances},{stats.n_features},{stats.n_labels},"
          f"{stats.cardinality:.2f},{stats.unique_combinations},{stats.mean_ir:.2f}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="rrcml", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment described by a JSON config")
    run.add_argument("config")
    run.add_argument("--seed", type=int)
    run.add_argument("--jobs", type=int)
    run.add_argument("--out", help="output directory (overrides the config)")
    run.set_defaults(func=_cmd_run)

    st = sub.add_parser("stats", help="rank tables and tests from an existing runs.csv")
    st.add_argument("runs")
    st.add_argument("--out")
    st.set_defaults(func=_cmd_stats)

    ds = sub.add_parser("datastats", help="dataset characteristics")
    ds.add_argument("dataset")
    ds.add_argument("--format", default="csv-ml", choices=["csv-ml", "arff-ml"])
    ds.add_argument("--labels", help="label-name file for arff-ml datasets")
    ds.add_argument("--out", help="write the stats CSV here")
    ds.set_defaults(func=_cmd_datastats)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
