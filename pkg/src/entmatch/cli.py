"""Command line interface: per-stage subcommands plus end-to-end `run`."""

import argparse
import os
import sys

from . import metrics, synth, tables
from .config import ConfigError, load_config
from .pipeline import PipelineRun, StageError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_STAGE = 2

STAGE_COMMANDS = {
    "profile": ["stage_profile"],
    "clean": ["stage_profile", "stage_clean"],
    "index": ["stage_profile", "stage_clean", "stage_encode", "stage_index"],
    "featurize": ["stage_profile", "stage_clean", "stage_encode", "stage_index", "stage_featurize"],
    "train": [
        "stage_profile",
        "stage_clean",
        "stage_encode",
        "stage_index",
        "stage_featurize",
        "stage_train",
    ],
    "score": [
        "stage_profile",
        "stage_clean",
        "stage_encode",
        "stage_index",
        "stage_featurize",
        "stage_train",
        "stage_score",
        "stage_threshold",
    ],
    "cluster": [
        "stage_profile",
        "stage_clean",
        "stage_encode",
        "stage_index",
        "stage_featurize",
        "stage_train",
        "stage_score",
        "stage_threshold",
        "stage_cluster",
    ],
}


def _add_common(p):
    p.add_argument("--config", help="pipeline config file (YAML)")
    p.add_argument("--workers", type=int, help="worker count override")
    p.add_argument("--seed", type=int, help="rng seed override")
    p.add_argument("--force", action="store_true", help="re-run stages even if up to date")
    p.add_argument("--out", help="output directory override")


def build_parser():
    ap = argparse.ArgumentParser(prog="entmatch", description="Batch entity resolution pipeline")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, help_text in [
        ("profile", "profile the input dataset(s)"),
        ("clean", "apply cleaning rules and drop constant columns"),
        ("index", "generate candidate pairs via subset blocking"),
        ("featurize", "compute similarity feature vectors for candidate pairs"),
        ("train", "train the pair classifier from labels"),
        ("score", "score candidate pairs and apply the match threshold"),
        ("cluster", "extract disjoint-clique entity clusters (dedup mode)"),
        ("run", "run the full pipeline"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)

    p = sub.add_parser("evaluate", help="pairwise precision/recall/F1")
    _add_common(p)
    p.add_argument("--predicted", help="predicted pair file (id_a,id_b header)")
    p.add_argument("--truth", help="ground-truth pair file")

    p = sub.add_parser("synth", help="generate a synthetic dataset with planted duplicates")
    _add_common(p)
    p.add_argument("-n", type=int, required=True, help="number of base records")
    p.add_argument("--dup-rate", type=float, default=0.1)
    p.add_argument("--profile", default="moderate", choices=sorted(synth.CORRUPTION_PROFILES))
    return ap


def _load_run(args):
    if not args.config:
        raise ConfigError("--config is required for this command")
    config = load_config(args.config)
    if args.workers is not None:
        config.workers = args.workers
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.output_dir = args.out
    return PipelineRun(config, force=args.force)


def _cmd_stage(args):
    run = _load_run(args)
    for stage_fn in STAGE_COMMANDS[args.command]:
        getattr(run, stage_fn)()
    _print_status(run)
    return EXIT_OK


def _cmd_run(args):
    run = _load_run(args)
    run.run()
    _print_status(run)
    return EXIT_OK


def _print_status(run):
    for stage, rec in run.manifest["stages"].items():
        print(f"{stage}: {rec['status']}")


def _cmd_evaluate(args):
    if args.predicted and args.truth:
        predicted = synth.read_truth(args.predicted)
        truth = synth.read_truth(args.truth)
        report = metrics.pairwise_metrics(predicted, truth)
        print(report.to_text(), end="")
        return EXIT_OK
    run = _load_run(args)
    run.stage_evaluate()
    path = run.path("evaluation.txt")
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            print(fh.read(), end="")
    _print_status(run)
    return EXIT_OK


def _cmd_synth(args):
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    seed = args.seed if args.seed is not None else 0
    table, truth = synth.generate_synthetic(args.n, args.dup_rate, args.profile, seed=seed)
    data_path = os.path.join(out, "data.csv")
    truth_path = os.path.join(out, "truth.csv")
    tables.write_dataset(table, data_path)
    synth.write_truth(truth, truth_path)
    print(f"wrote {table.n_rows} records to {data_path}")
    print(f"wrote {len(truth)} truth pairs to {truth_path}")
    return EXIT_OK


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "synth":
            return _cmd_synth(args)
        return _cmd_stage(args)
    except (ConfigError, synth.SynthError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STAGE
    except Exception as e:  # stage-level failures from direct library errors
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
