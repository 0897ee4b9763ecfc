#!/usr/bin/env python3
"""
Multi-granularity evidence retrieval and reasoning - CLI Interface

Commands:
    ingest    validate a dataset and print entity counts
    label     distant-supervision labels (optionally oracle scores)
    train     fit the unified retriever
    predict   navigate with the evidence selector and answer every question
    eval      EM / F1 / R@1 of a predictions file
    ablate    compare evidence granularities
    gensynth  write a seeded synthetic corpus

Exit status: 0 on success, 2 on usage / parse / schema errors, 1 otherwise.
"""

import argparse
import sys
from collections.abc import Mapping, Sequence
from typing import Any, get_args

from config import AblationMode, RunConfig, get_settings, load_run_config
from core.errors import ParseError, PipelineError, SchemaError, UsageError
from core.logging import LogContext, log_stage, logger, setup_logging
from models import AnswerType, Dataset, LabelSet, ScoreSet
from readers import ProximityReader
from services.evaluation import ablate, check_predictions, evaluate
from services.featurizer import fit_featurizer
from services.orchestrator import Orchestrator
from services.retriever import scores_from_labels
from services.supervision import label_candidates
from services.synthetic import generate_synthetic
from services.trainer import Trainer
from storage import (
    export_labels,
    export_predictions,
    export_scores,
    import_labels,
    import_predictions,
    import_scores,
    load_dataset,
    load_model,
    save_dataset,
    save_model,
    write_ablation,
    write_metrics,
)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------


def _require_path(run: RunConfig, name: str) -> str:
    path = getattr(run.paths, name)
    if not path:
        raise UsageError(f"--{name} is required for this command")
    return path


def _require_seed(run: RunConfig, section: str) -> None:
    if run.seed is None and "seed" not in getattr(run, section).model_fields_set:
        raise UsageError("a seed is required: pass --seed or set it in the config")


def _labels_for(run: RunConfig, dataset: Dataset) -> dict[str, LabelSet]:
    """Labels from --labels, or computed on the fly."""
    if run.paths.labels:
        labels = import_labels(run.paths.labels, dataset)
        missing = dataset.question_ids() - labels.keys()
        if missing:
            raise SchemaError(sorted(missing)[0], "no labels for question")
        return labels
    return {
        q.id: label_candidates(q, dataset.table_for(q), dataset.passages)
        for q in dataset.questions
    }


def _orchestrator(run: RunConfig, dataset: Dataset) -> Orchestrator:
    if not run.paths.model and not run.paths.scores:
        raise UsageError("either --model or --scores is required")
    scores = import_scores(run.paths.scores, dataset) if run.paths.scores else None
    scorer = load_model(run.paths.model) if run.paths.model and scores is None else None
    reader = ProximityReader(run.reader.max_span_tokens)
    return Orchestrator(
        dataset, scorer=scorer, scores=scores, reader=reader, reader_config=run.reader
    )


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


@log_stage
def cmd_ingest(run: RunConfig) -> int:
    dataset = load_dataset(_require_path(run, "dataset"))
    types = [q.gold_type for q in dataset.questions]
    print(f"tables: {len(dataset.tables)}")
    print(f"passages: {len(dataset.passages)}")
    print(f"questions: {len(dataset.questions)}")
    print(f"in_table: {types.count(AnswerType.IN_TABLE)}")
    print(f"in_passage: {types.count(AnswerType.IN_PASSAGE)}")
    print(f"untyped: {types.count(None)}")
    return EXIT_OK


@log_stage
def cmd_label(run: RunConfig, oracle_scores: str | None = None) -> int:
    dataset = load_dataset(_require_path(run, "dataset"))
    out = _require_path(run, "labels")
    labels = {
        q.id: label_candidates(q, dataset.table_for(q), dataset.passages)
        for q in dataset.questions
    }
    export_labels(labels, out)
    n_positive = sum(1 for s in labels.values() if any(s.labels.values()))
    logger.info("Labels written", path=out, n_questions=len(labels), n_answerable=n_positive)

    if oracle_scores:
        export_scores({qid: scores_from_labels(s) for qid, s in labels.items()}, oracle_scores)
        logger.info("Oracle scores written", path=oracle_scores)
    return EXIT_OK


@log_stage
def cmd_train(run: RunConfig) -> int:
    _require_seed(run, "train")
    dataset = load_dataset(_require_path(run, "dataset"))
    out = _require_path(run, "model")
    labels = _labels_for(run, dataset)

    featurizer = fit_featurizer(dataset, shared_projection=run.shared_projection)
    trainer = Trainer(run.train, featurizer)
    scorer = trainer.fit(dataset, labels)
    save_model(scorer, out)
    logger.info(
        "Model written",
        path=out,
        dimension=scorer.dimension,
        initial_loss=round(trainer.history[0], 6) if trainer.history else None,
        final_loss=round(trainer.history[-1], 6) if trainer.history else None,
    )
    return EXIT_OK


@log_stage
def cmd_predict(run: RunConfig) -> int:
    dataset = load_dataset(_require_path(run, "dataset"))
    out = _require_path(run, "predictions")
    if len(run.modes) != 1:
        raise UsageError("predict takes a single --mode")
    predictions = _orchestrator(run, dataset).predict(run.modes[0])
    export_predictions(predictions, out)
    return EXIT_OK


@log_stage
def cmd_eval(run: RunConfig) -> int:
    dataset = load_dataset(_require_path(run, "dataset"))
    predictions = import_predictions(_require_path(run, "predictions"), dataset)
    out = _require_path(run, "metrics")
    check_predictions(predictions, dataset)
    labels = _labels_for(run, dataset)

    scores: Mapping[str, ScoreSet] | None = None
    if run.paths.scores or run.paths.model:
        scores = _orchestrator(run, dataset).all_scores()
    report = evaluate(predictions, dataset, labels, scores)
    write_metrics(report, out)
    print(f"EM {report.total.em:.6f}  F1 {report.total.f1:.6f}  n {report.total.n}")
    return EXIT_OK


@log_stage
def cmd_ablate(run: RunConfig) -> int:
    dataset = load_dataset(_require_path(run, "dataset"))
    out = _require_path(run, "metrics")
    labels = _labels_for(run, dataset)
    orchestrator = _orchestrator(run, dataset)
    reports = ablate(
        dataset,
        labels,
        orchestrator.scorer,
        orchestrator.reader,
        run.modes,
        scores=orchestrator.external_scores,
        reader_config=run.reader,
    )
    write_ablation(reports, out)
    for mode, report in reports.items():
        print(f"{mode:>6}  EM {report.total.em:.6f}  F1 {report.total.f1:.6f}")
    return EXIT_OK


@log_stage
def cmd_gensynth(run: RunConfig) -> int:
    _require_seed(run, "synth")
    out = _require_path(run, "dataset")
    save_dataset(generate_synthetic(run.synth), out)
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "label": cmd_label,
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "gensynth": cmd_gensynth,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override it")
    for name in ("dataset", "labels", "model", "scores", "predictions", "metrics"):
        common.add_argument(f"--{name}", metavar="PATH")
    common.add_argument("--seed", type=int)
    common.add_argument(
        "--mode",
        action="append",
        choices=get_args(AblationMode),
        help="Evidence mode; repeat for several ablation modes",
    )
    common.add_argument("--group-size", type=int)
    common.add_argument("--tau", type=float)
    common.add_argument("--epochs", type=int)
    common.add_argument("--lr", type=float)
    common.add_argument("--noise-rate", type=float)
    common.add_argument(
        "--no-contrastive", action="store_true", help="Train with BCE only"
    )
    common.add_argument(
        "--separate-retrievers",
        action="store_true",
        help="One projection block per granularity instead of a shared one",
    )
    common.add_argument(
        "--full-batch", action="store_true", help="One gradient step per epoch"
    )

    parser = argparse.ArgumentParser(
        prog="hybridnav",
        description="Multi-granularity evidence retrieval and reasoning over hybrid tables",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="Validate a dataset")
    label = sub.add_parser("label", parents=[common], help="Write distant-supervision labels")
    label.add_argument(
        "--oracle-scores", metavar="PATH", help="Also write scores equal to the labels"
    )
    sub.add_parser("train", parents=[common], help="Train the retriever")
    sub.add_parser("predict", parents=[common], help="Answer every question")
    sub.add_parser("eval", parents=[common], help="Score a predictions file")
    sub.add_parser("ablate", parents=[common], help="Compare evidence granularities")
    synth = sub.add_parser("gensynth", parents=[common], help="Generate a synthetic corpus")
    synth.add_argument("--n-questions", type=int)
    synth.add_argument("--in-table-fraction", type=float)
    synth.add_argument("--distractor-rate", type=float)
    return parser


def overrides_from(args: argparse.Namespace) -> dict[str, Any]:
    """Flag values that were given, shaped like a run configuration."""
    paths = {
        name: getattr(args, name)
        for name in ("dataset", "labels", "model", "scores", "predictions", "metrics")
        if getattr(args, name) is not None
    }
    train_flags = {
        "group_size": args.group_size,
        "tau": args.tau,
        "epochs": args.epochs,
        "learning_rate": args.lr,
        "feature_noise_rate": args.noise_rate,
    }
    train = {k: v for k, v in train_flags.items() if v is not None}
    if args.no_contrastive:
        train["use_contrastive"] = False
    if args.full_batch:
        train["batching"] = "full"

    overrides: dict[str, Any] = {}
    if paths:
        overrides["paths"] = paths
    if train:
        overrides["train"] = train
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.mode:
        overrides["modes"] = args.mode
    elif args.command == "predict":
        overrides["modes"] = ["multi"]
    if args.separate_retrievers:
        overrides["shared_projection"] = False

    if args.command == "gensynth":
        synth_flags = {
            "n_questions": args.n_questions,
            "in_table_fraction": args.in_table_fraction,
            "distractor_rate": args.distractor_rate,
        }
        synth = {k: v for k, v in synth_flags.items() if v is not None}
        if synth:
            overrides["synth"] = synth
    return overrides


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command and return its exit status."""
    settings = get_settings()
    setup_logging(
        level=settings.log, log_to_file=settings.log_to_file, log_dir=settings.log_dir
    )

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    try:
        with LogContext(command=args.command):
            run = load_run_config(args.config, overrides_from(args))
            if args.command == "label":
                return cmd_label(run, args.oracle_scores)
            return COMMANDS[args.command](run)
    except (UsageError, ParseError, SchemaError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as e:
        logger.exception("Unexpected error", error=str(e))
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
