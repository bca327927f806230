"""Command-line entry point: ``fracturelab <subcommand> ...``.

Exit status is 0 on success, 1 on usage errors and 2 on data errors
(unreadable or malformed inputs).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Sequence, TypeVar

from . import aggregate, corpus_io, metrics, relabel, robustness
from .errors import FractureLabError
from .labeler import Lexicon, RuleLabeler, default_labeler
from .model import LabeledCorpus, PredictionSet
from .templater import render_corpus

logger = logging.getLogger("fracturelab")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

T = TypeVar("T")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _read(fn: Callable[..., T], path: Path, *args) -> T:
    try:
        return fn(path, *args)
    except (FractureLabError, ValueError, OSError) as exc:
        raise DataError(f"{path}: {exc}") from exc


def _gt_corpus(path: Path) -> LabeledCorpus:
    labels = _read(corpus_io.load_labels, path)
    return labels.to_corpus() if isinstance(labels, PredictionSet) else labels


def cmd_label(args) -> None:
    records = _read(corpus_io.load_reports, args.reports)
    labeler = RuleLabeler(_read(Lexicon.load, args.lexicon)) if args.lexicon else default_labeler()
    corpus_io.write_labels(labeler.label_corpus(records, jobs=args.jobs), args.out)


def cmd_render(args) -> None:
    labels = _read(corpus_io.load_labels, args.labels)
    if isinstance(labels, PredictionSet):
        labels = labels.to_corpus()
    rows = render_corpus(labels)
    corpus_io.atomic_write_text(args.out, corpus_io.csv_text(("study_id", "sentence"), rows))


def cmd_eval(args) -> None:
    preds = _read(corpus_io.load_predictions, args.pred)
    gt = _gt_corpus(args.gt)
    try:
        reports = metrics.evaluate(preds, gt)
    except FractureLabError as exc:
        raise DataError(str(exc)) from exc
    corpus_io.atomic_write_text(args.out, metrics.reports_to_json(reports, preds.model_name))
    sys.stdout.write(metrics.format_reports(reports))


def cmd_ensemble(args) -> None:
    members = [_read(corpus_io.load_predictions, p) for p in args.pred]
    try:
        union = aggregate.ensemble_union(members)
    except FractureLabError as exc:
        raise DataError(str(exc)) from exc
    corpus_io.write_labels(union, args.out)


def cmd_audit(args) -> None:
    legacy = _read(corpus_io.load_legacy, args.legacy)
    relabeled = _gt_corpus(args.relabeled)
    result = aggregate.audit(legacy, relabeled)
    corpus_io.write_discrepancies(result, args.out)
    summary = json.dumps(result.summary(), indent=2) + "\n"
    if args.summary:
        corpus_io.atomic_write_text(args.summary, summary)
    sys.stdout.write(summary)


def _config(args) -> robustness.PerturbationConfig:
    try:
        return robustness.PerturbationConfig(args.seed, args.synonym_rate, args.typo_rate)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_perturb(args) -> None:
    cfg = _config(args)
    records = _read(corpus_io.load_reports, args.reports)
    corpus_io.write_reports(robustness.perturb_corpus(records, cfg), args.out)


def cmd_relabel(args) -> None:
    records = _read(corpus_io.load_reports, args.reports)
    if args.responses:
        rows = _read(lambda p: list(corpus_io.read_rows(p, ("study_id", "response"))), args.responses)
        responses = [(str(row["study_id"]), row["response"]) for _, row in rows]
        result = relabel.collect(records, responses)
    else:
        try:
            transport = relabel.HttpTransport.from_env()
        except RuntimeError as exc:
            raise UsageError(f"{exc} (or pass --responses)") from exc
        policy = relabel.RetryPolicy(max_attempts=args.max_attempts, max_workers=args.jobs)
        try:
            result = relabel.run_batch(records, transport, policy)
        except FractureLabError as exc:
            raise DataError(str(exc)) from exc
    relabel.aggregate_to_csv(result.corpus, args.out)
    if args.failures:
        rows = [(f.study_id, f.kind, f.reason, str(f.attempts)) for f in result.failures]
        corpus_io.atomic_write_text(args.failures,
                                    corpus_io.csv_text(("study_id", "kind", "reason", "attempts"), rows))
    logger.info("relabel: %d labeled, %d failed", len(result.corpus), len(result.failures))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracturelab",
                     description="Fracture labeling, templating and evaluation for radiology reports.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("label", help="label reports with the rule parser")
    p.add_argument("--reports", type=Path, required=True, help="reports CSV or JSONL")
    p.add_argument("--out", type=Path, required=True, help="output labels CSV")
    p.add_argument("--lexicon", type=Path, help="alternative lexicon table")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("render", help="render labels as template sentences")
    p.add_argument("--labels", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="output CSV (study_id, sentence)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--gt", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="metrics JSON document")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ensemble", help="union-combine prediction files")
    p.add_argument("--pred", type=Path, nargs="+", required=True)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("audit", help="list disagreements between legacy and relabeled labels")
    p.add_argument("--legacy", type=Path, required=True, help="CSV with study_id,fracture")
    p.add_argument("--relabeled", type=Path, required=True, help="labels CSV")
    p.add_argument("--out", type=Path, required=True, help="discrepancy CSV")
    p.add_argument("--summary", type=Path, help="also write the summary JSON here")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("perturb", help="apply seeded synonym and typo noise to reports")
    p.add_argument("--reports", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--synonym-rate", type=float, default=robustness.DEFAULT_SYNONYM_RATE)
    p.add_argument("--typo-rate", type=float, default=robustness.DEFAULT_TYPO_RATE)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("relabel", help="annotate reports with an LLM endpoint")
    p.add_argument("--reports", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="output labels CSV")
    p.add_argument("--responses", type=Path,
                   help="validate saved responses (JSONL or CSV with study_id,response) instead of calling the endpoint")
    p.add_argument("--failures", type=Path, help="write the failure log CSV here")
    p.add_argument("--jobs", type=int, default=8, help="requests in flight")
    p.add_argument("--max-attempts", type=int, default=5)
    p.set_defaults(func=cmd_relabel)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be at least 1")
        args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"fracturelab: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
