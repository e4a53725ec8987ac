"""Command-line surface: preprocess, train, eval, detect, stats."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dataset, metrics, reporting
from .dataset import DatasetError
from .model import ModelFormatError, load_model, save_model
from .training import Checkpoint, TrainConfig, TrainingError, predict, train


class CliError(Exception):
    pass


def _positive_real(name: str):
    def parse(value: str) -> float:
        x = float(value)
        if x <= 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {value}")
        return x

    return parse


def _nonneg_real(name: str):
    def parse(value: str) -> float:
        x = float(value)
        if x < 0:
            raise argparse.ArgumentTypeError(f"{name} must be non-negative, got {value}")
        return x

    return parse


def _bool_flag(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccidetect",
        description="Just-in-time code-comment inconsistency detection",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("preprocess", help="lex, diff and tag raw records")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("train", help="train a detector on preprocessed records")
    p.add_argument("--train", required=True, dest="train_path")
    p.add_argument("--valid", required=True, dest="valid_path")
    p.add_argument("--out", required=True)
    p.add_argument("--tau", type=_positive_real("tau"), default=0.08)
    p.add_argument("--alpha", type=_nonneg_real("alpha"), default=1.0)
    p.add_argument("--lambda", type=_nonneg_real("lambda"), default=0.1, dest="lambda_")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=_positive_real("lr"), default=1e-3)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--max-len", type=int, default=256)
    p.add_argument("--attention", type=_bool_flag, default=False)

    p = sub.add_parser("eval", help="evaluate a model on a preprocessed test set")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--subset", default=None)
    p.add_argument("--threshold", type=float, default=None)

    p = sub.add_parser("detect", help="score one before/after pair and comment")
    p.add_argument("--model", required=True)
    p.add_argument("--old-file", required=True)
    p.add_argument("--new-file", required=True)
    p.add_argument("--comment", required=True)

    p = sub.add_parser("stats", help="per-type record counts across splits")
    p.add_argument("--train", default=None, dest="train_path")
    p.add_argument("--valid", default=None, dest="valid_path")
    p.add_argument("--test", default=None, dest="test_path")

    return parser


def _cmd_preprocess(args: argparse.Namespace) -> int:
    records = dataset.load_records(args.input)
    pre = dataset.preprocess(records)
    dataset.save_preprocessed(pre, args.output)
    print(f"preprocessed {len(pre)} records -> {args.output}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = TrainConfig(
        batch_size=args.batch_size,
        learning_rate=args.lr,
        max_epochs=args.epochs,
        patience=args.patience,
        seed=args.seed,
        tau=args.tau,
        alpha=args.alpha,
        lam=args.lambda_,
        dim=args.dim,
        max_len=args.max_len,
        attention=args.attention,
    )
    train_set = dataset.load_preprocessed(args.train_path)
    valid_set = dataset.load_preprocessed(args.valid_path)
    log_path = args.out + ".log.jsonl"
    with open(log_path, "w", encoding="utf-8") as log:
        ckpt = train(train_set, valid_set, cfg, log=log)
    _save_checkpoint(args.out, ckpt, cfg)
    reporting.save_loss_curves(log_path, args.out + ".loss.png")
    print(f"best epoch {ckpt.epoch} validation F1 {ckpt.validation_f1:.4f}")
    print(f"checkpoint -> {args.out}")
    return 0


def _save_checkpoint(path: str, ckpt: Checkpoint, cfg: TrainConfig) -> None:
    extras = {
        "epoch": str(ckpt.epoch),
        "validation_f1": repr(ckpt.validation_f1),
        "tau": repr(cfg.tau),
        "alpha": repr(cfg.alpha),
        "lambda": repr(cfg.lam),
        "threshold": repr(cfg.threshold),
        "input_mode": cfg.input_mode,
    }
    save_model(path, ckpt.params, ckpt.vocab, extras)


def _cmd_eval(args: argparse.Namespace) -> int:
    params, vocab, extras = load_model(args.model)
    test_set = dataset.load_preprocessed(args.test)
    threshold = args.threshold
    if threshold is None:
        threshold = float(extras.get("threshold", 0.5))
    if not 0.0 < threshold < 1.0:
        raise CliError(f"threshold must lie in (0, 1), got {threshold}")
    input_mode = extras.get("input_mode", "tagged")

    preds = predict(test_set, params, vocab, threshold, input_mode)
    gold = [r.record.label for r in test_set]
    types = [r.record.comment_type for r in test_set]
    labels = [p["label"] for p in preds]
    full = metrics.report(labels, gold, types)
    out = {"threshold": threshold, "full": full}

    print("Full test set")
    print(metrics.render_table(full))

    if args.subset is not None:
        wanted = dataset.load_id_subset(args.subset)
        by_id = {r.record.id: i for i, r in enumerate(test_set)}
        missing = [rid for rid in wanted if rid not in by_id]
        if missing:
            raise CliError(f"subset ids not present in test set: {', '.join(missing)}")
        idx = [by_id[rid] for rid in wanted]
        sub = metrics.report(
            [labels[i] for i in idx], [gold[i] for i in idx], [types[i] for i in idx]
        )
        out["validated_subset"] = sub
        print()
        print(f"Validated subset ({len(idx)} records)")
        print(metrics.render_table(sub))

    report_path = args.model + ".eval.json"
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(out, fh, indent=2)
        fh.write("\n")
    with open(args.model + ".eval.txt", "w", encoding="utf-8") as fh:
        fh.write(metrics.render_table(full) + "\n")
    reporting.save_metrics_figure(full, args.model + ".eval.png")
    print(f"\nreport -> {report_path}")
    return 0


def _cmd_detect(args: argparse.Namespace) -> int:
    if not args.comment.strip():
        raise CliError("comment must be non-empty")
    params, vocab, extras = load_model(args.model)
    old_code = Path(args.old_file).read_text(encoding="utf-8")
    new_code = Path(args.new_file).read_text(encoding="utf-8")
    if not old_code.strip() or not new_code.strip():
        raise CliError("code files must be non-empty")
    rec = dataset.CciRecord(
        id="detect",
        comment_type="summary",
        comment=args.comment,
        old_code=old_code,
        new_code=new_code,
        label=0,  # placeholder, unused for scoring
    )
    pre = dataset.preprocess_record(rec)
    threshold = float(extras.get("threshold", 0.5))
    input_mode = extras.get("input_mode", "tagged")
    (pred,) = predict([pre], params, vocab, threshold, input_mode)
    verdict = "inconsistent" if pred["label"] == 1 else "consistent"
    print(
        json.dumps(
            {
                "probability": pred["probability"],
                "verdict": verdict,
                "tagged_diff": pre.tagged_diff,
            }
        )
    )
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    splits: dict[str, list[dataset.CciRecord]] = {}
    for name, path in (
        ("train", args.train_path),
        ("validation", args.valid_path),
        ("test", args.test_path),
    ):
        if path is not None:
            splits[name] = dataset.load_records(path)
    if not splits:
        raise CliError("provide at least one of --train/--valid/--test")
    stats = dataset.compute_stats(splits)
    print(json.dumps(stats.as_dict(), indent=2))
    return 0


_COMMANDS = {
    "preprocess": _cmd_preprocess,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "detect": _cmd_detect,
    "stats": _cmd_stats,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.subcommand](args)
    except (CliError, DatasetError, TrainingError, ModelFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
