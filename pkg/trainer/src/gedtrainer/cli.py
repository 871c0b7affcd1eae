"""gedtrainer: fine-tune an encoder token classifier on gedkit dataset files."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import TrainSpec
from .data import read_examples, write_predictions
from .predicting import load_artifact, predict_labels
from .training import DEFAULT_SCORER, train_all_seeds


def cmd_train(args) -> int:
    if args.config:
        spec = TrainSpec.from_json(args.config)
    else:
        spec = TrainSpec(model_path=args.model)
    overrides = {}
    if args.model:
        overrides["model_path"] = args.model
    if args.seeds:
        overrides["seeds"] = tuple(int(s) for s in args.seeds.split(","))
    if args.max_epochs:
        overrides["max_epochs"] = args.max_epochs
    if args.batch_size:
        overrides["batch_size"] = args.batch_size
    if args.freeze_encoder:
        overrides["freeze_encoder"] = True
    if overrides:
        spec = TrainSpec.from_dict({**spec.to_dict(), **overrides})
    scorer = tuple(args.scorer.split()) if args.scorer else DEFAULT_SCORER
    runs = train_all_seeds(args.train, args.dev, spec, args.out, scorer)
    for run in runs:
        print(
            f"seed {run['seed']}: best epoch {run['best_epoch']} "
            f"dev micro F1 {run['best_dev_micro_f1']:.4f} ({run['wall_time_s']}s)"
        )
    summary = Path(args.out) / "runs.json"
    summary.write_text(json.dumps(runs, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_predict(args) -> int:
    model, tokenizer, labels = load_artifact(args.artifact)
    examples = read_examples(args.infile)
    predicted = predict_labels(model, tokenizer, examples, labels)
    write_predictions(examples, predicted, args.out)
    print(f"predicted {len(examples)} sentences -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gedtrainer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune on a gedkit train/dev split")
    p.add_argument("--train", required=True, help="training JSON-lines file")
    p.add_argument("--dev", required=True, help="dev JSON-lines file (gold for epoch selection)")
    p.add_argument("--out", required=True, help="output directory (one subdir per seed)")
    p.add_argument("--model", default=None, help="encoder model path (HF directory)")
    p.add_argument("--config", default=None, help="JSON config mirroring the training spec")
    p.add_argument("--seeds", default=None, help="comma-separated seeds (default 11,22,33,44,55)")
    p.add_argument("--max-epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None, choices=[5, 32])
    p.add_argument("--freeze-encoder", action="store_true",
                   help="train only the output layer; encoder weights stay fixed")
    p.add_argument("--scorer", default=None,
                   help="dev scorer command (default: gedkit)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label a dataset file with a trained artifact")
    p.add_argument("--artifact", required=True, help="seed_<n> directory from train")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
