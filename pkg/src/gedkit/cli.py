"""Command-line entry point: ingest, inject, split, train, score, curve, feedback."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import datasets, feedback, injection, metrics, perceptron
from .corpus import (
    TYPED_SCHEME,
    Diagnostic,
    parse_conllu_file,
    read_labeled_file,
    serialize_labeled,
)

DEFAULT_SEED = 42


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)


def _write_json(path: Path, payload: dict) -> None:
    _write(path, (json.dumps(payload, ensure_ascii=False, indent=2) + "\n").encode("utf-8"))


def _plan_from_args(args) -> datasets.SamplingPlan:
    if args.sizes:
        sizes = tuple(None if s == "all" else int(s) for s in args.sizes.split(","))
        per_type = args.plan != "real_ladder"
        return datasets.SamplingPlan.custom(sizes, per_type=per_type, seed=args.seed)
    if args.plan == "real_ladder":
        return datasets.SamplingPlan.real_ladder(seed=args.seed)
    return datasets.SamplingPlan.pseudo_pow2(seed=args.seed)


def cmd_inject(args) -> int:
    out = Path(args.out)
    diagnostics: list[Diagnostic] = []
    corpus = parse_conllu_file(args.infile, diagnostics=diagnostics)
    outcomes, summary = injection.generate(corpus, seed=args.seed)
    used = {o.source_id for o in outcomes}
    error_free = [
        s for s in corpus if s.id not in used and injection.eligible(s)
    ]
    _write(out / "outcomes.jsonl", injection.write_outcomes(outcomes))
    _write(
        out / "error_free.jsonl",
        serialize_labeled([datasets.error_free_labeled(s) for s in error_free]),
    )
    _write_json(out / "summary.json", summary.to_dict())
    for diag in diagnostics:
        print(f"rejected {diag.ref}: {diag.message}", file=sys.stderr)
    print(
        f"injected {len(outcomes)} of {summary.eligible} eligible sentences "
        f"({summary.skipped_no_site} had no site) -> {out}"
    )
    return 0


def _write_split_files(out: Path, split: datasets.DatasetSplit, table: dict) -> list[Path]:
    written = []
    for size, ids in sorted(split.train_sets.items()):
        path = out / f"train_{size}.jsonl"
        _write(path, serialize_labeled([table[i] for i in ids]))
        written.append(path)
    for name, ids in (("dev", split.dev), ("test", split.test)):
        path = out / f"{name}.jsonl"
        _write(path, serialize_labeled([table[i] for i in ids]))
        written.append(path)
    return written


def cmd_split(args) -> int:
    out = Path(args.out)
    plan = _plan_from_args(args)
    src = Path(args.infile)
    if not plan.per_type:
        corpus = read_labeled_file(args.infile)
        split = datasets.build_real_split(corpus, plan)
        table = {s.sentence.id: s for s in corpus}
    else:
        outcomes = injection.read_outcomes((src / "outcomes.jsonl").read_bytes())
        error_free_labeled = read_labeled_file(str(src / "error_free.jsonl"), scheme=TYPED_SCHEME)
        split = datasets.build_pseudo_split(
            outcomes, [ls.sentence for ls in error_free_labeled], plan
        )
        table = datasets.materialize_pseudo(outcomes, [ls.sentence for ls in error_free_labeled])
    _write_split_files(out, split, table)
    _write_json(out / "manifest.json", datasets.split_to_dict(plan, split))
    print(f"split -> {out} (manifest {split.manifest_hash[:12]})")
    return 0


def cmd_train_baseline(args) -> int:
    data = read_labeled_file(args.infile)
    if args.scheme and data and data[0].scheme.kind != args.scheme:
        raise ValueError(f"{args.infile} holds {data[0].scheme.kind} labels, not {args.scheme}")
    model = perceptron.train(data, epochs=args.epochs, seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    perceptron.save_model(model, str(out))
    print(f"trained on {len(data)} sentences ({model.scheme.kind}) -> {out}")
    return 0


def cmd_predict_baseline(args) -> int:
    model = perceptron.load_model(args.model)
    data = read_labeled_file(args.infile, scheme=model.scheme)
    preds = [perceptron.predict(model, ls.sentence) for ls in data]
    _write(Path(args.out), serialize_labeled(preds))
    print(f"predicted {len(preds)} sentences -> {args.out}")
    return 0


def _score_files(pred_path: str, gold_path: str) -> metrics.MetricsReport:
    gold = read_labeled_file(gold_path)
    scheme = gold[0].scheme if gold else None
    pred = read_labeled_file(pred_path, scheme=scheme)
    return metrics.compute_prf(metrics.score(pred, gold))


def cmd_score(args) -> int:
    report = _score_files(args.pred, args.gold)
    payload = report.to_dict()
    if args.train_size is not None:
        payload = {"train_size": args.train_size, "run_seed": args.run_seed, **payload}
    if args.out:
        _write_json(Path(args.out), payload)
    m = report.micro
    print(f"micro P={m.precision:.4f} R={m.recall:.4f} F1={m.f1:.4f} ({report.n_sentences} sentences)")
    return 0


def cmd_curve(args) -> int:
    reports_dir = Path(args.infile)
    grouped: dict[int, list[tuple[int, metrics.MetricsReport]]] = {}
    for path in sorted(reports_dir.glob("*.json")):
        payload = json.loads(path.read_text(encoding="utf-8"))
        if "train_size" not in payload:
            continue
        report = metrics.report_from_dict(payload)
        grouped.setdefault(payload["train_size"], []).append(
            (payload.get("run_seed") or 0, report)
        )
    if not grouped:
        raise ValueError(f"no scored reports with train_size under {reports_dir}")
    points = []
    for size in sorted(grouped):
        runs = [report for _, report in sorted(grouped[size], key=lambda x: x[0])]
        points.append(metrics.CurvePoint(size, metrics.aggregate(runs)))
    _write(Path(args.out), metrics.emit_curve(points))
    print(f"curve over {len(points)} sizes -> {args.out}")
    return 0


def cmd_feedback(args) -> int:
    detections = read_labeled_file(args.infile, scheme=TYPED_SCHEME)
    templates = feedback.load_templates(args.templates) if args.templates else None
    _write(Path(args.out), feedback.annotate(detections, templates))
    print(f"annotated {len(detections)} sentences -> {args.out}")
    return 0


def cmd_pipeline(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    inject_args = argparse.Namespace(infile=args.infile, out=str(out / "inject"), seed=args.seed)
    cmd_inject(inject_args)
    split_args = argparse.Namespace(
        infile=str(out / "inject"), out=str(out / "split"),
        plan=args.plan, sizes=args.sizes, seed=args.seed,
    )
    cmd_split(split_args)

    split_dir = out / "split"
    manifest = json.loads((split_dir / "manifest.json").read_text(encoding="utf-8"))
    sizes = sorted(int(s) for s in manifest["assignments"]["train"])
    test_file = split_dir / "test.jsonl"
    test_set = read_labeled_file(str(test_file))
    run_seeds = list(range(1, args.seeds + 1))
    for size in sizes:
        train_set = read_labeled_file(str(split_dir / f"train_{size}.jsonl"))
        for run_seed in run_seeds:
            model = perceptron.train(train_set, epochs=args.epochs, seed=run_seed)
            preds = [perceptron.predict(model, ls.sentence) for ls in test_set]
            pred_path = out / "preds" / f"size_{size}_seed_{run_seed}.jsonl"
            _write(pred_path, serialize_labeled(preds))
            report = metrics.compute_prf(metrics.score(preds, test_set))
            _write_json(
                out / "reports" / f"size_{size}_seed_{run_seed}.json",
                {"train_size": size, "run_seed": run_seed, **report.to_dict()},
            )
        print(f"size {size}: {len(run_seeds)} runs scored")

    curve_args = argparse.Namespace(infile=str(out / "reports"), out=str(out / "curve.csv"))
    cmd_curve(curve_args)

    artifacts = {
        str(p.relative_to(out)): _sha256(p)
        for p in sorted(out.rglob("*"))
        if p.is_file() and p != out / "manifest.json"
    }
    _write_json(
        out / "manifest.json",
        {
            "config": {
                "in": str(args.infile),
                "plan": args.plan,
                "sizes": args.sizes,
                "seed": args.seed,
                "seeds": args.seeds,
                "epochs": args.epochs,
            },
            "input_digest": _sha256(Path(args.infile)),
            "artifacts": artifacts,
        },
    )
    print(f"pipeline complete -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gedkit",
        description="Grammatical error detection toolkit: pseudo-error corpora, "
        "training-size ladders, token-level scoring, feedback comments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed=True):
        if seed:
            p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("inject", help="perturb a CoNLL-U corpus into labeled pseudo errors")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("split", help="build train ladders and fixed dev/test pools")
    p.add_argument("--in", dest="infile", required=True,
                   help="inject output dir (pseudo) or labeled JSON-lines file (real)")
    p.add_argument("--out", required=True)
    p.add_argument("--plan", choices=["pseudo_pow2", "real_ladder"], default="pseudo_pow2")
    p.add_argument("--sizes", default=None,
                   help="comma-separated custom ladder (overrides --plan sizes; 'all' allowed last)")
    add_common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train-baseline", help="train the averaged-perceptron detector")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--scheme", choices=["binary", "typed"], default=None)
    add_common(p)
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("predict-baseline", help="label a dataset with a trained baseline model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict_baseline)

    p = sub.add_parser("score", help="token-level P/R/F1 of predictions against gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out", default=None, help="write the full report as JSON")
    p.add_argument("--train-size", type=int, default=None, help="tag the report for curve assembly")
    p.add_argument("--run-seed", type=int, default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("curve", help="aggregate tagged score reports into a curve CSV")
    p.add_argument("--in", dest="infile", required=True, help="directory of score reports")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("feedback", help="emit feedback comments for typed detections")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--templates", default=None, help="JSON map error type -> comment text")
    p.set_defaults(func=cmd_feedback)

    p = sub.add_parser("pipeline", help="inject + split + train/predict/score per size and seed + curve")
    p.add_argument("--in", dest="infile", required=True, help="CoNLL-U corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--plan", choices=["pseudo_pow2"], default="pseudo_pow2")
    p.add_argument("--sizes", default=None, help="comma-separated custom per-type ladder")
    p.add_argument("--seeds", type=int, default=5, help="number of training runs per size")
    p.add_argument("--epochs", type=int, default=10)
    add_common(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # contract violations and IO problems alike
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
