"""Token-level scoring, multi-seed aggregation, and curve emission."""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass, field

from .corpus import C_LABEL, LabelScheme, LabeledSentence

MICRO = "micro"


class AlignmentError(ValueError):
    """Prediction and gold files do not line up."""


@dataclass(frozen=True)
class LabelCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "LabelCounts") -> "LabelCounts":
        return LabelCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class ConfusionCounts:
    counts: dict[str, LabelCounts]  # one entry per non-C label
    scheme: LabelScheme
    n_sentences: int

    @property
    def micro(self) -> LabelCounts:
        total = LabelCounts()
        for c in self.counts.values():
            total = total + c
        return total


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MetricsReport:
    per_label: dict[str, PRF]
    micro: PRF
    n_sentences: int
    scheme: LabelScheme

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.kind,
            "n_sentences": self.n_sentences,
            "micro": vars(self.micro),
            "per_label": {label: vars(prf) for label, prf in self.per_label.items()},
        }


@dataclass(frozen=True)
class RunAggregate:
    runs: tuple[MetricsReport, ...]
    mean: dict[str, PRF]  # keyed by label and "micro"
    std: dict[str, PRF]

    def to_dict(self) -> dict:
        return {
            "n_runs": len(self.runs),
            "mean": {k: vars(v) for k, v in self.mean.items()},
            "std": {k: vars(v) for k, v in self.std.items()},
            "runs": [r.to_dict() for r in self.runs],
        }


@dataclass(frozen=True)
class CurvePoint:
    train_size: int
    aggregate: RunAggregate

    def __post_init__(self) -> None:
        if self.train_size <= 0:
            raise ValueError(f"train_size must be positive: {self.train_size}")


def score(pred: list[LabeledSentence], gold: list[LabeledSentence]) -> ConfusionCounts:
    """Token-level confusion counts.

    tp: predicted label equals a non-C gold label. A non-C prediction that
    misses gold costs one fp; a non-C gold token that is missed or mistyped
    costs one fn (so a wrong-type hit costs fp + fn).
    """
    if len(pred) != len(gold):
        raise AlignmentError(f"{len(pred)} predictions for {len(gold)} gold sentences")
    counts = {label: LabelCounts() for label in (gold[0].scheme.labels if gold else ()) if label != C_LABEL}
    scheme = gold[0].scheme if gold else None
    for p, g in zip(pred, gold):
        if p.sentence.id != g.sentence.id:
            raise AlignmentError(f"id mismatch at {g.sentence.id!r} (got {p.sentence.id!r})")
        if len(p.labels) != len(g.labels):
            raise AlignmentError(f"{g.sentence.id}: token counts differ")
        if p.scheme != g.scheme:
            raise AlignmentError(f"{g.sentence.id}: schemes differ")
        for pl, gl in zip(p.labels, g.labels):
            if gl != C_LABEL and pl == gl:
                counts[gl] = counts[gl] + LabelCounts(tp=1)
                continue
            if pl != C_LABEL:
                counts[pl] = counts[pl] + LabelCounts(fp=1)
            if gl != C_LABEL:
                counts[gl] = counts[gl] + LabelCounts(fn=1)
    if scheme is None:
        raise AlignmentError("nothing to score: empty gold")
    return ConfusionCounts(counts=counts, scheme=scheme, n_sentences=len(gold))


def _prf(c: LabelCounts) -> PRF:
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return PRF(precision, recall, f1)


def compute_prf(counts: ConfusionCounts) -> MetricsReport:
    """Precision/recall/F1.0 per label and micro; 0 on empty denominators."""
    return MetricsReport(
        per_label={label: _prf(c) for label, c in counts.counts.items()},
        micro=_prf(counts.micro),
        n_sentences=counts.n_sentences,
        scheme=counts.scheme,
    )


def aggregate(runs: list[MetricsReport]) -> RunAggregate:
    """Arithmetic mean and sample standard deviation across runs."""
    if not runs:
        raise ValueError("no runs to aggregate")
    scheme = runs[0].scheme
    for r in runs[1:]:
        if r.scheme != scheme:
            raise ValueError("runs use different schemes")

    def stats(values: list[float]) -> tuple[float, float]:
        mean = sum(values) / len(values)
        std = statistics.stdev(values) if len(values) > 1 else 0.0
        return mean, std

    keys = [label for label in scheme.labels if label != C_LABEL] + [MICRO]
    mean: dict[str, PRF] = {}
    std: dict[str, PRF] = {}
    for key in keys:
        prfs = [r.micro if key == MICRO else r.per_label[key] for r in runs]
        (p_mean, p_std) = stats([x.precision for x in prfs])
        (r_mean, r_std) = stats([x.recall for x in prfs])
        (f_mean, f_std) = stats([x.f1 for x in prfs])
        mean[key] = PRF(p_mean, r_mean, f_mean)
        std[key] = PRF(p_std, r_std, f_std)
    return RunAggregate(runs=tuple(runs), mean=mean, std=std)


CURVE_HEADER = [
    "train_size", "label",
    "precision_mean", "precision_std",
    "recall_mean", "recall_std",
    "f1_mean", "f1_std",
]


def emit_curve(points: list[CurvePoint]) -> bytes:
    """CSV rows per (train_size, label ∪ micro); feeds both curve styles."""
    sizes = [p.train_size for p in points]
    if sizes != sorted(sizes) or len(set(sizes)) != len(sizes):
        raise ValueError(f"curve points must be sorted by train_size: {sizes}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVE_HEADER)
    for point in points:
        agg = point.aggregate
        labels = [l for l in agg.runs[0].scheme.labels if l != C_LABEL] + [MICRO]
        for label in labels:
            m, s = agg.mean[label], agg.std[label]
            writer.writerow(
                [
                    point.train_size, label,
                    repr(m.precision), repr(s.precision),
                    repr(m.recall), repr(s.recall),
                    repr(m.f1), repr(s.f1),
                ]
            )
    return buf.getvalue().encode("utf-8")


def parse_curve(data: bytes | str) -> list[dict]:
    """Rows of an emitted curve CSV, with numeric fields restored."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        row: dict = {"train_size": int(rec["train_size"]), "label": rec["label"]}
        for col in CURVE_HEADER[2:]:
            row[col] = float(rec[col])
        rows.append(row)
    return rows


def report_from_dict(payload: dict) -> MetricsReport:
    """Inverse of MetricsReport.to_dict."""
    from .corpus import scheme_for

    return MetricsReport(
        per_label={label: PRF(**prf) for label, prf in payload["per_label"].items()},
        micro=PRF(**payload["micro"]),
        n_sentences=payload["n_sentences"],
        scheme=scheme_for(payload["scheme"]),
    )


def select_best_epoch(dev_reports: list[tuple[int, MetricsReport]]) -> int:
    """Epoch with the best dev micro F1.0; earliest wins ties."""
    if not dev_reports:
        raise ValueError("no dev reports")
    best_epoch, best_f1 = dev_reports[0][0], dev_reports[0][1].micro.f1
    for epoch, report in dev_reports[1:]:
        if report.micro.f1 > best_f1:
            best_epoch, best_f1 = epoch, report.micro.f1
    return best_epoch
