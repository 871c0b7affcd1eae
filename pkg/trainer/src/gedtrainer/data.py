"""The toolkit's JSON-lines labeled-sentence file format.

This package talks to the detection toolkit purely through files; the record
layout here mirrors the format its datasets and scorer use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

C_LABEL = "C"
BINARY_LABELS = ("C", "E")
TYPED_LABELS = ("C", "PrepInfinitive", "SubjectVerb", "PrepSubject", "TransVerbPrep", "IntransVerbObj")

FIELD_ORDER = [
    "id", "tokens", "lemmas", "upos", "heads", "deprels", "labels", "error_type", "edit", "source",
]


@dataclass
class Example:
    record: dict  # the raw JSON record, kept for pass-through fields

    @property
    def id(self) -> str:
        return self.record["id"]

    @property
    def words(self) -> list[str]:
        return self.record["tokens"]

    @property
    def labels(self) -> list[str]:
        return self.record["labels"]


def read_examples(path: str | Path) -> list[Example]:
    examples = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                examples.append(Example(json.loads(line)))
    return examples


def label_set(examples: list[Example]) -> tuple[str, ...]:
    """Binary when labels stay within {C, E}; typed otherwise (toolkit order)."""
    seen = {l for ex in examples for l in ex.labels}
    if seen <= set(BINARY_LABELS):
        return BINARY_LABELS
    unknown = seen - set(TYPED_LABELS)
    if unknown:
        raise ValueError(f"labels outside both schemes: {sorted(unknown)}")
    return TYPED_LABELS


def write_predictions(examples: list[Example], labels: list[list[str]], path: str | Path) -> None:
    """Prediction file: input records with predicted labels, no edit provenance."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for ex, sentence_labels in zip(examples, labels):
            if len(sentence_labels) != len(ex.words):
                raise ValueError(f"{ex.id}: {len(sentence_labels)} labels for {len(ex.words)} words")
            record = {
                "id": ex.record["id"],
                "tokens": ex.record["tokens"],
                "lemmas": ex.record["lemmas"],
                "upos": ex.record["upos"],
                "heads": ex.record["heads"],
                "deprels": ex.record["deprels"],
                "labels": list(sentence_labels),
                "error_type": None,
                "edit": None,
                "source": ex.record.get("source", ""),
            }
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
