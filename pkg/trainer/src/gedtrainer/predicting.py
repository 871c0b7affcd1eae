"""Inference: one label per word via its first subword."""

from __future__ import annotations

import json
from pathlib import Path

import torch
from transformers import AutoModel, AutoTokenizer

from .data import Example
from .model import TokenClassifier, collate, encode_sentence, first_subword_positions


def predict_labels(
    model: TokenClassifier,
    tokenizer,
    examples: list[Example],
    labels: tuple[str, ...],
    batch_size: int = 32,
    max_length: int | None = None,
) -> list[list[str]]:
    label_ids = {label: i for i, label in enumerate(labels)}
    max_length = max_length or int(tokenizer.model_max_length)
    model.eval()
    out: list[list[str]] = []
    with torch.no_grad():
        for start in range(0, len(examples), batch_size):
            batch = examples[start : start + batch_size]
            encoded = [encode_sentence(ex, tokenizer, label_ids, max_length) for ex in batch]
            input_ids, attention, _ = collate(encoded, tokenizer.pad_token_id)
            scores = model(input_ids, attention)
            # argmax of raw scores; identical to argmax of their softmax
            picks = scores.argmax(dim=-1)
            for row, ex in enumerate(batch):
                positions = first_subword_positions(ex, tokenizer, max_length)
                sentence = []
                for word_i in range(len(ex.words)):
                    if word_i < len(positions):
                        sentence.append(labels[int(picks[row, positions[word_i]])])
                    else:
                        sentence.append(labels[0])  # truncated tail: fall back to C
                out.append(sentence)
    return out


def save_artifact(
    model: TokenClassifier, labels: tuple[str, ...], model_path: str, out_dir: str | Path
) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), out_dir / "model.pt")
    (out_dir / "head.json").write_text(
        json.dumps({"labels": list(labels), "encoder": model_path}, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def load_artifact(artifact_dir: str | Path) -> tuple[TokenClassifier, object, tuple[str, ...]]:
    artifact_dir = Path(artifact_dir)
    meta = json.loads((artifact_dir / "head.json").read_text(encoding="utf-8"))
    labels = tuple(meta["labels"])
    tokenizer = AutoTokenizer.from_pretrained(meta["encoder"])
    encoder = AutoModel.from_pretrained(meta["encoder"])
    model = TokenClassifier(encoder, len(labels))
    state = torch.load(artifact_dir / "model.pt", map_location="cpu", weights_only=True)
    model.load_state_dict(state)
    return model, tokenizer, labels
