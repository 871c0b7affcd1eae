"""Fine-tuning loop: per-seed training with per-epoch dev predictions.

Dev predictions are scored by the detection toolkit's own CLI (file-based),
and the checkpoint from the best dev epoch (earliest on ties) is kept.
"""

from __future__ import annotations

import copy
import json
import random
import subprocess
import time
from pathlib import Path

import torch
from torch import nn
from transformers import AutoModel, AutoTokenizer

from .config import TrainSpec
from .data import Example, label_set, read_examples, write_predictions
from .model import IGNORE_INDEX, TokenClassifier, collate, encode_sentence
from .predicting import predict_labels, save_artifact

DEFAULT_SCORER = ("gedkit",)


def score_with_toolkit(
    pred_path: Path, gold_path: Path, report_path: Path, scorer: tuple[str, ...] = DEFAULT_SCORER
) -> float:
    """Micro F1 from the toolkit's scorer; raises when the scorer fails."""
    cmd = [*scorer, "score", "--pred", str(pred_path), "--gold", str(gold_path), "--out", str(report_path)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"scorer failed: {' '.join(cmd)}\n{proc.stderr.strip()}")
    report = json.loads(report_path.read_text(encoding="utf-8"))
    return float(report["micro"]["f1"])


def train_one_seed(
    train_examples: list[Example],
    dev_examples: list[Example],
    dev_gold_path: Path,
    spec: TrainSpec,
    seed: int,
    out_dir: Path,
    scorer: tuple[str, ...] = DEFAULT_SCORER,
) -> dict:
    """Fine-tune (or head-only train) once; returns the run metadata."""
    started = time.time()
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(seed)

    labels = label_set(train_examples + dev_examples)
    label_ids = {label: i for i, label in enumerate(labels)}
    tokenizer = AutoTokenizer.from_pretrained(spec.model_path)
    encoder = AutoModel.from_pretrained(spec.model_path)
    model = TokenClassifier(encoder, len(labels))

    if spec.freeze_encoder:
        for param in model.encoder.parameters():
            param.requires_grad_(False)
        trainable = list(model.head.parameters())
    else:
        trainable = list(model.parameters())
    optimizer = torch.optim.AdamW(
        trainable,
        lr=spec.learning_rate,
        betas=spec.betas,
        eps=spec.epsilon,
        weight_decay=spec.weight_decay,
    )
    loss_fn = nn.CrossEntropyLoss(ignore_index=IGNORE_INDEX)

    max_length = int(tokenizer.model_max_length)
    encoded = [encode_sentence(ex, tokenizer, label_ids, max_length) for ex in train_examples]
    batch_size = spec.resolve_batch_size(len(train_examples))
    rng = random.Random(seed)
    order = list(range(len(encoded)))

    history = []
    best_f1 = float("-inf")
    best_epoch = 0
    best_state = None
    for epoch in range(1, spec.max_epochs + 1):
        model.train()
        rng.shuffle(order)
        total_loss = 0.0
        n_batches = 0
        for start in range(0, len(order), batch_size):
            chunk = [encoded[i] for i in order[start : start + batch_size]]
            input_ids, attention, target = collate(chunk, tokenizer.pad_token_id)
            optimizer.zero_grad()
            scores = model(input_ids, attention)
            loss = loss_fn(scores.view(-1, len(labels)), target.view(-1))
            loss.backward()
            optimizer.step()
            total_loss += loss.item()
            n_batches += 1
        epoch_loss = total_loss / n_batches

        dev_labels = predict_labels(model, tokenizer, dev_examples, labels, max_length=max_length)
        pred_path = out_dir / f"dev_pred_epoch_{epoch}.jsonl"
        write_predictions(dev_examples, dev_labels, pred_path)
        report_path = out_dir / f"dev_report_epoch_{epoch}.json"
        dev_f1 = score_with_toolkit(pred_path, dev_gold_path, report_path, scorer)
        history.append({"epoch": epoch, "train_loss": epoch_loss, "dev_micro_f1": dev_f1})
        if dev_f1 > best_f1:  # earliest epoch wins ties
            best_f1 = dev_f1
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())

    model.load_state_dict(best_state)
    save_artifact(model, labels, spec.model_path, out_dir)
    metadata = {
        "spec": spec.to_dict(),
        "seed": seed,
        "best_epoch": best_epoch,
        "best_dev_micro_f1": best_f1,
        "epochs": history,
        "wall_time_s": round(time.time() - started, 3),
    }
    (out_dir / "metadata.json").write_text(
        json.dumps(metadata, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    return metadata


def train_all_seeds(
    train_path: str | Path,
    dev_path: str | Path,
    spec: TrainSpec,
    out_dir: str | Path,
    scorer: tuple[str, ...] = DEFAULT_SCORER,
) -> list[dict]:
    train_examples = read_examples(train_path)
    dev_examples = read_examples(dev_path)
    if not train_examples:
        raise ValueError(f"no training sentences in {train_path}")
    out_dir = Path(out_dir)
    runs = []
    for seed in spec.seeds:
        runs.append(
            train_one_seed(
                train_examples, dev_examples, Path(dev_path), spec, seed,
                out_dir / f"seed_{seed}", scorer,
            )
        )
    return runs
