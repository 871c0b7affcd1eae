import json
import shutil
import subprocess
from pathlib import Path

import pytest
import torch
from transformers import AutoModel, AutoTokenizer

from gedtrainer.config import TrainSpec
from gedtrainer.data import label_set, read_examples, write_predictions
from gedtrainer.model import TokenClassifier
from gedtrainer.predicting import load_artifact, predict_labels
from gedtrainer.training import train_one_seed

FAST = dict(learning_rate=1e-3, max_epochs=2)


@pytest.fixture(scope="module")
def trained(encoder_dir, data_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("trained") / "seed_11"
    spec = TrainSpec(model_path=encoder_dir, seeds=(11,), **FAST)
    train_one_seed(
        read_examples(data_dir / "train.jsonl"),
        read_examples(data_dir / "dev.jsonl"),
        data_dir / "dev.jsonl",
        spec, 11, out,
    )
    return out


def test_artifact_round_trip_predictions_match(trained, data_dir):
    model, tokenizer, labels = load_artifact(trained)
    examples = read_examples(data_dir / "test.jsonl")
    first = predict_labels(model, tokenizer, examples, labels)
    model2, tokenizer2, labels2 = load_artifact(trained)
    assert labels2 == labels
    second = predict_labels(model2, tokenizer2, examples, labels2)
    assert first == second
    assert all(len(p) == len(ex.words) for p, ex in zip(first, examples))


def test_zero_init_head_predicts_first_label_everywhere(encoder_dir, data_dir):
    encoder = AutoModel.from_pretrained(encoder_dir)
    tokenizer = AutoTokenizer.from_pretrained(encoder_dir)
    model = TokenClassifier(encoder, 6)
    with torch.no_grad():
        model.head.weight.zero_()
        model.head.bias.zero_()
    examples = read_examples(data_dir / "test.jsonl")
    labels = label_set(examples)
    predicted = predict_labels(model, tokenizer, examples, labels)
    assert all(l == "C" for sentence in predicted for l in sentence)


def test_softmax_argmax_equals_raw_argmax(encoder_dir, data_dir):
    encoder = AutoModel.from_pretrained(encoder_dir)
    tokenizer = AutoTokenizer.from_pretrained(encoder_dir)
    torch.manual_seed(5)
    model = TokenClassifier(encoder, 6)
    examples = read_examples(data_dir / "test.jsonl")
    from gedtrainer.model import collate, encode_sentence

    label_ids = {l: i for i, l in enumerate(label_set(examples))}
    encoded = [encode_sentence(ex, tokenizer, label_ids, 64) for ex in examples]
    input_ids, attention, _ = collate(encoded, tokenizer.pad_token_id)
    model.eval()
    with torch.no_grad():
        scores = model(input_ids, attention)
    assert torch.equal(scores.argmax(dim=-1), scores.softmax(dim=-1).argmax(dim=-1))


def test_prediction_file_scores_against_gold_with_toolkit(trained, data_dir, tmp_path):
    gedkit = shutil.which("gedkit")
    assert gedkit, "primary toolkit CLI must be installed"
    model, tokenizer, labels = load_artifact(trained)
    examples = read_examples(data_dir / "test.jsonl")
    predicted = predict_labels(model, tokenizer, examples, labels)
    pred_path = tmp_path / "pred.jsonl"
    write_predictions(examples, predicted, pred_path)
    report_path = tmp_path / "report.json"
    proc = subprocess.run(
        [gedkit, "score", "--pred", str(pred_path), "--gold", str(data_dir / "test.jsonl"),
         "--out", str(report_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    report = json.loads(report_path.read_text())
    assert 0.0 <= report["micro"]["f1"] <= 1.0
    assert set(report["per_label"]) == {
        "PrepInfinitive", "SubjectVerb", "PrepSubject", "TransVerbPrep", "IntransVerbObj",
    }


def test_cli_train_and_predict(encoder_dir, data_dir, tmp_path):
    from gedtrainer.cli import main

    out = tmp_path / "runs"
    rc = main([
        "train", "--train", str(data_dir / "train.jsonl"), "--dev", str(data_dir / "dev.jsonl"),
        "--out", str(out), "--model", encoder_dir, "--seeds", "11,22", "--max-epochs", "2",
    ])
    assert rc == 0
    runs = json.loads((out / "runs.json").read_text())
    assert [r["seed"] for r in runs] == [11, 22]
    assert (out / "seed_11" / "model.pt").exists()
    pred = tmp_path / "pred.jsonl"
    rc = main(["predict", "--artifact", str(out / "seed_11"),
               "--in", str(data_dir / "test.jsonl"), "--out", str(pred)])
    assert rc == 0
    lines = pred.read_text().strip().splitlines()
    assert len(lines) == len(read_examples(data_dir / "test.jsonl"))
    first = json.loads(lines[0])
    assert list(first) == ["id", "tokens", "lemmas", "upos", "heads", "deprels",
                           "labels", "error_type", "edit", "source"]
