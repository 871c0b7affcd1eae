import hashlib
import json
from pathlib import Path

import pytest

from gedkit.cli import main
from gedkit.corpus import write_conllu
from gedkit.metrics import parse_curve
from synthcorpus import build_corpus

PIPE_COUNTS = {
    "trans_train": 220,
    "trans_test": 480,
    "intrans_train": 220,
    "intrans_test": 480,
    "prep_subject": 560,
    "prep_infinitive": 560,
    "subject_verb_gerund": 560,
    "subject_verb_infinitival": 100,
    "filler": 280,
}


def digest_tree(root: Path) -> dict[str, str]:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


@pytest.fixture(scope="module")
def conllu_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "corpus.conllu"
    path.write_text(write_conllu(build_corpus(PIPE_COUNTS, seed=7)), encoding="utf-8")
    return path


def test_inject_writes_outcomes_and_summary(tmp_path, conllu_file):
    out = tmp_path / "inject"
    assert main(["inject", "--in", str(conllu_file), "--out", str(out), "--seed", "7"]) == 0
    assert (out / "outcomes.jsonl").exists()
    assert (out / "error_free.jsonl").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary) == {"eligible", "skipped_no_site", "per_type_counts", "seed"}
    assert summary["seed"] == 7
    assert sum(summary["per_type_counts"].values()) > 0


def test_inject_is_deterministic(tmp_path, conllu_file):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["inject", "--in", str(conllu_file), "--out", str(a), "--seed", "7"])
    main(["inject", "--in", str(conllu_file), "--out", str(b), "--seed", "7"])
    assert digest_tree(a) == digest_tree(b)
    c = tmp_path / "c"
    main(["inject", "--in", str(conllu_file), "--out", str(c), "--seed", "8"])
    assert digest_tree(c)["outcomes.jsonl"] != digest_tree(a)["outcomes.jsonl"]


def test_score_identical_files_perfect(tmp_path, conllu_file, capsys):
    out = tmp_path / "inject"
    main(["inject", "--in", str(conllu_file), "--out", str(out), "--seed", "1"])
    gold = out / "outcomes.jsonl"
    report_path = tmp_path / "report.json"
    assert main(["score", "--pred", str(gold), "--gold", str(gold), "--out", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert report["micro"]["precision"] == 1.0
    assert report["micro"]["recall"] == 1.0
    assert "F1=1.0000" in capsys.readouterr().out


def test_score_misalignment_fails(tmp_path, conllu_file, capsys):
    out = tmp_path / "inject"
    main(["inject", "--in", str(conllu_file), "--out", str(out), "--seed", "1"])
    gold = out / "outcomes.jsonl"
    lines = gold.read_bytes().splitlines(keepends=True)
    pred = tmp_path / "pred.jsonl"
    pred.write_bytes(b"".join(lines[:-1]))
    assert main(["score", "--pred", str(pred), "--gold", str(gold)]) == 1
    assert "error:" in capsys.readouterr().err


def test_unknown_input_fails_cleanly(tmp_path, capsys):
    assert main(["inject", "--in", str(tmp_path / "nope.conllu"), "--out", str(tmp_path)]) == 1
    assert "error:" in capsys.readouterr().err


def test_pipeline_small_ladder(tmp_path, conllu_file):
    out = tmp_path / "run"
    rc = main([
        "pipeline", "--in", str(conllu_file), "--out", str(out),
        "--sizes", "2,8", "--seeds", "2", "--epochs", "3", "--seed", "5",
    ])
    assert rc == 0
    rows = parse_curve((out / "curve.csv").read_bytes())
    assert {r["train_size"] for r in rows} == {2, 8}
    assert len(rows) == 2 * 6  # five typed labels + micro, per size
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["seeds"] == 2
    assert "split/manifest.json" in manifest["artifacts"]
    # every (size, seed) job left a prediction and a report
    for size in (2, 8):
        for seed in (1, 2):
            assert (out / "preds" / f"size_{size}_seed_{seed}.jsonl").exists()
            assert (out / "reports" / f"size_{size}_seed_{seed}.json").exists()
    # split shapes: fixed pools regardless of ladder
    split_manifest = json.loads((out / "split" / "manifest.json").read_text())
    assert len(split_manifest["assignments"]["dev"]) == 1000
    assert len(split_manifest["assignments"]["test"]) == 1200
    assert len(split_manifest["assignments"]["train"]["2"]) == 10


def test_pipeline_rerun_is_byte_identical(tmp_path, conllu_file):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        rc = main([
            "pipeline", "--in", str(conllu_file), "--out", str(out),
            "--sizes", "2,4", "--seeds", "1", "--epochs", "2", "--seed", "5",
        ])
        assert rc == 0
    da, db = digest_tree(a), digest_tree(b)
    assert da == db
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    assert ma["artifacts"] == mb["artifacts"]


def test_predict_baseline_aligns_with_its_input(tmp_path, conllu_file):
    out = tmp_path / "run"
    main(["inject", "--in", str(conllu_file), "--out", str(out / "inject"), "--seed", "3"])
    main(["split", "--in", str(out / "inject"), "--out", str(out / "split"),
          "--sizes", "2,8", "--seed", "3"])
    model = out / "model.json"
    assert main(["train-baseline", "--in", str(out / "split" / "train_8.jsonl"),
                 "--out", str(model), "--epochs", "3", "--seed", "1"]) == 0
    pred = out / "pred.jsonl"
    assert main(["predict-baseline", "--model", str(model),
                 "--in", str(out / "split" / "test.jsonl"), "--out", str(pred)]) == 0
    # prediction file must satisfy score's alignment preconditions against its input
    assert main(["score", "--pred", str(pred), "--gold", str(out / "split" / "test.jsonl")]) == 0


def test_train_baseline_deterministic(tmp_path, conllu_file):
    out = tmp_path / "run"
    main(["inject", "--in", str(conllu_file), "--out", str(out / "inject"), "--seed", "3"])
    main(["split", "--in", str(out / "inject"), "--out", str(out / "split"),
          "--sizes", "4", "--seed", "3"])
    m1, m2 = out / "m1.json", out / "m2.json"
    for m in (m1, m2):
        main(["train-baseline", "--in", str(out / "split" / "train_4.jsonl"),
              "--out", str(m), "--epochs", "4", "--seed", "9"])
    assert m1.read_bytes() == m2.read_bytes()


def test_feedback_subcommand(tmp_path, conllu_file):
    out = tmp_path / "run"
    main(["inject", "--in", str(conllu_file), "--out", str(out), "--seed", "2"])
    comments = out / "comments.jsonl"
    assert main(["feedback", "--in", str(out / "outcomes.jsonl"), "--out", str(comments)]) == 0
    lines = comments.read_text().strip().splitlines()
    outcomes = (out / "outcomes.jsonl").read_text().strip().splitlines()
    assert len(lines) == len(outcomes)
    first = json.loads(lines[0])
    assert len(first) == 1 and set(first[0]) == {"token_index", "error_type", "comment"}
    # error-free input annotates to empty lists
    empty = out / "empty.jsonl"
    assert main(["feedback", "--in", str(out / "error_free.jsonl"), "--out", str(empty)]) == 0
    assert set(empty.read_text().strip().splitlines()) == {"[]"}


def test_real_split_subcommand(tmp_path, conllu_file):
    out = tmp_path / "run"
    main(["inject", "--in", str(conllu_file), "--out", str(out / "inject"), "--seed", "2"])
    real = out / "real"
    assert main(["split", "--in", str(out / "inject" / "outcomes.jsonl"),
                 "--out", str(real), "--plan", "real_ladder",
                 "--sizes", "100,300,all", "--seed", "4"]) == 0
    manifest = json.loads((real / "manifest.json").read_text())
    sizes = sorted(int(s) for s in manifest["assignments"]["train"])
    n = len((out / "inject" / "outcomes.jsonl").read_text().strip().splitlines())
    n_train = round(0.85 * n)
    assert sizes == [100, 300, n_train]
    dev = manifest["assignments"]["dev"]
    test = manifest["assignments"]["test"]
    assert abs(len(dev) - round(0.075 * n)) <= 1
    assert len(dev) + len(test) + n_train == n
    assert (real / f"train_{n_train}.jsonl").exists()
