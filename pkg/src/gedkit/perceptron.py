"""Self-contained baseline detector: averaged perceptron over window features.

A deliberately non-neural reference point. Deterministic given (data, seed);
no dependencies beyond the standard library.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import IO

from .corpus import LabelScheme, LabeledSentence, ParsedSentence, scheme_for

BOS = "<s>"
EOS = "</s>"


def extract_features(sentence: ParsedSentence, index: int) -> list[str]:
    """Window features for the token at 1-based `index`."""
    n = len(sentence.tokens)

    def form(i: int) -> str:
        if i < 1:
            return BOS
        if i > n:
            return EOS
        return sentence.tokens[i - 1].form.lower()

    def lemma(i: int) -> str:
        if i < 1:
            return BOS
        if i > n:
            return EOS
        return sentence.tokens[i - 1].lemma.lower()

    def upos(i: int) -> str:
        if i < 1:
            return BOS
        if i > n:
            return EOS
        return sentence.tokens[i - 1].upos

    feats = []
    for off in (-2, -1, 0, 1, 2):
        i = index + off
        feats.append(f"form[{off}]={form(i)}")
        feats.append(f"lemma[{off}]={lemma(i)}")
        feats.append(f"upos[{off}]={upos(i)}")
    feats.append(f"fb[-1,0]={form(index - 1)}|{form(index)}")
    feats.append(f"ub[-1,0]={upos(index - 1)}|{upos(index)}")
    feats.append(f"fb[0,+1]={form(index)}|{form(index + 1)}")
    feats.append(f"ub[0,+1]={upos(index)}|{upos(index + 1)}")
    if index == 1:
        feats.append("initial")
    return feats


@dataclass
class LinearModel:
    """Per-label weights stored as one vector per feature (scheme label order)."""

    scheme: LabelScheme
    weights: dict[str, list[float]]
    metadata: dict

    def scores(self, feats: list[str]) -> list[float]:
        totals = [0.0] * len(self.scheme.labels)
        for f in feats:
            vec = self.weights.get(f)
            if vec is not None:
                for k, w in enumerate(vec):
                    totals[k] += w
        return totals

    def predict_label(self, feats: list[str]) -> str:
        totals = self.scores(feats)
        best = 0
        for k in range(1, len(totals)):
            if totals[k] > totals[best]:
                best = k  # ties keep the earlier label (C first)
        return self.scheme.labels[best]


def train(data: list[LabeledSentence], epochs: int, seed: int) -> LinearModel:
    """Averaged perceptron: seeded per-epoch shuffle, update on mistakes."""
    if not data:
        raise ValueError("no training data")
    scheme = data[0].scheme
    for s in data[1:]:
        if s.scheme != scheme:
            raise ValueError("training data mixes label schemes")
    label_id = {label: k for k, label in enumerate(scheme.labels)}
    n_labels = len(scheme.labels)

    # features are static per token: extract once
    prepared = []
    for sent in data:
        tokens = [
            (extract_features(sent.sentence, i + 1), label_id[label])
            for i, label in enumerate(sent.labels)
        ]
        prepared.append(tokens)

    weights: dict[str, list[float]] = {}
    accum: dict[str, list[float]] = {}
    stamp: dict[str, int] = {}
    t = 0

    def catch_up(feat: str) -> list[float]:
        vec = weights[feat]
        acc = accum[feat]
        dt = t - stamp[feat]
        if dt:
            for k in range(n_labels):
                acc[k] += vec[k] * dt
            stamp[feat] = t
        return vec

    rng = random.Random(seed)
    order = list(range(len(prepared)))
    for _ in range(epochs):
        rng.shuffle(order)
        for si in order:
            for feats, gold in prepared[si]:
                t += 1
                totals = [0.0] * n_labels
                for f in feats:
                    vec = weights.get(f)
                    if vec is not None:
                        for k, w in enumerate(vec):
                            totals[k] += w
                pred = 0
                for k in range(1, n_labels):
                    if totals[k] > totals[pred]:
                        pred = k
                if pred != gold:
                    for f in feats:
                        if f not in weights:
                            weights[f] = [0.0] * n_labels
                            accum[f] = [0.0] * n_labels
                            stamp[f] = t
                        vec = catch_up(f)
                        vec[gold] += 1.0
                        vec[pred] -= 1.0

    averaged: dict[str, list[float]] = {}
    for feat in weights:
        catch_up(feat)
        averaged[feat] = [a / t for a in accum[feat]]
    return LinearModel(scheme=scheme, weights=averaged, metadata={"epochs": epochs, "seed": seed})


def predict(model: LinearModel, sentence: ParsedSentence) -> LabeledSentence:
    labels = tuple(
        model.predict_label(extract_features(sentence, i)) for i in range(1, len(sentence.tokens) + 1)
    )
    return LabeledSentence(sentence=sentence, labels=labels, scheme=model.scheme)


def save_model(model: LinearModel, fp: IO[bytes] | str) -> None:
    payload = {
        "scheme": model.scheme.kind,
        "labels": list(model.scheme.labels),
        "weights": model.weights,
        "metadata": model.metadata,
    }
    data = json.dumps(payload, ensure_ascii=False).encode("utf-8")
    if isinstance(fp, str):
        with open(fp, "wb") as f:
            f.write(data)
    else:
        fp.write(data)


def load_model(fp: IO[bytes] | str) -> LinearModel:
    if isinstance(fp, str):
        with open(fp, "rb") as f:
            payload = json.load(f)
    else:
        payload = json.load(fp)
    scheme = scheme_for(payload["scheme"])
    if list(scheme.labels) != payload["labels"]:
        raise ValueError("model labels do not match its scheme")
    return LinearModel(scheme=scheme, weights=payload["weights"], metadata=payload["metadata"])
