import random

import pytest
from transformers import AutoTokenizer

from gedtrainer.alignment import SubwordAlignment, align
from gedtrainer.data import Example
from gedtrainer.model import IGNORE_INDEX, encode_sentence
from tinymodel import WORDS, record


@pytest.fixture(scope="module")
def tokenizer(encoder_dir):
    return AutoTokenizer.from_pretrained(encoder_dir)


def test_identity_alignment_when_nothing_splits(tokenizer):
    out = align(["discussed", "about"], tokenizer)
    assert out.subwords == ("discussed", "about")
    assert out.first_subword == (0, 1)


def test_multi_piece_word_first_position(tokenizer):
    out = align(["we", "playing", "it"], tokenizer)
    assert out.subwords == ("we", "play", "##ing", "it")
    assert out.first_subword == (0, 1, 3)


def test_unknown_word_maps_to_unk(tokenizer):
    out = align(["we", "zzzqqq"], tokenizer)
    assert out.subwords[1] == tokenizer.unk_token or out.subwords[1:] != ()
    assert len(out.first_subword) == 2


def test_empty_expansion_falls_back_to_unk(tokenizer):
    # control characters tokenize to nothing; the word still gets a position
    out = align(["we", "\x01", "it"], tokenizer)
    assert len(out.first_subword) == 3
    assert out.subwords[out.first_subword[1]] == tokenizer.unk_token


def test_alignment_round_trip_word_count(tokenizer):
    rng = random.Random(3)
    pool = [w for w in WORDS if not w.startswith("##")] + ["playing", "zz", "books"]
    for _ in range(50):
        words = [rng.choice(pool) for _ in range(rng.randrange(1, 12))]
        out = align(words, tokenizer)
        assert len(out.first_subword) == len(words)
        assert len(out.subwords) >= len(words)
        # positions partition the piece sequence back into per-word spans
        bounds = list(out.first_subword) + [len(out.subwords)]
        spans = [bounds[i + 1] - bounds[i] for i in range(len(words))]
        assert all(s >= 1 for s in spans)
        assert sum(spans) == len(out.subwords)


def test_invariants_enforced():
    with pytest.raises(ValueError):
        SubwordAlignment(subwords=("a",), first_subword=(0, 1))
    with pytest.raises(ValueError):
        SubwordAlignment(subwords=("a", "b"), first_subword=(1, 0))


def test_only_first_subword_carries_the_label(tokenizer):
    ex = Example(record("m1", ["playing", "english", "is", "good", "."],
                        ["SubjectVerb", "C", "C", "C", "C"]))
    labels = {"C": 0, "SubjectVerb": 1}
    ids, target = encode_sentence(ex, tokenizer, labels, max_length=64)
    # layout: [CLS] play ##ing english is good . [SEP]
    assert len(ids) == 8
    assert target[0] == IGNORE_INDEX  # [CLS]
    assert target[1] == 1  # "play", first piece of the flagged word
    assert target[2] == IGNORE_INDEX  # "##ing" is masked out of the loss
    assert target[3:7] == [0, 0, 0, 0]
    assert target[7] == IGNORE_INDEX  # [SEP]
