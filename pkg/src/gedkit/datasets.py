"""Deterministic training-size ladders, fixed dev/test pools, and corpus splits."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import C_LABEL, TYPED_SCHEME, ErrorType, LabeledSentence, ParsedSentence
from .injection import EVAL_POOL, TRAIN_POOL, InjectionOutcome, eligible

PSEUDO_POW2_SIZES: tuple[int, ...] = tuple(2**k for k in range(1, 11))
REAL_LADDER_SIZES: tuple[int | None, ...] = (100, 300, 500, 1000, 3000, 5000, 10000, None)

DEV_PER_TYPE = 200
TEST_PER_TYPE = 200
TEST_ERROR_FREE = 200

VERB_LIST_TYPES = (ErrorType.TRANS_VERB_PREP, ErrorType.INTRANS_VERB_OBJ)


class InsufficientDataError(ValueError):
    def __init__(self, what: str, needed: int, available: int):
        self.what = what
        self.needed = needed
        self.available = available
        super().__init__(f"{what}: need {needed}, have {available} (short by {needed - available})")


@dataclass(frozen=True)
class SamplingPlan:
    """Which sizes to draw; None as the last size means "all of the training data"."""

    ladder_kind: str
    sizes: tuple[int | None, ...]
    per_type: bool
    seed: int

    def __post_init__(self) -> None:
        if self.ladder_kind not in ("pseudo_pow2", "real_ladder", "custom"):
            raise ValueError(f"unknown ladder kind: {self.ladder_kind!r}")
        if self.ladder_kind == "pseudo_pow2" and (
            self.sizes != PSEUDO_POW2_SIZES or not self.per_type
        ):
            raise ValueError("pseudo_pow2 fixes sizes to 2^1..2^10 with per_type counts")
        if self.ladder_kind == "real_ladder" and (
            self.sizes != REAL_LADDER_SIZES or self.per_type
        ):
            raise ValueError("real_ladder fixes sizes to 100..10000 plus all, whole-set counts")
        ints = [s for s in self.sizes if s is not None]
        if None in self.sizes and self.sizes[-1] is not None:
            raise ValueError("the open-ended size must come last")
        if len([s for s in self.sizes if s is None]) > 1:
            raise ValueError("at most one open-ended size")
        if any(s <= 0 for s in ints):
            raise ValueError("sizes must be positive")
        if any(b <= a for a, b in zip(ints, ints[1:])):
            raise ValueError(f"sizes must be strictly increasing: {self.sizes}")

    @classmethod
    def pseudo_pow2(cls, seed: int) -> "SamplingPlan":
        return cls("pseudo_pow2", PSEUDO_POW2_SIZES, True, seed)

    @classmethod
    def real_ladder(cls, seed: int) -> "SamplingPlan":
        return cls("real_ladder", REAL_LADDER_SIZES, False, seed)

    @classmethod
    def custom(cls, sizes: Sequence[int | None], per_type: bool, seed: int) -> "SamplingPlan":
        return cls("custom", tuple(sizes), per_type, seed)

    def to_dict(self) -> dict:
        return {
            "ladder_kind": self.ladder_kind,
            "sizes": list(self.sizes),
            "per_type": self.per_type,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class DatasetSplit:
    """Assignment of sentence ids; train sets are nested and never touch dev/test."""

    train_sets: dict[int, tuple[str, ...]]
    dev: tuple[str, ...]
    test: tuple[str, ...]
    manifest_hash: str


def _assignment_hash(plan: SamplingPlan, train_sets: dict, dev: Sequence[str], test: Sequence[str]) -> str:
    payload = json.dumps(
        {
            "plan": plan.to_dict(),
            "train": {str(size): list(ids) for size, ids in sorted(train_sets.items())},
            "dev": list(dev),
            "test": list(test),
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def build_pseudo_split(
    outcomes: Iterable[InjectionOutcome],
    error_free: Iterable[ParsedSentence],
    plan: SamplingPlan,
) -> DatasetSplit:
    """Fixed dev/test pools plus nested per-type training ladders.

    For the two verb-list types, training draws only from train_pool outcomes
    and dev/test only from eval_pool outcomes; the other three types draw
    dev/test/train from disjoint slices of one shuffled pool.
    """
    if not plan.per_type:
        raise ValueError("pseudo splits count sizes per error type")
    outcomes = list(outcomes)
    by_id = {o.source_id: o for o in outcomes}
    if len(by_id) != len(outcomes):
        raise ValueError("duplicate outcome ids")
    max_size = max(s for s in plan.sizes if s is not None)

    train_slices: dict[ErrorType, list[str]] = {}
    dev: list[str] = []
    test: list[str] = []
    for et in ErrorType:
        pool = sorted(o.source_id for o in outcomes if o.error_type is et)
        if et in VERB_LIST_TYPES:
            train_pool = [i for i in pool if by_id[i].split_role == TRAIN_POOL]
            eval_pool = [i for i in pool if by_id[i].split_role == EVAL_POOL]
            if len(eval_pool) < DEV_PER_TYPE + TEST_PER_TYPE:
                raise InsufficientDataError(
                    f"{et.value} eval_pool", DEV_PER_TYPE + TEST_PER_TYPE, len(eval_pool)
                )
            if len(train_pool) < max_size:
                raise InsufficientDataError(f"{et.value} train_pool", max_size, len(train_pool))
            rng = random.Random(f"{plan.seed}:{et.value}:eval")
            rng.shuffle(eval_pool)
            dev.extend(eval_pool[:DEV_PER_TYPE])
            test.extend(eval_pool[DEV_PER_TYPE : DEV_PER_TYPE + TEST_PER_TYPE])
            rng = random.Random(f"{plan.seed}:{et.value}:train")
            rng.shuffle(train_pool)
            train_slices[et] = train_pool[:max_size]
        else:
            needed = DEV_PER_TYPE + TEST_PER_TYPE + max_size
            if len(pool) < needed:
                raise InsufficientDataError(et.value, needed, len(pool))
            rng = random.Random(f"{plan.seed}:{et.value}")
            rng.shuffle(pool)
            dev.extend(pool[:DEV_PER_TYPE])
            test.extend(pool[DEV_PER_TYPE : DEV_PER_TYPE + TEST_PER_TYPE])
            train_slices[et] = pool[DEV_PER_TYPE + TEST_PER_TYPE : needed]

    used = set(dev) | set(test) | {i for ids in train_slices.values() for i in ids}
    free_pool = sorted({s.id for s in error_free if eligible(s)} - used - set(by_id))
    if len(free_pool) < TEST_ERROR_FREE:
        raise InsufficientDataError("error-free sentences", TEST_ERROR_FREE, len(free_pool))
    rng = random.Random(f"{plan.seed}:error_free")
    rng.shuffle(free_pool)
    test.extend(free_pool[:TEST_ERROR_FREE])

    train_sets = {
        size: tuple(i for et in ErrorType for i in train_slices[et][:size])
        for size in plan.sizes
        if size is not None
    }
    return DatasetSplit(
        train_sets=train_sets,
        dev=tuple(dev),
        test=tuple(test),
        manifest_hash=_assignment_hash(plan, train_sets, dev, test),
    )


def split_real(
    corpus: list[LabeledSentence], seed: int
) -> tuple[list[LabeledSentence], list[LabeledSentence], list[LabeledSentence]]:
    """Random 85 / 7.5 / 7.5 partition (round, round, remainder)."""
    n = len(corpus)
    if n < 3:
        raise InsufficientDataError("real corpus", 3, n)
    order = list(range(n))
    random.Random(seed).shuffle(order)
    n_train = round(0.85 * n)
    n_dev = round(0.075 * n)
    train = [corpus[i] for i in order[:n_train]]
    dev = [corpus[i] for i in order[n_train : n_train + n_dev]]
    test = [corpus[i] for i in order[n_train + n_dev :]]
    return train, dev, test


def subsample_ladder(train: Sequence[str], plan: SamplingPlan) -> dict[int, list[str]]:
    """Nested subsets of the training ids, one per plan size; None resolves to all."""
    if plan.ladder_kind == "pseudo_pow2":
        raise ValueError("subsample_ladder serves real_ladder and custom plans")
    order = list(train)
    random.Random(plan.seed).shuffle(order)
    out: dict[int, list[str]] = {}
    for size in plan.sizes:
        resolved = len(order) if size is None else size
        if resolved > len(order):
            raise InsufficientDataError(f"train ids for size {size}", resolved, len(order))
        out[resolved] = order[:resolved]
    return out


def build_real_split(corpus: list[LabeledSentence], plan: SamplingPlan) -> DatasetSplit:
    """85/7.5/7.5 partition plus a nested ladder over the training ids."""
    ids = [s.sentence.id for s in corpus]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate sentence ids in corpus")
    train, dev, test = split_real(corpus, plan.seed)
    ladder = subsample_ladder([s.sentence.id for s in train], plan)
    train_sets = {size: tuple(chosen) for size, chosen in ladder.items()}
    dev_ids = tuple(s.sentence.id for s in dev)
    test_ids = tuple(s.sentence.id for s in test)
    return DatasetSplit(
        train_sets=train_sets,
        dev=dev_ids,
        test=test_ids,
        manifest_hash=_assignment_hash(plan, train_sets, dev_ids, test_ids),
    )


def materialize_pseudo(
    outcomes: Iterable[InjectionOutcome], error_free: Iterable[ParsedSentence]
) -> dict[str, LabeledSentence]:
    """id -> labeled sentence lookup covering outcomes and the error-free pool."""
    table = {o.source_id: o.labeled for o in outcomes}
    for sentence in error_free:
        if sentence.id not in table:
            table[sentence.id] = error_free_labeled(sentence)
    return table


def split_to_dict(plan: SamplingPlan, split: DatasetSplit) -> dict:
    """Manifest payload: plan, seed, assignments, and the assignment digest."""
    return {
        "plan": plan.to_dict(),
        "seed": plan.seed,
        "assignments": {
            "train": {str(size): list(ids) for size, ids in sorted(split.train_sets.items())},
            "dev": list(split.dev),
            "test": list(split.test),
        },
        "manifest_hash": split.manifest_hash,
    }


def error_free_labeled(sentence: ParsedSentence) -> LabeledSentence:
    return LabeledSentence(
        sentence=sentence, labels=tuple(C_LABEL for _ in sentence.tokens), scheme=TYPED_SCHEME
    )
