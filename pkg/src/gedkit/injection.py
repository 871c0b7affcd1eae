"""Parse-based pseudo-error injection.

Five perturbation rules over dependency-parsed sentences, each emitting a
perturbed token sequence with exactly one labeled error plus an edit record
that makes the perturbation exactly invertible.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import IO, Iterable

from .corpus import (
    C_LABEL,
    TYPED_SCHEME,
    ErrorType,
    LabeledSentence,
    ParsedSentence,
    Token,
    labeled_from_dict,
    labeled_to_dict,
    read_labeled_records,
)

TRAIN_POOL = "train_pool"
EVAL_POOL = "eval_pool"


@dataclass(frozen=True)
class PrepositionInventory:
    """Prepositions drawn for addition/replacement; infinitives always get "for"."""

    addition_replacement: tuple[str, ...] = ("at", "about", "to", "in", "with")
    infinitive_replacement: str = "for"

    def __post_init__(self) -> None:
        if self.addition_replacement != ("at", "about", "to", "in", "with"):
            raise ValueError("addition/replacement inventory is fixed: at, about, to, in, with")
        if self.infinitive_replacement != "for":
            raise ValueError('infinitive replacement is fixed: "for"')


@dataclass(frozen=True)
class VerbLists:
    """Target verbs; training and test sets never overlap."""

    transitive_train: frozenset[str] = frozenset(
        {"answer", "attend", "discuss", "inhabit", "mention", "oppose", "resemble"}
    )
    transitive_test: frozenset[str] = frozenset(
        {"approach", "consider", "enter", "marry", "obey", "reach", "visit"}
    )
    intransitive_train: frozenset[str] = frozenset({"agree", "belong", "disagree", "relate"})
    intransitive_test: frozenset[str] = frozenset(
        {"apply", "graduate", "listen", "specialize", "worry"}
    )

    def __post_init__(self) -> None:
        if self.transitive_train & self.transitive_test:
            raise ValueError("transitive train/test verbs overlap")
        if self.intransitive_train & self.intransitive_test:
            raise ValueError("intransitive train/test verbs overlap")
        for group in (
            self.transitive_train,
            self.transitive_test,
            self.intransitive_train,
            self.intransitive_test,
        ):
            for verb in group:
                if verb != verb.lower():
                    raise ValueError(f"verb lists are lowercase lemmas: {verb!r}")


DEFAULT_INVENTORY = PrepositionInventory()
DEFAULT_VERB_LISTS = VerbLists()


@dataclass(frozen=True)
class InjectionSite:
    """Where a rule applies: the anchor token plus rule-specific indices."""

    error_type: ErrorType
    anchor_index: int
    span: tuple[int, int] | None = None  # contiguous subtree span, 1-based inclusive
    mark_index: int | None = None  # "to" mark of an infinitival subject
    case_index: int | None = None  # case preposition of an obl phrase
    gerund: bool = False


@dataclass(frozen=True)
class EditRecord:
    op: str  # insert | delete | replace
    position: int  # output index; for delete, the index in the input sentence
    original: str | None
    replacement: str | None

    def __post_init__(self) -> None:
        if self.op == "insert":
            ok = self.original is None and self.replacement is not None
        elif self.op == "delete":
            ok = self.original is not None and self.replacement is None
        elif self.op == "replace":
            ok = self.original is not None and self.replacement is not None
        else:
            raise ValueError(f"unknown edit op: {self.op!r}")
        if not ok:
            raise ValueError(f"inconsistent {self.op} record: {self}")

    def to_dict(self) -> dict:
        return {
            "op": self.op,
            "position": self.position,
            "original": self.original,
            "replacement": self.replacement,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EditRecord":
        return cls(op=d["op"], position=d["position"], original=d["original"], replacement=d["replacement"])


@dataclass(frozen=True)
class InjectionOutcome:
    labeled: LabeledSentence
    edit: EditRecord
    error_type: ErrorType
    source_id: str
    split_role: str = TRAIN_POOL

    def __post_init__(self) -> None:
        flagged = [l for l in self.labeled.labels if l != C_LABEL]
        if flagged != [self.error_type.value]:
            raise ValueError(
                f"{self.source_id}: expected exactly one {self.error_type.value} label, got {flagged}"
            )
        if self.split_role not in (TRAIN_POOL, EVAL_POOL):
            raise ValueError(f"unknown split role: {self.split_role!r}")

    @property
    def flagged_index(self) -> int:
        """1-based index of the single non-C token."""
        for i, label in enumerate(self.labeled.labels, start=1):
            if label != C_LABEL:
                return i
        raise AssertionError("unreachable: outcome has one non-C label by construction")


class StaleSiteError(ValueError):
    """The site no longer matches the sentence it was found on."""


def eligible(sentence: ParsedSentence) -> bool:
    """Length filter: only sentences of 4 to 25 tokens are perturbed."""
    return 4 <= len(sentence.tokens) <= 25


def _capitalize(form: str) -> str:
    return form[:1].upper() + form[1:]


def _plain_capitalized(form: str) -> bool:
    """True for forms whose only uppercase letter is the first one ("The", "Don't")."""
    return form != form.lower() and form == _capitalize(form.lower())


def _contiguous_span(sentence: ParsedSentence, index: int) -> tuple[int, int] | None:
    sub = sentence.subtree_indices(index)
    lo, hi = sub[0], sub[-1]
    if sub != list(range(lo, hi + 1)):
        return None  # non-projective subtree: no well-defined insertion point
    return lo, hi


def find_sites(
    sentence: ParsedSentence,
    error_type: ErrorType,
    lists: VerbLists = DEFAULT_VERB_LISTS,
) -> list[InjectionSite]:
    """All sites where `error_type`'s rule applies, in token order."""
    sites: list[InjectionSite] = []
    if error_type is ErrorType.PREP_INFINITIVE:
        for tok in sentence.tokens:
            if tok.form.lower() == "to" and tok.upos == "PART" and tok.deprel == "mark":
                if tok.head >= 1 and sentence.token_at(tok.head).upos == "VERB":
                    sites.append(InjectionSite(error_type, anchor_index=tok.index))
    elif error_type is ErrorType.SUBJECT_VERB:
        for tok in sentence.tokens:
            if tok.upos != "VERB" or tok.deprel != "csubj":
                continue
            marks = [
                c
                for c in sentence.children(tok.index)
                if c.form.lower() == "to" and c.upos == "PART" and c.deprel == "mark"
            ]
            if marks:
                mark = marks[0]
                if mark.index == 1:
                    displaced = sentence.token_at(2)
                    # Deleting a sentence-initial mark title-cases the next token;
                    # skip when that would collide with an already-capitalized form.
                    if displaced.upos != "PROPN" and _plain_capitalized(displaced.form):
                        continue
                sites.append(
                    InjectionSite(error_type, anchor_index=tok.index, mark_index=mark.index)
                )
            else:
                lemma = tok.lemma.lower()
                form = tok.form.lower()
                if form == lemma + "ing" or (lemma.endswith("e") and form == lemma[:-1] + "ing"):
                    sites.append(InjectionSite(error_type, anchor_index=tok.index, gerund=True))
    elif error_type is ErrorType.PREP_SUBJECT:
        for tok in sentence.tokens:
            if tok.deprel != "nsubj" or tok.upos not in ("NOUN", "PROPN"):
                continue
            span = _contiguous_span(sentence, tok.index)
            if span is None:
                continue
            leftmost = sentence.token_at(span[0])
            if leftmost.upos == "ADP":
                continue
            if span[0] == 1 and leftmost.upos != "PROPN" and leftmost.form.islower():
                continue  # lowercase sentence start: case repair would be ambiguous
            sites.append(InjectionSite(error_type, anchor_index=tok.index, span=span))
    elif error_type is ErrorType.TRANS_VERB_PREP:
        targets = lists.transitive_train | lists.transitive_test
        for tok in sentence.tokens:
            if tok.upos != "VERB" or tok.lemma.lower() not in targets:
                continue
            for child in sentence.children(tok.index):
                if child.deprel != "obj":
                    continue
                span = _contiguous_span(sentence, child.index)
                if span is None:
                    continue
                blocked = any(
                    t.deprel == "case" and t.upos == "ADP" and tok.index < t.index < child.index
                    for t in (sentence.token_at(i) for i in range(span[0], span[1] + 1))
                )
                if not blocked:
                    sites.append(InjectionSite(error_type, anchor_index=tok.index, span=span))
    elif error_type is ErrorType.INTRANS_VERB_OBJ:
        targets = lists.intransitive_train | lists.intransitive_test
        for tok in sentence.tokens:
            if tok.upos != "VERB" or tok.lemma.lower() not in targets:
                continue
            for child in sentence.children(tok.index):
                if child.deprel != "obl":
                    continue
                for case in sentence.children(child.index):
                    if case.deprel == "case" and case.upos == "ADP" and case.index == tok.index + 1:
                        sites.append(
                            InjectionSite(error_type, anchor_index=tok.index, case_index=case.index)
                        )
    else:
        raise ValueError(f"unknown error type: {error_type!r}")
    return sites


def _shifted_head(head: int, inserted_at: int) -> int:
    return head + 1 if head >= inserted_at else head


def _insert_token(
    sentence: ParsedSentence, position: int, form: str, lemma: str, upos: str, deprel: str, head: int
) -> list[Token]:
    """New token list with `form` at `position`; heads/indices shifted, `head` given as old index."""
    out: list[Token] = []
    for tok in sentence.tokens:
        new_index = tok.index + 1 if tok.index >= position else tok.index
        out.append(
            Token(
                index=new_index,
                form=tok.form,
                lemma=tok.lemma,
                upos=tok.upos,
                head=_shifted_head(tok.head, position) if tok.head != 0 else 0,
                deprel=tok.deprel,
            )
        )
    inserted = Token(
        index=position,
        form=form,
        lemma=lemma,
        upos=upos,
        head=_shifted_head(head, position) if head != 0 else 0,
        deprel=deprel,
    )
    out.insert(position - 1, inserted)
    return out


def _delete_token(sentence: ParsedSentence, position: int) -> list[Token]:
    """New token list without the token at `position`; its dependents re-attach to its head."""
    removed = sentence.token_at(position)
    out: list[Token] = []
    for tok in sentence.tokens:
        if tok.index == position:
            continue
        head = tok.head
        if head == position:
            head = removed.head
        if head > position:
            head -= 1
        index = tok.index - 1 if tok.index > position else tok.index
        out.append(Token(index=index, form=tok.form, lemma=tok.lemma, upos=tok.upos, head=head, deprel=tok.deprel))
    return out


def _with_token(tokens: list[Token], position: int, **changes) -> list[Token]:
    out = list(tokens)
    tok = out[position - 1]
    out[position - 1] = Token(
        index=tok.index,
        form=changes.get("form", tok.form),
        lemma=changes.get("lemma", tok.lemma),
        upos=changes.get("upos", tok.upos),
        head=changes.get("head", tok.head),
        deprel=changes.get("deprel", tok.deprel),
    )
    return out


def _single_label(n: int, flagged: int, error_type: ErrorType) -> tuple[str, ...]:
    return tuple(error_type.value if i == flagged else C_LABEL for i in range(1, n + 1))


def _check_site(sentence: ParsedSentence, site: InjectionSite) -> None:
    n = len(sentence.tokens)
    indices = [site.anchor_index, site.mark_index, site.case_index]
    if site.span is not None:
        indices.extend(site.span)
    for idx in indices:
        if idx is not None and not (1 <= idx <= n):
            raise StaleSiteError(f"site index {idx} outside sentence {sentence.id} ({n} tokens)")


def apply_site(
    sentence: ParsedSentence,
    site: InjectionSite,
    rng: random.Random,
    inventory: PrepositionInventory = DEFAULT_INVENTORY,
    lists: VerbLists = DEFAULT_VERB_LISTS,
) -> InjectionOutcome:
    """Perturb `sentence` at `site`, labeling exactly the edited/anchor token."""
    _check_site(sentence, site)
    et = site.error_type
    anchor = sentence.token_at(site.anchor_index)
    split_role = TRAIN_POOL

    if et is ErrorType.PREP_INFINITIVE:
        if anchor.form.lower() != "to" or anchor.deprel != "mark":
            raise StaleSiteError(f"{sentence.id}: anchor {site.anchor_index} is not a 'to' mark")
        replacement = (
            _capitalize(inventory.infinitive_replacement)
            if _plain_capitalized(anchor.form)
            else inventory.infinitive_replacement
        )
        tokens = _with_token(
            list(sentence.tokens), site.anchor_index,
            form=replacement, lemma=inventory.infinitive_replacement, upos="ADP",
        )
        labels = _single_label(len(tokens), site.anchor_index, et)
        edit = EditRecord("replace", site.anchor_index, anchor.form, replacement)

    elif et is ErrorType.SUBJECT_VERB:
        if site.gerund:
            new_form = (
                _capitalize(anchor.lemma) if _plain_capitalized(anchor.form) else anchor.lemma
            )
            tokens = _with_token(list(sentence.tokens), site.anchor_index, form=new_form)
            labels = _single_label(len(tokens), site.anchor_index, et)
            edit = EditRecord("replace", site.anchor_index, anchor.form, new_form)
        else:
            if site.mark_index is None:
                raise StaleSiteError(f"{sentence.id}: infinitival site without mark index")
            mark = sentence.token_at(site.mark_index)
            if mark.form.lower() != "to":
                raise StaleSiteError(f"{sentence.id}: mark {site.mark_index} is not 'to'")
            tokens = _delete_token(sentence, site.mark_index)
            if site.mark_index == 1:
                first = tokens[0]
                if first.upos != "PROPN" and first.form.islower():
                    tokens = _with_token(tokens, 1, form=_capitalize(first.form))
            new_anchor = site.anchor_index - 1 if site.anchor_index > site.mark_index else site.anchor_index
            labels = _single_label(len(tokens), new_anchor, et)
            edit = EditRecord("delete", site.mark_index, mark.form, None)

    elif et is ErrorType.PREP_SUBJECT:
        assert site.span is not None
        position = site.span[0]
        prep = inventory.addition_replacement[rng.randrange(len(inventory.addition_replacement))]
        form = _capitalize(prep) if position == 1 else prep
        tokens = _insert_token(
            sentence, position, form=form, lemma=prep, upos="ADP", deprel="case", head=site.anchor_index
        )
        if position == 1:
            displaced = tokens[1]
            if displaced.upos != "PROPN" and _plain_capitalized(displaced.form):
                tokens = _with_token(tokens, 2, form=displaced.form.lower())
        labels = _single_label(len(tokens), position, et)
        edit = EditRecord("insert", position, None, form)

    elif et is ErrorType.TRANS_VERB_PREP:
        assert site.span is not None
        if anchor.lemma.lower() not in lists.transitive_train | lists.transitive_test:
            raise StaleSiteError(f"{sentence.id}: anchor lemma {anchor.lemma!r} not a target verb")
        position = site.span[0]
        object_head = next(
            c.index for c in sentence.children(site.anchor_index) if c.deprel == "obj"
        )
        prep = inventory.addition_replacement[rng.randrange(len(inventory.addition_replacement))]
        form = _capitalize(prep) if position == 1 else prep
        tokens = _insert_token(
            sentence, position, form=form, lemma=prep, upos="ADP", deprel="case", head=object_head
        )
        labels = _single_label(len(tokens), position, et)
        edit = EditRecord("insert", position, None, form)
        if anchor.lemma.lower() in lists.transitive_test:
            split_role = EVAL_POOL

    elif et is ErrorType.INTRANS_VERB_OBJ:
        if site.case_index is None:
            raise StaleSiteError(f"{sentence.id}: obl site without case index")
        case = sentence.token_at(site.case_index)
        if case.deprel != "case" or case.upos != "ADP":
            raise StaleSiteError(f"{sentence.id}: token {site.case_index} is not a case preposition")
        tokens = _delete_token(sentence, site.case_index)
        new_anchor = site.anchor_index - 1 if site.anchor_index > site.case_index else site.anchor_index
        labels = _single_label(len(tokens), new_anchor, et)
        edit = EditRecord("delete", site.case_index, case.form, None)
        if anchor.lemma.lower() in lists.intransitive_test:
            split_role = EVAL_POOL

    else:
        raise ValueError(f"unknown error type: {et!r}")

    perturbed = ParsedSentence(id=sentence.id, tokens=tuple(tokens), source=sentence.source)
    labeled = LabeledSentence(sentence=perturbed, labels=labels, scheme=TYPED_SCHEME)
    return InjectionOutcome(
        labeled=labeled, edit=edit, error_type=et, source_id=sentence.id, split_role=split_role
    )


def revert_edit(outcome: InjectionOutcome) -> list[str]:
    """Token forms of the source sentence, reconstructed by inverting the edit.

    Undoes the sentence-initial case repair too; exact for conventionally
    capitalized input (guaranteed for everything find_sites emits).
    """
    sent = outcome.labeled.sentence
    forms = [t.form for t in sent.tokens]
    edit = outcome.edit
    if edit.op == "replace":
        forms[edit.position - 1] = edit.original
    elif edit.op == "insert":
        del forms[edit.position - 1]
        if edit.position == 1 and forms:
            first = sent.token_at(2)  # token displaced to second place by the insert
            if first.upos != "PROPN" and first.form.islower():
                forms[0] = _capitalize(forms[0])
    elif edit.op == "delete":
        forms.insert(edit.position - 1, edit.original)
        if edit.position == 1 and len(forms) > 1:
            displaced = sent.token_at(1)  # token promoted to first place by the delete
            if displaced.upos != "PROPN" and _plain_capitalized(displaced.form):
                forms[1] = forms[1].lower()
    return forms


@dataclass
class GenerationSummary:
    eligible: int = 0
    skipped_no_site: int = 0
    per_type_counts: dict[str, int] = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "eligible": self.eligible,
            "skipped_no_site": self.skipped_no_site,
            "per_type_counts": dict(self.per_type_counts),
            "seed": self.seed,
        }


def sentence_rng(seed: int, sentence_id: str) -> random.Random:
    """Random stream keyed on (seed, sentence id): independent of corpus order."""
    digest = hashlib.blake2b(
        f"{seed}\x1f{sentence_id}".encode("utf-8"), digest_size=16
    ).digest()
    return random.Random(int.from_bytes(digest, "big"))


def generate(
    corpus: Iterable[ParsedSentence],
    lists: VerbLists = DEFAULT_VERB_LISTS,
    inventory: PrepositionInventory = DEFAULT_INVENTORY,
    seed: int = 0,
) -> tuple[list[InjectionOutcome], GenerationSummary]:
    """Perturb every eligible sentence that offers a site, one error per sentence.

    When several rules apply, one site is chosen uniformly at random from the
    sentence's own stream, so output depends only on (corpus contents, seed).
    """
    summary = GenerationSummary(seed=seed, per_type_counts={t.value: 0 for t in ErrorType})
    outcomes: list[InjectionOutcome] = []
    for sentence in corpus:
        if not eligible(sentence):
            continue
        summary.eligible += 1
        sites: list[InjectionSite] = []
        for et in ErrorType:
            sites.extend(find_sites(sentence, et, lists))
        if not sites:
            summary.skipped_no_site += 1
            continue
        rng = sentence_rng(seed, sentence.id)
        site = sites[rng.randrange(len(sites))]
        outcome = apply_site(sentence, site, rng, inventory=inventory, lists=lists)
        outcomes.append(outcome)
        summary.per_type_counts[outcome.error_type.value] += 1
    return outcomes, summary


def outcome_to_dict(outcome: InjectionOutcome) -> dict:
    return labeled_to_dict(outcome.labeled, error_type=outcome.error_type, edit=outcome.edit.to_dict())


def write_outcomes(outcomes: Iterable[InjectionOutcome]) -> bytes:
    lines = [json.dumps(outcome_to_dict(o), ensure_ascii=False) for o in outcomes]
    return ("".join(line + "\n" for line in lines)).encode("utf-8")


def _infer_split_role(
    labeled: LabeledSentence, error_type: ErrorType, flagged: int, lists: VerbLists
) -> str:
    sent = labeled.sentence
    if error_type is ErrorType.INTRANS_VERB_OBJ:
        lemma = sent.token_at(flagged).lemma.lower()
        return EVAL_POOL if lemma in lists.intransitive_test else TRAIN_POOL
    if error_type is ErrorType.TRANS_VERB_PREP:
        # flagged token is the inserted case preposition; verb = head of its head
        prep = sent.token_at(flagged)
        if 1 <= prep.head <= len(sent.tokens):
            obj = sent.token_at(prep.head)
            if 1 <= obj.head <= len(sent.tokens):
                lemma = sent.token_at(obj.head).lemma.lower()
                if lemma in lists.transitive_test:
                    return EVAL_POOL
                if lemma in lists.transitive_train:
                    return TRAIN_POOL
        for tok in sent.tokens:  # fallback when heads do not resolve
            if tok.upos == "VERB" and tok.lemma.lower() in lists.transitive_test:
                return EVAL_POOL
    return TRAIN_POOL


def read_outcomes(
    stream: IO | Iterable[str] | str | bytes,
    lists: VerbLists = DEFAULT_VERB_LISTS,
) -> list[InjectionOutcome]:
    """Rebuild outcomes from the JSON-lines format (split_role recomputed from verbs)."""
    outcomes = []
    for rec in read_labeled_records(stream):
        if rec.get("error_type") is None or rec.get("edit") is None:
            raise ValueError(f"{rec.get('id')}: not an injection outcome record")
        labeled = labeled_from_dict(rec, TYPED_SCHEME)
        error_type = ErrorType(rec["error_type"])
        edit = EditRecord.from_dict(rec["edit"])
        flagged = next(i for i, l in enumerate(labeled.labels, start=1) if l != C_LABEL)
        outcomes.append(
            InjectionOutcome(
                labeled=labeled,
                edit=edit,
                error_type=error_type,
                source_id=rec["id"],
                split_role=_infer_split_role(labeled, error_type, flagged, lists),
            )
        )
    return outcomes
