"""Annotated-sentence data model.

CoNLL-U ingestion, structural validation, and the JSON-lines
labeled-sentence format shared by every other module.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable


class ErrorType(str, Enum):
    """The five injectable error types."""

    PREP_INFINITIVE = "PrepInfinitive"
    SUBJECT_VERB = "SubjectVerb"
    PREP_SUBJECT = "PrepSubject"
    TRANS_VERB_PREP = "TransVerbPrep"
    INTRANS_VERB_OBJ = "IntransVerbObj"


C_LABEL = "C"
E_LABEL = "E"


@dataclass(frozen=True)
class LabelScheme:
    """An ordered label inventory; C is always first."""

    kind: str
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("binary", "typed"):
            raise ValueError(f"unknown scheme kind: {self.kind!r}")
        if not self.labels or self.labels[0] != C_LABEL:
            raise ValueError("C must be present and first")
        expected = 2 if self.kind == "binary" else 6
        if len(self.labels) != expected:
            raise ValueError(f"{self.kind} scheme needs {expected} labels, got {len(self.labels)}")


BINARY_SCHEME = LabelScheme("binary", (C_LABEL, E_LABEL))
TYPED_SCHEME = LabelScheme("typed", (C_LABEL,) + tuple(t.value for t in ErrorType))


def scheme_for(kind: str) -> LabelScheme:
    if kind == "binary":
        return BINARY_SCHEME
    if kind == "typed":
        return TYPED_SCHEME
    raise ValueError(f"unknown scheme kind: {kind!r}")


@dataclass(frozen=True)
class Token:
    """One word with its parse attributes (head 0 = root, 1-based otherwise)."""

    index: int
    form: str
    lemma: str
    upos: str
    head: int
    deprel: str


@dataclass(frozen=True)
class ParsedSentence:
    id: str
    tokens: tuple[Token, ...]
    source: str = ""

    def __len__(self) -> int:
        return len(self.tokens)

    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    def token_at(self, index: int) -> Token:
        """Token by its 1-based index."""
        return self.tokens[index - 1]

    def children(self, index: int) -> list[Token]:
        return [t for t in self.tokens if t.head == index]

    def subtree_indices(self, index: int) -> list[int]:
        """1-based indices of the token at `index` and all its descendants."""
        out = [index]
        stack = [index]
        while stack:
            head = stack.pop()
            for t in self.tokens:
                if t.head == head:
                    out.append(t.index)
                    stack.append(t.index)
        return sorted(out)


@dataclass(frozen=True)
class LabeledSentence:
    sentence: ParsedSentence
    labels: tuple[str, ...]
    scheme: LabelScheme

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.sentence.tokens):
            raise ValueError(
                f"{self.sentence.id}: {len(self.labels)} labels for {len(self.sentence.tokens)} tokens"
            )
        bad = [l for l in self.labels if l not in self.scheme.labels]
        if bad:
            raise ValueError(f"{self.sentence.id}: labels outside scheme: {bad}")


@dataclass(frozen=True)
class Diagnostic:
    """A per-sentence rejection record emitted during parsing."""

    ref: str
    message: str


def validate(sentence: ParsedSentence) -> list[str]:
    """Return one descriptor per violated invariant; [] when well formed.

    Total: never raises, whatever the token contents.
    """
    violations: list[str] = []
    n = len(sentence.tokens)
    if n == 0:
        return ["empty sentence"]
    for pos, tok in enumerate(sentence.tokens, start=1):
        if tok.index != pos:
            violations.append(f"bad index: position {pos} holds index {tok.index}")
        if not tok.form:
            violations.append(f"empty form: token {pos}")
        if not tok.lemma:
            violations.append(f"empty lemma: token {pos}")
        if not (0 <= tok.head <= n):
            violations.append(f"head out of range: token {pos}")
        elif tok.head == tok.index:
            violations.append(f"self-headed token: {pos}")
    roots = [t for t in sentence.tokens if t.head == 0]
    if not roots:
        violations.append("no root")
    elif len(roots) > 1:
        violations.append("multiple roots")
    # Cycle check: every token must reach the root through head links.
    heads = {t.index: t.head for t in sentence.tokens}
    reaches_root: set[int] = set()
    cyclic = False
    for start in heads:
        seen: list[int] = []
        node = start
        while node != 0 and node in heads and node not in reaches_root:
            if node in seen:
                cyclic = True
                break
            seen.append(node)
            node = heads[node]
        if cyclic:
            break
        reaches_root.update(seen)
    if cyclic:
        violations.append("cyclic heads")
    return violations


# CoNLL-U columns: ID FORM LEMMA UPOS XPOS FEATS HEAD DEPREL DEPS MISC
_CONLLU_COLUMNS = 10


def _decode_lines(stream: IO | Iterable[str] | str | bytes) -> Iterable[str]:
    if isinstance(stream, bytes):
        return stream.decode("utf-8").splitlines()
    if isinstance(stream, str):
        return stream.splitlines()
    return (
        line.decode("utf-8") if isinstance(line, bytes) else line
        for line in stream
    )


def parse_conllu(
    stream: IO | Iterable[str] | str | bytes,
    source: str = "<stream>",
    diagnostics: list[Diagnostic] | None = None,
) -> list[ParsedSentence]:
    """Parse CoNLL-U into ParsedSentences.

    Multiword-token ranges ("3-4") and empty nodes ("3.1") are skipped.
    A block that fails structural validation is dropped with a Diagnostic
    (appended to `diagnostics` when given); parsing continues.
    """
    sentences: list[ParsedSentence] = []
    raw: list[list[str]] = []
    sent_id: str | None = None
    ordinal = 0
    bad_reason: str | None = None

    def flush() -> None:
        nonlocal raw, sent_id, ordinal, bad_reason
        if not raw and sent_id is None and bad_reason is None:
            return
        ordinal += 1
        sid = sent_id if sent_id is not None else f"{source}:{ordinal}"
        if bad_reason is None:
            tokens = tuple(
                Token(
                    index=int(cols[0]),
                    form=cols[1],
                    lemma=cols[2],
                    upos=cols[3],
                    head=int(cols[6]),
                    deprel=cols[7],
                )
                for cols in raw
            )
            sentence = ParsedSentence(id=sid, tokens=tokens, source=source)
            problems = validate(sentence)
            if not problems:
                sentences.append(sentence)
            elif diagnostics is not None:
                diagnostics.append(Diagnostic(sid, "; ".join(problems)))
        elif diagnostics is not None:
            diagnostics.append(Diagnostic(sid, bad_reason))
        raw = []
        sent_id = None
        bad_reason = None

    for line in _decode_lines(stream):
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("sent_id") and "=" in body:
                sent_id = body.split("=", 1)[1].strip()
            continue
        if bad_reason is not None:
            continue
        cols = line.split("\t")
        if len(cols) != _CONLLU_COLUMNS:
            bad_reason = f"malformed column count: {len(cols)}"
            continue
        if "-" in cols[0] or "." in cols[0]:
            continue  # multiword-token range or empty node
        if not cols[0].isdigit():
            bad_reason = f"non-integer ID: {cols[0]!r}"
            continue
        try:
            int(cols[6])
        except ValueError:
            bad_reason = f"non-integer HEAD: {cols[6]!r}"
            continue
        raw.append(cols)
    flush()
    return sentences


def parse_conllu_file(
    path: str, diagnostics: list[Diagnostic] | None = None
) -> list[ParsedSentence]:
    with open(path, encoding="utf-8") as f:
        return parse_conllu(f, source=path, diagnostics=diagnostics)


def write_conllu(sentences: Iterable[ParsedSentence]) -> str:
    """CoNLL-U text such that parse_conllu(write_conllu(s)) == s (modulo source)."""
    blocks = []
    for sent in sentences:
        lines = [f"# sent_id = {sent.id}"]
        for t in sent.tokens:
            lines.append(
                "\t".join(
                    [str(t.index), t.form, t.lemma, t.upos, "_", "_", str(t.head), t.deprel, "_", "_"]
                )
            )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def labeled_to_dict(
    labeled: LabeledSentence,
    error_type: ErrorType | str | None = None,
    edit: dict | None = None,
) -> dict:
    """JSON-ready record in the fixed field order of the labeled format."""
    sent = labeled.sentence
    return {
        "id": sent.id,
        "tokens": [t.form for t in sent.tokens],
        "lemmas": [t.lemma for t in sent.tokens],
        "upos": [t.upos for t in sent.tokens],
        "heads": [t.head for t in sent.tokens],
        "deprels": [t.deprel for t in sent.tokens],
        "labels": list(labeled.labels),
        "error_type": str(error_type.value) if isinstance(error_type, ErrorType) else error_type,
        "edit": edit,
        "source": sent.source,
    }


def labeled_from_dict(record: dict, scheme: LabelScheme) -> LabeledSentence:
    tokens = tuple(
        Token(index=i + 1, form=f, lemma=l, upos=u, head=h, deprel=d)
        for i, (f, l, u, h, d) in enumerate(
            zip(record["tokens"], record["lemmas"], record["upos"], record["heads"], record["deprels"])
        )
    )
    sentence = ParsedSentence(id=record["id"], tokens=tokens, source=record.get("source", ""))
    return LabeledSentence(sentence=sentence, labels=tuple(record["labels"]), scheme=scheme)


def serialize_labeled(sentences: list[LabeledSentence]) -> bytes:
    """JSON-lines bytes, one object per sentence; all sentences must share a scheme."""
    if sentences:
        scheme = sentences[0].scheme
        for s in sentences[1:]:
            if s.scheme != scheme:
                raise ValueError(f"mixed label schemes: {scheme.kind} vs {s.scheme.kind}")
    lines = [json.dumps(labeled_to_dict(s), ensure_ascii=False) for s in sentences]
    return ("".join(line + "\n" for line in lines)).encode("utf-8")


def read_labeled_records(stream: IO | Iterable[str] | str | bytes) -> list[dict]:
    """Raw JSON records of a labeled-sentence file, one dict per line."""
    if isinstance(stream, bytes):
        stream = stream.decode("utf-8")
    if isinstance(stream, str):
        lines: Iterable[str] = stream.splitlines()
    else:
        lines = stream
    records = []
    for line in lines:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        line = line.strip()
        if line:
            records.append(json.loads(line))
    return records


def infer_scheme(records: list[dict]) -> LabelScheme:
    """Typed iff any label falls outside {C, E}; binary otherwise."""
    for rec in records:
        for label in rec["labels"]:
            if label not in (C_LABEL, E_LABEL):
                return TYPED_SCHEME
    return BINARY_SCHEME


def read_labeled(
    stream: IO | Iterable[str] | str | bytes,
    scheme: LabelScheme | None = None,
) -> list[LabeledSentence]:
    """Read the JSON-lines labeled format; scheme inferred from the file when not given."""
    records = read_labeled_records(stream)
    if scheme is None:
        scheme = infer_scheme(records)
    return [labeled_from_dict(rec, scheme) for rec in records]


def read_labeled_file(path: str, scheme: LabelScheme | None = None) -> list[LabeledSentence]:
    with open(path, encoding="utf-8") as f:
        return read_labeled(f, scheme=scheme)
