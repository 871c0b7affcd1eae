"""Error-type feedback comments for detected tokens."""

from __future__ import annotations

import json
from typing import IO, Iterable

from .corpus import C_LABEL, ErrorType, LabeledSentence

DEFAULT_TEMPLATES: dict[ErrorType, str] = {
    ErrorType.TRANS_VERB_PREP: (
        "Transitive verbs do not take a preposition. Instead, they take a direct object. "
        "Remove '{prep}' after '{verb}'."
    ),
    ErrorType.INTRANS_VERB_OBJ: (
        "Intransitive verbs do not take a direct object. "
        "Add the missing preposition after '{verb}'."
    ),
    ErrorType.PREP_SUBJECT: (
        "The subject of a sentence is not introduced by a preposition. "
        "Remove '{prep}' before the subject."
    ),
    ErrorType.PREP_INFINITIVE: (
        "An infinitive is formed with 'to', not another preposition. "
        "Replace '{prep}' with 'to' before '{verb}'."
    ),
    ErrorType.SUBJECT_VERB: (
        "A bare verb phrase cannot be the subject of a sentence. "
        "Use a to-infinitive or the -ing form of '{verb}'."
    ),
}


class TemplateError(ValueError):
    """Template set does not cover a detected error type."""


def load_templates(fp: IO | str) -> dict[ErrorType, str]:
    """Read a JSON map error-type name -> text; all five types must be covered."""
    if isinstance(fp, str):
        with open(fp, encoding="utf-8") as f:
            raw = json.load(f)
    else:
        raw = json.load(fp)
    templates: dict[ErrorType, str] = {}
    for name, text in raw.items():
        if not text:
            raise TemplateError(f"empty template for {name}")
        templates[ErrorType(name)] = text
    missing = [t.value for t in ErrorType if t not in templates]
    if missing:
        raise TemplateError(f"templates missing for: {', '.join(missing)}")
    return templates


_VERB_FLAGGING = (ErrorType.SUBJECT_VERB, ErrorType.INTRANS_VERB_OBJ)


def _slots(labeled: LabeledSentence, index: int, error_type: ErrorType) -> dict[str, str]:
    """{verb} and {prep} values for the flagged token.

    The verb-flagging types put the verb under the flag; the other three flag
    the offending preposition token itself (whatever the detector tagged it),
    with the verb found up the head chain.
    """
    sent = labeled.sentence
    flagged = sent.token_at(index)
    if error_type in _VERB_FLAGGING:
        return {"verb": flagged.form, "prep": ""}
    verb = ""
    seen = set()
    cur = flagged
    while cur.head != 0 and cur.head not in seen and 1 <= cur.head <= len(sent.tokens):
        seen.add(cur.index)
        cur = sent.token_at(cur.head)
        if cur.upos == "VERB":
            verb = cur.form
            break
    if not verb:  # noisy detections: fall back to the flagged verb or the predicate
        if flagged.upos == "VERB":
            verb = flagged.form
        else:
            verb = next((t.form for t in sent.tokens if t.head == 0), "")
    return {"verb": verb, "prep": flagged.form}


def annotate_records(
    detections: Iterable[LabeledSentence],
    templates: dict[ErrorType, str] | None = None,
) -> list[list[dict]]:
    """One comment per non-C token, per sentence, in input order."""
    templates = DEFAULT_TEMPLATES if templates is None else templates
    out: list[list[dict]] = []
    for labeled in detections:
        if labeled.scheme.kind != "typed":
            raise ValueError(f"{labeled.sentence.id}: feedback needs the typed scheme")
        comments = []
        for i, label in enumerate(labeled.labels, start=1):
            if label == C_LABEL:
                continue
            error_type = ErrorType(label)
            template = templates.get(error_type)
            if template is None:
                raise TemplateError(f"no template for {error_type.value}")
            comments.append(
                {
                    "token_index": i,
                    "error_type": error_type.value,
                    "comment": template.format(**_slots(labeled, i, error_type)),
                }
            )
        out.append(comments)
    return out


def annotate(
    detections: Iterable[LabeledSentence],
    templates: dict[ErrorType, str] | None = None,
) -> bytes:
    """JSON-lines: each line is the list of comments for one input sentence."""
    lines = [
        json.dumps(comments, ensure_ascii=False)
        for comments in annotate_records(detections, templates)
    ]
    return ("".join(line + "\n" for line in lines)).encode("utf-8")
