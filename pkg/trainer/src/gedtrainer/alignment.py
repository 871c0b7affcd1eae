"""Word-to-subword alignment with first-subword label positions."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SubwordAlignment:
    """Subword expansion of a word sequence (no special boundary tokens).

    first_subword[i] is the 0-based position of word i's first piece within
    `subwords`; positions are strictly increasing and cover every word.
    """

    subwords: tuple[str, ...]
    first_subword: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.subwords) < len(self.first_subword):
            raise ValueError("fewer subwords than words")
        if list(self.first_subword) != sorted(set(self.first_subword)):
            raise ValueError("first-subword positions must be strictly increasing")


def align(words: list[str], tokenizer) -> SubwordAlignment:
    """Expand each word with the encoder's tokenizer; empty expansions map to UNK."""
    if not words:
        raise ValueError("no words to align")
    pieces: list[str] = []
    first: list[int] = []
    for word in words:
        subs = tokenizer.tokenize(word)
        if not subs:
            subs = [tokenizer.unk_token]
        first.append(len(pieces))
        pieces.extend(subs)
    return SubwordAlignment(subwords=tuple(pieces), first_subword=tuple(first))
