"""Encoder + linear token-classification head, with batch encoding helpers."""

from __future__ import annotations

import warnings

import torch
from torch import nn

from .alignment import align
from .data import Example

IGNORE_INDEX = -100


class TokenClassifier(nn.Module):
    """Final-layer encoder states through a k x h linear head; argmax of the
    scores equals argmax of their softmax."""

    def __init__(self, encoder, n_labels: int):
        super().__init__()
        self.encoder = encoder
        self.head = nn.Linear(encoder.config.hidden_size, n_labels)

    def forward(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        hidden = self.encoder(input_ids=input_ids, attention_mask=attention_mask).last_hidden_state
        return self.head(hidden)


def encode_sentence(
    example: Example, tokenizer, label_ids: dict[str, int], max_length: int
) -> tuple[list[int], list[int]]:
    """Input ids with [CLS]/[SEP] and per-position label ids.

    Only each word's first subword carries its label; every other position is
    IGNORE_INDEX (skipped by the loss and by prediction).
    """
    alignment = align(example.words, tokenizer)
    pieces = list(alignment.subwords)
    first = list(alignment.first_subword)
    budget = max_length - 2  # room for the boundary tokens
    if len(pieces) > budget:
        warnings.warn(f"{example.id}: {len(pieces)} subwords truncated to {budget}")
        pieces = pieces[:budget]
    ids = (
        [tokenizer.cls_token_id]
        + tokenizer.convert_tokens_to_ids(pieces)
        + [tokenizer.sep_token_id]
    )
    labels = [IGNORE_INDEX] * len(ids)
    for word_i, piece_pos in enumerate(first):
        pos = piece_pos + 1  # shifted past [CLS]
        if pos < len(ids) - 1:
            labels[pos] = label_ids[example.labels[word_i]]
    return ids, labels


def collate(
    encoded: list[tuple[list[int], list[int]]], pad_id: int
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    width = max(len(ids) for ids, _ in encoded)
    input_ids = torch.full((len(encoded), width), pad_id, dtype=torch.long)
    attention = torch.zeros((len(encoded), width), dtype=torch.long)
    labels = torch.full((len(encoded), width), IGNORE_INDEX, dtype=torch.long)
    for row, (ids, lab) in enumerate(encoded):
        input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        attention[row, : len(ids)] = 1
        labels[row, : len(lab)] = torch.tensor(lab, dtype=torch.long)
    return input_ids, attention, labels


def first_subword_positions(example: Example, tokenizer, max_length: int) -> list[int]:
    """Positions (within the padded/encoded row) that carry word labels."""
    alignment = align(example.words, tokenizer)
    budget = max_length - 2
    positions = []
    for piece_pos in alignment.first_subword:
        pos = piece_pos + 1
        if piece_pos < budget:
            positions.append(pos)
    return positions
