"""Masked-LM token-classifier fine-tuning against the gedkit file contracts."""

from .alignment import SubwordAlignment, align
from .config import TrainSpec
from .data import Example, label_set, read_examples, write_predictions
from .model import IGNORE_INDEX, TokenClassifier, collate, encode_sentence
from .predicting import load_artifact, predict_labels, save_artifact
from .training import train_all_seeds, train_one_seed

__version__ = "0.1.0"
