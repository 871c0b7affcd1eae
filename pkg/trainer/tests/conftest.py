import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tinymodel import DEV_RECORDS, TEST_RECORDS, TRAIN_RECORDS, build_tiny_encoder, write_jsonl


@pytest.fixture(scope="session")
def encoder_dir(tmp_path_factory):
    return build_tiny_encoder(tmp_path_factory.mktemp("encoder"), seed=0)


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    write_jsonl(TRAIN_RECORDS, root / "train.jsonl")
    write_jsonl(DEV_RECORDS, root / "dev.jsonl")
    write_jsonl(TEST_RECORDS, root / "test.jsonl")
    return root
