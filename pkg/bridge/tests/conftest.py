import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from tinymodel import build_tiny_encoder


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """One miniature saved encoder shared by the whole session."""
    directory = tmp_path_factory.mktemp("tiny_encoder")
    return build_tiny_encoder(str(directory))
