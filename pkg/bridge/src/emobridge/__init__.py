"""Tooling that produces the input files for the zero-shot emotion labeler.

Two jobs: embed utterance and label description texts with a frozen
pretrained transformer into binary tensor manifests, and generate label
description sentences through a text completion API (or a canned offline
fixture). Everything it emits is consumed through file formats; the
downstream package is never imported.
"""

from .config import DEFAULT_KEY_ENV, BridgeConfig
from .descriptions import (
    PROMPT_TEMPLATE,
    VARIANTS,
    assemble,
    available_variants,
    build_prompt,
    split_sentences,
)
from .encoder import FrozenEncoder
from .errors import (
    BridgeError,
    GenerationError,
    InputError,
    PartialOutputError,
    SetupError,
)
from .formats import (
    MANIFEST_NAME,
    read_corpus_texts,
    read_description_records,
    write_description_records,
    write_embedding_manifest,
)
from .generate import (
    FixtureBackend,
    HttpBackend,
    TransientFailure,
    generate_descriptions,
)

__version__ = "0.1.0"

__all__ = [
    "BridgeConfig",
    "BridgeError",
    "DEFAULT_KEY_ENV",
    "FixtureBackend",
    "FrozenEncoder",
    "GenerationError",
    "HttpBackend",
    "InputError",
    "MANIFEST_NAME",
    "PROMPT_TEMPLATE",
    "PartialOutputError",
    "SetupError",
    "TransientFailure",
    "VARIANTS",
    "assemble",
    "available_variants",
    "build_prompt",
    "generate_descriptions",
    "read_corpus_texts",
    "read_description_records",
    "split_sentences",
    "write_description_records",
    "write_embedding_manifest",
]
