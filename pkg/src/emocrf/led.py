"""Emotion label descriptions and their prompt/assembly conventions.

A label is represented to the encoder not as a bare word but as a composed
description: the word itself, a dictionary definition, and a couple of
generated example sentences. This module owns the prompt template used to
request those sentences, the assembly of the final description string, and
the line-delimited JSON file format:

    {"word": "joy", "dict": "...", "llm": ["...", "..."]}

Embedding the assembled strings is a separate tool's job; here they stay
text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .corpus import normalize_word
from .errors import FormatError

PROMPT_TEMPLATE = "Write {count} sentences expressing {word}'s emotions."

_COUNT_WORDS = {1: "one", 2: "two", 3: "three"}

DESCRIPTION_MODES = ("full", "dict_only", "word_only")


def build_prompt(word, count=2):
    """Generation prompt for a label word.

    The default asks for two sentences; counts 1..3 swap the number word and
    nothing else.
    """
    word = word.strip()
    if not word:
        raise ValueError("label word must be non-empty")
    if count not in _COUNT_WORDS:
        raise ValueError("sentence count must be 1, 2 or 3, got {!r}".format(count))
    return PROMPT_TEMPLATE.format(count=_COUNT_WORDS[count], word=word)


@dataclass(eq=False)
class EmotionPrototype:
    """One label's textual material, prior to encoding."""

    word: str
    dict_description: str = ""
    llm_sentences: tuple = ()
    embedding: object = None  # optional float32 vector once encoded

    def __post_init__(self):
        self.word = self.word.strip()
        if not self.word:
            raise ValueError("prototype word must be non-empty")
        self.llm_sentences = tuple(self.llm_sentences)


def assemble_description(proto, mode="full", desc_count=None):
    """Compose the encoder input string for one prototype.

    Modes:
      full       [CLS] word dict llm_1 .. llm_k [SEP]
      dict_only  [CLS] word dict [SEP]
      word_only  [CLS] word [SEP]

    Parts are joined by single spaces. ``desc_count`` limits how many
    generated sentences the full mode uses; by default all available ones are
    taken, and at least one must exist.
    """
    if mode not in DESCRIPTION_MODES:
        raise ValueError(
            "unknown description mode {!r}, expected one of {}".format(
                mode, DESCRIPTION_MODES
            )
        )
    parts = ["[CLS]", proto.word]
    if mode in ("full", "dict_only"):
        if not proto.dict_description.strip():
            raise ValueError(
                "prototype {!r} has no dictionary description".format(proto.word)
            )
        parts.append(proto.dict_description.strip())
    if mode == "full":
        sentences = [s.strip() for s in proto.llm_sentences if s.strip()]
        wanted = len(sentences) if desc_count is None else desc_count
        if wanted < 1:
            raise ValueError("desc_count must be at least 1")
        if len(sentences) < wanted:
            raise ValueError(
                "prototype {!r} has {} generated sentences, {} requested".format(
                    proto.word, len(sentences), wanted
                )
            )
        parts.extend(sentences[:wanted])
    parts.append("[SEP]")
    return " ".join(parts)


def load_descriptions(path):
    """Read a line-delimited JSON description file.

    Words must be unique under case-insensitive matching. Records may omit
    "dict" or "llm" (they default to empty); whether that is enough depends
    on the description mode used later. Unknown keys are ignored so files
    carrying extra provenance still load.
    """
    protos = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(
                    "line {}: bad JSON in description file: {}".format(line_no, exc)
                ) from exc
            if not isinstance(record, dict) or "word" not in record:
                raise FormatError(
                    'line {}: description record needs a "word" field'.format(line_no)
                )
            word = str(record["word"])
            key = normalize_word(word)
            if key in seen:
                raise FormatError(
                    "line {}: duplicate description for {!r}".format(line_no, word)
                )
            seen.add(key)
            llm = record.get("llm", [])
            if not isinstance(llm, list) or not all(isinstance(s, str) for s in llm):
                raise FormatError(
                    'line {}: "llm" must be a list of strings'.format(line_no)
                )
            protos.append(
                EmotionPrototype(
                    word=word,
                    dict_description=str(record.get("dict", "")),
                    llm_sentences=tuple(llm),
                )
            )
    return protos


def save_descriptions(protos, path):
    """Write prototypes in the line-delimited JSON format."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for proto in protos:
            record = {
                "word": proto.word,
                "dict": proto.dict_description,
                "llm": list(proto.llm_sentences),
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
