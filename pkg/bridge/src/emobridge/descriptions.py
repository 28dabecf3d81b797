"""Prompt construction, response parsing and description assembly.

Assembled description texts frame their parts in literal "[CLS]" and
"[SEP]" marker strings. The markers are segment boundaries, not surface
text: the encoder swaps them for its own special tokens before embedding.
"""

from __future__ import annotations

import re

PROMPT_TEMPLATE = "Write {count} sentences expressing {word}'s emotions."

_COUNT_WORDS = {1: "one", 2: "two", 3: "three"}

VARIANTS = ("led1", "led2", "led3", "dict_only", "word_only")

_LIST_MARKER = re.compile(r"^\s*(?:[-*•]+|\(?\d+[.):])\s+")
_BARE_MARKER = re.compile(r"^(?:\(?\d+[.):]?|[-*•]+)$")
_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")


def build_prompt(word, count=2):
    """Generation prompt for one emotion word."""
    word = word.strip()
    if not word:
        raise ValueError("label word must be non-empty")
    if count not in _COUNT_WORDS:
        raise ValueError("sentence count must be 1, 2 or 3, got {!r}".format(count))
    return PROMPT_TEMPLATE.format(count=_COUNT_WORDS[count], word=word)


def split_sentences(text):
    """Sentences of a generation response, in order.

    Responses tend to arrive as numbered or bulleted lists, sometimes on one
    line, rather than as flat prose. Each line is stripped of leading list
    markers, the cleaned text is split at sentence-final punctuation, and
    numbering fragments left between sentences are dropped.
    """
    cleaned = []
    for line in text.splitlines():
        line = _LIST_MARKER.sub("", line.strip())
        if line:
            cleaned.append(line)
    joined = " ".join(cleaned)
    sentences = []
    for part in _SENTENCE_END.split(joined):
        part = part.strip()
        if not part or _BARE_MARKER.match(part):
            continue
        part = _LIST_MARKER.sub("", part)
        if part:
            sentences.append(part)
    return sentences


def assemble(record, variant):
    """Encoder input text for one description record and variant.

    word_only   [CLS] word [SEP]
    dict_only   [CLS] word dict [SEP]
    ledK        [CLS] word dict llm_1 .. llm_K [SEP]

    Parts are joined by single spaces. Missing material (no dictionary
    gloss, or fewer generated sentences than the variant needs) raises
    ValueError naming the word.
    """
    if variant not in VARIANTS:
        raise ValueError(
            "unknown variant {!r}, expected one of {}".format(variant, VARIANTS)
        )
    word = str(record["word"]).strip()
    parts = ["[CLS]", word]
    if variant != "word_only":
        gloss = str(record.get("dict", "")).strip()
        if not gloss:
            raise ValueError("record {!r} has no dictionary gloss".format(word))
        parts.append(gloss)
    if variant.startswith("led"):
        wanted = int(variant[3:])
        sentences = [s.strip() for s in record.get("llm", []) if str(s).strip()]
        if len(sentences) < wanted:
            raise ValueError(
                "record {!r} has {} generated sentences, {} needed".format(
                    word, len(sentences), wanted
                )
            )
        parts.extend(sentences[:wanted])
    parts.append("[SEP]")
    return " ".join(parts)


def available_variants(records):
    """The variants for which every record carries enough material.

    ledK variants layer generated sentences on top of the gloss, so they
    need both; dict_only needs the gloss; word_only always works.
    """
    out = []
    has_gloss = bool(records) and all(
        str(r.get("dict", "")).strip() for r in records
    )
    min_llm = min(
        (len([s for s in r.get("llm", []) if str(s).strip()]) for r in records),
        default=0,
    )
    if has_gloss:
        for k in (1, 2, 3):
            if min_llm >= k:
                out.append("led{}".format(k))
        out.append("dict_only")
    out.append("word_only")
    return tuple(out)
