"""File formats shared with the downstream labeling package.

Three formats cross the tool boundary, so their shapes are frozen:

- conversation corpus, one utterance per line, tab separated:
  ``conversation_id <TAB> speaker_id <TAB> label_or_- <TAB> text``; lines of
  one conversation are contiguous and their 0-based order within the
  conversation gives the row key ``<conversation_id>:<index>``;
- label description files, one JSON object per line with "word", "dict" and
  "llm" fields (extra keys are legal and preserved);
- embedding manifests: a directory holding ``manifest.json`` plus one raw
  row-major little-endian float32 ``.bin`` per tensor, every tensor carrying
  one row key per row, all tensors of one manifest sharing a width.

Writers stage into a temporary file in the target directory and rename, so
an interrupted run never leaves a half-written file at the final path.
"""

from __future__ import annotations

import json
import os
import re
import tempfile

import numpy as np

from .errors import InputError

MANIFEST_NAME = "manifest.json"
_TENSOR_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


def _atomic_write(path, payload):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_corpus_texts(path):
    """All utterances of a corpus file as ``(row_key, text)`` pairs."""
    pairs = []
    counts = {}
    finished = set()
    current = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                raise InputError("blank line in corpus file", line_no)
            parts = line.split("\t", 3)
            if len(parts) < 4:
                raise InputError(
                    "expected 4 tab separated fields, got {}".format(len(parts)),
                    line_no,
                )
            conv, _speaker, _label, text = parts
            conv = conv.strip()
            if not conv:
                raise InputError("empty conversation id", line_no)
            if not text.strip():
                raise InputError("empty utterance text", line_no)
            if conv != current:
                if conv in finished:
                    raise InputError(
                        "conversation {!r} is not contiguous".format(conv), line_no
                    )
                if current is not None:
                    finished.add(current)
                current = conv
            index = counts.get(conv, 0)
            counts[conv] = index + 1
            pairs.append(("{}:{}".format(conv, index), text))
    if not pairs:
        raise InputError("corpus file {!r} has no records".format(path))
    return pairs


def read_description_records(path):
    """Load description records as plain dicts, extra keys included.

    Every record needs a "word"; words must be unique after trimming and
    lower-casing. "dict" defaults to an empty string and "llm" to an empty
    list, and "llm" must be a list of strings when present.
    """
    records = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError("bad JSON: {}".format(exc), line_no) from exc
            if not isinstance(record, dict) or "word" not in record:
                raise InputError('description record needs a "word" field', line_no)
            word = str(record["word"]).strip()
            if not word:
                raise InputError("empty word", line_no)
            key = word.lower()
            if key in seen:
                raise InputError("duplicate word {!r}".format(word), line_no)
            seen.add(key)
            llm = record.get("llm", [])
            if not isinstance(llm, list) or not all(isinstance(s, str) for s in llm):
                raise InputError('"llm" must be a list of strings', line_no)
            record = dict(record)
            record["word"] = word
            record.setdefault("dict", "")
            record.setdefault("llm", [])
            records.append(record)
    return records


def write_description_records(records, path):
    """Write description records, one JSON object per line, atomically."""
    lines = []
    for record in records:
        if "word" not in record:
            raise ValueError("description record without a word: {!r}".format(record))
        lines.append(json.dumps(record, ensure_ascii=False))
    _atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))
    return path


def write_embedding_manifest(tensors, directory):
    """Write ``(name, float32 matrix, row_keys)`` triples as one manifest.

    Returns the manifest path. Shapes, dtypes, key counts, key uniqueness
    and the shared-width rule are all enforced here so that a manifest that
    gets written at all is a valid one.
    """
    tensors = list(tensors)
    names = [name for name, _, _ in tensors]
    if len(set(names)) != len(names):
        raise ValueError("duplicate tensor names: {}".format(names))
    widths = set()
    staged = []
    for name, data, row_keys in tensors:
        if not _TENSOR_NAME_RE.match(name):
            raise ValueError("tensor name {!r} is not filesystem safe".format(name))
        data = np.asarray(data)
        if data.dtype != np.float32:
            raise ValueError(
                "tensor {!r} must be float32, got {}".format(name, data.dtype)
            )
        if data.ndim != 2:
            raise ValueError(
                "tensor {!r} must be 2-D, got shape {}".format(name, data.shape)
            )
        row_keys = [str(k) for k in row_keys]
        if len(row_keys) != data.shape[0]:
            raise ValueError(
                "tensor {!r} has {} rows but {} row keys".format(
                    name, data.shape[0], len(row_keys)
                )
            )
        if len(set(row_keys)) != len(row_keys):
            raise ValueError("tensor {!r} has duplicate row keys".format(name))
        widths.add(data.shape[1])
        staged.append((name, data, row_keys))
    if len(widths) > 1:
        raise ValueError(
            "all tensors of one manifest must share a width, got {}".format(
                sorted(widths)
            )
        )
    os.makedirs(directory, exist_ok=True)
    entries = []
    for name, data, row_keys in staged:
        file_name = name + ".bin"
        payload = np.ascontiguousarray(data, dtype="<f4").tobytes()
        _atomic_write(os.path.join(directory, file_name), payload)
        entries.append(
            {
                "name": name,
                "file": file_name,
                "dtype": "f32",
                "shape": [int(data.shape[0]), int(data.shape[1])],
                "row_keys": row_keys,
            }
        )
    doc = {"version": 1, "tensors": entries}
    manifest_path = os.path.join(directory, MANIFEST_NAME)
    payload = (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")
    _atomic_write(manifest_path, payload)
    return manifest_path
