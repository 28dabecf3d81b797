"""Flat binary embedding storage with a JSON manifest.

A manifest directory holds one ``manifest.json`` plus one ``.bin`` file per
tensor. The manifest schema is:

    {
      "version": 1,
      "tensors": [
        {
          "name": "utterances",
          "file": "utterances.bin",
          "dtype": "f32",
          "shape": [rows, dim],
          "row_keys": ["..."]
        }
      ]
    }

The ``.bin`` payload is raw row-major IEEE-754 binary32, little endian, no
header. Only "f32" exists as a dtype tag; math code upcasts to float64 after
loading. Writing then reading returns the exact bytes that went in, NaN
payloads included, because rows are moved with buffer copies and never pass
through arithmetic.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import CorruptionError, FormatError, ManifestError

MANIFEST_NAME = "manifest.json"
_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


@dataclass(eq=False)
class EmbeddingMatrix:
    """A named float32 matrix whose rows are addressed by string keys."""

    name: str
    data: np.ndarray
    row_keys: tuple = ()
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.dtype != np.float32:
            raise ValueError(
                "embedding data must be float32, got {}".format(self.data.dtype)
            )
        if self.data.ndim != 2:
            raise ValueError(
                "embedding data must be 2-D, got shape {}".format(self.data.shape)
            )
        self.row_keys = tuple(str(k) for k in self.row_keys)
        if len(self.row_keys) != self.data.shape[0]:
            raise ValueError(
                "matrix {!r} declares {} row keys for {} rows".format(
                    self.name, len(self.row_keys), self.data.shape[0]
                )
            )
        if len(set(self.row_keys)) != len(self.row_keys):
            raise ValueError(
                "matrix {!r} has duplicate row keys".format(self.name)
            )
        self._index = {k: i for i, k in enumerate(self.row_keys)}

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def dim(self):
        return self.data.shape[1]

    def index_of(self, key):
        try:
            return self._index[key]
        except KeyError:
            raise ManifestError(
                "row key {!r} not present in tensor {!r}".format(key, self.name)
            ) from None

    def row(self, key):
        return self.data[self.index_of(key)]

    def take(self, keys):
        """Rows for ``keys`` in the requested order, as a float32 matrix."""
        idx = [self.index_of(k) for k in keys]
        return self.data[idx]


def write_manifest(matrices, directory):
    """Write ``matrices`` to ``directory`` and return the manifest path.

    Tensor names become file names, so they are restricted to a filesystem
    safe alphabet and must be unique within one manifest. An empty matrix
    list is legal and produces a manifest with an empty tensor array.
    """
    matrices = list(matrices)
    names = [m.name for m in matrices]
    if len(set(names)) != len(names):
        raise FormatError("duplicate tensor names in manifest: {}".format(names))
    dims = {m.dim for m in matrices}
    if len(dims) > 1:
        raise FormatError(
            "all tensors in one manifest must share an embedding width, "
            "got {}".format(sorted(dims))
        )
    entries = []
    os.makedirs(directory, exist_ok=True)
    for m in matrices:
        if not _NAME_RE.match(m.name):
            raise FormatError(
                "tensor name {!r} is not filesystem safe".format(m.name)
            )
        file_name = m.name + ".bin"
        payload = np.ascontiguousarray(m.data, dtype="<f4").tobytes()
        with open(os.path.join(directory, file_name), "wb") as fh:
            fh.write(payload)
        entries.append(
            {
                "name": m.name,
                "file": file_name,
                "dtype": "f32",
                "shape": [int(m.rows), int(m.dim)],
                "row_keys": list(m.row_keys),
            }
        )
    manifest_path = os.path.join(directory, MANIFEST_NAME)
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump({"version": 1, "tensors": entries}, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
    return manifest_path


def manifest_path_of(path):
    """Accept either a manifest directory or the manifest file itself."""
    if os.path.isdir(path):
        return os.path.join(path, MANIFEST_NAME)
    return path


def read_manifest(path):
    """Load every tensor listed by a manifest, in declaration order."""
    manifest_path = manifest_path_of(path)
    with open(manifest_path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError("manifest is not valid JSON: {}".format(exc)) from exc
    if not isinstance(doc, dict) or doc.get("version") != 1:
        raise FormatError(
            "unsupported manifest version {!r}".format(
                doc.get("version") if isinstance(doc, dict) else doc
            )
        )
    tensors = doc.get("tensors")
    if not isinstance(tensors, list):
        raise FormatError('manifest lacks a "tensors" array')
    base = os.path.dirname(manifest_path)
    out = []
    for entry in tensors:
        out.append(_load_entry(entry, base))
    return out


def _load_entry(entry, base):
    for key in ("name", "file", "dtype", "shape", "row_keys"):
        if key not in entry:
            raise FormatError("manifest entry is missing {!r}".format(key))
    if entry["dtype"] != "f32":
        raise FormatError(
            'tensor {!r} has dtype {!r}; only "f32" is supported'.format(
                entry["name"], entry["dtype"]
            )
        )
    shape = entry["shape"]
    if (
        not isinstance(shape, list)
        or len(shape) != 2
        or not all(isinstance(v, int) and v >= 0 for v in shape)
    ):
        raise FormatError(
            "tensor {!r} has a bad shape {!r}".format(entry["name"], shape)
        )
    rows, dim = shape
    with open(os.path.join(base, entry["file"]), "rb") as fh:
        raw = fh.read()
    expected = rows * dim * 4
    if len(raw) != expected:
        raise CorruptionError(
            "tensor {!r}: {} bytes on disk, manifest shape {}x{} needs {}".format(
                entry["name"], len(raw), rows, dim, expected
            )
        )
    data = np.frombuffer(raw, dtype="<f4").reshape(rows, dim)
    row_keys = entry["row_keys"]
    if not isinstance(row_keys, list) or len(row_keys) != rows:
        raise CorruptionError(
            "tensor {!r}: {} row keys for {} rows".format(
                entry["name"], len(row_keys) if isinstance(row_keys, list) else "?", rows
            )
        )
    # frombuffer yields a read-only view; copy so callers can own the array.
    try:
        return EmbeddingMatrix(entry["name"], data.copy(), tuple(row_keys))
    except ValueError as exc:
        # e.g. duplicate row keys: a constructor complaint, but coming from a
        # file it is a format problem.
        raise FormatError(str(exc)) from exc


def find_tensor(matrices, name):
    for m in matrices:
        if m.name == name:
            return m
    raise ManifestError(
        "tensor {!r} not found; manifest has {}".format(
            name, [m.name for m in matrices] or "no tensors"
        )
    )
