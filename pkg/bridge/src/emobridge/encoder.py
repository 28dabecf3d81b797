"""Frozen transformer encoding of texts into fixed-width vectors.

The encoder runs in inference mode only; nothing here is trainable. Each
text becomes the final-layer representation of the first token (the pooling
token the encoder prepends), as float32.

Identical input texts are encoded once and every occurrence receives the
same row, bit for bit. Besides saving compute, this insulates duplicates
from batch-composition effects: padding changes the arithmetic a batch
performs, so re-encoding the same text in two different batches is not
guaranteed to give bitwise-equal floats, but copying one encoded row is.
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import SetupError

log = logging.getLogger("emobridge")

_CLS_MARKER = "[CLS]"
_SEP_MARKER = "[SEP]"


class FrozenEncoder:
    """A pretrained transformer plus tokenizer, loaded once, eval mode."""

    def __init__(self, model_path):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except Exception as exc:  # pragma: no cover - depends on the env
            raise SetupError("encoder backend unavailable: {}".format(exc)) from exc
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_path)
            self.model = AutoModel.from_pretrained(model_path)
        except Exception as exc:
            raise SetupError(
                "could not load encoder {!r}: {}".format(model_path, exc)
            ) from exc
        self.model.eval()
        self._torch = torch

    @property
    def dim(self):
        return int(self.model.config.hidden_size)

    def _limit(self):
        """Usable input length in tokens, or None when not bounded."""
        lim = getattr(self.tokenizer, "model_max_length", None)
        if isinstance(lim, int) and 0 < lim < 10**12:
            return lim
        pos = getattr(self.model.config, "max_position_embeddings", None)
        if isinstance(pos, int) and pos > 0:
            return pos
        return None

    def prepare_text(self, text):
        """Swap literal segment markers for the tokenizer's own tokens.

        Texts without markers pass through untouched. Marked texts lose
        their outer [CLS]/[SEP] (the tokenizer adds the encoder's real
        ones) and interior [SEP] boundaries become the tokenizer's
        separator token.
        """
        if _CLS_MARKER not in text and _SEP_MARKER not in text:
            return text
        body = text.strip()
        if body.startswith(_CLS_MARKER):
            body = body[len(_CLS_MARKER):]
        if body.endswith(_SEP_MARKER):
            body = body[: -len(_SEP_MARKER)]
        segments = [seg.strip() for seg in body.split(_SEP_MARKER)]
        segments = [seg for seg in segments if seg]
        if not segments:
            return ""
        sep = self.tokenizer.sep_token or ""
        joiner = " {} ".format(sep) if sep else " "
        return joiner.join(segments)

    def encode_unique(self, texts, batch_size=8):
        """Encode already-prepared texts, one row each, float32."""
        if batch_size < 1:
            raise ValueError("batch size must be at least 1")
        texts = list(texts)
        if not texts:
            return np.zeros((0, self.dim), dtype=np.float32)
        limit = self._limit()
        chunks = []
        for start in range(0, len(texts), batch_size):
            batch = texts[start : start + batch_size]
            enc = self.tokenizer(
                batch,
                padding=True,
                truncation=limit is not None,
                max_length=limit,
                return_tensors="pt",
            )
            with self._torch.no_grad():
                out = self.model(**enc)
            rows = out.last_hidden_state[:, 0, :].cpu().numpy()
            chunks.append(np.ascontiguousarray(rows, dtype=np.float32))
        return np.concatenate(chunks, axis=0)

    def encode_keyed(self, pairs, batch_size=8):
        """Encode ``(row_key, text)`` pairs into a keyed float32 matrix.

        Returns ``(row_keys, matrix)`` aligned with the input order. Texts
        longer than the encoder limit are truncated with a logged warning
        naming the row key.
        """
        pairs = list(pairs)
        keys = [key for key, _ in pairs]
        prepared = [self.prepare_text(text) for _, text in pairs]
        limit = self._limit()
        if limit is not None and prepared:
            encoded = self.tokenizer(
                prepared, add_special_tokens=True, truncation=False, verbose=False
            )["input_ids"]
            for key, ids in zip(keys, encoded):
                if len(ids) > limit:
                    log.warning(
                        "truncating %r: %d tokens exceed the encoder limit of %d",
                        key,
                        len(ids),
                        limit,
                    )
        order = {}
        for text in prepared:
            order.setdefault(text, len(order))
        unique = self.encode_unique(list(order), batch_size)
        matrix = np.empty((len(pairs), unique.shape[1]), dtype=np.float32)
        for i, text in enumerate(prepared):
            matrix[i] = unique[order[text]]
        return keys, matrix
