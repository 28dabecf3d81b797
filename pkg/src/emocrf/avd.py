"""Attention-weighted Viterbi decoding and transfer to an unseen vocabulary.

The chain model is trained over seen labels only. To predict labels it never
saw, decoding runs in two stages:

1. Viterbi over the seen set builds the cumulative score table

       c[0, j] = T[start, j] + S[0, j]
       c[i, j] = max_k(c[i-1, k] + T[k, j]) + S[i, j]

   and the best path additionally weighs T[j, end] when picking the final
   state. The end transition does not enter c itself.

2. Each row of c is turned into a distribution over seen labels by shifting
   with the previous position's best-path score,

       b_0 = 0,   b_i = c[i-1, best_path[i-1]]
       p[i, j] = (c[i, j] - b_i) / sum_k (c[i, k] - b_i)

   and the utterance representation is enhanced with the prototype mixture

       h'_i = h_utte_i + sum_j p[i, j] * seen_proto_j.

   The shifted scores are not guaranteed positive, so p can leave [0, 1]
   while its rows still sum to 1; clamp_negative trades that fidelity for a
   proper distribution by flooring at zero before normalizing. A row whose
   normalizer is exactly zero cannot be scaled and raises DegenerateRowError.

3. The unseen prediction for each utterance is the cosine-nearest unseen
   prototype of h'_i, ties to the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRowError
from .proto_sim import cosine_matrix
from .validation import as_float_matrix, check_same_dim


def viterbi_scores(s, tm):
    """Cumulative max-score table and backpointers, both (N, n).

    Backpointer row 0 is -1: the first position has no predecessor.
    """
    s = as_float_matrix(s, "emission matrix")
    if s.shape[1] != tm.n:
        raise ValueError(
            "emission matrix has {} columns for {} labels".format(s.shape[1], tm.n)
        )
    n_pos = s.shape[0]
    c = np.empty((n_pos, tm.n), dtype=np.float64)
    back = np.full((n_pos, tm.n), -1, dtype=np.int64)
    c[0] = tm.start_scores + s[0]
    for i in range(1, n_pos):
        reach = c[i - 1][:, None] + tm.trans  # (from, to)
        back[i] = np.argmax(reach, axis=0)  # ties: lowest predecessor
        c[i] = reach[back[i], np.arange(tm.n)] + s[i]
    return c, back


def best_path(c, back, tm):
    """Best labeling under c plus the end transition, ties to lowest index."""
    c = np.asarray(c, dtype=np.float64)
    n_pos = c.shape[0]
    path = np.empty(n_pos, dtype=np.int64)
    path[-1] = int(np.argmax(c[-1] + tm.end_scores))
    for i in range(n_pos - 1, 0, -1):
        path[i - 1] = back[i, path[i]]
    return path


def transfer_probabilities(c, path, clamp_negative=False):
    """Row-normalized transfer weights from the Viterbi table.

    Row i is shifted by the previous best-path score (zero for the first
    row), then divided by its sum. Entries may fall outside [0, 1] unless
    clamp_negative floors them at zero first; rows sum to 1 either way.
    """
    c = np.asarray(c, dtype=np.float64)
    path = np.asarray(path, dtype=np.int64)
    if path.shape[0] != c.shape[0]:
        raise ValueError(
            "path length {} does not match table rows {}".format(
                path.shape[0], c.shape[0]
            )
        )
    shifts = np.empty(c.shape[0], dtype=np.float64)
    shifts[0] = 0.0
    if c.shape[0] > 1:
        shifts[1:] = c[np.arange(c.shape[0] - 1), path[:-1]]
    shifted = c - shifts[:, None]
    if clamp_negative:
        shifted = np.maximum(shifted, 0.0)
    denom = np.sum(shifted, axis=1)
    zero_rows = np.flatnonzero(denom == 0.0)
    if zero_rows.size:
        raise DegenerateRowError(int(zero_rows[0]))
    return shifted / denom[:, None]


def enhance_and_predict(h_utte, p, seen_protos, unseen_protos):
    """Mix seen prototypes into the utterances, then pick nearest unseen.

    Returns (h_prime, predictions); predictions are 0-based indices into the
    unseen prototype rows, cosine ties resolved toward the lowest index.
    """
    h_utte = as_float_matrix(h_utte, "utterance matrix")
    seen = as_float_matrix(seen_protos, "seen prototypes")
    unseen = as_float_matrix(unseen_protos, "unseen prototypes")
    check_same_dim(h_utte, seen, "utterance matrix", "seen prototypes")
    check_same_dim(h_utte, unseen, "utterance matrix", "unseen prototypes")
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (h_utte.shape[0], seen.shape[0]):
        raise ValueError(
            "transfer matrix shape {} does not match {} utterances x {} seen".format(
                p.shape, h_utte.shape[0], seen.shape[0]
            )
        )
    h_prime = h_utte + p @ seen
    cos = cosine_matrix(h_prime, unseen, "enhanced utterance", "unseen prototype")
    return h_prime, np.argmax(cos, axis=1)


@dataclass(eq=False)
class DecodeResult:
    """Everything one conversation's decode produces."""

    seen_path: np.ndarray        # Viterbi labeling over seen ids
    score_table: np.ndarray      # c, (N, n)
    transfer: np.ndarray         # P, (N, n)
    h_prime: np.ndarray          # enhanced utterances, (N, d)
    unseen_pred: np.ndarray      # unseen ids, (N,)
    unseen_cosines: np.ndarray   # cosines to unseen prototypes, (N, m)


def attention_viterbi_decode(
    h_utte, s, tm, seen_protos, unseen_protos, clamp_negative=False
):
    """Full decode of one conversation (already-encoded inputs)."""
    c, back = viterbi_scores(s, tm)
    path = best_path(c, back, tm)
    p = transfer_probabilities(c, path, clamp_negative=clamp_negative)
    h_prime, pred = enhance_and_predict(h_utte, p, seen_protos, unseen_protos)
    cos = cosine_matrix(h_prime, unseen_protos, "enhanced utterance", "unseen prototype")
    return DecodeResult(path, c, p, h_prime, pred, cos)


def nearest_neighbor_predict(h_utte, unseen_protos):
    """Chain-free fallback: cosine-nearest unseen prototype per utterance.

    This is the decode used when the chain model is disabled; h_utte is
    whatever the encoder side produced (contextualized or not).
    """
    h_utte = as_float_matrix(h_utte, "utterance matrix")
    unseen = as_float_matrix(unseen_protos, "unseen prototypes")
    check_same_dim(h_utte, unseen, "utterance matrix", "unseen prototypes")
    cos = cosine_matrix(h_utte, unseen, "utterance", "unseen prototype")
    return np.argmax(cos, axis=1), cos
