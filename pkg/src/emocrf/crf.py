"""Linear-chain CRF over per-utterance emission scores.

The emission matrix S (one row per utterance, one column per seen label) is
produced upstream by the contrastive similarity; this module owns the
transition structure and the chain computations.

Transitions form a square (n+2) x (n+2) matrix over the state order
[start, label_0 .. label_{n-1}, end]. Moves into start, out of end, and the
empty start->end hop are illegal; those entries hold the MASKED sentinel
(-1e9, standing in for -inf) and are never read by the chain recursions,
never updated by training, and carry zero gradient. Public APIs index labels
from 0; start and end are not emittable and appear only inside the matrix.

The score of a labeling y of a length-N conversation is

    score(y) = T[start, y_0] + sum_k T[y_{k-1}, y_k] + T[y_{N-1}, end]
             + sum_k S[k, y_k]

and the loss is nll = log Z - score(gold) with Z the usual partition sum,
computed by a log-space forward pass in O(N n^2). The forward recursion and
sequence_score accumulate in the same order, so on a single-label set
(n = 1, where only one labeling exists) the two agree bit for bit and the
loss is exactly 0.0.
"""

from __future__ import annotations

import numpy as np

from .numeric import logsumexp
from .validation import as_float_matrix, check_label_sequence

MASKED = -1.0e9

START = 0  # row/column of the start state inside the square matrix


class TransitionModel:
    """Square transition matrix with the illegal-move mask kept intact."""

    def __init__(self, n, matrix=None):
        if n < 1:
            raise ValueError("need at least one label state, got n={}".format(n))
        self.n = int(n)
        size = self.n + 2
        if matrix is None:
            matrix = np.zeros((size, size), dtype=np.float64)
            matrix[self.masked_entries(self.n)] = MASKED
        else:
            matrix = np.array(matrix, dtype=np.float64)
            if matrix.shape != (size, size):
                raise ValueError(
                    "transition matrix must be {}x{}, got {}".format(
                        size, size, matrix.shape
                    )
                )
            mask = np.zeros((size, size), dtype=bool)
            mask[self.masked_entries(self.n)] = True
            if not np.all(matrix[mask] == MASKED):
                raise ValueError("masked transition entries must hold the sentinel")
            if not np.all(np.isfinite(matrix[~mask])):
                raise ValueError("legal transition entries must be finite")
        self.matrix = matrix

    @staticmethod
    def masked_entries(n):
        """Index arrays selecting every illegal entry of the square matrix."""
        size = n + 2
        end = size - 1
        rows = []
        cols = []
        for a in range(size):  # into start
            rows.append(a)
            cols.append(START)
        for b in range(1, size):  # out of end (end->start already listed)
            rows.append(end)
            cols.append(b)
        rows.append(START)  # the empty chain start->end
        cols.append(end)
        return np.array(rows), np.array(cols)

    @classmethod
    def initialize(cls, n, rng):
        """Fresh model with legal entries drawn uniformly from [-0.1, 0.1]."""
        size = n + 2
        matrix = rng.uniform(-0.1, 0.1, size=(size, size))
        matrix[cls.masked_entries(n)] = MASKED
        return cls(n, matrix)

    @property
    def end(self):
        return self.n + 1

    @property
    def start_scores(self):
        """View of T[start, label] as a length-n vector (label ids 0-based)."""
        return self.matrix[START, 1 : self.n + 1]

    @property
    def trans(self):
        """View of the label-to-label block, shape (n, n)."""
        return self.matrix[1 : self.n + 1, 1 : self.n + 1]

    @property
    def end_scores(self):
        """View of T[label, end] as a length-n vector."""
        return self.matrix[1 : self.n + 1, self.end]

    @property
    def mask(self):
        m = np.zeros_like(self.matrix, dtype=bool)
        m[self.masked_entries(self.n)] = True
        return m

    def copy(self):
        return TransitionModel(self.n, self.matrix.copy())


def _check_emissions(s, tm):
    s = as_float_matrix(s, "emission matrix")
    if s.shape[1] != tm.n:
        raise ValueError(
            "emission matrix has {} columns for {} labels".format(s.shape[1], tm.n)
        )
    return s


def sequence_score(s, tm, y):
    """Unnormalized score of one labeling (0-based label ids)."""
    s = _check_emissions(s, tm)
    y = check_label_sequence(y, tm.n, s.shape[0])
    # Accumulate in the same order as the forward recursion: emission after
    # each transition. This keeps nll_loss exactly zero when n == 1.
    total = tm.start_scores[y[0]] + s[0, y[0]]
    for k in range(1, len(y)):
        total = total + tm.trans[y[k - 1], y[k]]
        total = total + s[k, y[k]]
    total = total + tm.end_scores[y[-1]]
    return float(total)


def _forward_table(s, tm):
    n_pos = s.shape[0]
    alpha = np.empty((n_pos, tm.n), dtype=np.float64)
    alpha[0] = tm.start_scores + s[0]
    for i in range(1, n_pos):
        alpha[i] = logsumexp(alpha[i - 1][:, None] + tm.trans, axis=0)
        alpha[i] = alpha[i] + s[i]
    return alpha


def _backward_table(s, tm):
    n_pos = s.shape[0]
    beta = np.empty((n_pos, tm.n), dtype=np.float64)
    beta[n_pos - 1] = tm.end_scores
    for i in range(n_pos - 2, -1, -1):
        beta[i] = logsumexp(tm.trans + (s[i + 1] + beta[i + 1])[None, :], axis=1)
    return beta


def log_partition(s, tm):
    """log of the summed exp-scores of all n^N labelings."""
    s = _check_emissions(s, tm)
    alpha = _forward_table(s, tm)
    return float(logsumexp(alpha[-1] + tm.end_scores))


def nll_loss(s, tm, gold):
    """Negative log-likelihood of the gold labeling; non-negative."""
    return log_partition(s, tm) - sequence_score(s, tm, gold)


def position_marginals(s, tm):
    """P(y_i = j) for every position, rows renormalized to sum exactly 1."""
    s = _check_emissions(s, tm)
    alpha = _forward_table(s, tm)
    beta = _backward_table(s, tm)
    log_z = logsumexp(alpha[-1] + tm.end_scores)
    gamma = np.exp(alpha + beta - log_z)
    gamma /= np.sum(gamma, axis=1, keepdims=True)
    return gamma


def crf_gradients(s, tm, gold):
    """Analytic gradients of nll_loss with respect to S and the full matrix.

    dL/dS is (marginals - gold one-hot); dL/dT holds (expected - observed)
    transition counts, laid out on the square matrix with exact zeros at the
    masked entries. Marginals are renormalized per position, which keeps the
    identities "rows sum to 0" exact and makes both gradients exactly zero
    when n == 1.
    """
    s = _check_emissions(s, tm)
    gold = check_label_sequence(gold, tm.n, s.shape[0])
    n_pos = s.shape[0]
    alpha = _forward_table(s, tm)
    beta = _backward_table(s, tm)
    log_z = logsumexp(alpha[-1] + tm.end_scores)

    gamma = np.exp(alpha + beta - log_z)
    gamma /= np.sum(gamma, axis=1, keepdims=True)

    grad_s = gamma.copy()
    grad_s[np.arange(n_pos), gold] -= 1.0

    grad_t = np.zeros_like(tm.matrix)
    trans_block = grad_t[1 : tm.n + 1, 1 : tm.n + 1]
    for k in range(n_pos - 1):
        log_xi = (
            alpha[k][:, None]
            + tm.trans
            + (s[k + 1] + beta[k + 1])[None, :]
            - log_z
        )
        xi = np.exp(log_xi)
        xi /= np.sum(xi)
        trans_block += xi
        trans_block[gold[k], gold[k + 1]] -= 1.0
    # start->first and last->end each occur exactly once per chain.
    grad_t[START, 1 : tm.n + 1] = gamma[0]
    grad_t[START, 1 + gold[0]] -= 1.0
    grad_t[1 : tm.n + 1, tm.end] = gamma[-1]
    grad_t[1 + gold[-1], tm.end] -= 1.0
    return grad_s, grad_t
