"""Contrastive similarity between utterances and label prototypes.

Row i of the output distributes one utterance's affinity over the prototype
set:

    s_ij = exp(cos(u_i, p_j) / tau) / sum_k exp(cos(u_i, p_k) / tau)

Cosines live in [-1, 1], so with the default temperature tau = 0.02 the
softmax is extremely sharp (a cosine gap of 0.1 is a logit gap of 5). Rows
are stochastic by construction. Zero-norm vectors make the cosine undefined
and are rejected with the offending row named.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateVectorError
from .numeric import softmax
from .validation import as_float_matrix, check_same_dim

DEFAULT_TAU = 0.02


class SimConfig:
    def __init__(self, tau=DEFAULT_TAU):
        if not (tau > 0):
            raise ValueError("tau must be positive, got {!r}".format(tau))
        self.tau = float(tau)

    def __repr__(self):
        return "SimConfig(tau={!r})".format(self.tau)


def _checked_norms(m, name, keys=None):
    norms = np.linalg.norm(m, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        i = int(zero[0])
        label = keys[i] if keys is not None else str(i)
        raise DegenerateVectorError(
            "{} row {} has zero norm, cosine undefined".format(name, label)
        )
    return norms


def cosine_matrix(a, b, name_a="left", name_b="right", keys_a=None, keys_b=None):
    """Pairwise cosines between the rows of two matrices, float64."""
    a = as_float_matrix(a, name_a)
    b = as_float_matrix(b, name_b)
    check_same_dim(a, b, name_a, name_b)
    na = _checked_norms(a, name_a, keys_a)
    nb = _checked_norms(b, name_b, keys_b)
    return (a / na[:, None]) @ (b / nb[:, None]).T


def contrastive_similarity(
    utterances, prototypes, cfg=None, utterance_keys=None, prototype_keys=None
):
    """Row-stochastic similarity matrix, one row per utterance."""
    cfg = cfg or SimConfig()
    cos = cosine_matrix(
        utterances,
        prototypes,
        "utterance",
        "prototype",
        utterance_keys,
        prototype_keys,
    )
    return softmax(cos / cfg.tau, axis=-1)


def cosine_backward(a, b, grad_cos):
    """Gradients of a loss through cosine_matrix(a, b).

    ``grad_cos`` is dLoss/dC for C = cosine_matrix(a, b); returns
    (grad_a, grad_b).
    """
    a = as_float_matrix(a, "left")
    b = as_float_matrix(b, "right")
    check_same_dim(a, b, "left", "right")
    grad_cos = np.asarray(grad_cos, dtype=np.float64)
    if grad_cos.shape != (a.shape[0], b.shape[0]):
        raise ValueError(
            "grad shape {} does not match cosine shape {}".format(
                grad_cos.shape, (a.shape[0], b.shape[0])
            )
        )
    na = _checked_norms(a, "left")
    nb = _checked_norms(b, "right")
    an = a / na[:, None]
    bn = b / nb[:, None]
    cos = an @ bn.T
    # d cos_ij / d a_i = b_j / (|a_i||b_j|) - cos_ij * a_i / |a_i|^2
    row_dot = np.sum(grad_cos * cos, axis=1)
    grad_a = (grad_cos @ bn) / na[:, None] - (row_dot / (na * na))[:, None] * a
    col_dot = np.sum(grad_cos * cos, axis=0)
    grad_b = (grad_cos.T @ an) / nb[:, None] - (col_dot / (nb * nb))[:, None] * b
    return grad_a, grad_b


def contrastive_similarity_backward(utterances, prototypes, grad_s, cfg=None):
    """Loss gradients with respect to both embedding matrices.

    ``grad_s`` is dLoss/dS for the matrix produced by contrastive_similarity
    on the same inputs. Returns (grad_utterances, grad_prototypes).
    """
    cfg = cfg or SimConfig()
    u = as_float_matrix(utterances, "utterance")
    p = as_float_matrix(prototypes, "prototype")
    check_same_dim(u, p, "utterance", "prototype")
    grad_s = np.asarray(grad_s, dtype=np.float64)
    if grad_s.shape != (u.shape[0], p.shape[0]):
        raise ValueError(
            "grad shape {} does not match similarity shape {}".format(
                grad_s.shape, (u.shape[0], p.shape[0])
            )
        )
    cos = cosine_matrix(u, p, "utterance", "prototype")
    s = softmax(cos / cfg.tau, axis=-1)
    inner = np.sum(grad_s * s, axis=1, keepdims=True)
    grad_cos = s * (grad_s - inner) / cfg.tau
    return cosine_backward(u, p, grad_cos)
