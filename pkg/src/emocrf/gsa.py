"""Gaussian-weighted self-attention over the utterances of one conversation.

For a conversation matrix H (N rows, width d) the update is

    A_i = softmax(h_i H^T / d) * K_i        (elementwise)
    out_i = h_i + A_i H

where K_i[k] = exp(-(k - i)^2 / (2 sigma^2)) is an unnormalized Gaussian
window centered on position i. The window keeps the self weight at exactly 1
and decays with distance; as sigma grows it flattens toward all ones, which
is the plain self-attention ablation. Logits divide by d, not sqrt(d), and
the window multiplies the already-normalized softmax rows, so attention rows
sum to 1 before the window and generally not after.

Everything runs in float64 regardless of input dtype.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .numeric import softmax
from .validation import as_float_matrix

DEFAULT_SIGMA = 0.5


class GsaConfig:
    """Window width plus the two ablation switches.

    mode "gaussian" is the real thing, "plain" drops the window (all-ones),
    "off" makes the update an identity.
    """

    def __init__(self, sigma=DEFAULT_SIGMA, mode="gaussian"):
        if mode not in ("gaussian", "plain", "off"):
            raise ValueError("gsa mode must be 'gaussian', 'plain' or 'off'")
        if not (sigma > 0):
            raise ValueError("sigma must be positive, got {!r}".format(sigma))
        self.sigma = float(sigma)
        self.mode = mode

    def __repr__(self):
        return "GsaConfig(sigma={!r}, mode={!r})".format(self.sigma, self.mode)


def gaussian_kernel(center, length, sigma):
    """Unnormalized Gaussian window over positions 0..length-1."""
    if not (0 <= center < length):
        raise ValueError(
            "center {} outside positions 0..{}".format(center, length - 1)
        )
    if not (sigma > 0):
        raise ValueError("sigma must be positive, got {!r}".format(sigma))
    k = np.arange(length, dtype=np.float64)
    return np.exp(-((k - center) ** 2) / (2.0 * sigma * sigma))


def _window_matrix(length, cfg):
    if cfg.mode == "plain":
        return np.ones((length, length), dtype=np.float64)
    offsets = np.arange(length, dtype=np.float64)
    diff = offsets[None, :] - offsets[:, None]
    return np.exp(-(diff**2) / (2.0 * cfg.sigma * cfg.sigma))


def gsa_update(h, cfg=None):
    """Contextualize a conversation matrix; rows stay aligned with input."""
    cfg = cfg or GsaConfig()
    h = as_float_matrix(h, "utterance matrix")
    if cfg.mode == "off":
        return h.copy()
    n, d = h.shape
    logits = (h @ h.T) / float(d)
    att = softmax(logits, axis=-1)
    a = att * _window_matrix(n, cfg)
    return h + a @ h


def gsa_backward(h, grad_out, cfg=None):
    """Gradient of a scalar loss with respect to the input matrix.

    ``grad_out`` is the loss gradient at the output of gsa_update for the
    same ``h`` and ``cfg``; the forward intermediates are cheap enough to
    recompute here.
    """
    cfg = cfg or GsaConfig()
    h = as_float_matrix(h, "utterance matrix")
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if grad_out.shape != h.shape:
        raise ValueError(
            "grad shape {} does not match input {}".format(grad_out.shape, h.shape)
        )
    if cfg.mode == "off":
        return grad_out.copy()
    n, d = h.shape
    logits = (h @ h.T) / float(d)
    att = softmax(logits, axis=-1)
    window = _window_matrix(n, cfg)
    a = att * window

    grad_h = grad_out.copy()          # residual term
    grad_a = grad_out @ h.T           # through A H
    grad_h += a.T @ grad_out
    grad_att = grad_a * window
    # softmax rows: dL/dz = p * (g - sum(g * p))
    inner = np.sum(grad_att * att, axis=1, keepdims=True)
    grad_logits = att * (grad_att - inner)
    grad_h += (grad_logits @ h + grad_logits.T @ h) / float(d)
    return grad_h


class GaussianSelfAttention(BaseEstimator, TransformerMixin):
    """Parameter-free transformer wrapping gsa_update.

    fit is a no-op kept for pipeline compatibility; transform applies the
    update to one conversation matrix.
    """

    def __init__(self, sigma=DEFAULT_SIGMA, mode="gaussian"):
        self.sigma = sigma
        self.mode = mode

    def fit(self, X, y=None):
        GsaConfig(self.sigma, self.mode)  # validate early
        return self

    def transform(self, X):
        return gsa_update(X, GsaConfig(self.sigma, self.mode))
