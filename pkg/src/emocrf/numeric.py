"""Small numeric primitives used by the math modules.

Both routines subtract the running maximum before exponentiating, so large
negative sentinels (the masked transition value of -1e9) and moderately large
scores pass through without overflow. Everything is computed in float64.
"""

from __future__ import annotations

import numpy as np


def logsumexp(a, axis=None):
    """log(sum(exp(a))) along ``axis`` with max subtraction.

    A length-one reduction returns its element exactly: the shifted value is
    0.0, exp(0.0) is 1.0 and log(1.0) is 0.0, so no rounding is introduced.
    The CRF relies on this to make single-label chains score exactly like
    their only path.
    """
    a = np.asarray(a, dtype=np.float64)
    m = np.max(a, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True))
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def softmax(a, axis=-1):
    """Row softmax with max subtraction, in float64."""
    a = np.asarray(a, dtype=np.float64)
    shifted = a - np.max(a, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)
