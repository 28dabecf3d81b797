"""Input validation helpers for the numeric entry points.

The math modules accept anything array-like and normalize it here: upcast to
float64, check dimensionality, and reject non-finite entries with a named
error so a bad manifest row is reported as such instead of surfacing as NaN
three modules later.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericInputError


def as_float_matrix(x, name, allow_empty_rows=False):
    """Coerce ``x`` to a 2-D float64 array and check finiteness."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("{} must be 2-D, got shape {}".format(name, arr.shape))
    if arr.shape[0] == 0 and not allow_empty_rows:
        raise ValueError("{} must have at least one row".format(name))
    check_finite(arr, name)
    return arr


def check_finite(arr, name):
    if not np.all(np.isfinite(arr)):
        bad = int(np.count_nonzero(~np.isfinite(arr)))
        raise NumericInputError(
            "{} contains {} non-finite entries".format(name, bad)
        )


def check_same_dim(a, b, name_a, name_b):
    if a.shape[1] != b.shape[1]:
        raise ValueError(
            "{} and {} disagree on embedding width: {} vs {}".format(
                name_a, name_b, a.shape[1], b.shape[1]
            )
        )


def check_label_sequence(y, n, length):
    """Validate a gold/predicted label-id sequence against n labels."""
    y = np.asarray(y, dtype=np.int64)
    if y.ndim != 1:
        raise ValueError("label sequence must be 1-D, got shape {}".format(y.shape))
    if length is not None and y.shape[0] != length:
        raise ValueError(
            "label sequence has length {}, expected {}".format(y.shape[0], length)
        )
    if y.size and (y.min() < 0 or y.max() >= n):
        raise ValueError(
            "label ids must lie in [0, {}), got range [{}, {}]".format(
                n, int(y.min()), int(y.max())
            )
        )
    return y
