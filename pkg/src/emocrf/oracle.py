"""Brute-force reference implementations for the chain computations.

Everything here enumerates all n^N labelings outright, so it is priced for
tiny instances only (the suite runner caps N at 6 and n at 4 by default).
The point is independence: scores are assembled directly from the definition
with plain sums, no shared recursion with the fast path, so agreement is
evidence rather than tautology.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .crf import TransitionModel


def all_labelings(n_labels, length):
    return list(itertools.product(range(n_labels), repeat=length))


def brute_score(s, tm, y):
    """Definition-level score: start + transitions + end + emissions."""
    total = float(tm.matrix[0, y[0] + 1])
    for k in range(1, len(y)):
        total += float(tm.matrix[y[k - 1] + 1, y[k] + 1])
    total += float(tm.matrix[y[-1] + 1, tm.n + 1])
    for k, label in enumerate(y):
        total += float(s[k][label])
    return total


def brute_log_partition(s, tm):
    scores = [brute_score(s, tm, y) for y in all_labelings(tm.n, len(s))]
    m = max(scores)
    return m + np.log(np.sum(np.exp(np.asarray(scores) - m)))


def brute_marginals(s, tm):
    """P(y_i = j) by summing normalized weights over the enumeration."""
    length = len(s)
    labelings = all_labelings(tm.n, length)
    scores = np.asarray([brute_score(s, tm, y) for y in labelings])
    weights = np.exp(scores - scores.max())
    weights /= weights.sum()
    gamma = np.zeros((length, tm.n))
    for w, y in zip(weights, labelings):
        for i, label in enumerate(y):
            gamma[i, label] += w
    return gamma


def brute_best_labeling(s, tm):
    """Max-score labeling; ties resolved toward the lexicographically first."""
    best_y = None
    best = -np.inf
    for y in all_labelings(tm.n, len(s)):
        sc = brute_score(s, tm, y)
        if sc > best:
            best = sc
            best_y = y
    return np.asarray(best_y, dtype=np.int64), float(best)


@dataclass
class OracleReport:
    trials: int
    max_partition_err: float = 0.0
    max_marginal_err: float = 0.0
    max_viterbi_err: float = 0.0
    path_mismatches: int = 0
    seconds: float = 0.0
    tolerance: float = 1.0e-8
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def lines(self):
        out = [
            "oracle comparison: {} trials in {:.1f}s".format(self.trials, self.seconds),
            "  max |log_partition - brute| = {:.3e}".format(self.max_partition_err),
            "  max |marginal - brute|      = {:.3e}".format(self.max_marginal_err),
            "  max |viterbi - brute max|   = {:.3e}".format(self.max_viterbi_err),
            "  best-path mismatches        = {}".format(self.path_mismatches),
        ]
        if self.passed:
            out.append("all trials passed (tolerance {:.1e})".format(self.tolerance))
        else:
            out.append("FAILED trials: {}".format(self.failures[:10]))
        return out


def run_oracle_suite(trials=200, max_len=6, max_labels=4, seed=0, tolerance=1.0e-8):
    """Randomized agreement check between the fast path and enumeration.

    Each trial draws a transition model and emission matrix, then compares
    log_partition, per-position marginals, the Viterbi best score, and the
    decoded path (score-compared, so exact ties do not count as mismatches).
    """
    from . import avd, crf  # local import keeps module load cheap

    rng = np.random.default_rng(seed)
    report = OracleReport(trials=trials, tolerance=tolerance)
    started = time.monotonic()
    for trial in range(trials):
        n = int(rng.integers(1, max_labels + 1))
        length = int(rng.integers(1, max_len + 1))
        tm = TransitionModel.initialize(n, rng)
        tm.trans[...] = rng.normal(0.0, 1.0, size=(n, n))
        tm.start_scores[...] = rng.normal(0.0, 1.0, size=n)
        tm.end_scores[...] = rng.normal(0.0, 1.0, size=n)
        s = rng.normal(0.0, 1.0, size=(length, n))

        err_z = abs(crf.log_partition(s, tm) - brute_log_partition(s, tm))
        err_m = float(
            np.max(np.abs(crf.position_marginals(s, tm) - brute_marginals(s, tm)))
        )
        c, back = avd.viterbi_scores(s, tm)
        path = avd.best_path(c, back, tm)
        fast_best = crf.sequence_score(s, tm, path)
        _, brute_best = brute_best_labeling(s, tm)
        err_v = abs(fast_best - brute_best)

        report.max_partition_err = max(report.max_partition_err, err_z)
        report.max_marginal_err = max(report.max_marginal_err, err_m)
        report.max_viterbi_err = max(report.max_viterbi_err, err_v)
        if max(err_z, err_m, err_v) > tolerance:
            report.failures.append(trial)
    report.seconds = time.monotonic() - started
    return report
