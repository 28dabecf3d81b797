"""Evaluation: weighted precision/recall/F1 over the unseen set, reports.

Scores are computed only over utterances whose gold label belongs to the
unseen vocabulary; filtering happens before this module. Per-label precision
and recall fall back to 0 when their denominator is empty (no predictions or
no support for that label), and the weighted aggregate weighs each label by
its gold support.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from .proto_sim import cosine_matrix


@dataclass
class LabelScore:
    label: str
    support: int
    precision: float
    recall: float
    f1: float


@dataclass(eq=False)
class EvalReport:
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    total: int
    per_label: list = field(default_factory=list)
    confusion: np.ndarray = None  # rows gold, columns predicted

    def to_dict(self):
        return {
            "weighted_precision": self.weighted_precision,
            "weighted_recall": self.weighted_recall,
            "weighted_f1": self.weighted_f1,
            "total": self.total,
            "per_label": [
                {
                    "label": s.label,
                    "support": s.support,
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                }
                for s in self.per_label
            ],
            "confusion": self.confusion.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    def to_text(self):
        out = io.StringIO()
        out.write(
            "weighted P/R/F1 over {} utterances: {:.4f} / {:.4f} / {:.4f}\n".format(
                self.total,
                self.weighted_precision,
                self.weighted_recall,
                self.weighted_f1,
            )
        )
        out.write("label           support  precision  recall     f1\n")
        for s in self.per_label:
            out.write(
                "{:<15s} {:>7d}  {:>9.4f}  {:>9.4f}  {:>9.4f}\n".format(
                    s.label, s.support, s.precision, s.recall, s.f1
                )
            )
        return out.getvalue()


def weighted_prf(gold, pred, m, labels=None):
    """Weighted precision/recall/F1 with per-label detail and confusion.

    ``gold`` and ``pred`` are parallel sequences of 0-based unseen ids in
    [0, m). Labels with no support contribute zero weight; a label that is
    never predicted gets precision 0, never gold gets recall 0.
    """
    gold = np.asarray(gold, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if gold.shape != pred.shape or gold.ndim != 1:
        raise ValueError(
            "gold and predictions must be parallel 1-D sequences, got {} and {}".format(
                gold.shape, pred.shape
            )
        )
    if gold.size and not (
        0 <= gold.min() and gold.max() < m and 0 <= pred.min() and pred.max() < m
    ):
        raise ValueError("label ids must lie in [0, {})".format(m))
    if labels is None:
        labels = [str(j) for j in range(m)]
    if len(labels) != m:
        raise ValueError("got {} label names for m={}".format(len(labels), m))

    confusion = np.zeros((m, m), dtype=np.int64)
    for g, p in zip(gold, pred):
        confusion[g, p] += 1

    total = int(gold.size)
    per_label = []
    w_p = w_r = w_f = 0.0
    for j in range(m):
        tp = int(confusion[j, j])
        gold_j = int(confusion[j].sum())
        pred_j = int(confusion[:, j].sum())
        precision = tp / pred_j if pred_j else 0.0
        recall = tp / gold_j if gold_j else 0.0
        f1 = (
            2.0 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        per_label.append(LabelScore(str(labels[j]), gold_j, precision, recall, f1))
        if total:
            weight = gold_j / total
            w_p += weight * precision
            w_r += weight * recall
            w_f += weight * f1
    return EvalReport(w_p, w_r, w_f, total, per_label, confusion)


def prototype_similarity(matrix, keys=None):
    """Pairwise cosine matrix over prototype rows: symmetric, unit diagonal."""
    sim = cosine_matrix(matrix, matrix, "prototype", "prototype", keys, keys)
    sim = (sim + sim.T) / 2.0
    np.fill_diagonal(sim, 1.0)
    return sim


def similarity_csv(sim, keys):
    """Render a similarity matrix as CSV with row and column keys."""
    sim = np.asarray(sim, dtype=np.float64)
    if sim.shape != (len(keys), len(keys)):
        raise ValueError(
            "similarity shape {} does not match {} keys".format(sim.shape, len(keys))
        )
    out = io.StringIO()
    out.write("," + ",".join(keys) + "\n")
    for i, key in enumerate(keys):
        out.write(key + "," + ",".join("{:.6f}".format(v) for v in sim[i]) + "\n")
    return out.getvalue()
