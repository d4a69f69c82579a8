"""Pairwise evaluation: cluster-to-pairs expansion and precision/recall/F1."""

import itertools
from dataclasses import dataclass


class MetricsError(Exception):
    pass


@dataclass
class EvaluationReport:
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float
    f1: float

    def to_text(self):
        return (
            f"TP: {self.true_positives}\nFP: {self.false_positives}\nFN: {self.false_negatives}\n"
            f"precision: {self.precision:.4f}\nrecall: {self.recall:.4f}\nf1: {self.f1:.4f}\n"
        )


def clusters_to_pairs(clusters):
    """All within-cluster record pairs, canonical order; singletons contribute none."""
    seen = set()
    pairs = set()
    for c in clusters:
        members = c.members if hasattr(c, "members") else c
        for m in members:
            if m in seen:
                raise MetricsError(f"record {m!r} appears in more than one cluster")
            seen.add(m)
        for a, b in itertools.combinations(sorted(members), 2):
            pairs.add((a, b))
    return pairs


def _check_canonical(pairs, name):
    for a, b in pairs:
        if not a < b:
            raise MetricsError(f"non-canonical pair ({a!r}, {b!r}) in {name}")


def pairwise_metrics(predicted, truth, canonical=True):
    """Precision/recall/F1 over predicted vs. ground-truth pair sets."""
    predicted, truth = set(predicted), set(truth)
    if canonical:
        _check_canonical(predicted, "predicted")
        _check_canonical(truth, "truth")
    tp = len(predicted & truth)
    fp = len(predicted - truth)
    fn = len(truth - predicted)
    if tp + fp == 0:
        precision = 1.0 if tp + fn == 0 else 0.0
    else:
        precision = tp / (tp + fp)
    recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return EvaluationReport(tp, fp, fn, precision, recall, f1)
