"""Reference confusion matrices reported for the 38-district drought dataset.

The accuracies printed alongside these matrices are rounded percentages that
do not all agree with trace / total of the matrices themselves; the audit
below recomputes them and flags every disagreement larger than the rounding.
"""

from __future__ import annotations

import numpy as np

from .metrics import ConfusionMatrix

REFERENCE = {
    "decision_tree": {
        "counts": [[14746, 872, 263], [153, 9561, 400], [151, 267, 7825]],
        "reported_accuracy": 0.91,
    },
    "random_forest": {
        "counts": [[14819, 639, 423], [247, 9512, 355], [239, 465, 7639]],
        "reported_accuracy": 0.92,
    },
    "knn": {
        "counts": [[13806, 1344, 731], [869, 8221, 1324], [410, 1525, 6708]],
        "reported_accuracy": 0.84,
    },
    "gaussian_nb": {
        "counts": [[14199, 1092, 490], [307, 9328, 479], [287, 709, 7247]],
        "reported_accuracy": 0.86,
    },
}

# half a percentage point: the reported figures are whole percents
ROUNDING = 0.005


def reference_matrix(variant: str) -> ConfusionMatrix:
    return ConfusionMatrix(np.asarray(REFERENCE[variant]["counts"], dtype=np.int64))


def audit_reference() -> dict:
    """Recomputed accuracy vs the reported rounded figure, per classifier."""
    out = {}
    for variant, entry in REFERENCE.items():
        cm = reference_matrix(variant)
        reported = entry["reported_accuracy"]
        out[variant] = {
            "counts": entry["counts"],
            "correct": cm.correct,
            "total": cm.total,
            "row_totals": cm.counts.sum(axis=1).tolist(),
            "computed_accuracy": cm.accuracy,
            "reported_accuracy": reported,
            "difference": cm.accuracy - reported,
            "flagged": bool(abs(cm.accuracy - reported) > ROUNDING),
        }
    return out
