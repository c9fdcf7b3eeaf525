"""
ROC, AUC and average precision
==============================

The challenge ranks entries by the mean of the MM and SK AUCs. AUC from the
trapezoidal ROC area equals the concordant-pair fraction (ties count half),
which gives an independent check.
"""

import numpy as np

from lesionfusion.metrics import (
    auc_pair_count,
    auc_trapezoid,
    average_precision,
    mean_auc,
    roc_points,
)

pairs = [(0.8, True), (0.6, False), (0.3, True), (0.1, False)]
curve = roc_points(pairs)
print("ROC points:", curve.points)
print("AUC trapezoid:", auc_trapezoid(curve), " pair count:", auc_pair_count(pairs))
print("average precision:", average_precision(pairs))

# Ties: one diagonal step on the curve, half credit in the pair count
rng = np.random.default_rng(3)
scores = np.round(rng.uniform(0, 1, 200), 1)
labels = rng.uniform(0, 1, 200) < scores
tied = list(zip(scores, labels))
print("with heavy ties:", auc_trapezoid(roc_points(tied)), auc_pair_count(tied))

print("challenge metric for AUCs 0.924 / 0.993:", mean_auc(0.924, 0.993))
