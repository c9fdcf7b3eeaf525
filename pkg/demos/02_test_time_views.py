"""
Test-time views and score averaging
===================================

A base classifier scores several geometric views of the same image and the
ensemble output is their mean. We stand in for the CNN with a toy scorer so
the mechanics are visible.
"""

import numpy as np

from lesionfusion.augmentation import apply_transform, default_transform_set
from lesionfusion.dataset_io import ScoreTable
from lesionfusion.providers import aggregate_mean

rng = np.random.default_rng(1)
images = {f"ISIC_{i:07d}": rng.uniform(0, 1, (32, 32, 3)) for i in range(4)}


def toy_score(img):
    # "redness" of the upper-left quadrant: deliberately orientation dependent
    q = img[:16, :16]
    return float(np.clip(q[..., 0].mean() - 0.5 * q[..., 2].mean() + 0.25, 0, 1))


views = default_transform_set()
print(f"{len(views)} views; first is identity: {views[0]}")

per_view = []
for spec in views:
    per_view.append(ScoreTable("MM", {k: toy_score(apply_transform(v, spec))
                                      for k, v in images.items()}))

ensemble = aggregate_mean(per_view)
for k in sorted(images):
    spread = [t.entries[k] for t in per_view]
    print(f"{k}: identity={spread[0]:.4f} views in [{min(spread):.4f}, {max(spread):.4f}] "
          f"-> mean {ensemble.entries[k]:.4f}")

# Non right-angle views are allowed too; they interpolate bilinearly.
extra = default_transform_set(rotations=[0, 45], flips=[False], scales=[1.0, 0.9],
                              translations=[(0, 0), (3, -2)])
print(f"custom axes give {len(extra)} views")
