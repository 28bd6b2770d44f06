"""Score a pool with every acquisition function and compare the rankings.

Builds a tiny hand-made ensemble over three kinds of samples: ones every
member nails, ones the members disagree about, and ones they confidently
get wrong. Each scoring function surfaces a different slice of those.
"""

from __future__ import annotations

import numpy as np

from alsift import PredictionTensor, score_pool

rng = np.random.default_rng(7)

# 12 samples x 5 members x 3 classes, composed from three behavior groups
confident = np.tile([0.96, 0.02, 0.02], (4, 5, 1))
disputed = rng.dirichlet([1.0, 1.0, 1.0], size=(4, 5))
wrong = np.tile([0.02, 0.96, 0.02], (4, 5, 1))
probs = np.concatenate([confident, disputed, wrong]).astype(np.float32)

tensor = PredictionTensor(probs, np.arange(12, dtype=np.uint64))
labels = np.zeros(12, dtype=np.int64)

print("sample groups: 0-3 easy, 4-7 disputed, 8-11 confidently mislabeled")
print()
header = "%-20s" % "function" + "".join("%7d" % i for i in range(12))
print(header)
for function_id in ("entropy", "mutual_information", "variation_ratios",
                    "error_count", "random"):
    scores = score_pool(tensor, function_id, labels=labels, seed=99)
    row = "".join("%7.3f" % v for v in scores.scores)
    print("%-20s%s" % (function_id, row))

print()
print("entropy and mutual information light up the disputed middle block;")
print("error_count is the only one that flags the confidently wrong tail,")
print("because it is the only score that reads the labels.")
