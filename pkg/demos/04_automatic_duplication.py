"""Let the search duplicate hard samples instead of only adding new ones.

Automatic duplication rescores the whole pool every iteration, so a
sample that stays difficult collects multiplicity and is seen more often
per epoch. The histogram printed after each iteration tracks how the
training multiset drifts away from the unique pool.
"""

from __future__ import annotations

from alsift import (
    EnsembleConfig,
    GeneratorSpec,
    SearchConfig,
    TrainConfig,
    duplication_histogram,
    generate_pool,
    run_scheme,
)

pool = generate_pool(GeneratorSpec(
    n_classes=3, clusters_per_class=2, samples_per_cluster=60,
    n_features=8, center_spread=0.7, label_noise=0.1, seed=31,
))

config = SearchConfig(
    scheme="automatic_duplication", function_id="mutual_information",
    target_size=260,
    ensemble=EnsembleConfig(mode="combined", runs=2, checkpoints_per_run=4),
    trainer=TrainConfig(max_epochs=8, batch_size=32),
    acquisition_batch=60, initial_size=80, seed=13,
)

result = run_scheme(pool, config)
for record in result.records:
    parts = " ".join("m%d:%d" % (m, c) for m, c in record.histogram)
    print("iteration %d: %3d unique / %3d total   %s"
          % (record.iteration, record.unique_count, record.total_count, parts))

final = duplication_histogram(result.state)
print()
print("final accounting: sum m*count(m) = %d, unique rows = %d"
      % (final.total_count, final.unique_count))
repeated = {m: c for m, c in final.rows() if m > 1}
print("samples seen more than once per epoch: %d" % sum(repeated.values()))
