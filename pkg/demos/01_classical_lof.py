"""Classical local outlier factor on a tiny line of points.

Three clustered points at 0, 1, 2 and one straggler at 10.  LOF compares each
point's local reachability density with its neighbors' densities: cluster
points score near 1, the straggler scores far above it.
"""

import numpy as np

from qlof import flag, from_points, k_distance, lrd, neighborhood

ds = from_points([[0.0], [1.0], [2.0], [10.0]])
print(f"dataset: m={ds.m}, n={ds.n}, normalization constant C={ds.c_norm}")

# The k-distance (k = 2) of each point, in raw units.
for i in range(ds.m):
    kd = k_distance(ds, i, 2, normalized=False)
    row = neighborhood(ds, i, 2)
    print(f"point {i}: k-distance {kd:4.1f}, neighbors {row.neighbors}")

# Densities: the straggler is far less dense than the cluster.
dens = [lrd(ds, i, 2, normalized=False) for i in range(ds.m)]
print("\nlocal reachability densities:", np.round(dens, 4))

# Full report with the anomaly threshold delta = 1.5.
report = flag(ds, k=2, delta=1.5)
print("\nindex  lof      flagged")
for row in report.point_dicts():
    print(f"{row['index']:>5}  {row['lof']:<7.4f}  {row['flagged']}")
print(f"\nflagged points: {report.flagged_indices()} (expected: the straggler, index 3)")
