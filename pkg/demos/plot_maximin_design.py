"""
Replicated maximin Latin hypercube designs
==========================================

Training and validation designs are best-of-N random Latin hypercubes,
ranked by their minimum pairwise distance, with each point run several times.
"""

import numpy as np

from stochdiag.design import expand_replicates, maximin_lhs, min_pairwise_distance, scale_to_bounds
from stochdiag.rng import RngStream
from stochdiag.svg import scatter

# more restarts can only improve the maximin criterion for a fixed stream
for k in (1, 10, 100, 1000):
    d = maximin_lhs(20, 2, RngStream(3), k)
    print(f"{k:5d} restarts: min distance {min_pairwise_distance(d.points):.4f}")

design = maximin_lhs(20, 2, RngStream(3), 1000, replicates=4)
runs = expand_replicates(design)
print("unique points", design.n, "-> runs", runs.shape[0])

# designs live in the unit cube and are mapped onto physical bounds at the end
physical = scale_to_bounds(design, [0.05, 10.0], [0.75, 30.0])
print(physical[:3])

with open("maximin_design.svg", "w") as fh:
    fh.write(scatter(design.points[:, 0], design.points[:, 1], title="Maximin Latin hypercube (n = 20)",
                     xlabel="x1", ylabel="x2", xlim=(0, 1), ylim=(0, 1)))
