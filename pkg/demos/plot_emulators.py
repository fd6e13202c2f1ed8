"""
Homoscedastic and heteroscedastic GP emulators
==============================================

A single nugget cannot follow noise that grows across the input. The
heteroscedastic emulator models the log intrinsic variance with a second GP,
fitted to bias-corrected log sample variances of the replicates.
"""

import numpy as np

from stochdiag.design import expand_replicates, maximin_lhs
from stochdiag.emulator import fit_hetgp, fit_homgp, predict_arrays
from stochdiag.rng import RngStream
from stochdiag.simulators import ToySimulator
from stochdiag.svg import scatter

sim = ToySimulator("normal")
root = RngStream(11)
X = expand_replicates(maximin_lhs(20, 1, root.substream(0), 1000, replicates=20))
y = sim.simulate(X, root.substream(1)).outputs

hom = fit_homgp(X, y, rng=root.substream(2))
het = fit_hetgp(X, y, rng=root.substream(3))
print("homoscedastic:", hom.covariance, "nugget", round(hom.nugget, 4))
print("heteroscedastic:", het.covariance, "iterations", het.iterations)

grid = np.linspace(0, 1, 201)[:, None]
for name, model in (("hom", hom), ("het", het)):
    M, V, s2 = predict_arrays(model, grid)
    err = np.sqrt(s2) - sim.noise_sd(grid[:, 0])
    print(f"{name}: max |mean error| {np.max(np.abs(M - sim.mean(grid[:, 0]))):.3f}, "
          f"intrinsic sd error in [{err.min():.2f}, {err.max():.2f}]")

_, _, s2 = predict_arrays(het, grid)
with open("het_intrinsic_sd.svg", "w") as fh:
    fh.write(scatter(grid[:, 0], np.sqrt(s2), title="Estimated intrinsic sd (truth 0.1 + 0.9x)",
                     xlabel="x", ylabel="sd", line=([0, 1], [0.1, 1.0])))
