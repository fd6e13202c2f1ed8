"""
The toy stochastic simulators
=============================

Both toys share the trend ``sin(16x) + cos(24x) + 8x``. The first adds normal
noise whose sd grows from 0.1 to 1 across the input; the second adds
Gamma(1, 1) noise, which is skewed (skewness 2) and heavy-tailed (excess
kurtosis 6).
"""

import numpy as np

from stochdiag.distributions import sample_moments
from stochdiag.rng import RngStream
from stochdiag.simulators import ToySimulator
from stochdiag.svg import scatter

normal, gamma = ToySimulator("normal"), ToySimulator("gamma")
x = np.repeat(np.linspace(0, 1, 41), 10)[:, None]
y = normal.simulate(x, RngStream(0)).outputs

for sim in (normal, gamma):
    reps = sim.simulate(np.full((100_000, 1), 0.5), RngStream(1)).outputs
    m = sample_moments(reps)
    print(f"{sim.name:12s} at x = 0.5: mean {m.mean:.3f} (truth {sim.mean(0.5):.3f}), "
          f"sd {m.sd:.3f}, skewness {m.skewness:.2f}, excess kurtosis {m.excess_kurtosis:.2f}")

with open("toy_normal_runs.svg", "w") as fh:
    fh.write(scatter(x[:, 0], y, title="Normal toy simulator, 10 runs per input", xlabel="x", ylabel="y"))
