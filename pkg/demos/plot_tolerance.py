"""
Tolerance to error with heavy replication
=========================================

With 200 replicates per location the sample variance is precise enough to
reject an intrinsic sd that is only 10% off. A tolerance interval on the sd
(uniform on 0.8 to 1.2 times the estimate) says such errors do not matter.
"""

import numpy as np

from stochdiag.diagnostics import ToleranceSpec, variance_unexpectedness
from stochdiag.distributions import sample_moments
from stochdiag.emulator import PointPrediction
from stochdiag.rng import RngStream

x = np.linspace(0, 1, 20)
sd_hat = 0.1 + 0.9 * x
runs = 1.1 * sd_hat[:, None] * RngStream(5).normal(size=(20, 200))

raw, tol = [], []
for i in range(20):
    pred = PointPrediction(0.0, 0.0, sd_hat[i] ** 2)
    s = sample_moments(runs[i])
    raw.append(variance_unexpectedness(pred, s, ToleranceSpec.none()).U)
    tol.append(variance_unexpectedness(pred, s, ToleranceSpec(), 10_000, RngStream(6, i)).U)

raw, tol = np.array(raw), np.array(tol)
print("uncorrected: #|U| > 0.95 =", int(np.sum(np.abs(raw) > 0.95)), " median U", np.median(raw).round(3))
print("tolerant:    #|U| > 0.95 =", int(np.sum(np.abs(tol) > 0.95)), " median U", np.median(tol).round(3))

# a triangular tolerance, peaked at the estimate, sits between the two
tri = ToleranceSpec(shape="triangular")
u = [variance_unexpectedness(PointPrediction(0, 0, sd_hat[i] ** 2), sample_moments(runs[i]), tri,
                             10_000, RngStream(7, i)).U for i in range(20)]
print("triangular:  #|U| > 0.95 =", int(np.sum(np.abs(u) > 0.95)))
