"""
Skew-normal and generalised-normal reference families
======================================================

The skewness and kurtosis diagnostics compare an observed sample moment with
the moments of emulator-generated replicate sets. Tolerance to non-normality
is expressed by letting the true skewness (or excess kurtosis) vary, which
means inverting the moment maps of two one-parameter families.
"""

import numpy as np

from stochdiag.distributions import (
    GenNormalParams,
    SkewNormalParams,
    gen_normal_excess_kurtosis,
    kurtosis_to_beta,
    moment_matched,
    sample_gen_normal,
    sample_moments,
    sample_skew_normal,
    skew_normal_skewness,
    skewness_to_alpha,
)
from stochdiag.rng import RngStream
from stochdiag.svg import scatter

# skewness of the skew normal saturates just below one
alpha = np.linspace(-20, 20, 401)
print("max attainable skewness:", skew_normal_skewness(1e9))

# the inverse is closed form, so a tolerance interval maps straight to shapes
for g in (-0.5, 0.0, 0.137, 0.5):
    print(f"skewness {g:+.3f} -> alpha {skewness_to_alpha(g):+.4f}")

# generalised normal: beta = 2 is normal, beta = 1 Laplace
for k in (-0.5, 0.0, 0.5, 3.0):
    print(f"excess kurtosis {k:+.1f} -> beta {kurtosis_to_beta(k):.4f}")

# moment matching keeps mean and sd fixed while the shape varies
p = moment_matched(5.0, 2.0, SkewNormalParams(alpha=skewness_to_alpha(0.5)))
draws = sample_skew_normal(p, 200_000, RngStream(0))
print("matched skew normal:", sample_moments(draws))
q = moment_matched(5.0, 2.0, GenNormalParams(beta=kurtosis_to_beta(0.5)))
print("matched generalised normal:", sample_moments(sample_gen_normal(q, 200_000, RngStream(1))))

beta = np.geomspace(0.5, 20, 200)
with open("reference_families.svg", "w") as fh:
    fh.write(scatter(np.log(beta), gen_normal_excess_kurtosis(beta), title="Generalised normal excess kurtosis",
                     xlabel="log beta", ylabel="excess kurtosis", hlines=[(0.0, "dashed")]))
with open("skew_normal_skewness.svg", "w") as fh:
    fh.write(scatter(alpha, skew_normal_skewness(alpha), title="Skew normal skewness",
                     xlabel="alpha", ylabel="skewness", hlines=[(0.99527, "dotted"), (-0.99527, "dotted")]))
