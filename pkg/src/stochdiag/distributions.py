"""Distribution kernels used by the diagnostics.

CDFs of the reference laws (normal, Student t, chi-square), sample moments,
the skew-normal and generalised-normal shape families with their moment
inversions, exact samplers for both families, and the continuity-corrected
empirical CDF used for Monte Carlo reference distributions.

The CDFs are thin, validated wrappers over ``scipy.special``; everything else
is written out here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .exceptions import DomainError, InsufficientReplicationError, UnattainableError
from .rng import RngStream

__all__ = [
    "SkewNormalParams",
    "GenNormalParams",
    "SampleMoments",
    "MAX_SKEW_NORMAL_SKEWNESS",
    "MIN_GEN_NORMAL_EXCESS_KURTOSIS",
    "std_normal_cdf",
    "std_normal_ppf",
    "student_t_cdf",
    "chi_square_cdf",
    "sample_moments",
    "sample_skewness",
    "sample_excess_kurtosis",
    "skew_normal_skewness",
    "skewness_to_alpha",
    "gen_normal_excess_kurtosis",
    "kurtosis_to_beta",
    "skew_normal_mean_sd",
    "gen_normal_mean_sd",
    "sample_skew_normal",
    "sample_gen_normal",
    "moment_matched",
    "empirical_cdf",
]

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_SKEW_CONST = (4.0 - math.pi) / 2.0

#: Supremum of the skew-normal skewness, reached as alpha -> +inf.
MAX_SKEW_NORMAL_SKEWNESS = _SKEW_CONST * _SQRT_2_OVER_PI**3 / (1.0 - 2.0 / math.pi) ** 1.5

#: Infimum of the generalised-normal excess kurtosis (uniform limit).
MIN_GEN_NORMAL_EXCESS_KURTOSIS = -1.2

_BETA_BRACKET = (0.1, 200.0)


@dataclass(frozen=True)
class SkewNormalParams:
    """Skew-normal law with density ``2/scale * phi(z) * Phi(alpha * z)``."""

    location: float = 0.0
    scale: float = 1.0
    alpha: float = 0.0

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError("skew-normal scale must be positive")

    @property
    def delta(self) -> float:
        return self.alpha / math.sqrt(1.0 + self.alpha**2)


@dataclass(frozen=True)
class GenNormalParams:
    """Generalised normal law with density proportional to ``exp(-|z|**beta)``."""

    location: float = 0.0
    scale: float = 1.0
    beta: float = 2.0

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError("generalised-normal scale must be positive")
        if not self.beta > 0:
            raise DomainError("generalised-normal beta must be positive")


@dataclass(frozen=True)
class SampleMoments:
    """Summary statistics of one replicate set.

    ``skewness`` and ``excess_kurtosis`` are ``None`` when undefined (too few
    values, or zero spread).
    """

    n: int
    mean: float
    sd: float
    variance: float
    skewness: Optional[float] = None
    excess_kurtosis: Optional[float] = None

    @property
    def degenerate(self) -> bool:
        return self.sd == 0.0


def _check_finite(x, name="argument"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _scalar_or_array(out, like):
    return float(out) if np.ndim(like) == 0 else out


# ---------------------------------------------------------------------------
# CDFs
# ---------------------------------------------------------------------------


def std_normal_cdf(z):
    """Standard normal CDF. Accepts scalars or arrays."""
    z = _check_finite(z, "z")
    return _scalar_or_array(special.ndtr(z), z)


def std_normal_ppf(p):
    """Standard normal quantile function."""
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise DomainError("probability must lie in [0, 1]")
    return _scalar_or_array(special.ndtri(p), p)


def student_t_cdf(t, df):
    """Student t CDF with ``df`` degrees of freedom."""
    t = _check_finite(t, "t")
    df_arr = np.asarray(df, dtype=float)
    if np.any(~(df_arr >= 1)):
        raise DomainError("degrees of freedom must be >= 1")
    return _scalar_or_array(special.stdtr(df_arr, t), t)


def chi_square_cdf(x, df):
    """Chi-square CDF with ``df`` degrees of freedom."""
    x = _check_finite(x, "x")
    if np.any(x < 0):
        raise DomainError("chi-square argument must be nonnegative")
    df_arr = np.asarray(df, dtype=float)
    if np.any(~(df_arr >= 1)):
        raise DomainError("degrees of freedom must be >= 1")
    return _scalar_or_array(special.gammainc(df_arr / 2.0, x / 2.0), x)


# ---------------------------------------------------------------------------
# Sample moments
# ---------------------------------------------------------------------------


def _central(values, axis):
    a = np.asarray(values, dtype=float)
    return a - a.mean(axis=axis, keepdims=True)


def sample_skewness(values, axis=-1, ddof=1):
    """Standardised sample skewness ``mean(d**3) / S**3`` along ``axis``.

    ``S`` is the sample standard deviation with ``ddof`` (default 1, the
    ``n - 1`` denominator). Returns NaN where the spread is zero.
    """
    d = _central(values, axis)
    n = d.shape[axis]
    m3 = np.mean(d**3, axis=axis)
    s2 = np.sum(d**2, axis=axis) / (n - ddof)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s2 > 0, m3 / np.where(s2 > 0, s2, 1.0) ** 1.5, np.nan)


def sample_excess_kurtosis(values, axis=-1, ddof=1):
    """Standardised sample excess kurtosis ``mean(d**4) / S**4 - 3``."""
    d = _central(values, axis)
    n = d.shape[axis]
    d2 = d**2
    m4 = np.mean(d2**2, axis=axis)
    s2 = np.sum(d2, axis=axis) / (n - ddof)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s2 > 0, m4 / np.where(s2 > 0, s2, 1.0) ** 2 - 3.0, np.nan)


def sample_moments(values, ddof: int = 1) -> SampleMoments:
    """Mean, sd, skewness and excess kurtosis of a replicate set.

    Parameters
    ----------
    values : array_like
        At least two replicate outputs.
    ddof : int
        Denominator offset for the standard deviation that standardises
        every moment (1 gives the usual unbiased variance).
    """
    a = np.asarray(values, dtype=float).ravel()
    n = a.size
    if n < 2:
        raise InsufficientReplicationError(f"need at least 2 values, got {n}")
    mean = float(a.mean())
    d = a - mean
    var = float(np.sum(d**2) / (n - ddof))
    # exactly-equal replicates can leave rounding residue in d
    if np.all(a == a[0]):
        var = 0.0
    sd = math.sqrt(var)
    skew = kurt = None
    if sd > 0:
        if n >= 3:
            skew = float(np.mean(d**3) / sd**3)
        if n >= 4:
            kurt = float(np.mean(d**4) / var**2 - 3.0)
    return SampleMoments(n=n, mean=mean, sd=sd, variance=var, skewness=skew, excess_kurtosis=kurt)


# ---------------------------------------------------------------------------
# Shape families
# ---------------------------------------------------------------------------


def skew_normal_skewness(alpha):
    """Skewness of the skew-normal law with shape ``alpha``."""
    alpha = _check_finite(alpha, "alpha")
    delta = alpha / np.sqrt(1.0 + alpha**2)
    u = delta * _SQRT_2_OVER_PI
    out = _SKEW_CONST * u**3 / (1.0 - u**2) ** 1.5
    return _scalar_or_array(out, alpha)


def _skewness_to_delta(gamma):
    # closed-form inverse: with u = delta*sqrt(2/pi), (|g|/c)^(2/3) = u^2 / (1 - u^2)
    t = (np.abs(gamma) / _SKEW_CONST) ** (2.0 / 3.0)
    u = np.sqrt(t / (1.0 + t))
    return np.sign(gamma) * u / _SQRT_2_OVER_PI


def skewness_to_alpha(gamma):
    """Skew-normal shape ``alpha`` whose skewness equals ``gamma``.

    Raises
    ------
    UnattainableError
        If ``|gamma|`` is at or beyond the family's limit (about 0.99527).
    """
    g = _check_finite(gamma, "gamma")
    if np.any(np.abs(g) >= MAX_SKEW_NORMAL_SKEWNESS):
        raise UnattainableError(
            f"|skewness| must be below {MAX_SKEW_NORMAL_SKEWNESS:.5f} for the skew normal"
        )
    delta = _skewness_to_delta(g)
    alpha = delta / np.sqrt(1.0 - delta**2)
    return _scalar_or_array(alpha, g)


def gen_normal_excess_kurtosis(beta):
    """Excess kurtosis of the generalised normal law with shape ``beta``."""
    b = _check_finite(beta, "beta")
    if np.any(b <= 0):
        raise DomainError("beta must be positive")
    out = np.exp(special.gammaln(5.0 / b) + special.gammaln(1.0 / b) - 2.0 * special.gammaln(3.0 / b)) - 3.0
    return _scalar_or_array(out, b)


def kurtosis_to_beta(kappa, bracket=_BETA_BRACKET, iters=200):
    """Generalised-normal shape ``beta`` whose excess kurtosis equals ``kappa``.

    Vectorised bisection on ``log(beta)``. The bracket is widened when a
    target lies outside the kurtosis range it spans.

    Raises
    ------
    UnattainableError
        If ``kappa <= -1.2``.
    """
    k = _check_finite(kappa, "kappa")
    if np.any(k <= MIN_GEN_NORMAL_EXCESS_KURTOSIS):
        raise UnattainableError("excess kurtosis must exceed -1.2 for the generalised normal")
    lo, hi = math.log(bracket[0]), math.log(bracket[1])
    kmax, kmin = np.max(k), np.min(k)
    while gen_normal_excess_kurtosis(math.exp(lo)) < kmax:
        lo -= 1.0
    while gen_normal_excess_kurtosis(math.exp(hi)) > kmin:
        hi += 2.0
        if hi > 700:
            raise UnattainableError("excess kurtosis too close to -1.2 to invert")
    lo_arr = np.full(k.shape, lo)
    hi_arr = np.full(k.shape, hi)
    # kurtosis is strictly decreasing in beta
    for _ in range(iters):
        mid = 0.5 * (lo_arr + hi_arr)
        above = np.asarray(gen_normal_excess_kurtosis(np.exp(mid))) > k
        lo_arr = np.where(above, mid, lo_arr)
        hi_arr = np.where(above, hi_arr, mid)
        if np.all(hi_arr - lo_arr < 1e-15):
            break
    beta = np.exp(0.5 * (lo_arr + hi_arr))
    # the normal case is common; return it exactly
    beta = np.where(k == 0.0, 2.0, beta)
    return _scalar_or_array(beta, k)


def skew_normal_mean_sd(params: SkewNormalParams):
    delta = params.delta
    mean = params.location + params.scale * delta * _SQRT_2_OVER_PI
    sd = params.scale * math.sqrt(1.0 - 2.0 * delta**2 / math.pi)
    return mean, sd


def gen_normal_mean_sd(params: GenNormalParams):
    b = params.beta
    sd = params.scale * math.exp(0.5 * (special.gammaln(3.0 / b) - special.gammaln(1.0 / b)))
    return params.location, sd


def moment_matched(target_mean: float, target_sd: float, shape):
    """Rescale ``shape`` so its analytic mean and sd hit the targets.

    The shape parameter (``alpha`` or ``beta``) is kept.
    """
    if not target_sd > 0:
        raise DomainError("target sd must be positive")
    if isinstance(shape, SkewNormalParams):
        delta = shape.delta
        scale = target_sd / math.sqrt(1.0 - 2.0 * delta**2 / math.pi)
        loc = target_mean - scale * delta * _SQRT_2_OVER_PI
        return SkewNormalParams(location=loc, scale=scale, alpha=shape.alpha)
    if isinstance(shape, GenNormalParams):
        b = shape.beta
        scale = target_sd * math.exp(0.5 * (special.gammaln(1.0 / b) - special.gammaln(3.0 / b)))
        return GenNormalParams(location=target_mean, scale=scale, beta=b)
    raise TypeError(f"unsupported shape type {type(shape).__name__}")


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------


def standard_skew_normal_draws(alpha, size, rng: RngStream):
    """Unit-moment skew-normal draws (mean 0, sd 1) for each ``alpha``.

    ``alpha`` broadcasts against ``size``; e.g. ``alpha`` of shape ``(m, 1)``
    with ``size=(m, r)`` gives ``m`` replicate sets of size ``r``.
    """
    alpha = np.asarray(alpha, dtype=float)
    delta = alpha / np.sqrt(1.0 + alpha**2)
    u0 = np.abs(rng.normal(size=size))
    u1 = rng.normal(size=size)
    z = delta * u0 + np.sqrt(1.0 - delta**2) * u1
    mu = delta * _SQRT_2_OVER_PI
    sd = np.sqrt(1.0 - mu**2)
    return (z - mu) / sd


def standard_gen_normal_draws(beta, size, rng: RngStream):
    """Unit-moment generalised-normal draws (mean 0, sd 1) for each ``beta``."""
    beta = np.broadcast_to(np.asarray(beta, dtype=float), size)
    g = rng.gamma(1.0 / beta, 1.0, size=size)
    sign = np.where(rng.uniform(size=size) < 0.5, -1.0, 1.0)
    z = sign * g ** (1.0 / beta)
    sd = np.exp(0.5 * (special.gammaln(3.0 / beta) - special.gammaln(1.0 / beta)))
    return z / sd


def sample_skew_normal(params: SkewNormalParams, n: int, rng: RngStream) -> np.ndarray:
    """Draw ``n`` skew-normal variates via the conditioning representation."""
    if n < 1:
        raise DomainError("n must be at least 1")
    delta = params.delta
    u0 = np.abs(rng.normal(size=n))
    u1 = rng.normal(size=n)
    z = delta * u0 + math.sqrt(1.0 - delta**2) * u1
    return params.location + params.scale * z


def sample_gen_normal(params: GenNormalParams, n: int, rng: RngStream) -> np.ndarray:
    """Draw ``n`` generalised-normal variates via a gamma transform."""
    if n < 1:
        raise DomainError("n must be at least 1")
    b = params.beta
    g = rng.gamma(1.0 / b, 1.0, size=n)
    sign = np.where(rng.uniform(size=n) < 0.5, -1.0, 1.0)
    return params.location + params.scale * sign * g ** (1.0 / b)


# ---------------------------------------------------------------------------
# Empirical reference distributions
# ---------------------------------------------------------------------------


def empirical_cdf(reference, observed: float) -> float:
    """Continuity-corrected empirical CDF of ``observed`` within ``reference``.

    Returns ``(#{ref < obs} + 0.5 * #{ref == obs} + 0.5) / (n + 1)``, which
    stays strictly inside (0, 1).
    """
    ref = np.asarray(reference, dtype=float).ravel()
    if ref.size == 0:
        raise DomainError("reference distribution is empty")
    below = np.count_nonzero(ref < observed)
    ties = np.count_nonzero(ref == observed)
    return (below + 0.5 * ties + 0.5) / (ref.size + 1)


