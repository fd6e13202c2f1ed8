"""Validation diagnostics for stochastic emulators.

Two groups:

* Deterministic-style checks on individual validation runs: standardised
  errors, pivoted-Cholesky errors, QQ points and credible-interval coverage.
* Component-wise "unexpectedness" checks on replicated validation runs, one
  per statistic (sample mean, sample variance, sample skewness, sample excess
  kurtosis). Each computes ``P = P(Z <= Z_obs)`` under the emulator's
  predictive law for the statistic and reports ``U = 2 (0.5 - P)``; values near
  -1 mean the observation is surprisingly large, near +1 surprisingly small.

Tolerance-to-error distributions widen the variance and normality reference
laws so that heavily replicated validation sets do not flag practically
irrelevant discrepancies.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .data import ReplicatedDataset
from .distributions import (
    MAX_SKEW_NORMAL_SKEWNESS,
    MIN_GEN_NORMAL_EXCESS_KURTOSIS,
    SampleMoments,
    chi_square_cdf,
    empirical_cdf,
    kurtosis_to_beta,
    sample_excess_kurtosis,
    sample_moments,
    sample_skewness,
    skewness_to_alpha,
    standard_gen_normal_draws,
    standard_skew_normal_draws,
    std_normal_ppf,
    student_t_cdf,
)
from .emulator import PointPrediction, joint_predict, predict
from .exceptions import (
    DegenerateReplicatesError,
    DomainError,
    InsufficientReplicationError,
    NumericalError,
    StochDiagError,
    UnattainableError,
)
from .rng import RngStream

__all__ = [
    "KINDS",
    "THRESHOLDS",
    "ToleranceSpec",
    "DiagnosticConfig",
    "UnexpectednessResult",
    "DiagnosticReport",
    "unexpectedness",
    "mean_unexpectedness",
    "variance_unexpectedness",
    "skewness_unexpectedness",
    "kurtosis_unexpectedness",
    "standardized_errors",
    "pivoted_cholesky",
    "pivoted_cholesky_errors",
    "qq_points",
    "credible_interval_coverage",
    "run_all",
]

KINDS = ("mean", "variance", "skewness", "kurtosis")
_KIND_CODE = {k: i for i, k in enumerate(KINDS)}
THRESHOLDS = (0.95, 0.995)
REPORT_FORMAT = "stochdiag-report"
REPORT_VERSION = 1


@dataclass(frozen=True)
class ToleranceSpec:
    """Tolerance-to-error settings.

    sd : (low, high) multipliers on the emulator's intrinsic sd, or None.
    skew : half-width of the tolerated true skewness interval, or None.
    kurt : half-width of the tolerated true excess-kurtosis interval, or None.
    shape : ``"uniform"`` or ``"triangular"`` (peaked at the emulator's value).
    """

    sd: Optional[Tuple[float, float]] = (0.8, 1.2)
    skew: Optional[float] = 0.5
    kurt: Optional[float] = 0.5
    shape: str = "uniform"

    def __post_init__(self):
        if self.sd is not None:
            lo, hi = (float(v) for v in self.sd)
            if not (0 < lo <= hi):
                raise DomainError("sd tolerance multipliers must be positive and ordered")
            object.__setattr__(self, "sd", (lo, hi))
        if self.skew is not None:
            if self.skew < 0:
                raise DomainError("skewness tolerance must be >= 0")
            if self.skew >= MAX_SKEW_NORMAL_SKEWNESS:
                raise UnattainableError(
                    f"skewness tolerance must be below {MAX_SKEW_NORMAL_SKEWNESS:.5f}")
        if self.kurt is not None:
            if self.kurt < 0:
                raise DomainError("kurtosis tolerance must be >= 0")
            if -self.kurt <= MIN_GEN_NORMAL_EXCESS_KURTOSIS:
                raise UnattainableError("kurtosis tolerance must be below 1.2")
        if self.shape not in ("uniform", "triangular"):
            raise DomainError(f"unknown tolerance shape {self.shape!r}")

    @classmethod
    def none(cls) -> "ToleranceSpec":
        """No tolerance anywhere: the raw diagnostics."""
        return cls(sd=None, skew=None, kurt=None)

    def to_dict(self):
        return {"sd": list(self.sd) if self.sd else None, "skew": self.skew,
                "kurt": self.kurt, "shape": self.shape}

    @classmethod
    def from_dict(cls, d):
        sd = d.get("sd", (0.8, 1.2))
        return cls(sd=tuple(sd) if sd else None, skew=d.get("skew", 0.5),
                   kurt=d.get("kurt", 0.5), shape=d.get("shape", "uniform"))


def _tolerance_draws(low, high, n, gen, shape, mode=None):
    if low == high:
        return np.full(n, float(low))
    if shape == "triangular":
        mode = 0.5 * (low + high) if mode is None else mode
        return gen.triangular(low, mode, high, size=n)
    return gen.uniform(low, high, size=n)


@dataclass(frozen=True)
class DiagnosticConfig:
    """Monte Carlo sizes and switches for :func:`run_all`."""

    n_mc_mean: int = 10_000
    n_mc_variance: int = 10_000
    n_reference: int = 10_000
    propagate_mean: bool = True
    ddof: int = 1
    coverage_levels: Tuple[float, ...] = tuple(np.round(np.arange(0.05, 1.0, 0.05), 2))

    def to_dict(self):
        d = asdict(self)
        d["coverage_levels"] = [float(v) for v in self.coverage_levels]
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "coverage_levels" in d:
            d["coverage_levels"] = tuple(d["coverage_levels"])
        return cls(**d)


@dataclass(frozen=True)
class UnexpectednessResult:
    """One unexpectedness value.

    ``U`` is None (and ``status == "degenerate"``) when the replicates have
    zero spread, so the statistic is undefined.
    """

    location: int
    kind: str
    U: Optional[float]
    P: Optional[float]
    observed: Optional[float]
    flag095: bool
    flag0995: bool
    mc_draws_used: int
    status: str = "ok"

    @classmethod
    def from_p(cls, location, kind, p, observed, draws):
        u = unexpectedness(p)
        return cls(location, kind, u, float(p), observed, abs(u) > THRESHOLDS[0],
                   abs(u) > THRESHOLDS[1], int(draws))

    @classmethod
    def degenerate(cls, location, kind):
        return cls(location, kind, None, None, None, False, False, 0, "degenerate")


def unexpectedness(p: float) -> float:
    """``U = 2 (0.5 - p)`` for a probability ``p = P(Z <= Z_obs)``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability {p!r} outside [0, 1]")
    return 2.0 * (0.5 - p)


def _require(stats: SampleMoments, r_min, kind):
    if stats.n < r_min:
        raise InsufficientReplicationError(f"{kind} diagnostic needs r >= {r_min}, got {stats.n}")


# ---------------------------------------------------------------------------
# Unexpectedness diagnostics
# ---------------------------------------------------------------------------


def mean_unexpectedness(pred: PointPrediction, stats: SampleMoments, n_mc: int = 10_000,
                        rng: Optional[RngStream] = None, location: int = 0) -> UnexpectednessResult:
    """Unexpectedness of the observed sample mean.

    Averages the t-distribution CDF of ``(ybar - m) sqrt(r) / S`` over draws
    ``m ~ N(M, V)`` of the emulator mean; ``S`` is the observed sample sd.
    """
    _require(stats, 2, "mean")
    if stats.sd == 0:
        raise DegenerateReplicatesError("replicates have zero sample variance")
    r = stats.n
    if pred.mean_variance > 0:
        rng = rng or RngStream(0)
        m = pred.mean + math.sqrt(pred.mean_variance) * rng.normal(size=n_mc)
        draws = n_mc
    else:
        m = np.array([pred.mean])
        draws = 0
    t = (stats.mean - m) * math.sqrt(r) / stats.sd
    p = float(np.mean(student_t_cdf(t, r - 1)))
    return UnexpectednessResult.from_p(location, "mean", p, stats.mean, draws)


def variance_unexpectedness(pred: PointPrediction, stats: SampleMoments,
                            tol: ToleranceSpec = ToleranceSpec(), n_mc: int = 10_000,
                            rng: Optional[RngStream] = None, location: int = 0) -> UnexpectednessResult:
    """Unexpectedness of the observed sample variance.

    Uses ``(r - 1) S^2 / sigma^2 ~ chi2(r - 1)``. With an sd tolerance
    ``(a, b)`` the CDF is averaged over ``sigma ~ U(a sigma_hat, b sigma_hat)``.
    """
    _require(stats, 2, "variance")
    if not pred.intrinsic_variance > 0:
        raise DomainError("emulator intrinsic variance must be positive")
    r = stats.n
    sig = math.sqrt(pred.intrinsic_variance)
    if tol.sd is None:
        sigmas = np.array([sig])
        draws = 0
    else:
        rng = rng or RngStream(0)
        lo, hi = tol.sd
        sigmas = sig * _tolerance_draws(lo, hi, n_mc, rng.generator, tol.shape, mode=1.0)
        draws = n_mc
    p = float(np.mean(chi_square_cdf((r - 1) * stats.variance / sigmas**2, r - 1)))
    return UnexpectednessResult.from_p(location, "variance", p, stats.variance, draws)


def _reference_location_scale(pred, n_ref, gen, propagate_mean):
    if propagate_mean and pred.mean_variance > 0:
        m = pred.mean + math.sqrt(pred.mean_variance) * gen.normal(size=(n_ref, 1))
    else:
        m = np.full((n_ref, 1), pred.mean)
    return m, math.sqrt(pred.intrinsic_variance)


def skewness_reference(pred: PointPrediction, r: int, tol: ToleranceSpec, n_ref: int,
                       rng: RngStream, propagate_mean=True, ddof=1) -> np.ndarray:
    """Reference sample of the sample skewness of ``r`` emulator runs.

    Each reference replicate set comes from a skew normal whose true skewness
    is drawn from the tolerance interval and whose mean and sd match the
    emulator (with the mean itself drawn from ``N(M, V)`` if requested).
    """
    gen = rng.generator
    w = tol.skew or 0.0
    gam = _tolerance_draws(-w, w, n_ref, gen, tol.shape, mode=0.0)
    alpha = np.asarray(skewness_to_alpha(gam)).reshape(-1, 1)
    z = standard_skew_normal_draws(alpha, (n_ref, r), rng)
    m, s = _reference_location_scale(pred, n_ref, gen, propagate_mean)
    return sample_skewness(m + s * z, axis=1, ddof=ddof)


def kurtosis_reference(pred: PointPrediction, r: int, tol: ToleranceSpec, n_ref: int,
                       rng: RngStream, propagate_mean=True, ddof=1) -> np.ndarray:
    """Reference sample of the sample excess kurtosis of ``r`` emulator runs."""
    gen = rng.generator
    w = tol.kurt or 0.0
    kap = _tolerance_draws(-w, w, n_ref, gen, tol.shape, mode=0.0)
    beta = np.asarray(kurtosis_to_beta(kap)).reshape(-1, 1)
    z = standard_gen_normal_draws(beta, (n_ref, r), rng)
    m, s = _reference_location_scale(pred, n_ref, gen, propagate_mean)
    return sample_excess_kurtosis(m + s * z, axis=1, ddof=ddof)


def skewness_unexpectedness(pred: PointPrediction, replicates, tol: ToleranceSpec = ToleranceSpec(),
                            n_mc: int = 10_000, rng: Optional[RngStream] = None, location: int = 0,
                            propagate_mean: bool = True, ddof: int = 1) -> UnexpectednessResult:
    """Unexpectedness of the observed sample skewness against a simulated reference."""
    values = np.asarray(replicates, dtype=float).ravel()
    if values.size < 3:
        raise InsufficientReplicationError(f"skewness diagnostic needs r >= 3, got {values.size}")
    stats = sample_moments(values, ddof=ddof)
    if stats.skewness is None:
        return UnexpectednessResult.degenerate(location, "skewness")
    ref = skewness_reference(pred, values.size, tol, n_mc, rng or RngStream(0), propagate_mean, ddof)
    p = empirical_cdf(ref, stats.skewness)
    return UnexpectednessResult.from_p(location, "skewness", p, stats.skewness, n_mc)


def kurtosis_unexpectedness(pred: PointPrediction, replicates, tol: ToleranceSpec = ToleranceSpec(),
                            n_mc: int = 10_000, rng: Optional[RngStream] = None, location: int = 0,
                            propagate_mean: bool = True, ddof: int = 1) -> UnexpectednessResult:
    """Unexpectedness of the observed sample excess kurtosis."""
    values = np.asarray(replicates, dtype=float).ravel()
    if values.size < 4:
        raise InsufficientReplicationError(f"kurtosis diagnostic needs r >= 4, got {values.size}")
    stats = sample_moments(values, ddof=ddof)
    if stats.excess_kurtosis is None:
        return UnexpectednessResult.degenerate(location, "kurtosis")
    ref = kurtosis_reference(pred, values.size, tol, n_mc, rng or RngStream(0), propagate_mean, ddof)
    p = empirical_cdf(ref, stats.excess_kurtosis)
    return UnexpectednessResult.from_p(location, "kurtosis", p, stats.excess_kurtosis, n_mc)


# ---------------------------------------------------------------------------
# Run-level diagnostics
# ---------------------------------------------------------------------------


def _pred_arrays(preds):
    M = np.array([p.mean for p in preds])
    V = np.array([p.mean_variance for p in preds])
    S = np.array([p.intrinsic_variance for p in preds])
    return M, V, S


def standardized_errors(preds: Sequence[PointPrediction], y) -> np.ndarray:
    """``(y - M) / sqrt(V + sigma^2)`` for each single run."""
    y = np.asarray(y, dtype=float).ravel()
    if len(preds) != y.size:
        raise DomainError("one prediction per observation is required")
    M, V, S = _pred_arrays(preds)
    tot = V + S
    if np.any(tot <= 0):
        raise NumericalError("total predictive variance must be positive")
    return (y - M) / np.sqrt(tot)


def pivoted_cholesky(A):
    """Greedy diagonal-pivoted Cholesky factorisation.

    Returns ``(G, piv)`` with ``A[piv][:, piv] = G @ G.T`` and ``G`` lower
    triangular. At each step the largest remaining diagonal entry is chosen,
    ties going to the lowest original index.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise DomainError("matrix must be square")
    piv = np.arange(n)
    G = np.zeros((n, n))
    scale = max(float(np.max(np.abs(np.diag(A)))), 1e-300) if n else 1.0
    for k in range(n):
        d = np.diag(A)[k:]
        # stable tie-break on original index
        best = k + int(np.lexsort((piv[k:], -d))[0])
        if A[best, best] <= 1e-14 * scale:
            raise NumericalError("matrix is not positive definite")
        if best != k:
            A[[k, best], :] = A[[best, k], :]
            A[:, [k, best]] = A[:, [best, k]]
            G[[k, best], :k] = G[[best, k], :k]
            piv[[k, best]] = piv[[best, k]]
        G[k, k] = math.sqrt(A[k, k])
        G[k + 1:, k] = A[k + 1:, k] / G[k, k]
        A[k + 1:, k + 1:] -= np.outer(G[k + 1:, k], G[k + 1:, k])
    return G, piv


def pivoted_cholesky_errors(mean, cov, y):
    """Decorrelated errors ``G^-1 P^T (y - mean)`` and the pivot order.

    ``cov`` must already include intrinsic variance on its diagonal.
    """
    from scipy.linalg import solve_triangular

    mean = np.asarray(mean, float).ravel()
    y = np.asarray(y, float).ravel()
    G, piv = pivoted_cholesky(cov)
    e = solve_triangular(G, (y - mean)[piv], lower=True)
    return e, piv


def qq_points(errors):
    """``(theoretical, sample)`` quantile pairs at plotting positions ``(i - 0.5) / n``."""
    e = np.sort(np.asarray(errors, dtype=float).ravel())
    n = e.size
    if n == 0:
        raise DomainError("no errors to plot")
    theo = np.asarray(std_normal_ppf((np.arange(1, n + 1) - 0.5) / n), dtype=float).reshape(-1)
    return theo, e


def credible_interval_coverage(preds: Sequence[PointPrediction], y, levels) -> np.ndarray:
    """Fraction of runs inside the central predictive interval at each level."""
    y = np.asarray(y, float).ravel()
    M, V, S = _pred_arrays(preds)
    sd = np.sqrt(V + S)
    levels = np.asarray(levels, float).ravel()
    if np.any((levels < 0) | (levels >= 1)):
        raise DomainError("levels must lie in [0, 1)")
    half = np.asarray(std_normal_ppf(0.5 + levels / 2), float).reshape(-1)
    inside = np.abs(y - M)[None, :] <= half[:, None] * sd[None, :]
    return inside.mean(axis=1)


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


def _summarise(results: List[UnexpectednessResult]):
    us = [r.U for r in results if r.U is not None]
    return {
        "n": len(results),
        "n_ok": len(us),
        "n_degenerate": sum(r.status == "degenerate" for r in results),
        "n_negative": sum(u < 0 for u in us),
        "n_positive": sum(u > 0 for u in us),
        "n_abs_gt_095": sum(abs(u) > THRESHOLDS[0] for u in us),
        "n_abs_gt_0995": sum(abs(u) > THRESHOLDS[1] for u in us),
        "n_lt_neg095": sum(u < -THRESHOLDS[0] for u in us),
        "n_lt_neg0995": sum(u < -THRESHOLDS[1] for u in us),
    }


@dataclass
class DiagnosticReport:
    """All diagnostics for one emulator against one validation set."""

    locations: np.ndarray
    replicates: np.ndarray
    predictions: List[PointPrediction]
    results: Dict[str, List[UnexpectednessResult]]
    deterministic: Dict[str, list]
    config: dict
    errors: List[dict] = field(default_factory=list)
    label: str = ""

    @property
    def summary(self):
        return {k: _summarise(v) for k, v in self.results.items()}

    def u_values(self, kind):
        """``(location indices, U values)`` for one diagnostic, skipping degenerate points."""
        rs = [r for r in self.results.get(kind, []) if r.U is not None]
        return np.array([r.location for r in rs], dtype=int), np.array([r.U for r in rs])

    def to_dict(self):
        return {
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "label": self.label,
            "config": self.config,
            "locations": np.asarray(self.locations).tolist(),
            "replicates": [int(v) for v in self.replicates],
            "predictions": [asdict(p) for p in self.predictions],
            "results": {k: [asdict(r) for r in v] for k, v in self.results.items()},
            "summary": self.summary,
            "deterministic": self.deterministic,
            "errors": self.errors,
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != REPORT_FORMAT:
            raise DomainError("not a stochdiag report")
        if d.get("version") != REPORT_VERSION:
            raise DomainError(f"unsupported report version {d.get('version')!r}")
        return cls(
            locations=np.asarray(d["locations"], float),
            replicates=np.asarray(d["replicates"], int),
            predictions=[PointPrediction(**p) for p in d["predictions"]],
            results={k: [UnexpectednessResult(**r) for r in v] for k, v in d["results"].items()},
            deterministic=d["deterministic"],
            config=d["config"],
            errors=d.get("errors", []),
            label=d.get("label", ""),
        )


def run_all(model, validation: ReplicatedDataset, tol: ToleranceSpec = ToleranceSpec(),
            config: DiagnosticConfig = DiagnosticConfig(), rng: Optional[RngStream] = None,
            label: str = "") -> DiagnosticReport:
    """Every applicable diagnostic for ``model`` on a replicated validation set.

    Each location and diagnostic draws from its own substream
    ``rng.substream(location, kind)``, so results do not depend on evaluation
    order. Per-point failures are recorded in ``report.errors``; the call only
    raises if every point fails.
    """
    rng = rng or RngStream(0)
    preds = predict(model, validation.X)
    results: Dict[str, List[UnexpectednessResult]] = {k: [] for k in KINDS}
    errors = []
    attempted = 0
    for i, (pred, reps) in enumerate(zip(preds, validation.outputs)):
        r = reps.size
        if r < 2:
            continue
        stats = sample_moments(reps, ddof=config.ddof)
        jobs = [("mean", lambda s: mean_unexpectedness(pred, stats, config.n_mc_mean, s, i)),
                ("variance", lambda s: variance_unexpectedness(pred, stats, tol, config.n_mc_variance, s, i))]
        if r >= 3:
            jobs.append(("skewness", lambda s: skewness_unexpectedness(
                pred, reps, tol, config.n_reference, s, i, config.propagate_mean, config.ddof)))
        if r >= 4:
            jobs.append(("kurtosis", lambda s: kurtosis_unexpectedness(
                pred, reps, tol, config.n_reference, s, i, config.propagate_mean, config.ddof)))
        for kind, job in jobs:
            attempted += 1
            try:
                res = job(rng.substream(i, _KIND_CODE[kind]))
            except DegenerateReplicatesError:
                res = UnexpectednessResult.degenerate(i, kind)
            except StochDiagError as exc:
                errors.append({"location": i, "kind": kind, "error": str(exc)})
                continue
            results[kind].append(res)
    if attempted and len(errors) == attempted:
        raise StochDiagError(f"every diagnostic failed; first error: {errors[0]['error']}")
    results = {k: v for k, v in results.items() if v}

    X_runs, y_runs = validation.runs()
    labels = np.repeat(np.arange(validation.n_locations), validation.replicates)
    run_preds = [preds[j] for j in labels]
    deterministic = {}
    try:
        se = standardized_errors(run_preds, y_runs)
        theo, samp = qq_points(se)
        levels = np.asarray(config.coverage_levels, float)
        cov_curve = credible_interval_coverage(run_preds, y_runs, levels)
        M, C = joint_predict(model, validation.X)
        S = np.array([p.intrinsic_variance for p in preds])
        C_runs = C[np.ix_(labels, labels)] + np.diag(S[labels])
        pc, piv = pivoted_cholesky_errors(M[labels], C_runs, y_runs)
        deterministic = {
            "run_location": labels.tolist(),
            "standardized_errors": se.tolist(),
            "pivoted_cholesky_errors": pc.tolist(),
            "pivot_order": piv.tolist(),
            "qq_theoretical": theo.tolist(),
            "qq_sample": samp.tolist(),
            "coverage_levels": levels.tolist(),
            "coverage": cov_curve.tolist(),
        }
    except StochDiagError as exc:
        errors.append({"location": None, "kind": "deterministic", "error": str(exc)})

    echo = {
        "seed": rng.seed,
        "stream_id": list(rng.stream_id),
        "tolerance": tol.to_dict(),
        "diagnostics": config.to_dict(),
        "thresholds": list(THRESHOLDS),
        "model_kind": model.kind,
    }
    return DiagnosticReport(
        locations=validation.X,
        replicates=validation.replicates,
        predictions=preds,
        results=results,
        deterministic=deterministic,
        config=echo,
        errors=errors,
        label=label,
    )
