"""Gaussian-process emulators for stochastic simulators.

Two models share one core:

* :class:`FittedHomGP` -- constant intrinsic variance (the nugget).
* :class:`FittedHetGP` -- intrinsic variance that varies with the input,
  modelled by a second GP on the log variance and coupled to the mean GP by
  the iterative "most likely" scheme.

Replicated inputs are folded into their unique locations: the GP is
conditioned on per-location means with noise ``sigma_i^2 / r_i``, and the
within-location sums of squares enter the likelihood in closed form. This is
exact (it gives the same likelihood and predictions as the full run-level
system) and makes heavily replicated designs cheap.

Covariance: squared exponential, ``s2 * exp(-0.5 * sum(((x - x') / l)**2))``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np
from scipy import linalg, optimize, special

from .data import group_rows
from .exceptions import DomainError, FittingError, NumericalError
from .rng import RngStream

__all__ = [
    "CovarianceSpec",
    "MeanSpec",
    "FitConfig",
    "HetConfig",
    "PointPrediction",
    "FittedHomGP",
    "FittedHetGP",
    "fit_homgp",
    "fit_hetgp",
    "predict",
    "joint_predict",
    "sample_mean_function",
    "marginal_log_likelihood",
    "save_model",
    "load_model",
    "model_to_dict",
    "model_from_dict",
]

MODEL_FORMAT = "stochdiag-model"
MODEL_VERSION = 1

JITTER_FLOOR = 1e-8
JITTER_MAX = 1e-4
LENGTHSCALE_BOUNDS = (1e-3, 10.0)
VARIANCE_BOUNDS = (1e-8, 1e3)
_LOG_2PI = math.log(2.0 * math.pi)


# ---------------------------------------------------------------------------
# Specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CovarianceSpec:
    """Squared-exponential covariance with one lengthscale per input."""

    lengthscales: tuple
    signal_variance: float
    family: str = "squared-exponential"

    def __post_init__(self):
        ls = tuple(float(v) for v in np.atleast_1d(self.lengthscales))
        object.__setattr__(self, "lengthscales", ls)
        if self.family != "squared-exponential":
            raise DomainError(f"unsupported covariance family {self.family!r}")
        if any(not v > 0 for v in ls) or not self.signal_variance > 0:
            raise DomainError("covariance parameters must be positive")

    @property
    def dim(self) -> int:
        return len(self.lengthscales)

    def __call__(self, A, B=None):
        A = np.atleast_2d(A)
        B = A if B is None else np.atleast_2d(B)
        ls = np.asarray(self.lengthscales)
        d2 = _sq_dist(A / ls, B / ls)
        return self.signal_variance * np.exp(-0.5 * d2)


@dataclass(frozen=True)
class MeanSpec:
    """Prior mean: ``"zero"`` or ``"constant"`` (``value``)."""

    form: str = "constant"
    value: float = 0.0

    def __post_init__(self):
        if self.form not in ("zero", "constant"):
            raise DomainError(f"unknown mean form {self.form!r}")

    @property
    def level(self) -> float:
        return 0.0 if self.form == "zero" else float(self.value)


@dataclass(frozen=True)
class FitConfig:
    """Hyperparameter search settings.

    Any of ``lengthscales``, ``signal_variance`` or ``nugget`` may be fixed
    (in output units); the rest are optimised. ``mean`` is ``"constant"``
    (prior mean at the average output) or ``"zero"``.
    """

    n_starts: int = 10
    maxiter: int = 4000
    mean: str = "constant"
    lengthscales: Optional[Sequence[float]] = None
    signal_variance: Optional[float] = None
    nugget: Optional[float] = None
    xatol: float = 1e-6
    fatol: float = 1e-8


@dataclass(frozen=True)
class HetConfig:
    """Settings for the coupled mean / log-variance fit."""

    mean_fit: FitConfig = field(default_factory=FitConfig)
    variance_fit: FitConfig = field(default_factory=lambda: FitConfig(n_starts=5))
    max_iter: int = 20
    tol: float = 1e-4


@dataclass(frozen=True)
class PointPrediction:
    """Predictive summary at one input.

    ``mean`` and ``mean_variance`` describe the simulator's mean function;
    ``intrinsic_variance`` is the run-to-run variance. A single future run has
    variance ``mean_variance + intrinsic_variance``.
    """

    mean: float
    mean_variance: float
    intrinsic_variance: float

    @property
    def total_variance(self) -> float:
        return self.mean_variance + self.intrinsic_variance

    @property
    def intrinsic_sd(self) -> float:
        return math.sqrt(self.intrinsic_variance)


# ---------------------------------------------------------------------------
# Linear-algebra core
# ---------------------------------------------------------------------------


def _sq_dist(A, B):
    d = A[:, None, :] - B[None, :, :]
    return np.einsum("ijk,ijk->ij", d, d)


def _cholesky(K, scale=1.0):
    """Lower Cholesky factor, escalating diagonal jitter on failure.

    Returns ``(L, jitter)``.
    """
    jitter = 0.0
    while True:
        try:
            Kj = K if jitter == 0 else K + jitter * scale * np.eye(K.shape[0])
            return linalg.cholesky(Kj, lower=True, check_finite=False), jitter
        except linalg.LinAlgError:
            jitter = JITTER_FLOOR if jitter == 0 else jitter * 10
            if jitter > JITTER_MAX * (1 + 1e-9):
                raise NumericalError("covariance matrix is not positive definite") from None


class _Replicated:
    """Run-level data reduced to unique locations."""

    def __init__(self, X, y):
        X = np.asarray(X, dtype=float)
        X = X.reshape(-1, 1) if X.ndim == 1 else X
        y = np.asarray(y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise DomainError("X and y must have the same number of rows")
        if X.shape[0] < 1:
            raise DomainError("no training data")
        self.X, self.y = X, y
        self.U, self.labels = group_rows(X)
        m = self.U.shape[0]
        self.r = np.bincount(self.labels, minlength=m).astype(float)
        self.ybar = np.bincount(self.labels, weights=y, minlength=m) / self.r
        resid = y - self.ybar[self.labels]
        self.ss = np.bincount(self.labels, weights=resid**2, minlength=m)


def _log_lik(rep: _Replicated, ybar, ss, cov: CovarianceSpec, mean_level, noise, scale=1.0):
    """Exact log-density of the run-level outputs.

    ``noise`` holds the per-run intrinsic variance at each unique location.
    ``ybar`` and ``ss`` may be rescaled copies of ``rep.ybar`` / ``rep.ss``.
    """
    r = rep.r
    K = cov(rep.U) + np.diag(noise / r)
    L, _ = _cholesky(K, scale)
    resid = ybar - mean_level
    a = linalg.solve_triangular(L, resid, lower=True, check_finite=False)
    ll = -0.5 * a @ a - np.sum(np.log(np.diag(L))) - 0.5 * len(r) * _LOG_2PI
    rep_mask = r > 1
    if np.any(rep_mask):
        rr, nn, s = r[rep_mask], noise[rep_mask], ss[rep_mask]
        ll += np.sum(-0.5 * (rr - 1) * (_LOG_2PI + np.log(nn)) - 0.5 * np.log(rr) - 0.5 * s / nn)
    return float(ll)


class _GPState:
    """Conditioned GP on unique locations with per-location noise."""

    def __init__(self, rep: _Replicated, cov: CovarianceSpec, mean: MeanSpec, noise, scale=1.0):
        self.rep = rep
        self.cov = cov
        self.mean = mean
        self.noise = np.broadcast_to(np.asarray(noise, dtype=float), rep.r.shape).copy()
        K = cov(rep.U) + np.diag(self.noise / rep.r)
        try:
            self.L, self.jitter = _cholesky(K, scale)
        except NumericalError:
            raise NumericalError("training covariance could not be factorised") from None
        self.alpha = linalg.cho_solve((self.L, True), rep.ybar - mean.level, check_finite=False)

    def mean_var(self, Xs):
        Ks = self.cov(Xs, self.rep.U)
        M = self.mean.level + Ks @ self.alpha
        W = linalg.solve_triangular(self.L, Ks.T, lower=True, check_finite=False)
        V = self.cov.signal_variance - np.sum(W**2, axis=0)
        return M, np.maximum(V, 0.0), Ks, W

    def joint(self, Xs):
        Ks = self.cov(Xs, self.rep.U)
        M = self.mean.level + Ks @ self.alpha
        W = linalg.solve_triangular(self.L, Ks.T, lower=True, check_finite=False)
        C = self.cov(Xs) - W.T @ W
        return M, 0.5 * (C + C.T)


# ---------------------------------------------------------------------------
# Hyperparameter search
# ---------------------------------------------------------------------------


def _pack_bounds(d, free_ls, free_sv, free_nug):
    lo, hi = [], []
    if free_ls:
        lo += [math.log(LENGTHSCALE_BOUNDS[0])] * d
        hi += [math.log(LENGTHSCALE_BOUNDS[1])] * d
    for free in (free_sv, free_nug):
        if free:
            lo.append(math.log(VARIANCE_BOUNDS[0]))
            hi.append(math.log(VARIANCE_BOUNDS[1]))
    return list(zip(lo, hi))


def _optimise(rep: _Replicated, config: FitConfig, rng: RngStream, fixed_noise=None,
              estimate_nugget=True, warm=None):
    """Multi-start Nelder-Mead on the standardised-output log-likelihood.

    Returns ``(cov, nugget, mean_level, ll_std, any_converged)`` in output units.
    ``fixed_noise`` (output units, per unique location) is added to the
    nugget; with ``estimate_nugget=False`` the nugget sits at the floor.
    """
    d = rep.U.shape[1]
    centre = float(np.mean(rep.ybar)) if config.mean == "constant" else 0.0
    spread = float(np.std(rep.y - centre)) if rep.y.size > 1 else 0.0
    if not spread > 0:
        spread = float(abs(centre)) or 1.0
    s2 = spread**2
    ybar = (rep.ybar - centre) / spread
    ss = rep.ss / s2
    extra = np.zeros_like(rep.r) if fixed_noise is None else np.asarray(fixed_noise) / s2

    free_ls = config.lengthscales is None
    free_sv = config.signal_variance is None
    free_nug = estimate_nugget and config.nugget is None
    fixed_ls = None if free_ls else np.broadcast_to(np.asarray(config.lengthscales, float), (d,))
    fixed_sv = None if free_sv else config.signal_variance / s2
    fixed_nug = (max(config.nugget / s2, JITTER_FLOOR) if config.nugget is not None
                 else JITTER_FLOOR)

    def unpack(theta):
        k = 0
        if free_ls:
            ls = np.exp(theta[:d]); k = d
        else:
            ls = fixed_ls
        if free_sv:
            sv = math.exp(theta[k]); k += 1
        else:
            sv = fixed_sv
        nug = math.exp(theta[k]) if free_nug else fixed_nug
        return ls, sv, nug

    def negll(theta):
        ls, sv, nug = unpack(theta)
        try:
            cov = CovarianceSpec(ls, sv)
            return -_log_lik(rep, ybar, ss, cov, 0.0, nug + extra)
        except (NumericalError, DomainError, FloatingPointError):
            return np.inf

    bounds = _pack_bounds(d, free_ls, free_sv, free_nug)
    n_free = len(bounds)
    if n_free == 0:
        ls, sv, nug = unpack(np.zeros(0))
        ll = -negll(np.zeros(0))
        return CovarianceSpec(ls, sv * s2), nug * s2, centre, ll, True, np.zeros(0)

    gen = rng.generator
    starts = []
    if warm is not None and len(warm) != n_free:
        warm = None
    if warm is not None:
        starts.append(np.asarray(warm, float))
    base = []
    if free_ls:
        base += [math.log(0.2)] * d
    if free_sv:
        base.append(0.0)
    if free_nug:
        base.append(math.log(0.1))
    starts.append(np.array(base))
    while len(starts) < config.n_starts + (warm is not None):
        th = []
        if free_ls:
            th += list(gen.uniform(math.log(0.05), math.log(1.0), size=d))
        if free_sv:
            th.append(gen.uniform(math.log(0.3), math.log(3.0)))
        if free_nug:
            th.append(gen.uniform(math.log(1e-3), math.log(0.5)))
        starts.append(np.array(th))

    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    best = None
    any_ok = False
    for th0 in starts:
        th0 = np.clip(th0, lo, hi)
        res = optimize.minimize(
            negll, th0, method="Nelder-Mead", bounds=bounds,
            options={"maxiter": config.maxiter, "xatol": config.xatol, "fatol": config.fatol},
        )
        if not np.isfinite(res.fun):
            continue
        any_ok |= bool(res.success)
        if best is None or res.fun < best.fun:
            best = res
    if best is None:
        raise FittingError("likelihood was not finite at any start", best=None)
    ls, sv, nug = unpack(best.x)
    cov = CovarianceSpec(ls, sv * s2)
    return cov, nug * s2, centre, -best.fun, any_ok, best.x


# ---------------------------------------------------------------------------
# Fitted models
# ---------------------------------------------------------------------------


class FittedHomGP:
    """Homoscedastic GP emulator: ``y(x) ~ GP(m, K + nugget)``.

    Parameters are in output units. Instances are treated as immutable.
    """

    kind = "hom"

    def __init__(self, X, y, covariance: CovarianceSpec, nugget: float, mean: MeanSpec = MeanSpec(),
                 known_noise=None):
        self._rep = _Replicated(X, y)
        if covariance.dim != self._rep.U.shape[1]:
            raise DomainError("lengthscale count does not match input dimension")
        if not nugget > 0:
            raise DomainError("nugget must be positive")
        self.covariance = covariance
        self.mean_spec = mean
        self.nugget = float(nugget)
        # optional known per-location noise on top of the nugget
        self.known_noise = None if known_noise is None else np.asarray(known_noise, float).ravel()
        self._state = _GPState(self._rep, covariance, mean, self._noise(), self._scale)
        self.converged = True

    def _noise(self):
        if self.known_noise is None:
            return np.full_like(self._rep.r, self.nugget)
        return self.nugget + self.known_noise

    @property
    def _scale(self):
        return max(float(np.var(self._rep.y)), self.covariance.signal_variance, 1e-300)

    @property
    def X(self):
        return self._rep.X

    @property
    def y(self):
        return self._rep.y

    @property
    def dim(self):
        return self._rep.X.shape[1]

    def intrinsic_variance(self, Xs):
        return np.full(np.atleast_2d(Xs).shape[0], self.nugget)

    def log_likelihood(self) -> float:
        return _log_lik(self._rep, self._rep.ybar, self._rep.ss, self.covariance,
                        self.mean_spec.level, self._noise(), self._scale)

    def factor_matrix(self):
        """The reduced covariance ``K(U, U) + diag(nugget / r)`` and its factor."""
        K = self.covariance(self._rep.U) + np.diag(self._state.noise / self._rep.r)
        return K, self._state.L


class FittedHetGP:
    """Heteroscedastic GP emulator.

    The mean process is a GP whose per-location noise is the current
    intrinsic-variance estimate; the log intrinsic variance is itself a GP
    (``variance_gp``) fitted to bias-corrected log sample variances.
    """

    kind = "het"

    def __init__(self, X, y, covariance: CovarianceSpec, mean: MeanSpec,
                 variance_gp: "FittedHomGP", iterations=0, converged=True):
        self._rep = _Replicated(X, y)
        self.covariance = covariance
        self.mean_spec = mean
        self.variance_gp = variance_gp
        self.iterations = int(iterations)
        self.converged = bool(converged)
        self.training_variances = self.intrinsic_variance(self._rep.U)
        scale = max(float(np.var(self._rep.y)), covariance.signal_variance, 1e-300)
        self._state = _GPState(self._rep, covariance, mean, self.training_variances, scale)

    @property
    def X(self):
        return self._rep.X

    @property
    def y(self):
        return self._rep.y

    @property
    def dim(self):
        return self._rep.X.shape[1]

    @property
    def nugget(self):
        return None

    def intrinsic_variance(self, Xs):
        Xs = np.atleast_2d(Xs)
        m, _, _, _ = self.variance_gp._state.mean_var(Xs)
        return np.exp(m)

    def log_likelihood(self) -> float:
        return _log_lik(self._rep, self._rep.ybar, self._rep.ss, self.covariance,
                        self.mean_spec.level, self.training_variances)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def _check_inputs(X, y=None):
    X = np.asarray(X, dtype=float)
    X = X.reshape(-1, 1) if X.ndim == 1 else X
    if y is not None:
        y = np.asarray(y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise DomainError("X and y must have the same number of rows")
        if X.shape[0] < 2:
            raise DomainError("need at least two training runs")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DomainError("training data must be finite")
    return X, y


def fit_homgp(X, y, config: FitConfig = FitConfig(), rng: Optional[RngStream] = None) -> FittedHomGP:
    """Fit a homoscedastic GP by maximising the marginal likelihood.

    Raises
    ------
    FittingError
        If no optimiser start converged; ``err.best`` holds the best model.
    """
    X, y = _check_inputs(X, y)
    rng = rng or RngStream(0)
    rep = _Replicated(X, y)
    degenerate = np.all(rep.ss == 0) and np.all(rep.r > 1)
    cfg = config
    if degenerate:
        warnings.warn("replicates show no output variance; nugget held at the jitter floor")
        cfg = replace(config, nugget=JITTER_FLOOR * max(float(np.var(y)), 1.0))
    out = _optimise(rep, cfg, rng)
    cov, nug, centre, _, ok = out[:5]
    mean = MeanSpec("constant", centre) if cfg.mean == "constant" else MeanSpec("zero")
    model = FittedHomGP(X, y, cov, nug, mean)
    if not ok:
        model.converged = False
        raise FittingError("no optimiser start converged", best=model)
    return model


def _log_variance_targets(rep: _Replicated, resid_sq):
    """Bias-corrected log-variance targets and their sampling variances."""
    r = rep.r
    k = np.where(r > 1, r - 1, 1.0)
    s2 = np.where(r > 1, rep.ss / k, resid_sq)
    # log(chi2_k / k) has mean digamma(k/2) + log(2/k) and variance trigamma(k/2)
    bias = special.digamma(k / 2) + np.log(2.0 / k)
    tiny = 1e-12 * max(float(np.var(rep.y)), 1e-300)
    targets = np.log(np.maximum(s2, tiny)) - bias
    noise = special.polygamma(1, k / 2)
    return targets, noise


def fit_hetgp(X, y, config: HetConfig = HetConfig(), rng: Optional[RngStream] = None) -> FittedHetGP:
    """Fit a heteroscedastic GP by alternating mean and log-variance fits.

    Each sweep (1) estimates log intrinsic variances from replicate pools
    (or squared residuals at unreplicated inputs), (2) fits the variance GP
    to them, (3) refits the mean GP with those variances as per-location
    noise. Stops when the mean at the training inputs changes by less than
    ``config.tol`` (relative) or after ``config.max_iter`` sweeps.
    """
    X, y = _check_inputs(X, y)
    rng = rng or RngStream(0)
    rep = _Replicated(X, y)
    mcfg = config.mean_fit

    cov, nug, centre, _, _, theta = _optimise(rep, mcfg, rng.substream(0))
    mean = MeanSpec("constant", centre) if mcfg.mean == "constant" else MeanSpec("zero")
    state = _GPState(rep, cov, mean, nug)
    M_old, V_old, _, _ = state.mean_var(rep.U)

    var_theta = None
    converged = False
    var_gp = None
    it = 0
    for it in range(1, config.max_iter + 1):
        resid_sq = (rep.ybar - M_old) ** 2 + V_old
        targets, known = _log_variance_targets(rep, resid_sq)
        vrep = _Replicated(rep.U, targets)
        vcfg = config.variance_fit
        vcov, vnug, vcentre, _, _, var_theta = _optimise(
            vrep, vcfg, rng.substream(1), fixed_noise=known, warm=var_theta)
        vmean = MeanSpec("constant", vcentre) if vcfg.mean == "constant" else MeanSpec("zero")
        var_gp = FittedHomGP(rep.U, targets, vcov, vnug, vmean, known_noise=known)
        sig2 = np.exp(var_gp._state.mean_var(rep.U)[0])

        noise_fixed = sig2
        cov, _, centre, _, _, theta = _optimise(
            rep, replace(mcfg, nugget=None), rng.substream(0),
            fixed_noise=noise_fixed, estimate_nugget=False,
            warm=theta[: rep.U.shape[1] + 1] if theta is not None else None)
        mean = MeanSpec("constant", centre) if mcfg.mean == "constant" else MeanSpec("zero")
        state = _GPState(rep, cov, mean, sig2)
        M_new, V_new, _, _ = state.mean_var(rep.U)
        change = np.linalg.norm(M_new - M_old) / max(np.linalg.norm(M_old), 1e-300)
        M_old, V_old = M_new, V_new
        if change < config.tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"heteroscedastic fit did not converge in {config.max_iter} iterations")
    return FittedHetGP(X, y, cov, mean, var_gp, iterations=it, converged=converged)


def _as_query(model, Xstar):
    Xs = np.asarray(Xstar, dtype=float)
    if Xs.ndim == 1:
        Xs = Xs.reshape(-1, 1) if model.dim == 1 else Xs.reshape(1, -1)
    if Xs.shape[1] != model.dim:
        raise DomainError(f"query has {Xs.shape[1]} columns, model expects {model.dim}")
    return Xs


def predict(model, Xstar) -> List[PointPrediction]:
    """Per-point predictive mean, variance of the mean, and intrinsic variance."""
    Xs = _as_query(model, Xstar)
    M, V, _, _ = model._state.mean_var(Xs)
    s2 = model.intrinsic_variance(Xs)
    return [PointPrediction(float(m), float(v), float(s)) for m, v, s in zip(M, V, s2)]


def predict_arrays(model, Xstar):
    """Vectorised :func:`predict`: returns ``(M, V, sigma2)`` arrays."""
    Xs = _as_query(model, Xstar)
    M, V, _, _ = model._state.mean_var(Xs)
    return M, V, model.intrinsic_variance(Xs)


def joint_predict(model, Xstar):
    """Joint predictive mean vector and covariance of the mean function.

    The covariance excludes intrinsic noise. Its diagonal is clipped at zero
    to agree with :func:`predict`.

    Raises
    ------
    NumericalError
        If the covariance has a materially negative eigenvalue.
    """
    Xs = _as_query(model, Xstar)
    M, C = model._state.joint(Xs)
    np.fill_diagonal(C, np.maximum(np.diag(C), 0.0))
    if C.shape[0] > 1:
        w = np.linalg.eigvalsh(C)
        tol = JITTER_MAX * max(float(np.max(np.diag(C))), 1e-300)
        if w[0] < -tol:
            raise NumericalError("predictive covariance is not positive semidefinite")
    return M, C


def sample_mean_function(model, Xstar, n_draws: int, rng: RngStream) -> np.ndarray:
    """Draws of the mean function at ``Xstar``; shape ``(n_draws, len(Xstar))``."""
    M, C = joint_predict(model, Xstar)
    w, Q = np.linalg.eigh(C)
    root = Q * np.sqrt(np.clip(w, 0.0, None))
    z = rng.normal(size=(n_draws, len(M)))
    return M + z @ root.T


def marginal_log_likelihood(X, y, covariance: CovarianceSpec, nugget: float,
                            mean: MeanSpec = MeanSpec("zero"), noise=None) -> float:
    """Gaussian log-density of ``y`` under ``GP(mean, covariance + nugget)``.

    ``noise`` optionally gives a per-run intrinsic variance instead of the
    constant nugget (runs at the same input must share a value).
    """
    rep = _Replicated(X, y)
    if noise is None:
        nz = np.full_like(rep.r, float(nugget))
    else:
        noise = np.asarray(noise, float).ravel()
        nz = np.bincount(rep.labels, weights=noise, minlength=len(rep.r)) / rep.r
    return _log_lik(rep, rep.ybar, rep.ss, covariance, mean.level, nz,
                    max(float(np.var(rep.y)), covariance.signal_variance))


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------


def _cov_dict(cov: CovarianceSpec):
    return {"family": cov.family, "lengthscales": list(cov.lengthscales),
            "signal_variance": cov.signal_variance}


def _mean_dict(mean: MeanSpec):
    return {"form": mean.form, "value": mean.value}


def model_to_dict(model) -> dict:
    """Flat, versioned description of a fitted model (factorisations omitted)."""
    out = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind,
        "input_dim": model.dim,
        "n_runs": int(model.y.size),
        "X": model.X.tolist(),
        "y": model.y.tolist(),
        "mean": _mean_dict(model.mean_spec),
        "covariance": _cov_dict(model.covariance),
    }
    if model.kind == "hom":
        out["nugget"] = model.nugget
    else:
        vg = model.variance_gp
        out["iterations"] = model.iterations
        out["converged"] = model.converged
        out["variance_process"] = {
            "X": vg.X.tolist(),
            "log_variance_targets": vg.y.tolist(),
            "nugget": vg.nugget,
            "known_noise": vg.known_noise.tolist(),
            "mean": _mean_dict(vg.mean_spec),
            "covariance": _cov_dict(vg.covariance),
        }
    return out


def model_from_dict(d: dict):
    if d.get("format") != MODEL_FORMAT:
        raise DomainError("not a stochdiag model file")
    if d.get("version") != MODEL_VERSION:
        raise DomainError(f"unsupported model version {d.get('version')!r}")
    X = np.asarray(d["X"], dtype=float)
    y = np.asarray(d["y"], dtype=float)
    mean = MeanSpec(**d["mean"])
    cov = CovarianceSpec(**d["covariance"])
    if d["kind"] == "hom":
        return FittedHomGP(X, y, cov, d["nugget"], mean)
    if d["kind"] == "het":
        vp = d["variance_process"]
        vg = FittedHomGP(vp["X"], vp["log_variance_targets"], CovarianceSpec(**vp["covariance"]),
                         vp["nugget"], MeanSpec(**vp["mean"]), known_noise=vp["known_noise"])
        return FittedHetGP(X, y, cov, mean, vg, d.get("iterations", 0), d.get("converged", True))
    raise DomainError(f"unknown model kind {d['kind']!r}")


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
