import math

import numpy as np
import pytest
from scipy import optimize, stats

from stochdiag.data import ReplicatedDataset
from stochdiag.diagnostics import (
    DiagnosticConfig,
    DiagnosticReport,
    ToleranceSpec,
    credible_interval_coverage,
    kurtosis_reference,
    kurtosis_unexpectedness,
    mean_unexpectedness,
    pivoted_cholesky,
    pivoted_cholesky_errors,
    qq_points,
    run_all,
    skewness_reference,
    skewness_unexpectedness,
    standardized_errors,
    unexpectedness,
    variance_unexpectedness,
)
from stochdiag.distributions import sample_moments, sample_skewness
from stochdiag.emulator import CovarianceSpec, FittedHomGP, MeanSpec, PointPrediction
from stochdiag.exceptions import (
    DegenerateReplicatesError,
    DomainError,
    InsufficientReplicationError,
    UnattainableError,
)
from stochdiag.rng import RngStream

NONE = ToleranceSpec.none()


def test_unexpectedness_examples():
    assert unexpectedness(0.5) == 0.0
    assert unexpectedness(0.9995) == pytest.approx(-0.999, abs=1e-12)
    assert unexpectedness(0.0) == 1.0 and unexpectedness(1.0) == -1.0
    with pytest.raises(DomainError):
        unexpectedness(1.01)


# ---- mean ------------------------------------------------------------------------------


def test_mean_exact_cases():
    stats_ = sample_moments([1.0, 2.0, 3.0])
    res = mean_unexpectedness(PointPrediction(2.0, 0.0, 1.0), stats_)
    assert res.U == 0.0 and res.mc_draws_used == 0
    # r = 2, ybar - M = S / sqrt(2): t = 1 on one degree of freedom
    y = np.array([0.0, 1.0])
    s = sample_moments(y)
    res = mean_unexpectedness(PointPrediction(s.mean - s.sd / math.sqrt(2), 0.0, 1.0), s)
    assert res.P == pytest.approx(0.75, abs=1e-12) and res.U == pytest.approx(-0.5, abs=1e-12)


def test_mean_errors():
    with pytest.raises(DegenerateReplicatesError):
        mean_unexpectedness(PointPrediction(0, 0, 1), sample_moments([1.0, 1.0]))
    with pytest.raises(InsufficientReplicationError):
        mean_unexpectedness(PointPrediction(0, 0, 1), sample_moments([1.0, 2.0]).__class__(
            n=1, mean=1.0, sd=1.0, variance=1.0))


def test_mean_threshold_correspondence_normal_limit():
    # with many replicates the t reference tends to the normal one
    s = sample_moments(np.random.default_rng(0).standard_normal(4000))
    for z, target in ((2.0, 0.95450), (2.8, 0.99489), (3.29, 0.99900)):
        M = s.mean - z * s.sd / math.sqrt(s.n)
        assert abs(mean_unexpectedness(PointPrediction(M, 0.0, 1.0), s).U) == pytest.approx(target, abs=2e-4)


# ---- variance ---------------------------------------------------------------------------


def test_variance_exact_cases():
    s = sample_moments([0.0, math.sqrt(2.0)])
    res = variance_unexpectedness(PointPrediction(0, 0, 1.0), s, NONE)
    assert res.P == pytest.approx(0.682689, abs=1e-6) and res.U == pytest.approx(-0.365379, abs=1e-6)
    s = sample_moments([0.0, 1e-6, 2e-6])
    assert variance_unexpectedness(PointPrediction(0, 0, 1.0), s, NONE).U > 0.999999
    with pytest.raises(DomainError):
        variance_unexpectedness(PointPrediction(0, 0, 0.0), s, NONE)


def test_variance_tolerance_shrinks_extremity():
    gen = np.random.default_rng(1)
    for i in range(100):
        r = int(gen.integers(2, 300))
        sig2 = gen.uniform(0.1, 10)
        # sample whose variance equals the emulator's exactly
        z = gen.standard_normal(r)
        y = (z - z.mean()) / z.std(ddof=1) * math.sqrt(sig2)
        s = sample_moments(y)
        raw = variance_unexpectedness(PointPrediction(0, 0, sig2), s, NONE)
        # 1e6 draws keep MC error (~7e-4 in U) well inside the 0.02 margin;
        # the exact worst case over r is 0.0176, near r = 16
        tol = variance_unexpectedness(PointPrediction(0, 0, sig2), s, ToleranceSpec(), 1_000_000, RngStream(i))
        assert abs(tol.U) <= abs(raw.U) + 0.02


def test_variance_tolerance_matches_quadrature():
    from scipy import integrate

    for r, ratio in ((2, 1.0), (5, 0.3), (16, 1.0), (40, 2.5)):
        k = r - 1
        s = sample_moments(np.array([0.0, 1.0] + [0.5] * (r - 2)))
        sig2 = s.variance / ratio
        exact = integrate.quad(lambda u: stats.chi2(k).cdf(k * ratio / u**2) / 0.4, 0.8, 1.2)[0]
        res = variance_unexpectedness(PointPrediction(0, 0, sig2), s, ToleranceSpec(), 1_000_000, RngStream(r))
        assert res.P == pytest.approx(exact, abs=3e-3)


def test_tolerance_widening_lowers_flag_rate_under_correct_emulator():
    gen = np.random.default_rng(2)
    raw = tol = 0
    for i in range(400):
        s = sample_moments(gen.standard_normal(10))
        raw += variance_unexpectedness(PointPrediction(0, 0, 1), s, NONE).flag095
        tol += variance_unexpectedness(PointPrediction(0, 0, 1), s, ToleranceSpec(), 2000, RngStream(i)).flag095
    assert tol <= raw


# ---- skewness / kurtosis ----------------------------------------------------------------


def family(t):
    return np.array([0.0, 0.3, 0.5, 1.0, t])


def test_skewness_at_reference_median_is_central():
    pred = PointPrediction(0.5, 0.01, 0.2)
    ref = skewness_reference(pred, 5, ToleranceSpec(), 10_000, RngStream(3))
    t = optimize.brentq(lambda t: sample_skewness(family(t)) - np.median(ref), 1.0, 100.0)
    res = skewness_unexpectedness(pred, family(t), ToleranceSpec(), 10_000, RngStream(3))
    assert abs(res.U) < 2e-3


def test_kurtosis_at_reference_median_is_central():
    pred = PointPrediction(0.5, 0.01, 0.2)
    ref = kurtosis_reference(pred, 5, ToleranceSpec(), 10_000, RngStream(4))
    y = lambda t: np.array([-t, -0.5, 0.0, 0.5, t])
    from stochdiag.distributions import sample_excess_kurtosis

    t = optimize.brentq(lambda t: sample_excess_kurtosis(y(t)) - np.median(ref), 0.51, 100.0)
    res = kurtosis_unexpectedness(pred, y(t), ToleranceSpec(), 10_000, RngStream(4))
    assert abs(res.U) < 2e-3


def test_skewness_monotone_in_observation():
    pred = PointPrediction(0.5, 0.01, 0.2)
    us = [skewness_unexpectedness(pred, family(t), NONE, 5000, RngStream(5)).U for t in (1.1, 1.5, 2, 3, 5, 10)]
    assert all(a >= b for a, b in zip(us, us[1:]))


def test_sign_convention_extremes():
    pred = PointPrediction(0.0, 0.0, 1.0)
    big = np.array([0.0, 0.1, -0.1, 0.05, 30.0])
    assert mean_unexpectedness(pred, sample_moments(big + 100)).U < -0.99
    assert mean_unexpectedness(pred, sample_moments(big - 100)).U > 0.99
    assert variance_unexpectedness(pred, sample_moments(big), NONE).U < -0.99
    assert skewness_unexpectedness(pred, big, NONE, 5000, RngStream(0)).U < -0.99
    assert skewness_unexpectedness(pred, -big, NONE, 5000, RngStream(0)).U > 0.99
    assert kurtosis_unexpectedness(pred, big, NONE, 5000, RngStream(0)).U < -0.99


def test_location_scale_invariance():
    gen = np.random.default_rng(6)
    y = gen.standard_normal(6)
    pred = PointPrediction(0.2, 0.05, 1.0)
    for c in (5.0, -300.0):
        shifted = PointPrediction(0.2 + c, 0.05, 1.0)
        for fn in (skewness_unexpectedness, kurtosis_unexpectedness):
            a = fn(pred, y, ToleranceSpec(), 5000, RngStream(7)).U
            b = fn(shifted, y + c, ToleranceSpec(), 5000, RngStream(7)).U
            assert a == pytest.approx(b, abs=2e-3)
        a = mean_unexpectedness(pred, sample_moments(y), 5000, RngStream(7)).U
        b = mean_unexpectedness(shifted, sample_moments(y + c), 5000, RngStream(7)).U
        assert a == pytest.approx(b, abs=1e-9)
        a = variance_unexpectedness(pred, sample_moments(y), ToleranceSpec(), 5000, RngStream(7)).U
        b = variance_unexpectedness(shifted, sample_moments(y + c), ToleranceSpec(), 5000, RngStream(7)).U
        assert a == pytest.approx(b, abs=1e-9)


def test_replication_requirements_and_tolerance_limits():
    pred = PointPrediction(0, 0, 1)
    with pytest.raises(InsufficientReplicationError):
        skewness_unexpectedness(pred, [1.0, 2.0])
    with pytest.raises(InsufficientReplicationError):
        kurtosis_unexpectedness(pred, [1.0, 2.0, 3.0])
    assert skewness_unexpectedness(pred, [1.0, 1.0, 1.0]).status == "degenerate"
    with pytest.raises(UnattainableError):
        ToleranceSpec(skew=0.996)
    with pytest.raises(DomainError):
        ToleranceSpec(sd=(1.2, 0.8))


# ---- run-level diagnostics ----------------------------------------------------------------


def test_standardized_errors():
    preds = [PointPrediction(1.0, 0.5, 0.5), PointPrediction(-1.0, 3.0, 1.0)]
    assert standardized_errors(preds, [1.0, -1.0 + 2 * 2.0]).tolist() == [0.0, 2.0]
    gen = np.random.default_rng(8)
    M, V, S = gen.normal(size=500), gen.uniform(0, 1, 500), gen.uniform(0.1, 1, 500)
    y = M + np.sqrt(V + S) * gen.standard_normal(500)
    e = standardized_errors([PointPrediction(*t) for t in zip(M, V, S)], y)
    assert stats.kstest(e, "norm").pvalue > 0.01


def test_pivoted_cholesky_reconstruction_and_ties():
    gen = np.random.default_rng(9)
    B = gen.normal(size=(6, 6))
    A = B @ B.T + 0.1 * np.eye(6)
    G, piv = pivoted_cholesky(A)
    assert np.allclose(G @ G.T, A[np.ix_(piv, piv)], atol=1e-12)
    assert np.allclose(G, np.tril(G))
    assert piv[0] == int(np.argmax(np.diag(A)))
    _, piv = pivoted_cholesky(np.eye(4))
    assert piv.tolist() == [0, 1, 2, 3]


def test_pivoted_errors_structure():
    e, piv = pivoted_cholesky_errors([1.0], [[4.0]], [3.0])
    assert e.tolist() == [1.0] and piv.tolist() == [0]
    var = np.array([1.0, 9.0, 4.0, 0.25])
    y = np.array([1.0, -3.0, 4.0, 0.5])
    e, piv = pivoted_cholesky_errors(np.zeros(4), np.diag(var), y)
    assert piv.tolist() == [1, 2, 0, 3]
    assert np.allclose(e, (y / np.sqrt(var))[piv])


def test_pivoted_errors_whiten():
    gen = np.random.default_rng(10)
    B = gen.normal(size=(5, 5))
    C = B @ B.T + np.eye(5)
    L = np.linalg.cholesky(C)
    errs = np.array([pivoted_cholesky_errors(np.zeros(5), C, L @ gen.standard_normal(5))[0] for _ in range(200)])
    assert np.max(np.abs(np.cov(errs.T) - np.eye(5))) < 0.25
    # many repetitions tighten the identity check
    errs = np.array([pivoted_cholesky_errors(np.zeros(5), C, L @ gen.standard_normal(5))[0] for _ in range(20000)])
    assert np.max(np.abs(np.cov(errs.T) - np.eye(5))) < 0.1


def test_qq_points():
    theo, samp = qq_points([3.0])
    assert theo.tolist() == [0.0] and samp.tolist() == [3.0]
    theo, samp = qq_points([2.0] * 5)
    assert np.all(samp == 2.0) and np.all(np.diff(theo) > 0)
    devs = []
    for n in (100, 10_000, 1_000_000):
        t, s = qq_points(np.random.default_rng(11).standard_normal(n))
        inner = slice(n // 100, n - n // 100)
        devs.append(np.max(np.abs(t[inner] - s[inner])))
    assert devs == sorted(devs, reverse=True) and devs[-1] < 0.02


def test_coverage():
    preds = [PointPrediction(0.0, 0.2, 0.8)] * 1000
    y = np.random.default_rng(12).standard_normal(1000)
    cov = credible_interval_coverage(preds, y, [0.0, 0.5, 0.95])
    assert cov[0] == 0.0 and abs(cov[2] - 0.95) <= 0.02
    assert credible_interval_coverage(preds, np.zeros(1000), [0.1, 0.5, 0.9]).tolist() == [1.0, 1.0, 1.0]


# ---- run_all ------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def small_model():
    X = np.repeat(np.linspace(0, 1, 6), 3)[:, None]
    y = np.sin(6 * X[:, 0]) + 0.2 * np.random.default_rng(0).standard_normal(18)
    return FittedHomGP(X, y, CovarianceSpec([0.2], 1.0), 0.04, MeanSpec("constant", float(y.mean())))


def _validation(r, seed=0):
    gen = np.random.default_rng(seed)
    X = gen.random((5, 1))
    return ReplicatedDataset(X, [np.sin(6 * x) + 0.2 * gen.standard_normal(r) for x in X[:, 0]])


CFG = DiagnosticConfig(n_mc_mean=2000, n_mc_variance=2000, n_reference=2000)


def test_run_all_two_replicates(small_model):
    rep = run_all(small_model, _validation(2), config=CFG, rng=RngStream(1))
    assert set(rep.results) == {"mean", "variance"}


def test_run_all_counts_and_determinism(small_model):
    val = _validation(6)
    a = run_all(small_model, val, config=CFG, rng=RngStream(1))
    b = run_all(small_model, val, config=CFG, rng=RngStream(1))
    assert a.to_dict() == b.to_dict()
    assert set(a.results) == {"mean", "variance", "skewness", "kurtosis"}
    for kind, s in a.summary.items():
        u = a.u_values(kind)[1]
        assert s["n_abs_gt_095"] == int(np.sum(np.abs(u) > 0.95))
        assert s["n_abs_gt_0995"] == int(np.sum(np.abs(u) > 0.995))
        assert s["n_negative"] == int(np.sum(u < 0))
        for r in a.results[kind]:
            assert r.flag095 == (abs(r.U) > 0.95) and -1 < r.U < 1
    back = DiagnosticReport.from_dict(a.to_dict())
    assert back.to_dict() == a.to_dict()
    assert len(a.deterministic["standardized_errors"]) == 30


def test_run_all_degenerate_location(small_model):
    val = _validation(4)
    outs = list(val.outputs)
    outs[2] = np.full(4, 0.3)
    rep = run_all(small_model, ReplicatedDataset(val.X, outs), config=CFG, rng=RngStream(1))
    for kind in ("mean", "skewness", "kurtosis"):
        st = {r.location: r.status for r in rep.results[kind]}
        assert st[2] == "degenerate" and rep.summary[kind]["n_degenerate"] == 1
