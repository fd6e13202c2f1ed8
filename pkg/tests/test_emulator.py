import math
import warnings

import numpy as np
import pytest
from scipy import stats

from stochdiag.emulator import (
    CovarianceSpec,
    FitConfig,
    FittedHomGP,
    HetConfig,
    MeanSpec,
    fit_hetgp,
    fit_homgp,
    joint_predict,
    load_model,
    marginal_log_likelihood,
    model_from_dict,
    model_to_dict,
    predict,
    predict_arrays,
    sample_mean_function,
    save_model,
)
from stochdiag.exceptions import DomainError
from stochdiag.rng import RngStream
from stochdiag.simulators import ToySimulator, trend


def dense_oracle_loglik(X, y, ls, s2, noise, mean=0.0):
    """Run-level GP log-density from the full n x n matrix."""
    X = np.atleast_2d(X)
    d = (X[:, None, :] - X[None, :, :]) / np.asarray(ls)
    K = s2 * np.exp(-0.5 * np.sum(d**2, axis=2)) + np.diag(np.broadcast_to(noise, (len(y),)))
    return stats.multivariate_normal(np.full(len(y), mean), K).logpdf(y)


def dense_oracle_predict(X, y, ls, s2, noise, Xs, mean=0.0):
    """Textbook GP conditioning on all runs, with explicit inverse."""
    k = lambda A, B: s2 * np.exp(-0.5 * np.sum(((A[:, None, :] - B[None, :, :]) / np.asarray(ls)) ** 2, axis=2))
    Kinv = np.linalg.inv(k(X, X) + np.diag(np.broadcast_to(noise, (len(y),))))
    Ks = k(Xs, X)
    return mean + Ks @ Kinv @ (y - mean), k(Xs, Xs) - Ks @ Kinv @ Ks.T


@pytest.fixture(scope="module")
def replicated_data():
    gen = np.random.default_rng(3)
    U = gen.random((8, 2))
    r = gen.integers(1, 5, size=8)
    X = np.repeat(U, r, axis=0)
    y = np.sin(4 * X[:, 0]) + X[:, 1] + 0.3 * gen.standard_normal(len(X))
    return X, y


# ---- likelihood -----------------------------------------------------------------


def test_loglik_single_point_closed_form():
    cov = CovarianceSpec([0.3], 2.0)
    got = marginal_log_likelihood([[0.4]], [1.7], cov, 0.5)
    v = 2.5
    assert got == pytest.approx(-0.5 * (1.7**2 / v + math.log(v) + math.log(2 * math.pi)), abs=1e-12)


def test_loglik_matches_dense_oracle(replicated_data):
    X, y = replicated_data
    for ls, s2, nug in [((0.2, 0.5), 1.3, 0.09), ((1.0, 0.1), 0.4, 0.5), ((0.05, 3.0), 2.0, 1e-3)]:
        got = marginal_log_likelihood(X, y, CovarianceSpec(ls, s2), nug)
        assert got == pytest.approx(dense_oracle_loglik(X, y, ls, s2, nug), abs=1e-8)
        got = marginal_log_likelihood(X, y, CovarianceSpec(ls, s2), nug, MeanSpec("constant", 0.7))
        assert got == pytest.approx(dense_oracle_loglik(X, y, ls, s2, nug, 0.7), abs=1e-8)


def test_loglik_heteroscedastic_noise_matches_dense_oracle(replicated_data):
    X, y = replicated_data
    noise = 0.05 + X[:, 0] ** 2
    got = marginal_log_likelihood(X, y, CovarianceSpec((0.3, 0.3), 1.0), 0.0, noise=noise)
    assert got == pytest.approx(dense_oracle_loglik(X, y, (0.3, 0.3), 1.0, noise), abs=1e-8)


def test_loglik_permutation_invariant(replicated_data):
    X, y = replicated_data
    cov = CovarianceSpec((0.25, 0.6), 1.1)
    p = np.random.default_rng(0).permutation(len(y))
    assert marginal_log_likelihood(X[p], y[p], cov, 0.1) == pytest.approx(
        marginal_log_likelihood(X, y, cov, 0.1), abs=1e-10)


# ---- prediction ---------------------------------------------------------------------


def test_one_point_closed_form():
    cov = CovarianceSpec([0.2], 1.5)
    model = FittedHomGP([[0.3]], [2.0], cov, 0.25, MeanSpec("zero"))
    xs = np.array([[0.1], [0.3], [0.45]])
    k = 1.5 * np.exp(-0.5 * ((xs[:, 0] - 0.3) / 0.2) ** 2)
    M, V, s2 = predict_arrays(model, xs)
    assert np.allclose(M, k * 2.0 / 1.75, atol=1e-12)
    assert np.allclose(V, 1.5 - k**2 / 1.75, atol=1e-12)
    assert np.all(s2 == 0.25)


def test_replicate_folding_matches_dense_prediction(replicated_data):
    X, y = replicated_data
    ls, s2, nug = (0.3, 0.7), 1.2, 0.15
    model = FittedHomGP(X, y, CovarianceSpec(ls, s2), nug, MeanSpec("constant", 0.2))
    Xs = np.random.default_rng(9).random((6, 2))
    M_o, C_o = dense_oracle_predict(X, y, ls, s2, nug, Xs, 0.2)
    M, C = joint_predict(model, Xs)
    assert np.allclose(M, M_o, atol=1e-9) and np.allclose(C, C_o, atol=1e-9)


def test_interpolation_at_nugget_floor():
    X = np.linspace(0, 1, 10)[:, None]
    y = trend(X[:, 0])
    cfg = FitConfig(lengthscales=[0.1], signal_variance=4.0, nugget=1e-8 * np.var(y), mean="zero")
    model = fit_homgp(X, y, cfg, RngStream(0))
    M, V, _ = predict_arrays(model, X)
    assert np.max(np.abs(M - y)) < 1e-6 and np.max(V) < 1e-6


def test_prior_reversion():
    X = np.linspace(0, 1, 10)[:, None]
    y = trend(X[:, 0])
    model = FittedHomGP(X, y, CovarianceSpec([0.1], 3.0), 0.01, MeanSpec("constant", 2.5))
    (p,) = predict(model, [[50.0]])
    assert abs(p.mean - 2.5) < 1e-3 and abs(p.mean_variance - 3.0) < 1e-3


def test_variance_bounded_by_prior_and_diagonals_agree(replicated_data):
    X, y = replicated_data
    model = FittedHomGP(X, y, CovarianceSpec((0.3, 0.3), 0.8), 0.05)
    Xs = np.random.default_rng(4).random((40, 2))
    M, V, _ = predict_arrays(model, Xs)
    assert np.all(V <= 0.8 + 1e-8)
    Mj, C = joint_predict(model, Xs)
    assert np.max(np.abs(np.diag(C) - V)) < 1e-10 and np.max(np.abs(M - Mj)) < 1e-12


def test_joint_predict_structure(replicated_data):
    X, y = replicated_data
    model = FittedHomGP(X, y, CovarianceSpec((0.3, 0.3), 0.8), 0.05)
    (p,) = predict(model, [[0.5, 0.5]])
    _, C1 = joint_predict(model, [[0.5, 0.5]])
    assert C1.shape == (1, 1) and C1[0, 0] == pytest.approx(p.mean_variance, abs=1e-12)
    _, C2 = joint_predict(model, [[0.5, 0.5], [0.5, 0.5]])
    assert C2[0, 1] / math.sqrt(C2[0, 0] * C2[1, 1]) == pytest.approx(1.0, abs=1e-8)
    gen = np.random.default_rng(1)
    for _ in range(20):
        _, C = joint_predict(model, gen.random((20, 2)))
        assert np.allclose(C, C.T) and np.linalg.eigvalsh(C)[0] >= -1e-8


def test_duplicate_never_increases_variance():
    gen = np.random.default_rng(7)
    for _ in range(25):
        X = gen.random((6, 1))
        y = gen.normal(size=6)
        cov = CovarianceSpec([gen.uniform(0.05, 0.5)], gen.uniform(0.5, 2))
        nug = gen.uniform(1e-3, 0.5)
        base = FittedHomGP(X, y, cov, nug)
        i = gen.integers(6)
        more = FittedHomGP(np.vstack([X, X[i]]), np.append(y, y[i]), cov, nug)
        Xs = gen.random((30, 1))
        assert np.all(predict_arrays(more, Xs)[1] <= predict_arrays(base, Xs)[1] + 1e-8)


def test_dimension_mismatch(replicated_data):
    X, y = replicated_data
    model = FittedHomGP(X, y, CovarianceSpec((0.3, 0.3), 0.8), 0.05)
    with pytest.raises(DomainError):
        predict(model, np.zeros((2, 3)))


# ---- sampling ------------------------------------------------------------------------


def test_sample_mean_function(replicated_data):
    X, y = replicated_data
    model = FittedHomGP(X, y, CovarianceSpec((0.3, 0.3), 0.8), 0.05)
    draws = sample_mean_function(model, [[0.4, 0.9]], 100_000, RngStream(2))
    (p,) = predict(model, [[0.4, 0.9]])
    assert draws.var() == pytest.approx(p.mean_variance, rel=0.05)
    again = sample_mean_function(model, [[0.4, 0.9]], 100_000, RngStream(2))
    assert np.array_equal(draws, again)
    Xs = np.random.default_rng(0).random((4, 2))
    d = sample_mean_function(model, Xs, 200_000, RngStream(3))
    M, C = joint_predict(model, Xs)
    assert np.allclose(d.mean(axis=0), M, atol=0.01)
    assert np.allclose(np.cov(d.T), C, atol=0.01)


def test_sample_mean_function_zero_variance_limit():
    X = np.linspace(0, 1, 30)[:, None]
    y = trend(X[:, 0])
    model = FittedHomGP(X, y, CovarianceSpec([0.1], 4.0), 1e-10)
    draws = sample_mean_function(model, X[[3, 17]], 1000, RngStream(0))
    M, _, _ = predict_arrays(model, X[[3, 17]])
    assert np.max(np.abs(draws - M)) < 1e-3


# ---- fitting ---------------------------------------------------------------------------


def test_homgp_nugget_recovery():
    hits = 0
    for seed in range(10):
        gen = np.random.default_rng(seed)
        X = gen.random((400, 1))
        y = trend(X[:, 0]) + 0.5 * gen.standard_normal(400)
        model = fit_homgp(X, y, FitConfig(n_starts=3), RngStream(seed))
        hits += 0.15 <= model.nugget <= 0.4
    assert hits >= 8


def test_homgp_deterministic_and_degenerate_warning():
    X = np.repeat(np.linspace(0, 1, 6), 3)[:, None]
    y = trend(X[:, 0]) + 0.1 * np.random.default_rng(0).standard_normal(18)
    a = fit_homgp(X, y, FitConfig(n_starts=3), RngStream(5))
    b = fit_homgp(X, y, FitConfig(n_starts=3), RngStream(5))
    assert a.covariance == b.covariance and a.nugget == b.nugget
    with pytest.warns(UserWarning):
        fit_homgp(X, trend(X[:, 0]), FitConfig(n_starts=2), RngStream(0))


def test_fit_rejects_bad_input():
    with pytest.raises(DomainError):
        fit_homgp([[0.1]], [1.0])
    with pytest.raises(DomainError):
        fit_homgp([[0.1], [0.2]], [1.0, np.nan])


def _toy_het_fit(seed, noise_sd=None):
    gen = np.random.default_rng(seed)
    U = np.sort(gen.random(20))
    X = np.repeat(U, 20)[:, None]
    sd = (0.1 + 0.9 * X[:, 0]) if noise_sd is None else noise_sd
    y = trend(X[:, 0]) + sd * gen.standard_normal(len(X))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fit_hetgp(X, y, HetConfig(mean_fit=FitConfig(n_starts=3), variance_fit=FitConfig(n_starts=3)),
                         RngStream(seed))


def test_hetgp_recovers_increasing_noise():
    hits = 0
    for seed in range(10):
        _, _, s2 = predict_arrays(_toy_het_fit(seed), [[0.1], [0.9]])
        hits += s2[1] > s2[0]
    assert hits >= 9


def test_hetgp_flat_on_homoscedastic_data():
    grid = np.linspace(0, 1, 101)[:, None]
    hits = 0
    for seed in range(10):
        s2 = predict_arrays(_toy_het_fit(seed, noise_sd=0.5), grid)[2]
        assert np.all(s2 > 0)
        hits += s2.max() / s2.min() < 3
    assert hits >= 8


def test_hetgp_deterministic():
    a, b = _toy_het_fit(1), _toy_het_fit(1)
    grid = np.linspace(0, 1, 7)[:, None]
    for u, v in zip(predict_arrays(a, grid), predict_arrays(b, grid)):
        assert np.array_equal(u, v)


# ---- serialisation -------------------------------------------------------------------------


def test_round_trip(tmp_path, replicated_data):
    X, y = replicated_data
    grid = np.random.default_rng(0).random((5, 2))
    hom = FittedHomGP(X, y, CovarianceSpec((0.3, 0.4), 0.9), 0.07, MeanSpec("constant", 0.3))
    save_model(hom, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json")
    for u, v in zip(predict_arrays(hom, grid), predict_arrays(back, grid)):
        assert np.array_equal(u, v)
    het = _toy_het_fit(2)
    back = model_from_dict(model_to_dict(het))
    g1 = np.linspace(0, 1, 9)[:, None]
    for u, v in zip(predict_arrays(het, g1), predict_arrays(back, g1)):
        assert np.array_equal(u, v)
    with pytest.raises(DomainError):
        model_from_dict({"format": "other"})
    with pytest.raises(DomainError):
        model_from_dict(dict(model_to_dict(hom), version=99))
