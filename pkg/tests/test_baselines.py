import numpy as np
import pytest
from scipy import stats

from cfgen.baselines import (
    UnivStableParams,
    project_stable_params,
    sample_gaussian_mixture,
    sample_stable_discrete_spectral,
    sample_stable_univ,
)
from cfgen.charfn import EmpiricalCF, GaussianMixtureSpec, StableSpec, standard_normal_spec
from cfgen.numkit import RngStream


def test_standard_normal_moments(stream):
    X = sample_gaussian_mixture(standard_normal_spec(3), stream, 10**6)
    assert np.all(np.abs(X.mean(0)) < 0.01)
    assert np.all(np.abs(X.var(0) - 1) < 0.01)


def test_mixture_mode_split(stream):
    spec = GaussianMixtureSpec(np.array([[3.0, 3.0], [-3.0, -3.0]]), np.array([np.eye(2)] * 2))
    n = 100_000
    X = sample_gaussian_mixture(spec, stream, n)
    frac = np.mean(X.sum(1) > 0)
    assert abs(frac - 0.5) < 3 * np.sqrt(0.25 / n)


def test_mixture_empirical_cf(stream):
    spec = GaussianMixtureSpec(np.array([[1.0, 0.0], [-2.0, 1.0]]),
                               np.array([[[1.0, 0.3], [0.3, 0.5]], [[0.2, 0.0], [0.0, 2.0]]]))
    n = 400_000
    X = sample_gaussian_mixture(spec, stream.split("x"), n)
    Z = stream.split("z").normal((20, 2))
    assert np.max(np.abs(EmpiricalCF(X).eval_batch(Z) - spec.eval_batch(Z))) < 4 / np.sqrt(n)


def test_alpha_two_is_gaussian(stream):
    x = sample_stable_univ(UnivStableParams(2.0, 0.0), stream, 10**6)
    assert abs(x.var() - 2.0) < 0.02


def test_alpha_one_symmetric_is_cauchy(stream):
    x = sample_stable_univ(UnivStableParams(1.0, 0.0), stream, 10**6)
    assert abs(np.quantile(x, 0.75) - 1.0) < 0.01


def test_levy_cdf(stream):
    # S(1/2, 1, sigma=1, 0) is Levy with scale 1: CDF erfc(sqrt(1/(2x)))
    x = sample_stable_univ(UnivStableParams(0.5, 1.0), stream, 10**6)
    assert x.min() > 0
    assert stats.kstest(x, stats.levy(scale=1.0).cdf).statistic < 0.005


@pytest.mark.parametrize("alpha, beta", [(0.5, 0.3), (1.0, 0.7), (1.0, -1.0), (1.5, -0.4), (1.9, 1.0), (0.8, -1.0)])
def test_univariate_empirical_cf(stream, alpha, beta):
    p = UnivStableParams(alpha, beta, 1.3, -0.4)
    n = 400_000
    x = sample_stable_univ(p, stream.split("x"), n)
    z = np.linspace(-3, 3, 30)
    emp = np.exp(1j * np.outer(z, x)).mean(1)
    assert np.max(np.abs(emp - p.cf(z))) < 4.5 / np.sqrt(n)


def test_alpha_near_one_continuity(stream):
    # the alpha = 1 branch is taken within 1e-9; just outside it the law must be close
    a = sample_stable_univ(UnivStableParams(1.0, 0.0), stream, 10_000)
    b = sample_stable_univ(UnivStableParams(1.0 + 1e-6, 0.0), stream, 10_000)
    assert np.max(np.abs(np.arctan(a) - np.arctan(b))) < 1e-4


def test_parameter_validation():
    with pytest.raises(ValueError):
        UnivStableParams(2.5)
    with pytest.raises(ValueError):
        UnivStableParams(1.0, 1.5)
    with pytest.raises(ValueError):
        UnivStableParams(1.0, 0.0, 0.0)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.6])
def test_single_atom_reduction(stream, alpha):
    spec = StableSpec(alpha, [0.0, 0.0], [[1.0, 0.0]])
    n = 200_000
    X = sample_stable_discrete_spectral(spec, stream.split("x"), n)
    np.testing.assert_array_equal(X[:, 1], 0.0)
    ref = sample_stable_univ(UnivStableParams(alpha, 1.0), stream.split("ref"), n)
    assert stats.ks_2samp(X[:, 0], ref).statistic < 1.36 * np.sqrt(2 / n) * 1.5


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.4])
def test_discrete_spectral_empirical_cf(stream, alpha):
    spec = StableSpec.from_gaussian_source(alpha, [1.0, -0.5], [0.5, 0.0], np.eye(2), 16, stream.split("atoms"))
    spec.weights = stream.split("w").uniform(16) + 0.1
    spec.weights /= spec.weights.sum()
    n = 300_000
    X = sample_stable_discrete_spectral(spec, stream.split("x"), n)
    Z = stream.split("z").normal((30, 2))
    assert np.max(np.abs(EmpiricalCF(X).eval_batch(Z) - spec.eval_batch(Z))) < 5 / np.sqrt(n)


def test_projection_single_atom():
    p = project_stable_params(StableSpec(0.7, [0.0, 0.0], [[0.6, 0.8]]), [0.6, 0.8])
    assert p.scale**0.7 == pytest.approx(1.0)
    assert p.beta == pytest.approx(1.0)
    assert p.shift == 0.0


def test_projection_symmetric_pair():
    u0 = np.array([0.6, 0.8])
    p = project_stable_params(StableSpec(1.3, [0.0, 0.0], [u0, -u0]), u0)
    assert p.beta == pytest.approx(0.0, abs=1e-15)


def test_projection_location_of_reference_setup():
    spec = StableSpec.from_gaussian_source(0.5, [1.0, 1.0], [0, 0], np.eye(2), 6000, RngStream(0).split("atoms"))
    assert project_stable_params(spec, [1.0, 1.0]).shift == pytest.approx(2.0)


def test_projection_rejects_zero():
    with pytest.raises(ValueError):
        project_stable_params(StableSpec(0.5, [0.0], [[1.0]]), [0.0])


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.7])
def test_projection_consistency(stream, alpha):
    spec = StableSpec.from_gaussian_source(alpha, [0.5, 1.0], [1.0, 0.0], np.eye(2), 40, stream.split("atoms"))
    u = np.array([1.0, -2.0])
    n = 10**6
    proj = sample_stable_discrete_spectral(spec, stream.split("x"), n) @ u
    ref = sample_stable_univ(project_stable_params(spec, u), stream.split("ref"), n)
    assert stats.ks_2samp(proj, ref).statistic < 1.63 * np.sqrt(2 / n)
