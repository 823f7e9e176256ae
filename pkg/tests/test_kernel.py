import numpy as np
import pytest

from cfgen.baselines import sample_gaussian_mixture
from cfgen.charfn import PointMassCF, standard_normal_spec
from cfgen.kernel import (
    DEFAULT_BANDWIDTHS,
    KernelSpec,
    closed_form_kernel,
    estimate_cp,
    gram_matrix,
    mmd2_u_cf,
    mmd2_u_twosample,
    random_feature_kernel,
    sample_frequencies,
)
from cfgen.numkit import RngStream


@pytest.mark.parametrize("bw, var", [(1.0, 2.0), (2.0, 1.0)])
def test_gaussian_frequency_variance(stream, bw, var):
    W = sample_frequencies(KernelSpec("gaussian", (bw,)), stream, 10**6, 1).W
    assert abs(W.var() - var) < 0.01 * var


def test_laplace_frequencies_are_cauchy(stream):
    W = sample_frequencies(KernelSpec("laplace", (1.0,)), stream, 10**6, 1).W
    assert abs(np.median(W)) < 0.01
    assert abs(np.quantile(np.abs(W), 0.5) - 1.0) < 0.01


def test_bandwidth_mixture_proportions(stream):
    spec = KernelSpec("gaussian", (1.0, 100.0), (0.25, 0.75))
    W = sample_frequencies(spec, stream, 200_000, 1).W
    # N(0,2) vs N(0,0.02): |W| > 0.5 is almost only from the wide component
    frac_wide = np.mean(np.abs(W) > 0.5) / (2 * (1 - 0.6381631950841185))
    assert abs(frac_wide - 0.25) < 0.01


def test_kernel_spec_validation():
    with pytest.raises(ValueError, match="bandwidths"):
        KernelSpec("gaussian", (1.0, -2.0))
    with pytest.raises(ValueError):
        KernelSpec("cosine")
    with pytest.raises(ValueError):
        KernelSpec("gaussian", (1.0, 2.0), (0.5, 0.6))
    assert KernelSpec().weights == (0.2,) * 5
    assert KernelSpec.from_dict(KernelSpec("laplace", (2.0,)).to_dict()).family == "laplace"


@pytest.mark.parametrize("family", ["gaussian", "laplace"])
def test_closed_form_at_zero_offset(family):
    x = np.array([0.3, -1.0, 2.0])
    assert closed_form_kernel(KernelSpec(family), x, x) == 1.0


def test_closed_form_values():
    assert closed_form_kernel(KernelSpec("gaussian", (1.0,)), [0.0], [1.0]) == pytest.approx(np.exp(-1))
    v = closed_form_kernel(KernelSpec("gaussian", (1.0, 4.0)), [0.0], [1.0])
    assert v == pytest.approx((np.exp(-1) + np.exp(-0.25)) / 2)
    # the quoted six-digit value 0.573334 is off in the last digit; the formula gives 0.5733401
    assert v == pytest.approx(0.573334, abs=1e-5)
    assert closed_form_kernel(KernelSpec("laplace", (2.0,)), [0.0, 0.0], [1.0, -1.0]) == pytest.approx(np.exp(-1))


@pytest.mark.parametrize("family", ["gaussian", "laplace"])
def test_random_features_match_closed_form(stream, family):
    spec = KernelSpec(family)
    m = 200_000
    freqs = sample_frequencies(spec, stream.split("W"), m, 2)
    for delta in stream.split("d").normal((10, 2)):
        approx = random_feature_kernel(freqs, delta, np.zeros(2))
        assert abs(approx - closed_form_kernel(spec, delta, np.zeros(2))) < 4.5 / np.sqrt(m)


def test_mmd_cf_statistical_zero(stream):
    phi = standard_normal_spec(2)
    n = m = 2048
    freqs = sample_frequencies(KernelSpec(), stream.split("W"), m, 2)
    Y = sample_gaussian_mixture(phi, stream.split("Y"), n)
    assert abs(mmd2_u_cf(Y, phi, freqs)) < 4 / np.sqrt(min(n, m)) * 0.25


def test_mmd_cf_constant_sample(stream):
    phi = standard_normal_spec(1)
    freqs = sample_frequencies(KernelSpec("gaussian", (1.0,)), stream, 500, 1)
    c = 4.0
    Y = np.full((30, 1), c)
    W = freqs.W[:, 0]
    phis = np.exp(-W**2 / 2)
    expected = 1.0 + np.mean(phis**2) - 2.0 * np.mean(np.cos(W * c) * phis)
    assert mmd2_u_cf(Y, phi, freqs) == pytest.approx(expected, rel=1e-12)


def test_cp_point_mass_is_one(stream):
    freqs = sample_frequencies(KernelSpec(), stream, 100, 3)
    assert estimate_cp(PointMassCF(np.zeros(3)), freqs) == 1.0


def test_cp_standard_normal_1d(stream):
    freqs = sample_frequencies(KernelSpec("gaussian", (1.0,)), stream, 10**7, 1)
    assert abs(estimate_cp(standard_normal_spec(1), freqs) - 5**-0.5) < 0.001


@pytest.mark.parametrize("d, sigma", [(2, 1.0), (3, 4.0)])
def test_cp_standard_normal_product(stream, d, sigma):
    m = 10**6
    freqs = sample_frequencies(KernelSpec("gaussian", (sigma,)), stream, m, d)
    assert abs(estimate_cp(standard_normal_spec(d), freqs) - (1 + 4 / sigma) ** (-d / 2)) < 4 / np.sqrt(m)


def _bruteforce_twosample(spec, X, Y):
    Kxx, Kyy, Kxy = gram_matrix(spec, X), gram_matrix(spec, Y), gram_matrix(spec, X, Y)
    n, m = len(X), len(Y)
    return (
        (Kxx.sum() - np.trace(Kxx)) / (n * (n - 1))
        + (Kyy.sum() - np.trace(Kyy)) / (m * (m - 1))
        - 2 * Kxy.mean()
    )


@pytest.mark.parametrize("family", ["gaussian", "laplace"])
def test_twosample_matches_bruteforce(stream, family):
    spec = KernelSpec(family)
    X, Y = stream.split("x").normal((4, 2)), stream.split("y").normal((6, 2)) + 0.5
    assert mmd2_u_twosample(X, Y, spec) == pytest.approx(_bruteforce_twosample(spec, X, Y), rel=1e-12)
    assert abs(mmd2_u_twosample(X, X, spec)) <= 2 / (len(X) - 1) + 1e-12


def test_twosample_point_masses():
    X, Y = np.zeros((8, 1)), np.ones((8, 1))
    assert mmd2_u_twosample(X, Y, KernelSpec("gaussian", (1.0,))) == pytest.approx(2 - 2 * np.exp(-1), rel=1e-14)


def test_twosample_symmetry_and_permutation(stream):
    spec = KernelSpec()
    X, Y = stream.split("x").normal((50, 3)), stream.split("y").normal((40, 3))
    v = mmd2_u_twosample(X, Y, spec)
    assert mmd2_u_twosample(Y, X, spec) == pytest.approx(v, rel=1e-12)
    perm = stream.split("p").permutation(50)
    assert mmd2_u_twosample(X[perm], Y, spec) == pytest.approx(v, rel=1e-12)


@pytest.mark.slow
def test_twosample_same_law_is_small(stream):
    n = 10**5
    X, Y = stream.split("x").normal((n, 1)), stream.split("y").normal((n, 1))
    assert abs(mmd2_u_twosample(X, Y, KernelSpec())) < 0.003


def test_default_bandwidths():
    assert DEFAULT_BANDWIDTHS == (0.02, 0.5, 1.0, 5.0, 100.0)
