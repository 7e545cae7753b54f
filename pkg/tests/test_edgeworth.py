import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize

from finitewidth.edgeworth import (
    FitError, fit_alpha, fit_power_law, model_cdf_diff, perturbed_pdf, repeated_eigenvalue,
)
from finitewidth.special import gaussian_cdf, gaussian_pdf, std_pdf

Z = np.linspace(-5, 5, 401)


def test_perturbed_pdf_unperturbed_limit():
    y = np.linspace(-1, 1, 21)
    np.testing.assert_array_equal(perturbed_pdf(y, 0.3, 0.0, 128), gaussian_pdf(y, 0.3))


def test_perturbed_pdf_at_origin():
    expected = (1 / math.sqrt(2 * math.pi)) * (1 - 3 * 9.405 / 128)
    assert perturbed_pdf(0.0, 1.0, 9.405, 128) == pytest.approx(expected, rel=1e-15)
    assert perturbed_pdf(0.0, 1.0, 9.405, 128) == pytest.approx(0.3110036, abs=1e-7)


@pytest.mark.parametrize("c4, sigma", [(9.405, 1.0), (-0.145, 0.124), (3.0, 2.0)])
def test_perturbed_pdf_mass_and_variance(c4, sigma):
    n = 16
    mass = integrate.quad(lambda y: perturbed_pdf(y, sigma, c4, n), -np.inf, np.inf, epsabs=1e-13)[0]
    var = integrate.quad(lambda y: y * y * perturbed_pdf(y, sigma, c4, n), -np.inf, np.inf, epsabs=1e-13)[0]
    assert mass == pytest.approx(1.0, abs=1e-8)
    assert var == pytest.approx(sigma**2, rel=1e-8)


@pytest.mark.parametrize("c4", [9.405, -0.145])
def test_cdf_of_perturbed_pdf_is_third_hermite(c4):
    # integrating the He_4 correction gives (c4 / N) phi(z) He_3(z)
    n = 128
    for z in (-2.5, -0.7, 0.3, 1.9):
        cdf = integrate.quad(lambda y: perturbed_pdf(y, 1.0, c4, n), -np.inf, z, epsabs=1e-14)[0]
        assert cdf - gaussian_cdf(z, 1.0) == pytest.approx(model_cdf_diff(z, c4 / n), abs=1e-12)


def test_model_cdf_diff_examples():
    assert model_cdf_diff(0.0, 0.37) == 0.0
    assert model_cdf_diff(math.sqrt(3), 0.37) == pytest.approx(0.0, abs=1e-15)
    assert model_cdf_diff(1.0, 1.0) == pytest.approx(-2 * std_pdf(1.0), rel=1e-15)
    assert model_cdf_diff(1.0, 1.0) == pytest.approx(-0.4839414, abs=1e-7)
    assert abs(model_cdf_diff(8.0, 0.01)) < 1e-6 * 0.01
    assert abs(model_cdf_diff(-8.0, 0.01)) < 1e-6 * 0.01


def test_peak_of_model_shape():
    res = optimize.minimize_scalar(lambda z: -abs(model_cdf_diff(z, 1.0)), bounds=(0, 1.5), method="bounded")
    assert -res.fun == pytest.approx(0.5506, abs=1e-4)
    assert np.max(np.abs(model_cdf_diff(Z, 1.0))) == pytest.approx(0.5506, abs=2e-4)


def test_fit_alpha_exact_recovery():
    fit = fit_alpha(np.column_stack([Z, model_cdf_diff(Z, 0.01)]), 128)
    assert fit.alpha == pytest.approx(0.01, abs=1e-12)
    assert fit.residual_rms < 1e-15
    assert fit.correlation == pytest.approx(1.0)
    assert fit.c4_std == fit.alpha * 128
    weighted = fit_alpha(np.column_stack([Z, model_cdf_diff(Z, 0.01)]), 128, weighted=True)
    assert weighted.alpha == pytest.approx(0.01, abs=1e-12)


def test_fit_alpha_negative_amplitude_correlation_positive():
    fit = fit_alpha(np.column_stack([Z, model_cdf_diff(Z, -1e-3)]), 64)
    assert fit.alpha == pytest.approx(-1e-3, rel=1e-12)
    assert fit.correlation == pytest.approx(1.0)


def test_fit_alpha_zeros():
    fit = fit_alpha(np.column_stack([Z, np.zeros_like(Z)]), 8)
    assert fit.alpha == 0.0 and fit.residual_rms == 0.0


def test_fit_alpha_errors():
    with pytest.raises(FitError):
        fit_alpha(np.column_stack([Z[:7], Z[:7]]), 8)
    with pytest.raises(FitError):
        fit_alpha(np.column_stack([Z[Z > 0], Z[Z > 0]]), 8)
    r3 = math.sqrt(3)
    degenerate = np.array([-r3, 0.0, r3, -r3, 0.0, r3, -r3, r3, 0.0])
    with pytest.raises(FitError):
        fit_alpha(np.column_stack([degenerate, np.ones_like(degenerate)]), 8)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1e3, 1e3).filter(lambda k: k == 0 or abs(k) > 1e-3), st.integers(0, 2**32 - 1))
def test_fit_alpha_scale_equivariant(kappa, seed):
    d = np.random.default_rng(seed).normal(0, 1e-3, Z.size)
    base = fit_alpha(np.column_stack([Z, d]), 16).alpha
    scaled = fit_alpha(np.column_stack([Z, kappa * d]), 16).alpha
    assert scaled == pytest.approx(kappa * base, rel=1e-12, abs=1e-300)


def test_fit_alpha_accepts_diff_table():
    from finitewidth.stats import DiffTable
    t = DiffTable(Z, model_cdf_diff(Z, 2e-3))
    assert fit_alpha(t, 32).alpha == pytest.approx(2e-3, rel=1e-12)


def test_edgeworth_fit_json():
    fit = fit_alpha(np.column_stack([Z, model_cdf_diff(Z, 0.01)]), 128)
    assert list(fit.to_json()) == ["alpha", "c4_std", "n_width", "residual_rms", "correlation"]


@pytest.mark.parametrize("n, width, expected", [(2, 1024, 1.0), (4, 128, 1 / 128), (3, 64, 0.125)])
def test_repeated_eigenvalue(n, width, expected):
    assert repeated_eigenvalue(n, width) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("n", range(7))
def test_repeated_eigenvalue_is_power_of_single_step(n):
    for width in (2, 8, 128, 1024):
        assert repeated_eigenvalue(n, width) == pytest.approx((2 ** (1 - n / 2)) ** math.log2(width), rel=1e-12)


def test_power_law_exact():
    fit = fit_power_law([(n, 0.1 / n) for n in (8, 16, 32, 64)])
    assert fit.exponent == pytest.approx(-1.0, abs=1e-12)
    assert fit.log_prefactor == pytest.approx(math.log(0.1), abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    fit = fit_power_law([(n, -0.1 * n ** -1.07) for n in range(8, 149, 10)])
    assert fit.exponent == pytest.approx(-1.07, abs=1e-12)
    assert list(fit.to_json()) == ["exponent", "log_prefactor", "r_squared"]


def test_power_law_errors():
    with pytest.raises(FitError):
        fit_power_law([(8, 0.1), (16, 0.05)])
    with pytest.raises(FitError):
        fit_power_law([(8, 0.1), (16, -0.05), (32, 0.02)])
    with pytest.raises(FitError):
        fit_power_law([(8, 0.1), (16, 0.0), (32, 0.02)])
    with pytest.raises(FitError):
        fit_power_law([(8, 0.1), (8, 0.05), (32, 0.02)])
