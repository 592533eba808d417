"""Special functions, correlation, regression, and intervals."""

import math

import mpmath
import numpy as np
import oracles
import pytest
from scipy import integrate
from scipy import stats as sps

from delscene import (
    log_beta,
    log_gamma,
    ols_fit,
    pearson,
    prediction_interval,
    regularized_incomplete_beta,
    student_t_cdf,
    student_t_quantile,
)
from delscene.errors import (
    DegenerateVarianceError,
    DomainError,
    GeometryError,
    InsufficientDataError,
)

# Table of published per-scene mean-complexity/PSNR pairs used as a
# realistic correlation fixture (eight aerial scenes, two reconstruction
# systems). The expected r was precomputed with the one-pass formula.
SCENE_MU = [4.18, 4.12, 3.98, 3.98, 3.84, 3.67, 3.55, 3.29]
SPLAT_PSNR = [19.97, 22.94, 22.59, 22.03, 24.19, 26.37, 24.61, 26.68]
R_MU_SPLAT_PSNR = -0.8814687062230805


class TestLogGamma:
    def test_closed_forms(self):
        assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-10)
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-10)
        assert log_gamma(10.0) == pytest.approx(math.log(362880.0), abs=1e-10)

    def test_against_stdlib_over_range(self):
        for x in np.geomspace(1e-3, 1e4, 500):
            assert log_gamma(float(x)) == pytest.approx(math.lgamma(x), abs=1e-10)

    def test_domain_error(self):
        for bad in (0.0, -1.0):
            with pytest.raises(DomainError):
                log_gamma(bad)


class TestLogBeta:
    def test_log_beta_1_1(self):
        assert log_beta(1.0, 1.0) == pytest.approx(0.0, abs=1e-14)

    def test_log_beta_2_5_integer_identity(self):
        # B(2,5) = 1!4!/6! = 1/30
        assert log_beta(2.0, 5.0) == pytest.approx(math.log(1.0 / 30.0), abs=1e-12)

    def test_quadrature_oracle(self):
        value, _ = integrate.quad(lambda t: t ** 1.5 * (1 - t) ** 2.7, 0.0, 1.0)
        assert log_beta(2.5, 3.7) == pytest.approx(math.log(value), abs=1e-8)
        # frozen from a 50-digit quadrature of the defining integral
        assert log_beta(2.5, 3.7) == pytest.approx(-3.419543590698987, abs=1e-8)

    def test_symmetry_exact(self):
        for a, b in ((0.3, 9.1), (2.0, 5.0), (7.7, 0.02)):
            assert log_beta(a, b) == log_beta(b, a)


class TestIncompleteBeta:
    def test_against_scipy_grid(self):
        for a in (0.5, 1.0, 2.5, 8.0):
            for b in (0.5, 1.3, 4.0):
                for x in (0.01, 0.2, 0.5, 0.9, 0.999):
                    assert regularized_incomplete_beta(a, b, x) == pytest.approx(
                        sps.beta.cdf(x, a, b), abs=1e-12
                    )

    def test_bounds(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0


class TestStudentT:
    def test_cdf_against_scipy(self):
        for df in (1, 2, 5, 30, 200):
            for t in (-4.0, -1.0, 0.0, 0.5, 2.5):
                assert student_t_cdf(t, df) == pytest.approx(
                    sps.t.cdf(t, df), abs=1e-12
                )

    def test_quantile_against_scipy(self):
        for df in (1, 3, 6, 18, 48, 120):
            for p in (0.6, 0.9, 0.95, 0.975, 0.995):
                assert student_t_quantile(p, df) == pytest.approx(
                    sps.t.ppf(p, df), abs=1e-9, rel=1e-9
                )

    def test_quantile_symmetry(self):
        assert student_t_quantile(0.25, 7) == -student_t_quantile(0.75, 7)
        assert student_t_quantile(0.5, 7) == 0.0


class TestPearson:
    def test_perfect_positive(self):
        x = [0.0, 1.0, 2.0, 3.0]
        y = [2 * v + 1 for v in x]
        assert pearson(x, y) == pytest.approx(1.0, abs=1e-15)

    def test_perfect_negative(self):
        x = [0.0, 1.0, 2.0, 3.0]
        assert pearson(x, [-v for v in x]) == pytest.approx(-1.0, abs=1e-15)

    def test_scene_fixture_matches_one_pass_oracle(self):
        r = pearson(SCENE_MU, SPLAT_PSNR)
        assert r == pytest.approx(R_MU_SPLAT_PSNR, abs=1e-12)
        assert r == pytest.approx(
            oracles.ref_pearson_one_pass(SCENE_MU, SPLAT_PSNR), abs=1e-12
        )
        assert r < 0

    def test_affine_invariance(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=40)
        y = rng.normal(size=40)
        base = pearson(x, y)
        assert pearson(3.0 * x + 11.0, y) == pytest.approx(base, abs=1e-12)
        assert pearson(x, 0.5 * y - 4.0) == pytest.approx(base, abs=1e-12)
        assert pearson(-2.0 * x, y) == pytest.approx(-base, abs=1e-12)

    def test_constant_input_rejected(self):
        with pytest.raises(DegenerateVarianceError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(GeometryError):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_too_few_points_rejected(self):
        with pytest.raises(InsufficientDataError):
            pearson([1.0, 2.0], [2.0, 1.0])


class TestOlsFit:
    def test_exact_line(self):
        x = [0.0, 1.0, 2.0, 3.0]
        y = [3 * v - 2 for v in x]
        model = ols_fit(x, y)
        assert model.slope == 3.0
        assert model.intercept == -2.0
        assert model.residual_variance == 0.0

    def test_matches_closed_form_normal_equations(self):
        rng = np.random.default_rng(6)
        x = rng.uniform(0, 10, 60)
        y = 2.5 * x - 1.0 + rng.normal(0, 1.0, 60)
        model = ols_fit(x, y)
        n = len(x)
        sx, sy = x.sum(), y.sum()
        sxx, sxy = (x * x).sum(), (x * y).sum()
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
        intercept = (sy - slope * sx) / n
        assert model.slope == pytest.approx(slope, abs=1e-12)
        assert model.intercept == pytest.approx(intercept, abs=1e-12)

    def test_residuals_orthogonal_to_x(self):
        rng = np.random.default_rng(7)
        x = rng.uniform(-5, 5, 200)
        y = 0.7 * x + rng.normal(0, 2.0, 200)
        model = ols_fit(x, y)
        residuals = y - (model.intercept + model.slope * x)
        dot = float(np.dot(x - x.mean(), residuals))
        scale = float(np.abs(x - x.mean()).sum() * np.abs(residuals).max())
        assert abs(dot) <= 1e-9 * max(scale, 1.0)

    def test_two_points_rejected(self):
        with pytest.raises(InsufficientDataError):
            ols_fit([1.0, 2.0], [1.0, 2.0])


class TestPredictionInterval:
    def test_perfect_fit_zero_width(self):
        model = ols_fit([0.0, 1.0, 2.0, 3.0], [1.0, 3.0, 5.0, 7.0])
        lo, hi = prediction_interval(model, 1.7)
        assert lo == hi == model.predict(1.7)

    def test_width_minimized_at_x_mean(self):
        rng = np.random.default_rng(8)
        x = rng.uniform(0, 4, 30)
        y = x + rng.normal(0, 0.5, 30)
        model = ols_fit(x, y)
        width_at = lambda x0: np.subtract(*prediction_interval(model, x0)[::-1])
        base = width_at(model.x_mean)
        for x0 in np.linspace(-3, 7, 21):
            assert width_at(float(x0)) >= base - 1e-12

    def test_width_matches_scipy_t_formula(self):
        rng = np.random.default_rng(9)
        x = rng.uniform(0, 4, 25)
        y = 2.0 * x + rng.normal(0, 1.0, 25)
        model = ols_fit(x, y)
        lo, hi = prediction_interval(model, model.x_mean, 0.95)
        t = sps.t.ppf(0.975, model.n - 2)
        s = math.sqrt(model.residual_variance)
        expected = 2 * t * s * math.sqrt(1 + 1 / model.n + 0.0)
        assert hi - lo == pytest.approx(expected, abs=1e-8)

    def test_symmetric_about_prediction(self):
        rng = np.random.default_rng(10)
        x = rng.uniform(0, 4, 25)
        y = x + rng.normal(0, 1.0, 25)
        model = ols_fit(x, y)
        lo, hi = prediction_interval(model, 3.3, 0.9)
        assert (lo + hi) / 2 == pytest.approx(model.predict(3.3), abs=1e-10)


class TestHighPrecisionCrossChecks:
    def test_log_gamma_against_mpmath(self):
        mpmath.mp.dps = 30
        for x in (1e-3, 0.37, 1.5, 88.0, 4321.0):
            assert log_gamma(x) == pytest.approx(
                float(mpmath.loggamma(x)), abs=1e-10
            )
