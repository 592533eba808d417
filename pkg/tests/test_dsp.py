"""Scene-profile fitting, classification, and comparability checks."""

import math

import mpmath
import numpy as np
import pytest

from delscene import (
    SceneMeta,
    SceneProfile,
    beta_log_likelihood,
    beta_pdf,
    check_comparability,
    classify_descriptors,
    classify_profile,
    fit_dsp,
    profile_from_dict,
    profile_histogram,
    profile_to_dict,
)
from delscene.errors import (
    DegenerateSceneError,
    DomainError,
    InsufficientDataError,
    SupportError,
)


def mp_log_likelihood(alpha, beta_, a, b, samples):
    """High-precision evaluation of the truncated-Beta log-likelihood."""
    mpmath.mp.dps = 50
    alpha, beta_, a, b = map(mpmath.mpf, (alpha, beta_, a, b))
    norm = (b - a) ** (alpha + beta_ - 1) * mpmath.beta(alpha, beta_)
    total = mpmath.mpf(0)
    for h in samples:
        h = mpmath.mpf(h)
        total += mpmath.log((h - a) ** (alpha - 1) * (b - h) ** (beta_ - 1) / norm)
    return float(total)


class TestBetaLogLikelihood:
    def test_uniform_special_case(self):
        samples = [0.5, 1.2, 2.9, 3.3]
        a, b = 0.0, 4.0
        expected = -len(samples) * math.log(b - a)
        assert beta_log_likelihood(1.0, 1.0, a, b, samples) == pytest.approx(
            expected, abs=1e-12
        )

    def test_single_midpoint_closed_form(self):
        # f(0.5) = 6 * 0.5 * 0.5 = 1.5 for Beta(2, 2) on [0, 1]
        assert beta_log_likelihood(2.0, 2.0, 0.0, 1.0, [0.5]) == pytest.approx(
            math.log(1.5), abs=1e-12
        )

    def test_twenty_samples_against_high_precision(self):
        rng = np.random.default_rng(100)
        samples = list(rng.uniform(3.05, 4.95, 20))
        got = beta_log_likelihood(2.0, 5.0, 3.0, 5.0, samples)
        expected = mp_log_likelihood(2.0, 5.0, 3.0, 5.0, samples)
        assert got == pytest.approx(expected, abs=1e-10)

    def test_sample_on_boundary_rejected(self):
        with pytest.raises(SupportError, match="3.0"):
            beta_log_likelihood(2.0, 2.0, 3.0, 5.0, [4.0, 3.0])

    def test_sample_outside_rejected(self):
        with pytest.raises(SupportError):
            beta_log_likelihood(2.0, 2.0, 3.0, 5.0, [5.5])

    def test_nonpositive_shapes_rejected(self):
        with pytest.raises(DomainError):
            beta_log_likelihood(0.0, 1.0, 0.0, 1.0, [0.5])


class TestFitDsp:
    def test_recovers_beta_2_5(self):
        rng = np.random.default_rng(2)
        samples = rng.beta(2, 5, 1000) * 2 + 3
        profile = fit_dsp(samples)
        assert abs(profile.alpha - 2.0) / 2.0 < 0.15
        assert abs(profile.beta_ - 5.0) / 5.0 < 0.15
        assert profile.n == 1000
        assert profile.a <= profile.mu <= profile.b

    def test_recovers_uniform(self):
        rng = np.random.default_rng(2)
        samples = rng.uniform(3.0, 5.0, 1000)
        profile = fit_dsp(samples)
        assert abs(profile.alpha - 1.0) < 0.15
        assert abs(profile.beta_ - 1.0) < 0.15

    def test_mirror_symmetry_swaps_shapes(self):
        rng = np.random.default_rng(3)
        samples = rng.beta(2, 5, 1000) * 2 + 3
        profile = fit_dsp(samples)
        reflected = fit_dsp(profile.a + profile.b - samples)
        assert reflected.alpha == pytest.approx(profile.beta_, rel=0.02)
        assert reflected.beta_ == pytest.approx(profile.alpha, rel=0.02)

    def test_moments_are_raw_sample_moments(self):
        rng = np.random.default_rng(4)
        samples = rng.beta(3, 3, 500) * 1.5 + 2
        profile = fit_dsp(samples)
        assert profile.mu == float(np.mean(samples))
        assert profile.sigma == float(np.std(samples, ddof=1))

    def test_fitted_mean_tracks_sample_mean(self):
        rng = np.random.default_rng(5)
        samples = rng.beta(2.5, 1.5, 500) * 3 + 1
        p = fit_dsp(samples)
        fitted_mean = p.a + (p.b - p.a) * p.alpha / (p.alpha + p.beta_)
        assert abs(fitted_mean - p.mu) < 0.05 * (p.b - p.a)

    def test_affine_equivariance(self):
        rng = np.random.default_rng(6)
        samples = rng.beta(2, 4, 800) * 1.5 + 2.0
        base = fit_dsp(samples)
        shifted = fit_dsp(samples + 1.5)
        assert shifted.mu == pytest.approx(base.mu + 1.5, abs=1e-9)
        assert shifted.a == pytest.approx(base.a + 1.5, abs=1e-6)
        assert shifted.b == pytest.approx(base.b + 1.5, abs=1e-6)
        assert shifted.alpha == pytest.approx(base.alpha, rel=0.02)
        assert shifted.beta_ == pytest.approx(base.beta_, rel=0.02)

    def test_likelihood_local_maximum(self):
        rng = np.random.default_rng(7)
        samples = rng.beta(2, 5, 400) * 2 + 3
        p = fit_dsp(samples)
        best = beta_log_likelihood(p.alpha, p.beta_, p.a, p.b, samples)
        assert best == pytest.approx(p.log_likelihood, abs=1e-9)
        for fa in (0.95, 1.0, 1.05):
            for fb in (0.95, 1.0, 1.05):
                ll = beta_log_likelihood(p.alpha * fa, p.beta_ * fb, p.a, p.b, samples)
                assert ll <= best + 1e-9

    def test_too_few_samples(self):
        with pytest.raises(InsufficientDataError):
            fit_dsp([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0])

    def test_identical_samples_degenerate(self):
        with pytest.raises(DegenerateSceneError) as info:
            fit_dsp([4.25] * 20)
        assert info.value.mu == 4.25
        assert info.value.n == 20

    def test_samples_above_ceiling_rejected(self):
        with pytest.raises(SupportError):
            fit_dsp([1.0, 2.0, 3.0, 9.0, 1.5, 2.5, 3.5, 4.0], ceiling=8.0)

    def test_runs_fast_enough(self):
        import time

        rng = np.random.default_rng(8)
        samples = rng.beta(2, 5, 1000) * 2 + 3
        start = time.perf_counter()
        fit_dsp(samples)
        assert time.perf_counter() - start < 1.0


class TestClassification:
    def test_published_rural_descriptors(self):
        cls = classify_descriptors(4.18, 4.50, 1.65)
        assert cls.level == "moderate"
        assert cls.skew == "high-detail-skewed"
        assert cls.modality == "unimodal-concentrated"

    def test_published_highway_descriptors(self):
        cls = classify_descriptors(3.55, 1.66, 1.03)
        assert cls.level == "moderate"
        assert cls.skew == "high-detail-skewed"
        assert cls.modality == "unimodal-concentrated"

    def test_low_bimodal(self):
        cls = classify_descriptors(2.0, 0.5, 0.5)
        assert cls.level == "low"
        assert cls.modality == "bimodal"
        assert cls.skew == "balanced"

    def test_level_thresholds(self):
        assert classify_descriptors(2.49, 2.0, 2.0).level == "low"
        assert classify_descriptors(2.51, 2.0, 2.0).level == "moderate"
        assert classify_descriptors(4.76, 2.0, 2.0).level == "high"
        assert classify_descriptors(2.5, 2.0, 2.0).level == "moderate"
        assert classify_descriptors(4.75, 2.0, 2.0).level == "moderate"

    def test_balanced_band_is_relative(self):
        assert classify_descriptors(3.0, 10.0, 9.6).skew == "balanced"
        assert classify_descriptors(3.0, 10.0, 9.4).skew == "high-detail-skewed"
        assert classify_descriptors(3.0, 9.4, 10.0).skew == "low-detail-skewed"

    def test_mixed_shapes_indeterminate(self):
        assert classify_descriptors(3.0, 0.8, 1.7).modality == "indeterminate"
        assert classify_descriptors(3.0, 1.0, 1.0).modality == "indeterminate"

    def test_pure_function_of_triple(self):
        a = classify_descriptors(3.1, 2.2, 1.1)
        b = classify_descriptors(3.1, 2.2, 1.1)
        assert a == b

    def test_profile_wrapper_agrees(self):
        profile = SceneProfile(
            alpha=4.5, beta_=1.65, a=3.0, b=5.0, mu=4.18, sigma=0.3, n=50,
            log_likelihood=-10.0,
        )
        assert classify_profile(profile) == classify_descriptors(4.18, 4.5, 1.65)


class TestComparability:
    def test_identical_setups_have_no_warnings(self):
        meta = SceneMeta(resolution=(4032, 3024), coverage_area_km2=0.2,
                         collection_policy="grid")
        report = check_comparability(meta, meta)
        assert report.warnings == ()
        assert report.resolution_ratio == 1.0
        assert report.extent_ratio == 1.0
        assert report.policy_match is True

    def test_resolution_break_at_quarter(self):
        a = SceneMeta(resolution=(4032, 3024))
        b = SceneMeta(resolution=(3024, 2268))
        report = check_comparability(a, b)
        assert report.resolution_ratio == pytest.approx(0.75)
        assert "RESOLUTION_BREAK" in report.warnings

    def test_resolution_drift_only(self):
        a = SceneMeta(resolution=(1000, 1000))
        b = SceneMeta(resolution=(880, 880))
        report = check_comparability(a, b)
        assert "RESOLUTION_DRIFT" in report.warnings
        assert "RESOLUTION_BREAK" not in report.warnings

    def test_small_resolution_change_passes(self):
        a = SceneMeta(resolution=(1000, 1000))
        b = SceneMeta(resolution=(950, 950))
        assert check_comparability(a, b).warnings == ()

    def test_extent_mismatch_beyond_4x(self):
        a = SceneMeta(resolution=(100, 100), coverage_area_km2=0.1)
        b = SceneMeta(resolution=(100, 100), coverage_area_km2=0.5)
        report = check_comparability(a, b)
        assert "EXTENT_MISMATCH" in report.warnings
        assert report.extent_ratio == pytest.approx(5.0)

    def test_extent_4x_exactly_is_stable(self):
        a = SceneMeta(resolution=(100, 100), coverage_area_km2=0.1)
        b = SceneMeta(resolution=(100, 100), coverage_area_km2=0.4)
        assert "EXTENT_MISMATCH" not in check_comparability(a, b).warnings

    def test_policy_mismatch(self):
        a = SceneMeta(resolution=(100, 100), collection_policy="grid")
        b = SceneMeta(resolution=(100, 100), collection_policy="orbit")
        report = check_comparability(a, b)
        assert "POLICY_MISMATCH" in report.warnings
        assert report.policy_match is False

    def test_missing_metadata_is_silent(self):
        a = SceneMeta(resolution=(100, 100), coverage_area_km2=0.3)
        b = SceneMeta(resolution=(100, 100))
        report = check_comparability(a, b)
        assert report.warnings == ()
        assert report.extent_ratio is None
        assert report.policy_match is None


class TestProfileHistogram:
    def test_uniform_fit_density_is_flat(self):
        rng = np.random.default_rng(200)
        samples = rng.uniform(3, 5, 1000)
        profile = fit_dsp(samples)
        rows = profile_histogram(samples, 16, profile)
        flat = 1.0 / (profile.b - profile.a)
        for _, _, density in rows:
            assert density == pytest.approx(flat, rel=0.1)
        assert sum(count for _, count, _ in rows) == 1000

    def test_density_matches_high_precision_formula(self):
        rng = np.random.default_rng(201)
        samples = rng.beta(2, 5, 600) * 2 + 3
        profile = fit_dsp(samples)
        rows = profile_histogram(samples, 12, profile)
        mpmath.mp.dps = 40
        al, be = mpmath.mpf(profile.alpha), mpmath.mpf(profile.beta_)
        a, b = mpmath.mpf(profile.a), mpmath.mpf(profile.b)
        for center, _, density in rows:
            x = mpmath.mpf(center)
            expected = (
                (x - a) ** (al - 1) * (b - x) ** (be - 1)
                / ((b - a) ** (al + be - 1) * mpmath.beta(al, be))
            )
            assert density == pytest.approx(float(expected), abs=1e-9)

    def test_density_integrates_to_one(self):
        rng = np.random.default_rng(202)
        samples = rng.beta(2, 3, 800) * 2 + 3
        profile = fit_dsp(samples)
        rows = profile_histogram(samples, 400, profile)
        centers = np.array([c for c, _, _ in rows])
        density = np.array([d for _, _, d in rows])
        integral = np.trapezoid(density, centers)
        assert integral == pytest.approx(1.0, rel=0.01)

    def test_degenerate_propagates(self):
        with pytest.raises(DegenerateSceneError):
            profile_histogram([2.0] * 50, 10)


class TestSerialization:
    def test_roundtrip(self):
        rng = np.random.default_rng(300)
        profile = fit_dsp(rng.beta(2, 5, 200) * 2 + 3)
        doc = profile_to_dict(profile, "scene-7")
        assert doc["scene_id"] == "scene-7"
        assert set(doc["class"]) == {"level", "skew", "modality"}
        again = profile_from_dict(doc)
        assert again == profile

    def test_missing_field_rejected(self):
        with pytest.raises(DomainError):
            profile_from_dict({"alpha": 1.0})


class TestBetaPdf:
    def test_uniform_pdf(self):
        assert beta_pdf(0.25, 1.0, 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)
        assert beta_pdf(3.9, 1.0, 1.0, 3.0, 5.0) == pytest.approx(0.5, abs=1e-12)

    def test_symmetric_quadratic(self):
        # Beta(2, 2) density 6 t (1 - t) peaks at 1.5 on the unit interval
        assert beta_pdf(0.5, 2.0, 2.0, 0.0, 1.0) == pytest.approx(1.5, abs=1e-12)
