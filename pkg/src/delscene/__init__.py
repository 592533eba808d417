"""delscene: delentropy-based complexity profiling for image collections.

The package measures per-image structural complexity (delentropy plus
Shannon and GLCM baselines), fits a truncated-Beta profile over a scene's
delentropy samples, scores reconstruction quality (PSNR/SSIM), and
correlates complexity against quality with prediction intervals.
"""

from . import errors
from .dsp import (
    DEFAULT_CEILING,
    ComparabilityReport,
    ComplexityClass,
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
from .entropy import (
    ComplexityRecord,
    Deldensity,
    EntropyConfig,
    GradientField,
    complexity_record,
    compute_delentropy,
    deldensity,
    delentropy,
    gaussian_blur,
    gaussian_kernel,
    glcm_texture_entropy,
    shannon_pixel_entropy,
    sobel_gradients,
)
from .imgio import (
    GrayImage,
    ManifestEntry,
    Mask,
    SceneManifest,
    load_image,
    load_mask,
    parse_manifest,
)
from .metrics import QualityRecord, ingest_metrics_csv, psnr, ssim, write_metrics_csv
from .stats import (
    CorrelationReport,
    RegressionModel,
    correlation_report,
    log_beta,
    log_gamma,
    ols_fit,
    pearson,
    prediction_interval,
    regularized_incomplete_beta,
    student_t_cdf,
    student_t_quantile,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CEILING",
    "ComparabilityReport",
    "ComplexityClass",
    "ComplexityRecord",
    "CorrelationReport",
    "Deldensity",
    "EntropyConfig",
    "GradientField",
    "GrayImage",
    "ManifestEntry",
    "Mask",
    "QualityRecord",
    "RegressionModel",
    "SceneManifest",
    "SceneMeta",
    "SceneProfile",
    "beta_log_likelihood",
    "beta_pdf",
    "check_comparability",
    "classify_descriptors",
    "classify_profile",
    "complexity_record",
    "compute_delentropy",
    "correlation_report",
    "deldensity",
    "delentropy",
    "errors",
    "fit_dsp",
    "gaussian_blur",
    "gaussian_kernel",
    "glcm_texture_entropy",
    "ingest_metrics_csv",
    "load_image",
    "load_mask",
    "log_beta",
    "log_gamma",
    "ols_fit",
    "parse_manifest",
    "pearson",
    "prediction_interval",
    "profile_from_dict",
    "profile_histogram",
    "profile_to_dict",
    "psnr",
    "regularized_incomplete_beta",
    "shannon_pixel_entropy",
    "sobel_gradients",
    "ssim",
    "student_t_cdf",
    "student_t_quantile",
    "write_metrics_csv",
]
