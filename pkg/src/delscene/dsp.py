"""Scene profiles: truncated-Beta fits over per-image delentropy samples.

A scene's complexity profile is the empirical distribution of its images'
delentropy values, modeled as a Beta distribution rescaled to a support
[a, b] snapped to the sample extrema. The two shape parameters are found
by maximum likelihood; together with the raw sample moments they drive a
coarse scene classification (overall level, skew, modality) and a
comparability check between acquisition setups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    ConvergenceError,
    DegenerateSceneError,
    DomainError,
    InsufficientDataError,
    SupportError,
)
from .stats import log_beta

# log2 of the default 256-bin deldensity, the usual delentropy ceiling
DEFAULT_CEILING = 8.0

MIN_SAMPLES = 8

# classification thresholds on the profile mean, in bits
LOW_COMPLEXITY_MEAN = 2.5
HIGH_COMPLEXITY_MEAN = 4.75

# relative shape-parameter band treated as "balanced"
BALANCED_SKEW_BAND = 0.05

# comparability thresholds
RESOLUTION_DRIFT_LIMIT = 0.10
RESOLUTION_BREAK_LIMIT = 0.25
EXTENT_RATIO_LIMIT = 4.0

WARN_RESOLUTION_DRIFT = "RESOLUTION_DRIFT"
WARN_RESOLUTION_BREAK = "RESOLUTION_BREAK"
WARN_EXTENT_MISMATCH = "EXTENT_MISMATCH"
WARN_POLICY_MISMATCH = "POLICY_MISMATCH"

_MOM_CLAMP = (0.05, 500.0)
_MAX_ITERATIONS = 500
_LL_TOLERANCE = 1e-9
_SUPPORT_ITERATIONS = 25
_SUPPORT_TOLERANCE = 1e-6
_SUPPORT_CAP = 3.0  # widening cap, in observed-range units per side


@dataclass(frozen=True)
class SceneProfile:
    """Fitted truncated-Beta parameters plus raw sample moments (bits)."""

    alpha: float
    beta_: float
    a: float
    b: float
    mu: float
    sigma: float
    n: int
    log_likelihood: float

    def __post_init__(self):
        if self.alpha <= 0.0 or self.beta_ <= 0.0:
            raise DomainError("shape parameters must be positive")
        if not self.a < self.b:
            raise DomainError(f"support [{self.a}, {self.b}] is empty")
        if not self.a <= self.mu <= self.b:
            raise DomainError("mean must lie inside the support")
        if self.n < 2:
            raise InsufficientDataError("profile needs at least 2 samples")


@dataclass(frozen=True)
class ComplexityClass:
    """Coarse scene classification derived from (mu, alpha, beta)."""

    level: str      # low | moderate | high
    skew: str       # low-detail-skewed | high-detail-skewed | balanced
    modality: str   # bimodal | unimodal-concentrated | indeterminate


@dataclass(frozen=True)
class SceneMeta:
    """Acquisition metadata used by the comparability check."""

    resolution: Tuple[int, int]
    coverage_area_km2: Optional[float] = None
    collection_policy: Optional[str] = None


@dataclass(frozen=True)
class ComparabilityReport:
    """Outcome of checking whether two scenes' profiles may be compared."""

    resolution_ratio: float
    extent_ratio: Optional[float]
    policy_match: Optional[bool]
    warnings: Tuple[str, ...]


def beta_log_likelihood(
    alpha: float,
    beta_: float,
    a: float,
    b: float,
    samples: Sequence[float],
) -> float:
    """Log-likelihood (nats) of samples under the truncated Beta density.

    Evaluated through log-gamma so large shape parameters cannot overflow.
    Every sample must lie strictly inside (a, b).
    """
    if alpha <= 0.0 or beta_ <= 0.0:
        raise DomainError("shape parameters must be positive")
    if not a < b:
        raise DomainError(f"support [{a}, {b}] is empty")
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        raise InsufficientDataError("no samples")
    inside = (arr > a) & (arr < b)
    if not inside.all():
        bad = float(arr[~inside][0])
        raise SupportError(f"sample {bad!r} is on or outside the support ({a}, {b})")
    width = b - a
    ll = float(
        (alpha - 1.0) * np.sum(np.log(arr - a))
        + (beta_ - 1.0) * np.sum(np.log(b - arr))
    )
    ll -= arr.size * ((alpha + beta_ - 1.0) * math.log(width) + log_beta(alpha, beta_))
    return ll


def beta_pdf(
    x,
    alpha: float,
    beta_: float,
    a: float,
    b: float,
):
    """Truncated-Beta density on [a, b], vectorized over x inside (a, b)."""
    xa = np.asarray(x, dtype=np.float64)
    log_norm = (alpha + beta_ - 1.0) * math.log(b - a) + log_beta(alpha, beta_)
    out = np.exp(
        (alpha - 1.0) * np.log(xa - a) + (beta_ - 1.0) * np.log(b - xa) - log_norm
    )
    return out if out.ndim else float(out)


def _neg_ll_reduced(theta, s1, s2, n):
    # objective on (log alpha, log beta); constant -n*log(b-a) dropped
    la, lb = theta
    if abs(la) > 25.0 or abs(lb) > 25.0:
        return math.inf
    alpha = math.exp(la)
    beta_ = math.exp(lb)
    return -((alpha - 1.0) * s1 + (beta_ - 1.0) * s2 - n * log_beta(alpha, beta_))


def _nelder_mead(fn, x0, step=0.25):
    """Minimize fn over 2 parameters; returns (x, f, converged, iterations)."""
    pts = [np.array(x0, dtype=np.float64)]
    pts.append(pts[0] + np.array([step, 0.0]))
    pts.append(pts[0] + np.array([0.0, step]))
    vals = [fn(p) for p in pts]

    for iteration in range(_MAX_ITERATIONS):
        order = np.argsort(vals)
        pts = [pts[i] for i in order]
        vals = [vals[i] for i in order]
        if vals[2] - vals[0] < _LL_TOLERANCE:
            return pts[0], vals[0], True, iteration
        centroid = 0.5 * (pts[0] + pts[1])
        reflected = centroid + (centroid - pts[2])
        f_ref = fn(reflected)
        if f_ref < vals[0]:
            expanded = centroid + 2.0 * (centroid - pts[2])
            f_exp = fn(expanded)
            if f_exp < f_ref:
                pts[2], vals[2] = expanded, f_exp
            else:
                pts[2], vals[2] = reflected, f_ref
        elif f_ref < vals[1]:
            pts[2], vals[2] = reflected, f_ref
        else:
            contracted = centroid + 0.5 * (pts[2] - centroid)
            f_con = fn(contracted)
            if f_con < vals[2]:
                pts[2], vals[2] = contracted, f_con
            else:
                for i in (1, 2):
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0])
                    vals[i] = fn(pts[i])
    order = np.argsort(vals)
    return pts[order[0]], vals[order[0]], False, _MAX_ITERATIONS


def _fit_shapes(arr, a, b, init=None):
    """Maximum-likelihood (alpha, beta) for a fixed support [a, b]."""
    t = (arr - a) / (b - a)
    if init is None:
        m = float(t.mean())
        v = float(t.var(ddof=1))
        common = m * (1.0 - m) / v - 1.0
        lo_c, hi_c = _MOM_CLAMP
        alpha0 = min(max(m * common, lo_c), hi_c)
        beta0 = min(max((1.0 - m) * common, lo_c), hi_c)
    else:
        alpha0, beta0 = init
    s1 = float(np.sum(np.log(t)))
    s2 = float(np.sum(np.log1p(-t)))
    n = int(arr.size)
    theta, _, converged, _ = _nelder_mead(
        lambda th: _neg_ll_reduced(th, s1, s2, n),
        (math.log(alpha0), math.log(beta0)),
    )
    alpha = math.exp(theta[0])
    beta_ = math.exp(theta[1])
    if not converged:
        raise ConvergenceError(
            f"profile fit did not converge within {_MAX_ITERATIONS} iterations",
            last_iterate=(alpha, beta_),
        )
    return alpha, beta_


def _extreme_offset(shape, other, width, n):
    # Expected gap between a sample extreme and its support endpoint: near
    # the endpoint F(s) ~ (s/W)^shape / (shape B(shape, other)), and the
    # extreme's CDF value concentrates at 1/(n+1).
    exponent = (math.log(shape) + log_beta(shape, other) - math.log(n + 1.0)) / shape
    return width * math.exp(min(exponent, 50.0))


def fit_dsp(samples: Sequence[float], ceiling: float = DEFAULT_CEILING) -> SceneProfile:
    """Fit the truncated-Beta scene profile to delentropy samples.

    The support starts at the sample extrema with a small margin and is
    widened by the expected order-statistic gap between an extreme and its
    endpoint, iterated to a fixed point; shapes are re-estimated by
    maximum likelihood at each step (method-of-moments start, then a
    derivative-free simplex). This keeps endpoint estimation away from the
    ill-posed joint likelihood (which diverges as the support shrinks onto
    an extreme sample when a shape parameter is below one) while removing
    the shape bias a support snapped hard to the extrema would cause: for
    densities that vanish at their endpoints the sample never reaches the
    true support, and fitting on the observed range alone systematically
    shrinks both shapes.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size < MIN_SAMPLES:
        raise InsufficientDataError(
            f"need at least {MIN_SAMPLES} samples for a profile fit, got {arr.size}"
        )
    if arr.min() < 0.0 or arr.max() > ceiling:
        raise SupportError(
            f"samples [{arr.min()}, {arr.max()}] fall outside [0, {ceiling}]"
        )
    mu = float(arr.mean())
    lo = float(arr.min())
    hi = float(arr.max())
    if lo == hi:
        raise DegenerateSceneError(
            f"all {arr.size} samples equal {lo}; no spread to fit", mu=mu, n=int(arr.size)
        )
    sigma = float(arr.std(ddof=1))
    n = int(arr.size)

    observed = hi - lo
    delta = max(1e-3 * observed, 1e-6)
    cap = _SUPPORT_CAP * observed
    a = lo - delta
    b = hi + delta

    shapes = None
    for _ in range(_SUPPORT_ITERATIONS):
        shapes = _fit_shapes(arr, a, b, init=shapes)
        alpha, beta_ = shapes
        width = b - a
        off_lo = min(_extreme_offset(alpha, beta_, width, n), cap)
        off_hi = min(_extreme_offset(beta_, alpha, width, n), cap)
        a_new = lo - max(off_lo, delta)
        b_new = hi + max(off_hi, delta)
        done = (
            abs(a_new - a) <= _SUPPORT_TOLERANCE * width
            and abs(b_new - b) <= _SUPPORT_TOLERANCE * width
        )
        a, b = a_new, b_new
        if done:
            break

    alpha, beta_ = _fit_shapes(arr, a, b, init=shapes)
    return SceneProfile(
        alpha=alpha,
        beta_=beta_,
        a=a,
        b=b,
        mu=mu,
        sigma=sigma,
        n=n,
        log_likelihood=beta_log_likelihood(alpha, beta_, a, b, arr),
    )


def classify_profile(p: SceneProfile) -> ComplexityClass:
    """Classify a profile from its (mu, alpha, beta) descriptors."""
    return classify_descriptors(p.mu, p.alpha, p.beta_)


def classify_descriptors(mu: float, alpha: float, beta_: float) -> ComplexityClass:
    """Pure classification of a (mu, alpha, beta) descriptor triple."""
    if mu < LOW_COMPLEXITY_MEAN:
        level = "low"
    elif mu > HIGH_COMPLEXITY_MEAN:
        level = "high"
    else:
        level = "moderate"

    if abs(alpha - beta_) <= BALANCED_SKEW_BAND * max(alpha, beta_):
        skew = "balanced"
    elif alpha < beta_:
        skew = "low-detail-skewed"
    else:
        skew = "high-detail-skewed"

    if alpha < 1.0 and beta_ < 1.0:
        modality = "bimodal"
    elif alpha > 1.0 and beta_ > 1.0:
        modality = "unimodal-concentrated"
    else:
        modality = "indeterminate"
    return ComplexityClass(level=level, skew=skew, modality=modality)


def _linear_resolution(resolution) -> float:
    w, h = resolution
    return math.sqrt(float(w) * float(h))


def check_comparability(x, y) -> ComparabilityReport:
    """Check whether two scenes were acquired comparably.

    `x` and `y` are manifests or metadata objects exposing `resolution`
    plus optional `coverage_area_km2` and `collection_policy`. Missing
    optional metadata yields absent report fields and no warning. Ratios
    are reported for `y` relative to `x`.
    """
    warnings: List[str] = []

    ratio = _linear_resolution(y.resolution) / _linear_resolution(x.resolution)
    deviation = abs(ratio - 1.0)
    if deviation > RESOLUTION_DRIFT_LIMIT:
        warnings.append(WARN_RESOLUTION_DRIFT)
    if deviation >= RESOLUTION_BREAK_LIMIT:
        warnings.append(WARN_RESOLUTION_BREAK)

    extent_ratio = None
    area_x = getattr(x, "coverage_area_km2", None)
    area_y = getattr(y, "coverage_area_km2", None)
    if area_x is not None and area_y is not None and area_x > 0 and area_y > 0:
        extent_ratio = float(area_y) / float(area_x)
        if max(extent_ratio, 1.0 / extent_ratio) > EXTENT_RATIO_LIMIT:
            warnings.append(WARN_EXTENT_MISMATCH)

    policy_match = None
    pol_x = getattr(x, "collection_policy", None)
    pol_y = getattr(y, "collection_policy", None)
    if pol_x is not None and pol_y is not None:
        policy_match = pol_x == pol_y
        if not policy_match:
            warnings.append(WARN_POLICY_MISMATCH)

    return ComparabilityReport(
        resolution_ratio=ratio,
        extent_ratio=extent_ratio,
        policy_match=policy_match,
        warnings=tuple(warnings),
    )


def profile_histogram(
    samples: Sequence[float],
    bins: int,
    profile: Optional[SceneProfile] = None,
) -> List[Tuple[float, int, float]]:
    """Plot-ready histogram of samples with the fitted density at bin centers.

    Fits the profile first when one is not supplied; a degenerate scene
    therefore raises just as `fit_dsp` would.
    """
    if bins < 1:
        raise DomainError(f"bins must be >= 1, got {bins}")
    if profile is None:
        profile = fit_dsp(samples)
    counts, edges = np.histogram(
        np.asarray(samples, dtype=np.float64), bins=bins, range=(profile.a, profile.b)
    )
    centers = 0.5 * (edges[:-1] + edges[1:])
    density = beta_pdf(centers, profile.alpha, profile.beta_, profile.a, profile.b)
    return [
        (float(c), int(k), float(d)) for c, k, d in zip(centers, counts, density)
    ]


def profile_to_dict(profile: SceneProfile, scene_id: str) -> dict:
    """Serialize a profile (plus its classification) for JSON output."""
    cls = classify_profile(profile)
    return {
        "scene_id": scene_id,
        "n": profile.n,
        "mu": profile.mu,
        "sigma": profile.sigma,
        "alpha": profile.alpha,
        "beta": profile.beta_,
        "a": profile.a,
        "b": profile.b,
        "log_likelihood": profile.log_likelihood,
        "class": {"level": cls.level, "skew": cls.skew, "modality": cls.modality},
    }


def profile_from_dict(doc: dict) -> SceneProfile:
    """Rebuild a SceneProfile from its serialized form."""
    try:
        return SceneProfile(
            alpha=float(doc["alpha"]),
            beta_=float(doc["beta"]),
            a=float(doc["a"]),
            b=float(doc["b"]),
            mu=float(doc["mu"]),
            sigma=float(doc["sigma"]),
            n=int(doc["n"]),
            log_likelihood=float(doc["log_likelihood"]),
        )
    except KeyError as exc:
        raise DomainError(f"profile document is missing field {exc}") from exc
