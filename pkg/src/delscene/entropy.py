"""Per-image structural-complexity measures.

Three measures are provided. Delentropy is the joint entropy of the
image's Sobel gradient pair (halved, so a uniform joint histogram over
``bins**2`` cells scores ``log2(bins)``), computed after a light Gaussian
blur that suppresses sensor-level noise. Shannon pixel entropy and
gray-level co-occurrence (GLCM) texture entropy are the classical
baselines it is compared against.

Masked pixels are excluded at histogram accumulation only; blur and
gradients are always evaluated on the full raster, so exclusion never
invents synthetic image content at hole borders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import _kernels
from .errors import DomainError, EmptySupportError, GeometryError
from .imgio import GrayImage, Mask

DEFAULT_BINS = 256

GRADIENT_RANGE_THEORETICAL = "theoretical"
GRADIENT_RANGE_PER_IMAGE = "per-image-max"


@dataclass(frozen=True)
class EntropyConfig:
    """Tunables for the delentropy pipeline.

    `gradient_range` selects the joint-histogram bound: "theoretical"
    uses the largest response a 3x3 Sobel can produce at the image's bit
    depth (4 * (2**bitdepth - 1)), which keeps binning comparable across
    images of one scene; "per-image-max" adapts the bound to each image's
    own gradient extremes for sensitivity studies.
    """

    blur_kernel: int = 3
    blur_sigma: float = 1.0
    sobel_kernel: int = 3
    bins: int = DEFAULT_BINS
    gradient_range: str = GRADIENT_RANGE_THEORETICAL

    def __post_init__(self):
        if self.blur_kernel < 3 or self.blur_kernel % 2 == 0:
            raise ValueError(f"blur_kernel must be odd and >= 3, got {self.blur_kernel}")
        if self.sobel_kernel < 3 or self.sobel_kernel % 2 == 0:
            raise ValueError(f"sobel_kernel must be odd and >= 3, got {self.sobel_kernel}")
        if self.bins < 2:
            raise ValueError(f"bins must be >= 2, got {self.bins}")
        if self.blur_sigma <= 0.0:
            raise ValueError(f"blur_sigma must be positive, got {self.blur_sigma}")
        if self.gradient_range not in (GRADIENT_RANGE_THEORETICAL, GRADIENT_RANGE_PER_IMAGE):
            raise ValueError(f"unknown gradient_range {self.gradient_range!r}")

    @property
    def ceiling(self) -> float:
        """Upper bound of delentropy under this binning, in bits."""
        return math.log2(self.bins)


@dataclass(frozen=True)
class GradientField:
    """Paired per-pixel Sobel responses.

    `fx` responds to variation along the vertical (row) axis, `fy` along
    the horizontal (column) axis. `source_peak` records the peak intensity
    (2**bitdepth - 1) of the image the field came from, which fixes the
    theoretical histogram bound.
    """

    fx: np.ndarray
    fy: np.ndarray
    width: int
    height: int
    source_peak: float

    def __post_init__(self):
        if self.fx.shape != (self.height, self.width) or self.fy.shape != self.fx.shape:
            raise GeometryError(
                f"gradient shapes {self.fx.shape}/{self.fy.shape} do not match "
                f"{self.width}x{self.height}"
            )
        self.fx.flags.writeable = False
        self.fy.flags.writeable = False


@dataclass(frozen=True)
class Deldensity:
    """Normalized joint histogram of gradient pairs.

    Bin (i, j) spans equal subintervals of [-grad_range, +grad_range] on
    each axis; cells sum to one over the `total_weight` contributing
    pixels.
    """

    bins: int
    cells: np.ndarray
    total_weight: int
    grad_range: float

    def __post_init__(self):
        if self.cells.shape != (self.bins, self.bins):
            raise GeometryError(f"cells shape {self.cells.shape} != ({self.bins}, {self.bins})")
        if self.total_weight <= 0:
            raise EmptySupportError("deldensity has no contributing pixels")
        self.cells.flags.writeable = False


@dataclass(frozen=True)
class ComplexityRecord:
    """Per-image complexity measures, all in bits."""

    image_id: str
    delentropy: float
    shannon_entropy: float
    glcm_entropy: float
    excluded_fraction: float

    def __post_init__(self):
        for name in ("delentropy", "shannon_entropy", "glcm_entropy"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"{name} must be nonnegative")
        if not 0.0 <= self.excluded_fraction <= 1.0:
            raise DomainError("excluded_fraction must be within [0, 1]")


def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    """1D Gaussian taps of odd length `size`, normalized to sum 1."""
    rad = size // 2
    offsets = np.arange(-rad, rad + 1, dtype=np.float64)
    taps = np.exp(-0.5 * (offsets / sigma) ** 2)
    return taps / taps.sum()


def gaussian_blur(img: GrayImage, cfg: EntropyConfig = EntropyConfig()) -> GrayImage:
    """Separable Gaussian blur with edge replication at the borders."""
    if cfg.blur_kernel > img.width or cfg.blur_kernel > img.height:
        raise GeometryError(
            f"blur kernel {cfg.blur_kernel} exceeds image {img.width}x{img.height}"
        )
    taps = gaussian_kernel(cfg.blur_kernel, cfg.blur_sigma)
    out = _kernels.convolve_separable(img.data, taps)
    # convex weights can overshoot the intensity ceiling by float rounding
    np.clip(out, 0.0, img.max_value, out=out)
    return GrayImage(width=img.width, height=img.height, data=out, bitdepth=img.bitdepth)


def sobel_gradients(img: GrayImage) -> GradientField:
    """Apply the standard unnormalized 3x3 Sobel kernels (edge-replicated)."""
    if img.width < 3 or img.height < 3:
        raise GeometryError(
            f"image {img.width}x{img.height} is smaller than the 3x3 Sobel kernel"
        )
    fx, fy = _kernels.sobel_pair(img.data)
    return GradientField(
        fx=fx, fy=fy, width=img.width, height=img.height, source_peak=img.max_value
    )


def _check_mask(mask: Optional[Mask], width: int, height: int) -> None:
    if mask is not None and (mask.width, mask.height) != (width, height):
        raise GeometryError(
            f"mask {mask.width}x{mask.height} does not match image {width}x{height}"
        )


def deldensity(
    grad: GradientField,
    mask: Optional[Mask] = None,
    cfg: EntropyConfig = EntropyConfig(),
) -> Deldensity:
    """Accumulate the joint gradient histogram and normalize it.

    Each included pixel contributes one count to the cell obtained by
    quantizing its (fx, fy) over the symmetric bound; out-of-range values
    land in the outermost bins. Excluded pixels contribute nothing.
    """
    _check_mask(mask, grad.width, grad.height)
    if cfg.gradient_range == GRADIENT_RANGE_THEORETICAL:
        bound = 4.0 * grad.source_peak
    else:
        if mask is None:
            hi = max(float(np.abs(grad.fx).max()), float(np.abs(grad.fy).max()))
        else:
            keep = ~mask.data
            if not keep.any():
                raise EmptySupportError("all pixels are masked out")
            hi = max(
                float(np.abs(grad.fx[keep]).max()),
                float(np.abs(grad.fy[keep]).max()),
            )
        bound = hi if hi > 0.0 else 1.0

    if mask is None:
        counts = _kernels.gradient_hist(grad.fx, grad.fy, bound, cfg.bins)
    else:
        counts = _kernels.gradient_hist_masked(grad.fx, grad.fy, mask.data, bound, cfg.bins)
    total = int(counts.sum())
    if total == 0:
        raise EmptySupportError("all pixels are masked out")
    cells = counts.reshape(cfg.bins, cfg.bins) / float(total)
    return Deldensity(bins=cfg.bins, cells=cells, total_weight=total, grad_range=bound)


def _entropy_bits(probabilities: np.ndarray) -> float:
    p = probabilities[probabilities > 0.0]
    s = float(np.sum(p * np.log2(p)))
    return 0.0 if s == 0.0 else -s


def delentropy(d: Deldensity) -> float:
    """Half the joint entropy of a normalized deldensity, in bits."""
    total = float(d.cells.sum())
    if abs(total - 1.0) > 1e-9:
        raise DomainError(f"deldensity is not normalized (sum={total!r})")
    return 0.5 * _entropy_bits(d.cells)


def compute_delentropy(
    img: GrayImage,
    mask: Optional[Mask] = None,
    cfg: EntropyConfig = EntropyConfig(),
) -> float:
    """Blur, differentiate, bin, and score one image, in bits."""
    if cfg.sobel_kernel != 3:
        raise ValueError("only the standard 3x3 Sobel operator is implemented")
    blurred = gaussian_blur(img, cfg)
    grad = sobel_gradients(blurred)
    return delentropy(deldensity(grad, mask, cfg))


def shannon_pixel_entropy(img: GrayImage, mask: Optional[Mask] = None) -> float:
    """Entropy of the intensity histogram, one bin per representable level.

    Float intensities (e.g. luminance-converted color) are assigned to the
    nearest level.
    """
    _check_mask(mask, img.width, img.height)
    values = np.rint(img.data).astype(np.int64)
    if mask is not None:
        values = values[~mask.data]
        if values.size == 0:
            raise EmptySupportError("all pixels are masked out")
    counts = np.bincount(values.ravel(), minlength=2 ** img.bitdepth)
    return _entropy_bits(counts / float(values.size))


def glcm_texture_entropy(
    img: GrayImage,
    mask: Optional[Mask] = None,
    levels: int = 32,
    offset: Tuple[int, int] = (0, 1),
) -> float:
    """Entropy of the symmetric gray-level co-occurrence matrix.

    Intensities are quantized to `levels` equal-width gray levels; pairs
    (p, p + offset) are counted in both orders whenever the two pixels are
    inside the image and both included.
    """
    _check_mask(mask, img.width, img.height)
    if levels < 2:
        raise DomainError(f"levels must be >= 2, got {levels}")
    dr, dc = int(offset[0]), int(offset[1])
    if abs(dr) >= img.height or abs(dc) >= img.width:
        raise EmptySupportError(f"offset {offset} admits no pixel pairs")
    q = (img.data * (levels / (img.max_value + 1.0))).astype(np.int64)
    np.clip(q, 0, levels - 1, out=q)
    if mask is None:
        counts = _kernels.glcm_hist(q, dr, dc, levels)
    else:
        counts = _kernels.glcm_hist_masked(q, mask.data, dr, dc, levels)
    total = int(counts.sum())
    if total == 0:
        raise EmptySupportError("no co-occurrence pairs survive the mask")
    return _entropy_bits(counts / float(total))


def excluded_fraction(mask: Optional[Mask], width: int, height: int) -> float:
    """Fraction of pixels an optional mask removes from analysis."""
    if mask is None:
        return 0.0
    _check_mask(mask, width, height)
    return mask.excluded_count / float(width * height)


def complexity_record(
    image_id: str,
    img: GrayImage,
    mask: Optional[Mask] = None,
    cfg: EntropyConfig = EntropyConfig(),
) -> ComplexityRecord:
    """Compute all three measures for one image."""
    return ComplexityRecord(
        image_id=image_id,
        delentropy=compute_delentropy(img, mask, cfg),
        shannon_entropy=shannon_pixel_entropy(img, mask),
        glcm_entropy=glcm_texture_entropy(img, mask),
        excluded_fraction=excluded_fraction(mask, img.width, img.height),
    )
