"""Full-reference quality scores and ingestion of external metric tables.

PSNR and SSIM are computed on the grayscale rasters produced by the
loading layer, matching the domain of the complexity measures. Metrics
this package cannot compute (perceptual distances from learned models,
reconstruction-system scores) enter through the CSV ingest path instead.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import _kernels
from .entropy import gaussian_kernel
from .errors import DomainError, GeometryError, ParseError, SchemaError
from .imgio import GrayImage

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class QualityRecord:
    """Per-image quality scores; unknown metric columns land in `external`."""

    image_id: str
    psnr: Optional[float] = None
    ssim: Optional[float] = None
    external: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.psnr is not None and not (self.psnr >= 0.0 or math.isinf(self.psnr)):
            raise DomainError(f"psnr must be >= 0 or +inf, got {self.psnr}")
        if self.ssim is not None and not -1.0 <= self.ssim <= 1.0:
            raise DomainError(f"ssim must be within [-1, 1], got {self.ssim}")


def _check_pair(reference: GrayImage, test: GrayImage) -> None:
    if (reference.width, reference.height) != (test.width, test.height):
        raise GeometryError(
            f"image sizes differ: {reference.width}x{reference.height} vs "
            f"{test.width}x{test.height}"
        )
    if reference.bitdepth != test.bitdepth:
        raise GeometryError(
            f"bit depths differ: {reference.bitdepth} vs {test.bitdepth}"
        )


def psnr(reference: GrayImage, test: GrayImage) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical images."""
    _check_pair(reference, test)
    diff = reference.data - test.data
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(reference.max_value ** 2 / mse)


def ssim(reference: GrayImage, test: GrayImage) -> float:
    """Mean structural similarity over an 11x11 Gaussian window (sigma 1.5).

    Stability constants are C1 = (0.01 MAX)^2 and C2 = (0.03 MAX)^2; only
    windows fully inside the images contribute (no padded borders).
    """
    _check_pair(reference, test)
    if min(reference.width, reference.height) < SSIM_WINDOW:
        raise GeometryError(
            f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM, got "
            f"{reference.width}x{reference.height}"
        )
    taps = gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)
    x = reference.data
    y = test.data
    mu_x = _kernels.correlate_separable_valid(x, taps)
    mu_y = _kernels.correlate_separable_valid(y, taps)
    e_xx = _kernels.correlate_separable_valid(x * x, taps)
    e_yy = _kernels.correlate_separable_valid(y * y, taps)
    e_xy = _kernels.correlate_separable_valid(x * y, taps)
    var_x = e_xx - mu_x * mu_x
    var_y = e_yy - mu_y * mu_y
    cov = e_xy - mu_x * mu_y
    peak = reference.max_value
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    score_map = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    )
    return float(score_map.mean())


def ingest_metrics_csv(path) -> List[QualityRecord]:
    """Read a metrics table: header `image_id` plus numeric metric columns.

    Empty cells mean "metric absent for this image", never zero. The
    conventional `psnr`/`ssim` columns map onto the dedicated fields; any
    other column becomes an external metric.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: metrics CSV is empty")
    header = [h.strip() for h in rows[0]]
    if "image_id" not in header:
        raise SchemaError(f"{path}: metrics CSV lacks an image_id column")
    id_col = header.index("image_id")
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(cell.strip() == "" for cell in row):
            continue
        values = {}
        for col, name in enumerate(header):
            if col == id_col or col >= len(row):
                continue
            cell = row[col].strip()
            if cell == "":
                continue
            try:
                values[name] = float(cell)
            except ValueError as exc:
                raise ParseError(
                    f"{path}: row {lineno}, column {name!r}: "
                    f"cannot parse {cell!r} as a number"
                ) from exc
        records.append(
            QualityRecord(
                image_id=row[id_col].strip(),
                psnr=values.pop("psnr", None),
                ssim=values.pop("ssim", None),
                external=values,
            )
        )
    return records


def write_metrics_csv(records: List[QualityRecord], path) -> None:
    """Write records so that `ingest_metrics_csv` reproduces them exactly.

    Floats are written with full round-trip precision (`repr`), which is
    what makes the reproduction exact.
    """
    have_psnr = any(r.psnr is not None for r in records)
    have_ssim = any(r.ssim is not None for r in records)
    external_names = sorted({k for r in records for k in r.external})
    header = ["image_id"]
    if have_psnr:
        header.append("psnr")
    if have_ssim:
        header.append("ssim")
    header.extend(external_names)

    def fmt(v):
        if v is None:
            return ""
        return "inf" if math.isinf(v) and v > 0 else repr(v)

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in records:
            row = [r.image_id]
            if have_psnr:
                row.append(fmt(r.psnr))
            if have_ssim:
                row.append(fmt(r.ssim))
            row.extend(fmt(r.external.get(name)) for name in external_names)
            writer.writerow(row)
