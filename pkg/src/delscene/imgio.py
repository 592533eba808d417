"""Image, mask, and scene-manifest loading.

Rasters are decoded into canonical single-channel float64 arrays kept at
their native bit depth. Color inputs are collapsed to luminance with the
ITU-R BT.601 weights so every downstream measure sees the same grayscale
convention.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, FormatError, GeometryError, SchemaError

# BT.601 luma weights for R, G, B.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_SUPPORTED_FORMATS = {"PNG", "JPEG"}
_GRAY_MODES = {"1", "L", "LA", "I", "I;16", "I;16B", "I;16L"}
_COLOR_MODES = {"P", "PA", "RGB", "RGBA"}


@dataclass(frozen=True)
class GrayImage:
    """Single-channel raster with explicit bit depth.

    `data` is a (height, width) float64 array; values stay in
    [0, 2**bitdepth - 1]. Instances are immutable and safe to share
    between worker threads.
    """

    width: int
    height: int
    data: np.ndarray
    bitdepth: int

    def __post_init__(self):
        if self.bitdepth not in (8, 16):
            raise FormatError(f"unsupported bit depth {self.bitdepth}")
        if self.width <= 0 or self.height <= 0:
            raise GeometryError(f"empty image {self.width}x{self.height}")
        if self.data.shape != (self.height, self.width):
            raise GeometryError(
                f"data shape {self.data.shape} does not match "
                f"{self.width}x{self.height}"
            )
        lo = float(self.data.min())
        hi = float(self.data.max())
        if lo < 0.0 or hi > self.max_value:
            raise FormatError(
                f"intensities [{lo}, {hi}] outside [0, {self.max_value}]"
            )
        self.data.flags.writeable = False

    @property
    def max_value(self) -> float:
        return float(2 ** self.bitdepth - 1)


@dataclass(frozen=True)
class Mask:
    """Boolean exclusion raster; True marks pixels removed from analysis."""

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.height, self.width):
            raise GeometryError(
                f"mask shape {self.data.shape} does not match "
                f"{self.width}x{self.height}"
            )
        if self.data.dtype != np.bool_:
            raise FormatError(f"mask dtype {self.data.dtype} is not boolean")
        self.data.flags.writeable = False

    @property
    def excluded_count(self) -> int:
        return int(self.data.sum())


@dataclass(frozen=True)
class ManifestEntry:
    """One scene image. `image_id` is the path string as written in the
    manifest; `image` and `mask` are resolved, loadable paths."""

    image_id: str
    image: str
    mask: Optional[str] = None
    group: Optional[str] = None


@dataclass(frozen=True)
class SceneManifest:
    """Declarative listing of a scene's images plus acquisition metadata."""

    scene_id: str
    entries: tuple
    resolution: tuple
    coverage_area_km2: Optional[float] = None
    collection_policy: Optional[str] = None

    def __post_init__(self):
        if not self.entries:
            raise SchemaError("manifest field 'entries' is empty")
        paths = [e.image for e in self.entries]
        if len(set(paths)) != len(paths):
            dup = next(p for p in paths if paths.count(p) > 1)
            raise SchemaError(f"duplicate image path in manifest: {dup}")


def _luminance(arr: np.ndarray) -> np.ndarray:
    r, g, b = LUMA_WEIGHTS
    return r * arr[:, :, 0] + g * arr[:, :, 1] + b * arr[:, :, 2]


def _open_raster(path):
    try:
        im = Image.open(path)
        im.load()
    except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc
    if im.format is not None and im.format not in _SUPPORTED_FORMATS:
        raise FormatError(f"{path}: unsupported container format {im.format}")
    return im


def load_image(path) -> GrayImage:
    """Decode a PNG or JPEG file into a grayscale raster.

    Multi-channel inputs are reduced to BT.601 luminance; single-channel
    inputs pass through unchanged, so loading an already-gray file is
    idempotent. 16-bit inputs keep their native depth.
    """
    im = _open_raster(path)
    mode = im.mode
    if mode in _COLOR_MODES:
        rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
        data = _luminance(rgb)
        bitdepth = 8
    elif mode in _GRAY_MODES:
        if mode in ("1", "LA"):
            im = im.convert("L")
        arr = np.asarray(im)
        data = arr.astype(np.float64)
        bitdepth = 16 if (arr.dtype.itemsize > 1 or mode.startswith("I")) else 8
    else:
        raise FormatError(f"{path}: unsupported sample format {mode!r}")
    h, w = data.shape
    return GrayImage(width=w, height=h, data=np.ascontiguousarray(data), bitdepth=bitdepth)


def load_mask(path, expected) -> Mask:
    """Decode a single-channel raster into an exclusion mask.

    Any nonzero sample marks its pixel as excluded. `expected` is the
    (width, height) of the image the mask annotates; a size mismatch is a
    geometry error carrying both sizes.
    """
    im = _open_raster(path)
    if im.mode not in _GRAY_MODES:
        raise FormatError(f"{path}: mask must be single-channel, got {im.mode!r}")
    if im.mode in ("1", "LA"):
        im = im.convert("L")
    arr = np.asarray(im)
    h, w = arr.shape
    ew, eh = expected
    if (w, h) != (ew, eh):
        raise GeometryError(
            f"{path}: mask size {w}x{h} does not match expected {ew}x{eh}"
        )
    return Mask(width=w, height=h, data=np.ascontiguousarray(arr != 0))


def _require(doc, key, kind, where):
    if key not in doc or doc[key] is None:
        raise SchemaError(f"manifest field '{where}{key}' is missing")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(f"manifest field '{where}{key}' must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise SchemaError(
            f"manifest field '{where}{key}' must be {kind.__name__}"
        )
    return value


def _optional(doc, key, kind, where):
    if key not in doc or doc[key] is None:
        return None
    return _require(doc, key, kind, where)


def parse_manifest(path) -> SceneManifest:
    """Parse and validate a scene-manifest JSON document.

    Relative image and mask paths are resolved against the manifest's own
    directory, so manifests can travel with their data.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise SchemaError(f"manifest not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("manifest root must be an object")

    scene_id = _require(doc, "scene_id", str, "")
    resolution = _require(doc, "resolution", list, "")
    if (
        len(resolution) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) and v > 0 for v in resolution)
    ):
        raise SchemaError("manifest field 'resolution' must be [width, height]")
    coverage = _optional(doc, "coverage_area_km2", float, "")
    policy = _optional(doc, "collection_policy", str, "")
    raw_entries = _require(doc, "entries", list, "")
    if not raw_entries:
        raise SchemaError("manifest field 'entries' is empty")

    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    entries = []
    for idx, raw in enumerate(raw_entries):
        where = f"entries[{idx}]."
        if not isinstance(raw, dict):
            raise SchemaError(f"manifest field 'entries[{idx}]' must be an object")
        image_id = _require(raw, "image", str, where)
        mask = _optional(raw, "mask", str, where)
        group = _optional(raw, "group", str, where)
        entries.append(
            ManifestEntry(
                image_id=image_id,
                image=resolve(image_id),
                mask=resolve(mask) if mask else None,
                group=group,
            )
        )

    return SceneManifest(
        scene_id=scene_id,
        entries=tuple(entries),
        resolution=(resolution[0], resolution[1]),
        coverage_area_km2=coverage,
        collection_policy=policy,
    )
