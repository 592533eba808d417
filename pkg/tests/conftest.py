"""Shared helpers for the test suite."""

import numpy as np
from PIL import Image

from delscene import GrayImage, Mask


def make_gray(arr, bitdepth=8) -> GrayImage:
    data = np.ascontiguousarray(np.asarray(arr, dtype=np.float64))
    h, w = data.shape
    return GrayImage(width=w, height=h, data=data, bitdepth=bitdepth)


def make_mask(arr) -> Mask:
    data = np.ascontiguousarray(np.asarray(arr, dtype=bool))
    h, w = data.shape
    return Mask(width=w, height=h, data=data)


def random_gray(rng, width, height, bitdepth=8) -> GrayImage:
    levels = 2 ** bitdepth
    arr = rng.integers(0, levels, size=(height, width)).astype(np.float64)
    return make_gray(arr, bitdepth)


def save_png(path, arr, bits=8):
    arr = np.asarray(arr)
    if bits == 8:
        Image.fromarray(arr.astype(np.uint8), mode="L").save(path)
    elif bits == 16:
        Image.fromarray(arr.astype(np.uint16)).save(path)
    else:
        raise ValueError(bits)
    return path


def save_rgb_png(path, arr):
    Image.fromarray(np.asarray(arr).astype(np.uint8), mode="RGB").save(path)
    return path
