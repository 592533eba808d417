"""Compiled inner loops for per-pixel work.

Every kernel is single-threaded and runs in float64/int64 so outputs are
bit-reproducible no matter how many worker threads schedule them. Borders
are handled by index clamping, which is equivalent to edge replication.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def convolve_separable(img, taps):
    """Correlate rows then columns with `taps` (odd length, replicated edges)."""
    h, w = img.shape
    rad = taps.shape[0] // 2
    tmp = np.empty((h, w), np.float64)
    out = np.empty((h, w), np.float64)
    for r in range(h):
        for c in range(w):
            acc = 0.0
            for t in range(-rad, rad + 1):
                cc = c + t
                if cc < 0:
                    cc = 0
                elif cc >= w:
                    cc = w - 1
                acc += taps[t + rad] * img[r, cc]
            tmp[r, c] = acc
    for r in range(h):
        for c in range(w):
            acc = 0.0
            for t in range(-rad, rad + 1):
                rr = r + t
                if rr < 0:
                    rr = 0
                elif rr >= h:
                    rr = h - 1
                acc += taps[t + rad] * tmp[rr, c]
            out[r, c] = acc
    return out


@numba.njit(cache=True)
def sobel_pair(img):
    """Standard unnormalized 3x3 Sobel responses (row-axis, column-axis)."""
    h, w = img.shape
    fx = np.empty((h, w), np.float64)
    fy = np.empty((h, w), np.float64)
    for r in range(h):
        ru = r - 1 if r > 0 else 0
        rd = r + 1 if r < h - 1 else h - 1
        for c in range(w):
            cl = c - 1 if c > 0 else 0
            cr = c + 1 if c < w - 1 else w - 1
            fy[r, c] = (
                (img[ru, cr] - img[ru, cl])
                + 2.0 * (img[r, cr] - img[r, cl])
                + (img[rd, cr] - img[rd, cl])
            )
            fx[r, c] = (
                (img[rd, cl] - img[ru, cl])
                + 2.0 * (img[rd, c] - img[ru, c])
                + (img[rd, cr] - img[ru, cr])
            )
    return fx, fy


@numba.njit(cache=True)
def gradient_hist(fx, fy, bound, bins):
    """Joint histogram of (fx, fy) over [-bound, bound]^2, clamped to edge bins."""
    counts = np.zeros(bins * bins, np.int64)
    scale = bins / (2.0 * bound)
    n = fx.size
    xf = fx.ravel()
    yf = fy.ravel()
    for k in range(n):
        i = int((xf[k] + bound) * scale)
        if i < 0:
            i = 0
        elif i >= bins:
            i = bins - 1
        j = int((yf[k] + bound) * scale)
        if j < 0:
            j = 0
        elif j >= bins:
            j = bins - 1
        counts[i * bins + j] += 1
    return counts


@numba.njit(cache=True)
def gradient_hist_masked(fx, fy, excluded, bound, bins):
    """As gradient_hist, skipping pixels flagged in `excluded`."""
    counts = np.zeros(bins * bins, np.int64)
    scale = bins / (2.0 * bound)
    n = fx.size
    xf = fx.ravel()
    yf = fy.ravel()
    ex = excluded.ravel()
    for k in range(n):
        if ex[k]:
            continue
        i = int((xf[k] + bound) * scale)
        if i < 0:
            i = 0
        elif i >= bins:
            i = bins - 1
        j = int((yf[k] + bound) * scale)
        if j < 0:
            j = 0
        elif j >= bins:
            j = bins - 1
        counts[i * bins + j] += 1
    return counts


@numba.njit(cache=True)
def glcm_hist(q, dr, dc, levels):
    """Symmetric co-occurrence counts of quantized levels at offset (dr, dc)."""
    h, w = q.shape
    counts = np.zeros(levels * levels, np.int64)
    for r in range(h):
        r2 = r + dr
        if r2 < 0 or r2 >= h:
            continue
        for c in range(w):
            c2 = c + dc
            if c2 < 0 or c2 >= w:
                continue
            a = q[r, c]
            b = q[r2, c2]
            counts[a * levels + b] += 1
            counts[b * levels + a] += 1
    return counts


@numba.njit(cache=True)
def glcm_hist_masked(q, excluded, dr, dc, levels):
    """As glcm_hist, counting only pairs whose two pixels are both included."""
    h, w = q.shape
    counts = np.zeros(levels * levels, np.int64)
    for r in range(h):
        r2 = r + dr
        if r2 < 0 or r2 >= h:
            continue
        for c in range(w):
            c2 = c + dc
            if c2 < 0 or c2 >= w:
                continue
            if excluded[r, c] or excluded[r2, c2]:
                continue
            a = q[r, c]
            b = q[r2, c2]
            counts[a * levels + b] += 1
            counts[b * levels + a] += 1
    return counts


@numba.njit(cache=True)
def correlate_separable_valid(img, taps):
    """Separable correlation keeping only fully-covered (valid) pixels."""
    h, w = img.shape
    k = taps.shape[0]
    wo = w - k + 1
    ho = h - k + 1
    tmp = np.empty((h, wo), np.float64)
    out = np.empty((ho, wo), np.float64)
    for r in range(h):
        for c in range(wo):
            acc = 0.0
            for t in range(k):
                acc += taps[t] * img[r, c + t]
            tmp[r, c] = acc
    for r in range(ho):
        for c in range(wo):
            acc = 0.0
            for t in range(k):
                acc += taps[t] * tmp[r + t, c]
            out[r, c] = acc
    return out
