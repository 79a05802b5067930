"""Deterministic synthetic test imagery.

Standard photographic test images cannot ship with the package, so these
generators produce stand-ins with comparable character: fur-like grain,
drapery stripes, rigging lines, smooth produce blobs, and a soft portrait
field. Intensities stay inside [16, 239] so every block keeps headroom for
embedding in either direction.
"""

from __future__ import annotations

import os

import numpy as np
from scipy import ndimage

from .codec import WatermarkBits
from .imaging import RasterImage, save_image

CLASSIC_HOSTS = ("baboon", "barbara", "boats", "lena", "peppers")

_INTENSITY_FLOOR = 16.0
_INTENSITY_CEIL = 239.0

_HOST_SEEDS = {
    "baboon": 1101,
    "barbara": 1102,
    "boats": 1103,
    "lena": 1104,
    "peppers": 1105,
}


def _normalized(field: np.ndarray) -> np.ndarray:
    field = field - field.min()
    peak = field.max()
    return field / peak if peak > 0 else field


def _smooth_noise(rng: np.random.Generator, size: int, sigma) -> np.ndarray:
    return _normalized(ndimage.gaussian_filter(rng.standard_normal((size, size)), sigma, mode="wrap"))


def _bumps(rng: np.random.Generator, size: int, count: int, radius_lo: float, radius_hi: float) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    field = np.zeros((size, size))
    for _ in range(count):
        cy, cx = rng.uniform(0, size, 2)
        radius = rng.uniform(radius_lo, radius_hi)
        field += np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * radius * radius))
    return _normalized(field)


def _coords(size: int) -> tuple[np.ndarray, np.ndarray]:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    return yy / size, xx / size


def _baboon(rng: np.random.Generator, size: int) -> list[np.ndarray]:
    fine = _smooth_noise(rng, size, 1.0)
    streaks = _smooth_noise(rng, size, (6.0, 0.8))
    coarse = _smooth_noise(rng, size, 4.0)
    base = _normalized(0.5 * fine + 0.3 * streaks + 0.2 * coarse)
    return [
        _normalized(0.7 * base + 0.3 * coarse),
        base,
        _normalized(0.55 * base + 0.45 * fine),
    ]


def _barbara(rng: np.random.Generator, size: int) -> list[np.ndarray]:
    yy, xx = _coords(size)
    warp = _smooth_noise(rng, size, 8.0)
    stripes = 0.5 + 0.5 * np.sin(2.0 * np.pi * (xx + yy) * 9.0 + 4.0 * warp)
    drape = _smooth_noise(rng, size, 16.0)
    base = _normalized(0.6 * stripes + 0.4 * drape)
    return [
        _normalized(0.8 * base + 0.2 * drape),
        base,
        _normalized(0.65 * base + 0.35 * warp),
    ]


def _boats(rng: np.random.Generator, size: int) -> list[np.ndarray]:
    yy, xx = _coords(size)
    warp = _smooth_noise(rng, size, 12.0)
    sky = 1.0 - yy
    masts = 0.5 + 0.5 * np.sin(2.0 * np.pi * xx * 13.0 + 3.0 * warp)
    hull = 0.5 + 0.5 * np.sin(2.0 * np.pi * yy * 5.0 + 2.0 * warp)
    base = _normalized(0.45 * sky + 0.3 * masts + 0.25 * hull)
    return [
        _normalized(0.6 * base + 0.4 * sky),
        base,
        _normalized(0.7 * base + 0.3 * warp),
    ]


def _lena(rng: np.random.Generator, size: int) -> list[np.ndarray]:
    yy, xx = _coords(size)
    glow = 1.0 - _normalized((yy - 0.42) ** 2 + (xx - 0.55) ** 2)
    soft = _smooth_noise(rng, size, 24.0)
    grain = _smooth_noise(rng, size, 2.0)
    base = _normalized(0.55 * glow + 0.35 * soft + 0.1 * grain)
    return [
        _normalized(0.75 * base + 0.25 * glow),
        _normalized(0.6 * base + 0.4 * soft),
        base,
    ]


def _peppers(rng: np.random.Generator, size: int) -> list[np.ndarray]:
    blobs_a = _bumps(rng, size, 18, size * 0.04, size * 0.14)
    blobs_b = _bumps(rng, size, 14, size * 0.05, size * 0.18)
    sheen = _smooth_noise(rng, size, 10.0)
    return [
        _normalized(0.7 * blobs_a + 0.3 * sheen),
        _normalized(0.55 * blobs_b + 0.45 * (1.0 - blobs_a)),
        _normalized(0.4 * blobs_a + 0.4 * blobs_b + 0.2 * sheen),
    ]


_RECIPES = {
    "baboon": _baboon,
    "barbara": _barbara,
    "boats": _boats,
    "lena": _lena,
    "peppers": _peppers,
}


def classic_host(name: str, size: int = 256) -> RasterImage:
    """Generate one named synthetic host as an RGB image of the given side length."""
    if name not in _RECIPES:
        raise ValueError(f"unknown host name {name!r}; expected one of {CLASSIC_HOSTS}")
    if size < 16:
        raise ValueError(f"host side must be at least 16, got {size}")
    rng = np.random.default_rng(_HOST_SEEDS[name])
    channels = _RECIPES[name](rng, size)
    span = _INTENSITY_CEIL - _INTENSITY_FLOOR
    stacked = np.stack(channels, axis=-1)
    pixels = np.rint(_INTENSITY_FLOOR + np.clip(stacked, 0.0, 1.0) * span).astype(np.uint8)
    return RasterImage(pixels)


def random_watermark(width: int = 20, height: int = 20, seed: int = 0) -> WatermarkBits:
    """Uniform random logo bits, reproducible from the seed."""
    return WatermarkBits.random(width=width, height=height, seed=seed)


def demo_logo(size: int = 20) -> WatermarkBits:
    """Fixed geometric logo: a ring crossed by a diagonal, on a checkered margin."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    center = (size - 1) / 2.0
    radius = np.hypot(yy - center, xx - center)
    ring = (radius > size * 0.22) & (radius < size * 0.38)
    diagonal = np.abs(yy - xx) < max(1.0, size * 0.06)
    margin = ((yy.astype(int) + xx.astype(int)) % 4 == 0) & (radius > size * 0.45)
    bits = (ring | diagonal | margin).astype(np.uint8)
    return WatermarkBits(bits)


def write_host_corpus(directory: str, size: int = 256) -> list[str]:
    """Write every synthetic host into the directory as PNG; returns the paths."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for name in CLASSIC_HOSTS:
        path = os.path.join(directory, f"{name}.png")
        save_image(classic_host(name, size=size), path)
        paths.append(path)
    return paths
