"""Imperceptibility and robustness measures: PSNR, SSIM, bit-match rate, BER."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .imaging import RasterImage, luma_plane

PEAK_INTENSITY = 255.0

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_PAD = _SSIM_WINDOW // 2
_SSIM_C1 = (0.01 * PEAK_INTENSITY) ** 2
_SSIM_C2 = (0.03 * PEAK_INTENSITY) ** 2


def _check_same_shape(reference: RasterImage, test: RasterImage) -> None:
    if reference.pixels.shape != test.pixels.shape:
        raise ValueError(
            f"image shapes differ: {reference.pixels.shape} vs {test.pixels.shape}"
        )


def psnr(reference: RasterImage, test: RasterImage, channel: int | None = None) -> float:
    """Peak signal-to-noise ratio in dB over all channels jointly.

    Pass a channel index to restrict the comparison to one plane. Identical
    inputs give +infinity.
    """
    _check_same_shape(reference, test)
    if channel is None:
        a = reference.pixels.astype(np.float64)
        b = test.pixels.astype(np.float64)
    else:
        if not 0 <= channel < reference.channels:
            raise ValueError(f"channel {channel} out of range")
        a = reference.pixels[:, :, channel].astype(np.float64)
        b = test.pixels[:, :, channel].astype(np.float64)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK_INTENSITY**2 / mse)


def _bit_matrix(bits) -> np.ndarray:
    arr = np.asarray(getattr(bits, "bits", bits))
    if arr.ndim != 2:
        raise ValueError(f"expected a 2D bit matrix, got shape {arr.shape}")
    return arr


def ber(reference, test) -> float:
    """Fraction of mismatched bits."""
    a = _bit_matrix(reference)
    b = _bit_matrix(test)
    if a.shape != b.shape:
        raise ValueError(f"bit matrix shapes differ: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b)) / a.size


def nc(reference, test) -> float:
    """Bit-match rate between two equal-sized binary matrices; 1 - ber by definition."""
    return 1.0 - ber(reference, test)


def _ssim_blur(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    smoothed = ndimage.correlate1d(plane, kernel, axis=0, mode="nearest")
    return ndimage.correlate1d(smoothed, kernel, axis=1, mode="nearest")


def ssim(reference: RasterImage, test: RasterImage) -> float:
    """Structural similarity on the luma plane.

    Gaussian 11x11 window (sigma 1.5), stabilizers K1=0.01 / K2=0.03 at a
    255 dynamic range, averaged over the region where the window fits
    entirely inside the image.
    """
    _check_same_shape(reference, test)
    x = luma_plane(reference)
    y = luma_plane(test)
    if min(x.shape) < _SSIM_WINDOW:
        raise ValueError(f"image must be at least {_SSIM_WINDOW}x{_SSIM_WINDOW} for SSIM")
    offsets = np.arange(_SSIM_WINDOW, dtype=np.float64) - _SSIM_PAD
    kernel = np.exp(-(offsets**2) / (2.0 * _SSIM_SIGMA**2))
    kernel /= kernel.sum()

    crop = (slice(_SSIM_PAD, -_SSIM_PAD), slice(_SSIM_PAD, -_SSIM_PAD))
    ux = _ssim_blur(x, kernel)[crop]
    uy = _ssim_blur(y, kernel)[crop]
    uxx = _ssim_blur(x * x, kernel)[crop]
    uyy = _ssim_blur(y * y, kernel)[crop]
    uxy = _ssim_blur(x * y, kernel)[crop]
    vx = uxx - ux * ux
    vy = uyy - uy * uy
    vxy = uxy - ux * uy
    score = ((2.0 * ux * uy + _SSIM_C1) * (2.0 * vxy + _SSIM_C2)) / (
        (ux * ux + uy * uy + _SSIM_C1) * (vx + vy + _SSIM_C2)
    )
    return float(score.mean())


def format_db(value: float) -> str:
    """Render a PSNR value; +infinity becomes the string "inf"."""
    return "inf" if math.isinf(value) else f"{value:.4f}"


def json_db(value: float):
    """JSON form of a PSNR value: the string "inf" or the float itself."""
    return "inf" if math.isinf(value) else value


@dataclass(frozen=True)
class MetricReport:
    """Per-image results: imperceptibility plus per-attack watermark fidelity."""

    psnr: float
    ssim: float
    per_attack: dict[str, dict[str, float]]

    def to_json_dict(self) -> dict:
        return {
            "psnr": json_db(self.psnr),
            "ssim": self.ssim,
            "attacks": {
                kind: {"nc": scores["nc"], "ber": scores["ber"]}
                for kind, scores in self.per_attack.items()
            },
        }


def render_table(rows: Sequence[tuple[str, MetricReport]], attack_order: Sequence[str]) -> str:
    """Aligned text table: one row per image, BER per attack plus PSNR/SSIM columns."""
    headers = ["Image", "PSNR (dB)", "SSIM"] + [f"BER {kind}" for kind in attack_order]
    lines = [headers]
    for name, report in rows:
        cells = [name, format_db(report.psnr), f"{report.ssim:.6f}"]
        for kind in attack_order:
            scores = report.per_attack.get(kind)
            cells.append(f"{scores['ber']:.4f}" if scores else "-")
        lines.append(cells)
    widths = [max(len(line[i]) for line in lines) for i in range(len(headers))]
    rendered = []
    for line in lines:
        rendered.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip())
    return "\n".join(rendered) + "\n"
