"""8-bit image containers, channel access, block tiling, and PNG/PPM I/O.

Pixel data is stored quantized (uint8). All numeric work happens on float64
planes; values return to 8 bits only when a plane is written back into an
image through replace_channel.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass

import numpy as np
from PIL import Image

# A Plane is a 2D float64 array: the working buffer between transform stages.
Plane = np.ndarray

RED, GREEN, BLUE = 0, 1, 2

_CHANNEL_NAMES = {"red": RED, "green": GREEN, "blue": BLUE, "gray": 0}


def channel_by_name(name: str, channels: int) -> int:
    """Map a channel name to an index valid for an image with `channels` planes."""
    try:
        index = _CHANNEL_NAMES[name]
    except KeyError:
        raise ValueError(f"unknown channel name {name!r}") from None
    if index >= channels:
        raise ValueError(f"channel {name!r} not present in a {channels}-channel image")
    return index


@dataclass(frozen=True, eq=False)
class RasterImage:
    """Immutable 8-bit image: pixels shaped (height, width, channels), channels 1 or 3.

    An optional alpha plane (height, width) rides along untouched; no operation
    in this package ever modifies it.
    """

    pixels: np.ndarray
    alpha: np.ndarray | None = None

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim == 2:
            px = px[:, :, np.newaxis]
        if px.ndim != 3 or px.shape[2] not in (1, 3):
            raise ValueError(f"expected pixels shaped (h, w, 1|3), got {px.shape}")
        if px.size == 0:
            raise ValueError("image dimensions must be positive")
        if px.dtype != np.uint8:
            if not np.issubdtype(px.dtype, np.integer):
                raise ValueError("pixel intensities must be integers in [0, 255]")
            if px.min() < 0 or px.max() > 255:
                raise ValueError("pixel intensities must lie in [0, 255]")
            px = px.astype(np.uint8)
        px = np.ascontiguousarray(px)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)
        if self.alpha is not None:
            al = np.ascontiguousarray(self.alpha, dtype=np.uint8)
            if al.shape != px.shape[:2]:
                raise ValueError("alpha plane dimensions must match the image")
            al.setflags(write=False)
            object.__setattr__(self, "alpha", al)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    def same_content(self, other: "RasterImage") -> bool:
        """Bit-exact pixel equality (alpha included)."""
        if self.alpha is None and other.alpha is not None:
            return False
        if self.alpha is not None and (other.alpha is None or not np.array_equal(self.alpha, other.alpha)):
            return False
        return np.array_equal(self.pixels, other.pixels)


def extract_channel(image: RasterImage, channel: int) -> Plane:
    """Return one channel of the image as a float64 plane with exact intensities.

    Raises ValueError when the channel index is out of range.
    """
    if not 0 <= channel < image.channels:
        raise ValueError(f"channel {channel} out of range for {image.channels}-channel image")
    return image.pixels[:, :, channel].astype(np.float64)


_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def luma_plane(image: RasterImage) -> Plane:
    """Luma of an RGB image (ITU-R 601 weights), or the plane itself for grayscale."""
    if image.channels == 1:
        return image.pixels[:, :, 0].astype(np.float64)
    return image.pixels.astype(np.float64) @ _LUMA_WEIGHTS


def quantize_plane(plane: Plane) -> np.ndarray:
    """Round to nearest integer and clamp to [0, 255], returning uint8."""
    return np.clip(np.rint(plane), 0, 255).astype(np.uint8)


def replace_channel(image: RasterImage, channel: int, plane: Plane) -> RasterImage:
    """Write a plane into one channel, quantizing to 8 bits; other channels are untouched.

    Raises ValueError on a channel index out of range or a dimension mismatch.
    """
    if not 0 <= channel < image.channels:
        raise ValueError(f"channel {channel} out of range for {image.channels}-channel image")
    plane = np.asarray(plane, dtype=np.float64)
    if plane.shape != image.pixels.shape[:2]:
        raise ValueError(
            f"plane shape {plane.shape} does not match image {image.pixels.shape[:2]}"
        )
    pixels = image.pixels.copy()
    pixels[:, :, channel] = quantize_plane(plane)
    return RasterImage(pixels, alpha=image.alpha)


@dataclass(frozen=True)
class BlockGrid:
    """Tiling of a plane into block_size x block_size tiles, row-major linear indexing.

    Trailing rows/columns that do not fill a whole block fall outside the grid
    and are never addressed.
    """

    width: int
    height: int
    block_size: int = 8

    def __post_init__(self) -> None:
        if self.block_size < 1:
            raise ValueError("block_size must be positive")
        if self.width < self.block_size or self.height < self.block_size:
            raise ValueError(
                f"plane {self.width}x{self.height} smaller than one {self.block_size}x{self.block_size} block"
            )

    @classmethod
    def for_plane(cls, plane: Plane, block_size: int = 8) -> "BlockGrid":
        height, width = plane.shape
        return cls(width=width, height=height, block_size=block_size)

    @property
    def blocks_x(self) -> int:
        return self.width // self.block_size

    @property
    def blocks_y(self) -> int:
        return self.height // self.block_size

    @property
    def block_count(self) -> int:
        return self.blocks_x * self.blocks_y

    def block_coords(self, index: int) -> tuple[int, int]:
        """Linear index -> (bx, by) grid coordinates."""
        self._check_index(index)
        return index % self.blocks_x, index // self.blocks_x

    def origin(self, index: int) -> tuple[int, int]:
        """Linear index -> (row, col) of the block's top-left pixel."""
        bx, by = self.block_coords(index)
        return by * self.block_size, bx * self.block_size

    def _check_index(self, index: int) -> None:
        if not 0 <= index < self.block_count:
            raise ValueError(f"block index {index} out of range [0, {self.block_count})")


def get_block(plane: Plane, grid: BlockGrid, index: int) -> Plane:
    """Copy out the addressed block as a block_size x block_size plane."""
    row, col = grid.origin(index)
    bs = grid.block_size
    return np.array(plane[row : row + bs, col : col + bs], dtype=np.float64)


def set_block(plane: Plane, grid: BlockGrid, index: int, block: Plane) -> Plane:
    """Return a copy of the plane with the addressed block replaced; pure."""
    block = np.asarray(block, dtype=np.float64)
    bs = grid.block_size
    if block.shape != (bs, bs):
        raise ValueError(f"block shape {block.shape} does not match grid tile ({bs}, {bs})")
    row, col = grid.origin(index)
    out = np.array(plane, dtype=np.float64)
    out[row : row + bs, col : col + bs] = block
    return out


def _atomic_save(im: Image.Image, path: str) -> None:
    # Write to a sibling temp file and rename, so a failed save leaves nothing behind.
    directory = os.path.dirname(os.path.abspath(path))
    suffix = os.path.splitext(path)[1]
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=suffix)
    try:
        with os.fdopen(fd, "wb") as handle:
            im.save(handle, format=Image.registered_extensions().get(suffix.lower()))
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def load_image(path: str) -> RasterImage:
    """Read an 8-bit PNG/PPM/PGM file. Palette images are expanded to RGB.

    16-bit inputs are rejected; an alpha channel is split off and carried
    alongside the RGB data.
    """
    with Image.open(path) as im:
        if im.mode.startswith("I") or im.mode == "F":
            raise ValueError(f"unsupported bit depth for {path!r} (mode {im.mode}); 8-bit only")
        alpha = None
        if im.mode == "P":
            im = im.convert("RGBA" if "transparency" in im.info else "RGB")
        if im.mode in ("RGBA", "LA", "PA"):
            rgba = im.convert("RGBA")
            alpha = np.asarray(rgba.getchannel("A"), dtype=np.uint8)
            im = rgba.convert("RGB")
        if im.mode == "L":
            data = np.asarray(im, dtype=np.uint8)[:, :, np.newaxis]
        elif im.mode == "RGB":
            data = np.asarray(im, dtype=np.uint8)
        else:
            data = np.asarray(im.convert("RGB"), dtype=np.uint8)
    return RasterImage(data, alpha=alpha)


def save_image(image: RasterImage, path: str) -> None:
    """Write PNG (alpha preserved) or binary PPM/PGM (no alpha). Atomic on success."""
    ext = os.path.splitext(path)[1].lower()
    if image.channels == 1:
        im = Image.fromarray(image.pixels[:, :, 0], mode="L")
    else:
        im = Image.fromarray(image.pixels, mode="RGB")
    if ext == ".pgm" and image.channels == 3:
        raise ValueError("PGM stores a single channel; use PPM or PNG for RGB images")
    if image.alpha is not None:
        if ext in (".ppm", ".pgm"):
            raise ValueError("PPM/PGM cannot carry an alpha plane; use PNG")
        im.putalpha(Image.fromarray(image.alpha, mode="L"))
    _atomic_save(im, path)
