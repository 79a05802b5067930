"""Watermark embedding and extraction.

Each watermark bit rides in one 8x8 block of the host's blue channel: the
block is decomposed (Haar analysis, graph transform of the approximation
band, SVD), the largest singular value is shifted by +alpha for a 1 bit or
-alpha (floored at zero) for a 0 bit, and the block is rebuilt. Extraction
is semi-blind: it re-runs the decomposition and compares the recovered
largest singular value against the stored host value.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .imaging import (
    BLUE,
    BlockGrid,
    Plane,
    RasterImage,
    extract_channel,
    luma_plane,
    replace_channel,
)
from .transforms import (
    PATH_UNIFORM,
    DwtSubbands,
    GraphSpec,
    SvdTriple,
    dwt2_haar,
    gbt2_forward,
    gbt2_inverse,
    idwt2_haar,
    svd,
    svd_reconstruct,
)

KEY_VERSION = 1
DEFAULT_BLOCK_SIZE = 8
BINARIZE_THRESHOLD = 128


class CapacityError(ValueError):
    """The watermark carries more bits than the host has blocks."""


class KeyFormatError(ValueError):
    """The extraction key is malformed or inconsistent with the image."""


@dataclass(frozen=True, eq=False)
class WatermarkBits:
    """Binary logo: bits shaped (height, width), values 0/1, row-major bit order."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits)
        if bits.ndim != 2 or bits.size == 0:
            raise ValueError(f"bits must be a non-empty 2D matrix, got shape {bits.shape}")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("watermark bits must be 0 or 1")
        bits = np.ascontiguousarray(bits, dtype=np.uint8)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def count(self) -> int:
        return self.bits.size

    def flat(self) -> np.ndarray:
        """Bits in embedding order (row-major)."""
        return self.bits.ravel()

    @classmethod
    def random(cls, width: int, height: int, seed: int) -> "WatermarkBits":
        rng = np.random.default_rng(seed)
        return cls(rng.integers(0, 2, size=(height, width), dtype=np.uint8))

    @classmethod
    def from_image(cls, image: RasterImage, threshold: int = BINARIZE_THRESHOLD) -> "WatermarkBits":
        """Binarize an image: luma >= threshold becomes 1."""
        return cls((luma_plane(image) >= threshold).astype(np.uint8))

    def to_image(self) -> RasterImage:
        """Render as a black/white grayscale image (0 -> 0, 1 -> 255)."""
        return RasterImage((self.bits * np.uint8(255))[:, :, np.newaxis])


@dataclass(frozen=True)
class KeyEntry:
    """Side information for one bit: host block index, strength, stored singular value."""

    block: int
    alpha: float
    s_h: float

    def __post_init__(self) -> None:
        if self.block < 0:
            raise ValueError(f"block index must be non-negative, got {self.block}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.s_h < 0:
            raise ValueError(f"stored singular value must be non-negative, got {self.s_h}")


@dataclass(frozen=True)
class WatermarkKey:
    """Complete extraction key: per-bit entries plus the pipeline configuration."""

    entries: tuple[KeyEntry, ...]
    wm_width: int
    wm_height: int
    block_size: int = DEFAULT_BLOCK_SIZE
    wavelet: str = "haar"
    graph: str = PATH_UNIFORM
    version: int = KEY_VERSION

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        if len(self.entries) != self.wm_width * self.wm_height:
            raise ValueError(
                f"{len(self.entries)} entries do not cover a "
                f"{self.wm_width}x{self.wm_height} watermark"
            )
        blocks = [e.block for e in self.entries]
        if len(set(blocks)) != len(blocks):
            raise ValueError("key block indices must be pairwise distinct")

    def to_json(self) -> str:
        payload = {
            "version": self.version,
            "block_size": self.block_size,
            "wavelet": self.wavelet,
            "graph": self.graph,
            "wm_width": self.wm_width,
            "wm_height": self.wm_height,
            "entries": [
                {"block": e.block, "alpha": e.alpha, "s_h": e.s_h} for e in self.entries
            ],
        }
        return json.dumps(payload, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "WatermarkKey":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise KeyFormatError(f"key is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise KeyFormatError("key must be a JSON object")
        version = payload.get("version")
        if version != KEY_VERSION:
            raise KeyFormatError(f"unsupported key version {version!r}; expected {KEY_VERSION}")
        try:
            entries = tuple(
                KeyEntry(block=int(e["block"]), alpha=float(e["alpha"]), s_h=float(e["s_h"]))
                for e in payload["entries"]
            )
            key = cls(
                entries=entries,
                wm_width=int(payload["wm_width"]),
                wm_height=int(payload["wm_height"]),
                block_size=int(payload["block_size"]),
                wavelet=str(payload["wavelet"]),
                graph=str(payload["graph"]),
            )
        except KeyError as exc:
            raise KeyFormatError(f"key is missing field {exc.args[0]!r}") from exc
        except (TypeError, ValueError) as exc:
            raise KeyFormatError(f"malformed key: {exc}") from exc
        return key

    def save(self, path: str) -> None:
        data = self.to_json().encode("utf-8")
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".json")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(data)
            os.replace(tmp_path, path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise

    @classmethod
    def load(cls, path: str) -> "WatermarkKey":
        with open(path, "r", encoding="utf-8") as handle:
            try:
                text = handle.read()
            except UnicodeDecodeError as exc:
                raise KeyFormatError(f"key is not a text file: {exc}") from exc
        return cls.from_json(text)


def embedding_channel(image: RasterImage) -> int:
    """The channel carrying the watermark: blue for RGB, the only plane for grayscale."""
    return BLUE if image.channels == 3 else 0


def _gather_blocks(plane: Plane, grid: BlockGrid, indices: np.ndarray) -> np.ndarray:
    """Stack the addressed blocks as (len(indices), bs, bs). Indices must be validated."""
    bs = grid.block_size
    tiles = plane[: grid.blocks_y * bs, : grid.blocks_x * bs].reshape(
        grid.blocks_y, bs, grid.blocks_x, bs
    ).swapaxes(1, 2)
    return tiles[indices // grid.blocks_x, indices % grid.blocks_x].astype(np.float64)


def _scatter_blocks(plane: Plane, grid: BlockGrid, indices: np.ndarray, blocks: np.ndarray) -> Plane:
    """Copy the plane and write the given blocks at the addressed positions."""
    out = np.array(plane, dtype=np.float64)
    bs = grid.block_size
    rows = (indices // grid.blocks_x) * bs
    cols = (indices % grid.blocks_x) * bs
    for j in range(len(indices)):
        out[rows[j] : rows[j] + bs, cols[j] : cols[j] + bs] = blocks[j]
    return out


def _analyze(blocks: np.ndarray, graph: GraphSpec) -> tuple[DwtSubbands, SvdTriple]:
    """Run the analysis cascade on (..., bs, bs) blocks: Haar, graph transform, SVD."""
    sub = dwt2_haar(blocks)
    return sub, svd(gbt2_forward(sub.ll, graph))


def _modulate(blocks: np.ndarray, bits, alphas, graph: GraphSpec):
    """Shift the largest singular value of each block per its bit; return the
    rebuilt spatial blocks and the original largest singular values."""
    sub, trip = _analyze(blocks, graph)
    s_host = np.array(trip.s[..., 0])
    s_mod = trip.s.copy()
    # A 0 bit subtracts alpha but may not push the singular value negative.
    s_mod[..., 0] = np.where(np.asarray(bits) == 1, s_host + alphas, np.maximum(s_host - alphas, 0.0))
    coeffs = svd_reconstruct(SvdTriple(trip.u, s_mod, trip.v))
    rebuilt = idwt2_haar(DwtSubbands(gbt2_inverse(coeffs, graph), sub.lh, sub.hl, sub.hh))
    return rebuilt, s_host


def _measure(blocks: np.ndarray, graph: GraphSpec) -> np.ndarray:
    """Largest singular value of the cascade for each (..., bs, bs) block."""
    _, trip = _analyze(blocks, graph)
    return trip.s[..., 0]


def embed_bit(block: Plane, bit: int, alpha: float, graph: GraphSpec) -> tuple[Plane, float]:
    """Embed one bit into one block; returns the rebuilt block (unquantized) and s_h."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    rebuilt, s_host = _modulate(np.asarray(block, dtype=np.float64), bit, alpha, graph)
    return rebuilt, float(s_host)


def extract_bit(block: Plane, s_h: float, graph: GraphSpec) -> int:
    """Recover one bit: 1 when the block's largest singular value exceeds s_h."""
    s_w = _measure(np.asarray(block, dtype=np.float64), graph)
    return int(s_w > s_h)


def _validate_assignment(
    grid: BlockGrid, watermark: WatermarkBits, assignment
) -> tuple[np.ndarray, np.ndarray]:
    pairs = list(assignment)
    if len(pairs) != watermark.count:
        raise ValueError(
            f"assignment covers {len(pairs)} blocks but the watermark has {watermark.count} bits"
        )
    if watermark.count > grid.block_count:
        raise CapacityError(
            f"watermark needs {watermark.count} blocks but the host grid has {grid.block_count}"
        )
    blocks = np.array([int(b) for b, _ in pairs], dtype=np.int64)
    alphas = np.array([float(a) for _, a in pairs], dtype=np.float64)
    if len(np.unique(blocks)) != len(blocks):
        raise ValueError("assignment block indices must be pairwise distinct")
    if blocks.min() < 0 or blocks.max() >= grid.block_count:
        raise ValueError(
            f"block indices must lie in [0, {grid.block_count}), got range "
            f"[{blocks.min()}, {blocks.max()}]"
        )
    if not (alphas > 0).all():
        raise ValueError("every alpha must be positive")
    return blocks, alphas


def embed(
    host: RasterImage,
    watermark: WatermarkBits,
    assignment,
    graph: GraphSpec,
) -> tuple[RasterImage, WatermarkKey]:
    """Embed every watermark bit per the (block, alpha) assignment.

    Bits are consumed row-major; assignment order defines which block carries
    which bit. Only the addressed blocks of the embedding channel change, and
    the result is quantized to 8 bits in one pass. Returns the watermarked
    image and the extraction key.
    """
    block_size = 2 * graph.size
    plane = extract_channel(host, embedding_channel(host))
    grid = BlockGrid.for_plane(plane, block_size)
    blocks_idx, alphas = _validate_assignment(grid, watermark, assignment)
    bits = watermark.flat()
    gathered = _gather_blocks(plane, grid, blocks_idx)
    rebuilt, s_host = _modulate(gathered, bits, alphas, graph)
    plane_out = _scatter_blocks(plane, grid, blocks_idx, rebuilt)
    watermarked = replace_channel(host, embedding_channel(host), plane_out)
    entries = tuple(
        KeyEntry(block=int(blocks_idx[j]), alpha=float(alphas[j]), s_h=float(s_host[j]))
        for j in range(len(blocks_idx))
    )
    key = WatermarkKey(
        entries=entries,
        wm_width=watermark.width,
        wm_height=watermark.height,
        block_size=block_size,
        graph=graph.kind,
    )
    return watermarked, key


def extract(image: RasterImage, key: WatermarkKey, graph: GraphSpec) -> WatermarkBits:
    """Semi-blind extraction: recover each bit by comparing the block's largest
    singular value against the key's stored host value."""
    if graph.kind != key.graph:
        raise ValueError(f"graph kind {graph.kind!r} does not match key ({key.graph!r})")
    if 2 * graph.size != key.block_size:
        raise ValueError(
            f"graph size {graph.size} does not fit key block size {key.block_size}"
        )
    plane = extract_channel(image, embedding_channel(image))
    try:
        grid = BlockGrid.for_plane(plane, key.block_size)
    except ValueError as exc:
        raise KeyFormatError(f"image too small for key: {exc}") from exc
    blocks_idx = np.array([e.block for e in key.entries], dtype=np.int64)
    if blocks_idx.max() >= grid.block_count:
        raise KeyFormatError(
            f"key addresses block {blocks_idx.max()} but the image grid has "
            f"{grid.block_count} blocks"
        )
    s_host = np.array([e.s_h for e in key.entries], dtype=np.float64)
    s_w = _measure(_gather_blocks(plane, grid, blocks_idx), graph)
    bits = (s_w > s_host).astype(np.uint8)
    return WatermarkBits(bits.reshape(key.wm_height, key.wm_width))
