"""The three block transforms: one-level 2D Haar wavelet, a path-graph spectral
transform, and small-matrix SVD.

Every function accepts stacked inputs (..., n, n) and applies the transform to
the trailing two axes, so a whole batch of blocks goes through one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import Plane

PATH_UNIFORM = "path-uniform"
PATH_ADAPTIVE = "path-adaptive"
GRAPH_KINDS = (PATH_UNIFORM, PATH_ADAPTIVE)

# Components smaller than this are treated as zero when fixing basis-vector signs.
_SIGN_EPS = 1e-12


@dataclass(frozen=True)
class DwtSubbands:
    """One analysis level: approximation ll plus detail bands, each (n/2, n/2).

    lh holds horizontal detail (low-pass along rows, high-pass down columns),
    hl the transpose arrangement, hh the diagonal detail.
    """

    ll: Plane
    lh: Plane
    hl: Plane
    hh: Plane

    def __post_init__(self) -> None:
        shape = np.shape(self.ll)
        for name in ("lh", "hl", "hh"):
            if np.shape(getattr(self, name)) != shape:
                raise ValueError("all four sub-bands must share dimensions")


def dwt2_haar(block: Plane) -> DwtSubbands:
    """Orthonormal one-level 2D Haar analysis of an even-sized square block.

    Filters (1/sqrt2, 1/sqrt2) and (1/sqrt2, -1/sqrt2) with downsampling by 2,
    applied along rows then columns; energy is conserved exactly.
    """
    block = np.asarray(block, dtype=np.float64)
    n = block.shape[-1]
    if block.shape[-2] != n:
        raise ValueError(f"expected square blocks, got {block.shape[-2:]}")
    if n < 2 or n % 2 != 0:
        raise ValueError(f"block side must be even and >= 2, got {n}")
    a = block[..., 0::2, 0::2]
    b = block[..., 0::2, 1::2]
    c = block[..., 1::2, 0::2]
    d = block[..., 1::2, 1::2]
    # Two cascaded 1/sqrt2 stages give the factor 1/2.
    return DwtSubbands(
        ll=(a + b + c + d) / 2.0,
        lh=(a + b - c - d) / 2.0,
        hl=(a - b + c - d) / 2.0,
        hh=(a - b - c + d) / 2.0,
    )


def idwt2_haar(subbands: DwtSubbands) -> Plane:
    """Exact synthesis inverse of dwt2_haar."""
    ll = np.asarray(subbands.ll, dtype=np.float64)
    lh = np.asarray(subbands.lh, dtype=np.float64)
    hl = np.asarray(subbands.hl, dtype=np.float64)
    hh = np.asarray(subbands.hh, dtype=np.float64)
    half = ll.shape[-1]
    if ll.shape[-2] != half:
        raise ValueError(f"expected square sub-bands, got {ll.shape[-2:]}")
    out_shape = ll.shape[:-2] + (2 * half, 2 * half)
    block = np.empty(out_shape, dtype=np.float64)
    block[..., 0::2, 0::2] = (ll + lh + hl + hh) / 2.0
    block[..., 0::2, 1::2] = (ll + lh - hl - hh) / 2.0
    block[..., 1::2, 0::2] = (ll - lh + hl - hh) / 2.0
    block[..., 1::2, 1::2] = (ll - lh - hl + hh) / 2.0
    return block


def _fix_column_signs(matrix: np.ndarray) -> np.ndarray:
    """Flip each column so its first component larger than _SIGN_EPS is positive."""
    out = matrix.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nonzero = np.flatnonzero(np.abs(col) > _SIGN_EPS)
        if nonzero.size and col[nonzero[0]] < 0:
            out[:, j] = -col
    return out


@dataclass(frozen=True)
class GraphSpec:
    """A weighted path graph over N samples and its Laplacian eigenbasis.

    basis columns are eigenvectors ordered by ascending eigenvalue, each with
    a fixed sign so the decomposition is reproducible bit for bit.
    """

    size: int
    kind: str
    adjacency: np.ndarray
    degree: np.ndarray
    laplacian: np.ndarray
    eigenvalues: np.ndarray
    basis: np.ndarray

    def __post_init__(self) -> None:
        for name in ("adjacency", "degree", "laplacian", "eigenvalues", "basis"):
            arr = getattr(self, name)
            arr.setflags(write=False)


def build_graph(size: int, kind: str = PATH_UNIFORM, signal: np.ndarray | None = None) -> GraphSpec:
    """Build a path graph over `size` vertices and eigendecompose its Laplacian.

    kind "path-uniform" weights every edge 1; "path-adaptive" weights edge
    (i, i+1) as 1 / (1 + |signal[i] - signal[i+1]|) and requires a signal of
    matching length. Eigenvalues come back ascending; eigenvector signs are
    normalized so repeated builds agree exactly.
    """
    if size < 2:
        raise ValueError(f"graph needs at least 2 vertices, got {size}")
    if kind not in GRAPH_KINDS:
        raise ValueError(f"unknown graph kind {kind!r}; expected one of {GRAPH_KINDS}")
    if kind == PATH_ADAPTIVE:
        if signal is None:
            raise ValueError("path-adaptive graph requires a signal")
        signal = np.asarray(signal, dtype=np.float64).ravel()
        if signal.size != size:
            raise ValueError(f"signal length {signal.size} does not match graph size {size}")
        weights = 1.0 / (1.0 + np.abs(np.diff(signal)))
    else:
        weights = np.ones(size - 1, dtype=np.float64)

    adjacency = np.zeros((size, size), dtype=np.float64)
    idx = np.arange(size - 1)
    adjacency[idx, idx + 1] = weights
    adjacency[idx + 1, idx] = weights
    degree = np.diag(adjacency.sum(axis=1))
    laplacian = degree - adjacency
    eigenvalues, vectors = np.linalg.eigh(laplacian)
    basis = _fix_column_signs(vectors)
    return GraphSpec(
        size=size,
        kind=kind,
        adjacency=adjacency,
        degree=degree,
        laplacian=laplacian,
        eigenvalues=eigenvalues,
        basis=basis,
    )


def _check_graph_block(block: np.ndarray, graph: GraphSpec) -> np.ndarray:
    block = np.asarray(block, dtype=np.float64)
    n = graph.size
    if block.shape[-2:] != (n, n):
        raise ValueError(f"block shape {block.shape[-2:]} does not match graph size {n}")
    return block


def gbt2_forward(block: Plane, graph: GraphSpec) -> Plane:
    """Project a block onto the graph eigenbasis, rows first then columns."""
    block = _check_graph_block(block, graph)
    return graph.basis.T @ block @ graph.basis


def gbt2_inverse(coeffs: Plane, graph: GraphSpec) -> Plane:
    """Exact inverse of gbt2_forward for the same graph."""
    coeffs = _check_graph_block(coeffs, graph)
    return graph.basis @ coeffs @ graph.basis.T


@dataclass(frozen=True)
class SvdTriple:
    """Full SVD factors: u (..., m, m), s (..., k) descending, v (..., n, n).

    v holds right singular vectors as columns, so the product
    u @ diag(s) @ v.T reconstructs the input.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def _leading_sign(col: np.ndarray) -> np.ndarray:
    """Sign (+1/-1, shape (..., 1)) of the first entry of col exceeding _SIGN_EPS."""
    first = np.argmax(np.abs(col) > _SIGN_EPS, axis=-1)
    lead = np.take_along_axis(col, first[..., np.newaxis], axis=-1)
    return np.where(lead < 0.0, -1.0, 1.0)


def svd(matrix: Plane) -> SvdTriple:
    """Full SVD with descending singular values and deterministic signs.

    Each singular-vector pair (u_i, v_i) is flipped together so the first
    component of u_i larger than 1e-12 in magnitude is positive; columns past
    min(m, n) are normalized the same way independently (they carry no energy).
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix entries must be finite")
    u, s, vh = np.linalg.svd(matrix, full_matrices=True)
    v = np.swapaxes(vh, -1, -2).copy()
    u = u.copy()
    k = s.shape[-1]
    for i in range(u.shape[-1]):
        sign = _leading_sign(u[..., :, i])
        u[..., :, i] *= sign
        if i < k:
            v[..., :, i] *= sign
    for i in range(k, v.shape[-1]):
        v[..., :, i] *= _leading_sign(v[..., :, i])
    return SvdTriple(u=u, s=s, v=v)


def svd_reconstruct(triple: SvdTriple) -> Plane:
    """Multiply the factors back together: u @ diag(s) @ v.T."""
    u = np.asarray(triple.u, dtype=np.float64)
    s = np.asarray(triple.s, dtype=np.float64)
    v = np.asarray(triple.v, dtype=np.float64)
    k = s.shape[-1]
    if u.shape[-1] < k or v.shape[-1] < k:
        raise ValueError("singular value count exceeds factor dimensions")
    scaled = u[..., :, :k] * s[..., np.newaxis, :]
    return scaled @ np.swapaxes(v[..., :, :k], -1, -2)
