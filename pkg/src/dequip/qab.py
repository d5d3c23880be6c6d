"""Single-particle quantum adaptive basis (QAB) baseline.

One Hamiltonian per tile, built on a Gaussian-smoothed copy of the image,
with the raw tile projected on its ``keep`` lowest-energy eigenvectors.
No inter-patch interaction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import Patch, aggregate_patches, as_image, image_patches, patch_grid
from .errors import CapacityError, ValidationError
from .spectral import eigh_smallest, laplacian_stencil

MAX_TILE = 96


@dataclass(frozen=True)
class QabParams:
    """``tile_side=None`` treats the whole image as one tile (if it fits the cap)."""

    beta: float
    smooth_sigma: float = 0.0
    keep: int = 1
    tile_side: int | None = None

    def __post_init__(self):
        if not self.beta > 0:
            raise ValidationError(f"beta must be positive, got {self.beta}")
        if self.smooth_sigma < 0:
            raise ValidationError(f"smooth_sigma must be >= 0, got {self.smooth_sigma}")
        if self.tile_side is not None:
            if self.tile_side < 1:
                raise ValidationError(f"tile_side must be >= 1, got {self.tile_side}")
            if self.tile_side > MAX_TILE:
                raise CapacityError(f"tile side {self.tile_side} exceeds the dense solver cap {MAX_TILE}")
            if not 1 <= self.keep <= self.tile_side ** 2:
                raise ValidationError(f"keep must be in [1, {self.tile_side ** 2}], got {self.keep}")
        elif self.keep < 1:
            raise ValidationError(f"keep must be >= 1, got {self.keep}")


def gaussian_kernel(sigma: float) -> np.ndarray:
    radius = int(math.ceil(3 * sigma))
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (t / sigma) ** 2)
    return k / k.sum()


def gaussian_smooth(image, sigma: float) -> np.ndarray:
    """Separable Gaussian blur, radius ceil(3 sigma).

    At the borders the truncated kernel is renormalised to unit sum, so flat
    images stay flat.
    """
    img = as_image(image)
    if sigma < 0:
        raise ValidationError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img.copy()
    k = gaussian_kernel(sigma)
    num = img
    den = np.ones_like(img)
    for axis in (0, 1):
        num = ndimage.correlate1d(num, k, axis=axis, mode="constant", cval=0.0)
        den = ndimage.correlate1d(den, k, axis=axis, mode="constant", cval=0.0)
    return num / den


def qab_denoise(image, params: QabParams) -> np.ndarray:
    img = as_image(image)
    h, w = img.shape
    tile = params.tile_side
    if tile is None:
        if h != w:
            raise ValidationError("whole-image QAB needs a square image; set tile_side")
        tile = h
    if tile > MAX_TILE:
        raise CapacityError(f"tile side {tile} exceeds the dense solver cap {MAX_TILE}")
    if tile > min(h, w):
        raise ValidationError(f"tile side {tile} larger than the {w}x{h} image")
    if params.keep > tile * tile:
        raise ValidationError(f"keep={params.keep} exceeds tile dimension {tile * tile}")

    smooth = gaussian_smooth(img, params.smooth_sigma)
    grid = patch_grid(w, h, tile, tile)
    raw = image_patches(img, grid.positions, tile)
    pots = image_patches(smooth, grid.positions, tile)
    lap = params.beta * laplacian_stencil(tile)
    diag = np.arange(tile * tile)
    out = []
    # one tile at a time: large tiles are memory heavy
    for y, v, origin in zip(raw, pots, grid.positions):
        ham = lap.copy()
        ham[diag, diag] += v.reshape(-1)
        _, vecs = eigh_smallest(ham, params.keep)
        rec = vecs @ (vecs.T @ y.reshape(-1))
        out.append(Patch(rec.reshape(tile, tile), origin))
    return aggregate_patches(out, w, h)
