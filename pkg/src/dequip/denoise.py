"""Patch-wise denoising with interaction-adapted Schrodinger bases.

For every target patch the effective potential (patch + interaction field)
defines a Hamiltonian; the noisy patch is projected on its ``d`` lowest
energy eigenvectors and rebuilt from those coefficients. Overlapping
reconstructions are averaged.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import Origin, Patch, aggregate_patches, as_image, extract_patch, image_patches, patch_grid
from .errors import ValidationError
from .interaction import check_window, collect_neighbors, effective_potential, interaction_image, total_interaction
from .spectral import EigenBasis, build_hamiltonian, eigendecompose, eigh_smallest, laplacian_stencil

# fixed so results do not depend on the worker count
CHUNK = 256


@dataclass(frozen=True)
class DenoiseParams:
    """Hyperparameters consumed by :func:`denoise_image`.

    ``target_stride=None`` means ``max(1, patch_side // 2)``.
    """

    patch_side: int
    window_side: int
    p: float
    d: int
    f_factor: float
    target_stride: int | None = None
    neighbor_stride: int = 1

    def __post_init__(self):
        if self.patch_side < 1:
            raise ValidationError(f"patch_side must be >= 1, got {self.patch_side}")
        check_window(self.patch_side, self.window_side)
        if not 1 <= self.d <= self.patch_side ** 2:
            raise ValidationError(f"d must be in [1, {self.patch_side ** 2}], got {self.d}")
        if self.p < 0 or not np.isfinite(self.p):
            raise ValidationError(f"p must be non-negative, got {self.p}")
        if not self.f_factor > 0 or not np.isfinite(self.f_factor):
            raise ValidationError(f"f_factor must be positive, got {self.f_factor}")
        if self.target_stride is None:
            object.__setattr__(self, "target_stride", max(1, self.patch_side // 2))
        if self.target_stride < 1 or self.neighbor_stride < 1:
            raise ValidationError("strides must be >= 1")
        if self.target_stride > self.patch_side:
            raise ValidationError(f"target_stride {self.target_stride} exceeds patch side {self.patch_side}")

    def with_(self, **changes) -> "DenoiseParams":
        return replace(self, **changes)


def patch_beta(values: np.ndarray, f_factor: float) -> np.ndarray:
    """Kinetic coefficient ``f_factor * (max - min)`` of each patch.

    ``values`` is (..., side, side). Flat patches fall back to ``f_factor``.
    """
    spread = values.max(axis=(-2, -1)) - values.min(axis=(-2, -1))
    return f_factor * np.where(spread > 0, spread, 1.0)


def project(patch, basis: EigenBasis) -> np.ndarray:
    """Coefficients ``<patch, psi_k>``; ``patch`` is a :class:`Patch` or a flat vector."""
    y = patch.flat if isinstance(patch, Patch) else np.asarray(patch, dtype=np.float64).reshape(-1)
    if y.size != basis.dim:
        raise ValidationError(f"patch has {y.size} pixels, basis dim is {basis.dim}")
    return basis.vectors.T @ y


def reconstruct(coeffs, basis: EigenBasis, d: int | None = None, origin: Origin = (0, 0)) -> Patch:
    """Rebuild a patch from its first ``d`` coefficients."""
    coeffs = np.asarray(coeffs, dtype=np.float64).reshape(-1)
    d = coeffs.size if d is None else int(d)
    if not 1 <= d <= min(len(basis), coeffs.size):
        raise ValidationError(f"d must be in [1, {min(len(basis), coeffs.size)}], got {d}")
    return Patch(basis.vectors[:, :d] @ coeffs[:d], origin)


def patch_basis(image, target_origin: Origin, params: DenoiseParams) -> EigenBasis:
    """Adaptive basis (``d`` lowest eigenpairs) of one target patch."""
    nbhd = collect_neighbors(image, target_origin, params.patch_side, params.window_side,
                             params.neighbor_stride)
    veff = effective_potential(nbhd.target, total_interaction(nbhd, params.p))
    beta = float(patch_beta(nbhd.target.values, params.f_factor))
    return eigendecompose(build_hamiltonian(veff, beta), params.d)


def denoise_patch(image, target_origin: Origin, params: DenoiseParams) -> Patch:
    """Denoise a single patch, going through the public per-patch operations."""
    img = as_image(image)
    target = extract_patch(img, target_origin, params.patch_side)
    basis = patch_basis(img, target_origin, params)
    return reconstruct(project(target, basis), basis, params.d, target.origin)


def _denoise_chunk(noisy: np.ndarray, potentials: np.ndarray, betas: np.ndarray,
                   lap: np.ndarray, d: int) -> np.ndarray:
    n, side, _ = noisy.shape
    ham = betas[:, None, None] * lap
    diag = np.arange(side * side)
    ham[:, diag, diag] += potentials.reshape(n, -1)
    _, vecs = eigh_smallest(ham, d)
    y = noisy.reshape(n, -1, 1)
    coeffs = np.swapaxes(vecs, 1, 2) @ y
    return (vecs @ coeffs).reshape(n, side, side)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("DEQUIP_THREADS", "1")))
    except ValueError:
        return 1


def denoise_image(image, params: DenoiseParams, threads: int | None = None) -> np.ndarray:
    """Denoise a whole image.

    Args:
        image: 2-D array on the [0, 255] scale.
        params: hyperparameters, see :class:`DenoiseParams`.
        threads: worker threads for the eigen-decompositions; the output is
            identical for any value. Defaults to ``$DEQUIP_THREADS`` or 1.
    """
    img = as_image(image)
    h, w = img.shape
    side = params.patch_side
    grid = patch_grid(w, h, side, params.target_stride)
    veff = img + interaction_image(img, side, params.window_side, params.p, params.neighbor_stride)
    noisy = image_patches(img, grid.positions, side)
    pots = image_patches(veff, grid.positions, side)
    betas = patch_beta(noisy, params.f_factor)
    lap = laplacian_stencil(side)

    bounds = [(i, min(i + CHUNK, len(grid))) for i in range(0, len(grid), CHUNK)]

    def work(b):
        lo, hi = b
        return _denoise_chunk(noisy[lo:hi], pots[lo:hi], betas[lo:hi], lap, params.d)

    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(bounds) == 1:
        parts = [work(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, bounds))
    recon = np.concatenate(parts, axis=0)
    return aggregate_patches((Patch(v, o) for v, o in zip(recon, grid.positions)), w, h)
