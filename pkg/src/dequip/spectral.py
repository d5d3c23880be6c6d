"""Patch Hamiltonians, their eigen-decomposition, and the IPR diagnostic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Patch, as_image
from .errors import NumericalError, ValidationError


def laplacian_stencil(side: int) -> np.ndarray:
    """Negative 4-neighbour Laplacian on a ``side`` x ``side`` grid, zero padded.

    Diagonal is 4 everywhere, -1 between horizontally or vertically adjacent
    pixels. Row ends do not couple to the start of the next row.
    """
    n = side * side
    lap = 4.0 * np.eye(n)
    idx = np.arange(n)
    right = idx[(idx % side) != side - 1]
    lap[right, right + 1] = -1.0
    lap[right + 1, right] = -1.0
    down = idx[idx < n - side]
    lap[down, down + side] = -1.0
    lap[down + side, down] = -1.0
    return lap


def build_hamiltonian(potential, beta: float) -> np.ndarray:
    """Dense Hamiltonian ``diag(V) + beta * L`` for a square potential patch.

    Args:
        potential: :class:`Patch`, (side, side) array or row-major vector.
        beta: kinetic coefficient (hbar^2 / 2m), must be positive.
    """
    values = potential.values if isinstance(potential, Patch) else Patch(potential).values
    if not np.all(np.isfinite(values)):
        raise ValidationError("potential contains NaN or Inf")
    if not beta > 0 or not np.isfinite(beta):
        raise ValidationError(f"beta must be positive and finite, got {beta}")
    h = beta * laplacian_stencil(values.shape[0])
    h[np.diag_indices_from(h)] += values.reshape(-1)
    return h


@dataclass(frozen=True)
class EigenBasis:
    """Ascending eigenpairs; column ``k`` of ``vectors`` pairs with ``values[k]``."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def __len__(self) -> int:
        return self.values.shape[0]


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column (last axis pair) so its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vectors), axis=-2)
    picked = np.take_along_axis(vectors, idx[..., None, :], axis=-2)
    signs = np.where(picked < 0, -1.0, 1.0)
    return vectors * signs


def _check_residual(h: np.ndarray, vals: np.ndarray, vecs: np.ndarray) -> None:
    scale = 1.0 + np.linalg.norm(h, axis=(-2, -1))
    res = np.linalg.norm(h @ vecs - vecs * vals[..., None, :], axis=-2).max(axis=-1)
    bad = res > 1e-8 * scale
    if np.any(bad):
        worst = float(np.max(res / scale))
        raise NumericalError(f"eigen-residual {worst:.3e} exceeds tolerance", residual=worst)


def eigh_smallest(h: np.ndarray, k: int, check: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Batched ``k`` smallest eigenpairs of symmetric matrices.

    ``h`` may carry leading batch dimensions. Returns ``(values, vectors)``
    with sign-normalised eigenvector columns.
    """
    n = h.shape[-1]
    if not 1 <= k <= n:
        raise ValidationError(f"k must be in [1, {n}], got {k}")
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver did not converge: {exc}") from exc
    vals = vals[..., :k]
    vecs = fix_signs(vecs[..., :k])
    if check:
        _check_residual(h, vals, vecs)
    return vals, vecs


def eigendecompose(h, k: int | None = None) -> EigenBasis:
    """The ``k`` algebraically smallest eigenpairs of a symmetric matrix.

    Eigenvectors are orthonormal and sign-fixed so that the largest-magnitude
    entry of each is positive. Raises :class:`NumericalError` if LAPACK fails
    or the residual check does not hold.
    """
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {h.shape}")
    if not np.array_equal(h, h.T):
        raise ValidationError("matrix is not symmetric")
    k = h.shape[0] if k is None else int(k)
    vals, vecs = eigh_smallest(h, k, check=True)
    return EigenBasis(vals, vecs)


def ipr(v) -> float:
    """Inverse participation ratio ``1 / sum(v_i^4)`` of a unit vector."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValidationError("IPR of the zero vector is undefined")
    if abs(norm - 1.0) > 1e-8:
        raise ValidationError(f"IPR needs a unit vector, got norm {norm}")
    return float(1.0 / np.sum(v ** 4))


def average_ipr(image, side: int, beta: float, max_patches: int | None = None) -> float:
    """Mean IPR over every eigenvector of the non-overlapping patch Hamiltonians.

    The raw patch intensities are the potentials (no interaction term).
    ``max_patches`` keeps an evenly spaced subset of the tiles, which is the
    only practical option for large sides.
    """
    img = as_image(image)
    h, w = img.shape
    if side < 1 or side > min(h, w):
        raise ValidationError(f"patch side {side} invalid for {w}x{h} image")
    positions = [(r, c) for r in range(0, h - side + 1, side) for c in range(0, w - side + 1, side)]
    if max_patches is not None and max_patches < len(positions):
        if max_patches < 1:
            raise ValidationError("max_patches must be >= 1")
        pick = np.linspace(0, len(positions) - 1, max_patches).round().astype(int)
        positions = [positions[i] for i in pick]
    lap = laplacian_stencil(side) * beta
    diag = np.arange(side * side)
    # batch small Hamiltonians, keep memory bounded for large ones
    chunk = max(1, 2 ** 22 // (side ** 4))
    total = 0.0
    for lo in range(0, len(positions), chunk):
        block = positions[lo:lo + chunk]
        ham = np.broadcast_to(lap, (len(block),) + lap.shape).copy()
        ham[:, diag, diag] += np.stack([img[r:r + side, c:c + side].reshape(-1) for r, c in block])
        try:
            _, vecs = np.linalg.eigh(ham)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigensolver failed on a patch near {block[0]}: {exc}") from exc
        total += float(np.sum(1.0 / np.sum(vecs ** 4, axis=-2)))
    return total / (len(positions) * side * side)
